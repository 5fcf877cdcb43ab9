//! Decode untrusted bytes as a OneForm and exercise the calculus on it.

#![no_main]

use libfuzzer_sys::fuzz_target;
use zn_geometry::calculus::{d_one_form, star, OneForm};

fuzz_target!(|data: &[u8]| {
    let Ok(omega) = serde_json::from_slice::<OneForm>(data) else {
        return;
    };
    assert!(omega.modulus() > 4);
    let text = serde_json::to_string(&omega).unwrap();
    let back: OneForm = serde_json::from_str(&text).unwrap();
    assert_eq!(omega, back);
    // star is an involution on anything decodable
    assert!(star(&star(&omega)).sub(&omega).max_abs() <= 1e-12 * (1.0 + omega.max_abs()));
    let _ = d_one_form(&omega);
});
