//! Decode untrusted bytes as a Tensor2 and round-trip the result.

#![no_main]

use libfuzzer_sys::fuzz_target;
use zn_geometry::calculus::Tensor2;

fuzz_target!(|data: &[u8]| {
    let Ok(t) = serde_json::from_slice::<Tensor2>(data) else {
        return;
    };
    assert!(t.modulus() > 4);
    let text = serde_json::to_string(&t).unwrap();
    let back: Tensor2 = serde_json::from_str(&text).unwrap();
    assert_eq!(t, back);
});
