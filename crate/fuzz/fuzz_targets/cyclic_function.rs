//! Decode untrusted bytes as a CyclicFunction and round-trip the result.

#![no_main]

use libfuzzer_sys::fuzz_target;
use zn_geometry::cyclic::CyclicFunction;

fuzz_target!(|data: &[u8]| {
    let Ok(f) = serde_json::from_slice::<CyclicFunction>(data) else {
        return;
    };
    // decoded values satisfy every constructor invariant (finite, N >= 2)
    assert!(f.modulus() >= 2);
    assert_eq!(f.values().len(), f.modulus());
    let text = serde_json::to_string(&f).unwrap();
    let back: CyclicFunction = serde_json::from_str(&text).unwrap();
    assert_eq!(f, back);
    // a few total operations must never panic
    let _ = f.translate(-3).translate(3);
    let _ = f.conj();
    let _ = f.period_product();
});
