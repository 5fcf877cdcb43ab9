//! Decode untrusted bytes as a GridFunction and round-trip the result.

#![no_main]

use libfuzzer_sys::fuzz_target;
use zn_geometry::cyclic::GridFunction;

fuzz_target!(|data: &[u8]| {
    let Ok(f) = serde_json::from_slice::<GridFunction>(data) else {
        return;
    };
    let (n, m) = f.moduli();
    assert!(n >= 2 && m >= 2);
    assert_eq!(f.values().len(), n * m);
    let text = serde_json::to_string(&f).unwrap();
    let back: GridFunction = serde_json::from_str(&text).unwrap();
    assert_eq!(f, back);
    let _ = f.translate(1, -1).translate(-1, 1);
});
