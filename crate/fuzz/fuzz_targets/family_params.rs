//! Decode untrusted bytes as FamilyParams and round-trip the result.

#![no_main]

use libfuzzer_sys::fuzz_target;
use zn_geometry::solver::FamilyParams;

fuzz_target!(|data: &[u8]| {
    let Ok(params) = serde_json::from_slice::<FamilyParams>(data) else {
        return;
    };
    let text = serde_json::to_string(&params).unwrap();
    let back: FamilyParams = serde_json::from_str(&text).unwrap();
    assert_eq!(params, back);
});
