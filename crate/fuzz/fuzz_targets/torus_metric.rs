//! Decode untrusted bytes as a TorusMetric and round-trip the result.

#![no_main]

use libfuzzer_sys::fuzz_target;
use zn_geometry::torus::TorusMetric;

fuzz_target!(|data: &[u8]| {
    let Ok(metric) = serde_json::from_slice::<TorusMetric>(data) else {
        return;
    };
    let (n, m) = metric.moduli();
    assert!(n > 4 && m > 4);
    let text = serde_json::to_string(&metric).unwrap();
    let back: TorusMetric = serde_json::from_str(&text).unwrap();
    assert_eq!(metric, back);
});
