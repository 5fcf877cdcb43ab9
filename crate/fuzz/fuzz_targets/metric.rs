//! Decode untrusted bytes as a Metric and drive the solver on it: whatever
//! comes back must either be a typed error or a verified classification.

#![no_main]

use libfuzzer_sys::fuzz_target;
use zn_geometry::metric::Metric;
use zn_geometry::solver::{enumerate_connections, x_profile};

fuzz_target!(|data: &[u8]| {
    let Ok(metric) = serde_json::from_slice::<Metric>(data) else {
        return;
    };
    assert!(metric.modulus() > 4);
    let text = serde_json::to_string(&metric).unwrap();
    let back: Metric = serde_json::from_str(&text).unwrap();
    assert_eq!(metric, back);

    let _ = metric.contractions();
    let _ = metric.classify(1e-10);
    let _ = x_profile(&metric);
    if metric.modulus() <= 16 {
        if let Ok(classification) = enumerate_connections(&metric) {
            for sol in &classification.solutions {
                assert!(sol.plugback_residual <= 1e-10);
            }
        }
    }
});
