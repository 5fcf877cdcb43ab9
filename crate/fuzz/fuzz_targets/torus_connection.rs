//! Decode untrusted bytes as a TorusConnection and evaluate both torus
//! residual systems against a constant metric of matching shape.

#![no_main]

use libfuzzer_sys::fuzz_target;
use zn_geometry::torus::{
    torus_compat_residual, torus_cotorsion_residual, TorusConnection, TorusMetric,
};

fuzz_target!(|data: &[u8]| {
    let Ok(conn) = serde_json::from_slice::<TorusConnection>(data) else {
        return;
    };
    let (n, m) = conn.moduli();
    assert!(n > 4 && m > 4);
    let text = serde_json::to_string(&conn).unwrap();
    let back: TorusConnection = serde_json::from_str(&text).unwrap();
    assert_eq!(conn, back);
    if n <= 12 && m <= 12 {
        let metric = TorusMetric::constant(n, m, -1.0).unwrap();
        let compat = torus_compat_residual(&conn, &metric).unwrap();
        assert_eq!(compat.len(), 36);
        let cotorsion = torus_cotorsion_residual(&conn, &metric).unwrap();
        assert_eq!(cotorsion.len(), 16);
    }
});
