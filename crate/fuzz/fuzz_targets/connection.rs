//! Decode untrusted bytes as a Connection and run the residual evaluators.

#![no_main]

use libfuzzer_sys::fuzz_target;
use zn_geometry::connection::{
    star_compat_residual, torsion_residual, Connection, GeneralSigma,
};
use zn_geometry::curvature::{riemann_closed, riemann_direct};

fuzz_target!(|data: &[u8]| {
    let Ok(conn) = serde_json::from_slice::<Connection>(data) else {
        return;
    };
    assert!(conn.modulus() > 4);
    let text = serde_json::to_string(&conn).unwrap();
    let back: Connection = serde_json::from_str(&text).unwrap();
    assert_eq!(conn, back);

    // torsion vanishes identically for the parametrized braiding
    let (p, pt) = torsion_residual(&GeneralSigma::from_connection(&conn)).unwrap();
    assert!(p.max_abs() == 0.0 || p.max_abs() <= 1e-12 * (1.0 + conn.b(zn_geometry::calculus::Gen::P).max_abs()));
    let _ = pt;
    let _ = star_compat_residual(&conn);
    if conn.modulus() <= 16 {
        let _ = riemann_direct(&conn);
        let _ = riemann_closed(&conn);
    }
});
