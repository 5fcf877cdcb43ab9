//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them all).

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use zn_geometry::calculus::Gen;
use zn_geometry::connection::{
    cotorsion_residual, max_residual, metric_compat_residual_closed,
    metric_compat_residual_direct, residual_summary, torsion_residual, Connection, GeneralSigma,
    CLOSED_RESIDUAL_SLOTS,
};
use zn_geometry::curvature::{
    continuous_limit_compare, convergence_order, inverse_metric, ricci_closed, ricci_generic,
    riemann_closed, riemann_direct, scala_r_stencil, scalar_closed, scalar_closed_case,
    scalar_generic, ClosedCase, Lift, Sign,
};
use zn_geometry::cyclic::CyclicFunction;
use zn_geometry::metric::{metric_from_x, Metric};
use zn_geometry::solver::{
    enumerate_connections, nonconstant_x, z2_compat_residual, CaseTag, KappaFamily,
};
use zn_geometry::torus::{
    alternating_family, alternating_identities, build_product_connection,
    constant_solution_certificate, max_torus_residual, six_equation_residuals,
    solve_constant_symmetric, torus_compat_residual, torus_cotorsion_residual,
};

const TORSION_TOL: f64 = 1e-13;
const RESIDUAL_TOL: f64 = 1e-10;
const DUAL_TOL: f64 = 1e-11;
const EXACT_TOL: f64 = 1e-13;
const FLAT_TOL: f64 = 1e-12;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn seed_metric(n: usize) -> CyclicFunction {
    CyclicFunction::constant(n, -1.0).unwrap()
}

/// Verifies one solution against the criterion-1 thresholds, returning the
/// observed (torsion, compat, cotorsion) maxima.
fn check_solution(conn: &Connection, metric: &Metric, what: &str) -> (f64, f64, f64) {
    let (tp, tpt) = torsion_residual(&GeneralSigma::from_connection(conn)).unwrap();
    let torsion = tp.max_abs().max(tpt.max_abs());
    assert!(torsion <= TORSION_TOL, "{what}: torsion {torsion:.3e}");
    let compat = max_residual(&metric_compat_residual_closed(conn, metric).unwrap());
    assert!(compat <= RESIDUAL_TOL, "{what}: compat {compat:.3e}");
    let (cp, cpt) = cotorsion_residual(conn, metric).unwrap();
    let cot = cp.max_abs().max(cpt.max_abs());
    assert!(cot <= RESIDUAL_TOL, "{what}: cotorsion {cot:.3e}");
    (torsion, compat, cot)
}

fn sample_three_kappas(family: &KappaFamily, metric: &Metric, what: &str) -> (usize, f64) {
    let pool = [
        c64(0.31, 0.0),
        c64(-0.47, 0.0),
        c64(0.23, 0.11),
        c64(0.77, 0.0),
        c64(-0.13, 0.4),
        c64(1.7, 0.0),
        c64(0.05, -0.6),
    ];
    let mut taken = 0;
    let mut worst: f64 = 0.0;
    for kappa in pool {
        if taken == 3 {
            break;
        }
        match family.sample(kappa) {
            Ok(sol) => {
                let (t, c, co) = check_solution(&sol.connection, metric, what);
                worst = worst.max(t).max(c).max(co);
                taken += 1;
            }
            Err(_) => continue, // excluded sample (vanishing denominator); try the next
        }
    }
    assert_eq!(taken, 3, "{what}: could not draw three valid kappa samples");
    (taken, worst)
}

#[test]
fn criterion_1_classification_plug_back() {
    let start = Instant::now();
    let mut families = 0usize;
    let mut worst: f64 = 0.0;
    for n in 5..=12 {
        // case II branches on a constant-ratio metric with gamma = 1.3
        let metric = Metric::constant(n, -1.0, -1.0 / 1.3).unwrap();
        let cls = enumerate_connections(&metric).unwrap();
        let mut cases: Vec<CaseTag> = cls.solutions.iter().map(|s| s.params.case).collect();
        cases.sort_by_key(|c| c.label());
        assert_eq!(
            cases,
            vec![CaseTag::IIA, CaseTag::IIB, CaseTag::IIZero],
            "N = {n}: every case II branch present"
        );
        for sol in &cls.solutions {
            let (t, c, co) =
                check_solution(&sol.connection, &metric, &format!("N={n} {:?}", sol.params.case));
            worst = worst.max(t).max(c).max(co);
            families += 1;
        }
        // the nonconstant-B branch of case II on even N (gamma = 1)
        if n % 2 == 0 {
            let metric = Metric::constant(n, -1.0, -1.0).unwrap();
            let cls = enumerate_connections(&metric).unwrap();
            let family = cls.kappa_family.expect("even N exposes the II family");
            let (taken, w) = sample_three_kappas(&family, &metric, &format!("N={n} IInonconst"));
            families += taken;
            worst = worst.max(w);
        }
        // cases I-a / I-b / I-c over every l and both phi values
        for l in 1..n {
            for phi in [0.37, 1.1] {
                let x = nonconstant_x(n, l, c64(phi, 0.0)).unwrap();
                let metric = metric_from_x(&x, &seed_metric(n)).unwrap();
                let cls = enumerate_connections(&metric).unwrap();
                let tags: Vec<CaseTag> = cls.solutions.iter().map(|s| s.params.case).collect();
                assert!(
                    tags.contains(&CaseTag::Ia) && tags.contains(&CaseTag::Ib),
                    "N={n} l={l} phi={phi}: I-a and I-b must both solve"
                );
                for sol in &cls.solutions {
                    let what = format!("N={n} l={l} phi={phi} {:?}", sol.params.case);
                    let (t, c, co) = check_solution(&sol.connection, &metric, &what);
                    worst = worst.max(t).max(c).max(co);
                    families += 1;
                }
                if (n + l) % 2 == 0 {
                    let family = cls
                        .kappa_family
                        .unwrap_or_else(|| panic!("N={n} l={l}: N+l even exposes case I-c"));
                    let (taken, w) =
                        sample_three_kappas(&family, &metric, &format!("N={n} l={l} Ic"));
                    families += taken;
                    worst = worst.max(w);
                } else {
                    assert!(cls.kappa_family.is_none(), "N={n} l={l}: N+l odd has no I-c");
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "criterion 1 runtime {:.2}s exceeds 5s",
        elapsed.as_secs_f64()
    );
    println!(
        "criterion 1 (classification plug-back): PASS — {families} solutions verified, \
         max residual {worst:.2e}, {:.2}s",
        elapsed.as_secs_f64()
    );
}

fn random_fn(rng: &mut StdRng, n: usize) -> CyclicFunction {
    CyclicFunction::from_fn(n, |_| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .unwrap()
}

fn random_nonvanishing(rng: &mut StdRng, n: usize) -> CyclicFunction {
    CyclicFunction::from_fn(n, |_| {
        Complex64::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..2.0 * PI))
    })
    .unwrap()
}

#[test]
fn criterion_2_dual_formula_equivalences() {
    let mut rng = StdRng::seed_from_u64(0x5EED0002);
    let mut worst_riemann: f64 = 0.0;
    let mut worst_compat: f64 = 0.0;
    let mut worst_ricci: f64 = 0.0;

    for trial in 0..100 {
        let n = rng.random_range(5..=10);
        let conn = Connection::new(
            random_fn(&mut rng, n),
            random_fn(&mut rng, n),
            random_fn(&mut rng, n),
            random_fn(&mut rng, n),
        )
        .unwrap();
        let direct = riemann_direct(&conn).unwrap();
        let closed = riemann_closed(&conn).unwrap();
        let dev = direct[0]
            .max_deviation(&closed[0])
            .max(direct[1].max_deviation(&closed[1]));
        assert!(dev <= DUAL_TOL, "trial {trial}: Riemann dual formulas {dev:.3e}");
        worst_riemann = worst_riemann.max(dev);
    }

    for trial in 0..100 {
        let n = rng.random_range(5..=10);
        let conn = Connection::new(
            random_fn(&mut rng, n),
            random_fn(&mut rng, n),
            random_fn(&mut rng, n),
            random_fn(&mut rng, n),
        )
        .unwrap();
        let metric = Metric::new(
            random_nonvanishing(&mut rng, n),
            random_nonvanishing(&mut rng, n),
        )
        .unwrap();
        let direct = metric_compat_residual_direct(&conn, &metric).unwrap();
        let closed = metric_compat_residual_closed(&conn, &metric).unwrap();
        let mut dev: f64 = 0.0;
        for (k, (a, b, c)) in CLOSED_RESIDUAL_SLOTS.into_iter().enumerate() {
            dev = dev.max((direct.slot(a, b, c) - &closed[k]).max_abs());
        }
        dev = dev.max(direct.slot(Gen::P, Gen::P, Gen::P).max_abs());
        dev = dev.max(direct.slot(Gen::Pt, Gen::Pt, Gen::Pt).max_abs());
        assert!(dev <= DUAL_TOL, "trial {trial}: compat dual formulas {dev:.3e}");
        worst_compat = worst_compat.max(dev);
    }

    for trial in 0..100 {
        let n = 2 * rng.random_range(3..=5); // even moduli admit the extra family
        let profile = CyclicFunction::from_fn(n, |_| c64(-rng.random_range(0.4..2.0), 0.0)).unwrap();
        let metric = Metric::new(profile.clone(), profile).unwrap();
        let lift = Lift::new(
            CyclicFunction::from_fn(n, |_| c64(rng.random_range(-1.0..1.0), 0.0)).unwrap(),
        );
        let case = match trial % 4 {
            0 => ClosedCase::A,
            1 => ClosedCase::B,
            2 => ClosedCase::C,
            _ => ClosedCase::EvenExtra {
                swap: trial % 8 >= 4,
                kappa: rng.random_range(0.1..0.45),
            },
        };
        let gamma = if matches!(case, ClosedCase::EvenExtra { .. }) {
            1.0
        } else {
            rng.random_range(0.4..2.5)
        };
        let report = scalar_closed_case(&metric, gamma, case, &lift).unwrap();
        assert!(
            report.generic_vs_closed <= DUAL_TOL,
            "trial {trial}: Ricci/scalar closed case {case:?} deviates {:.3e}",
            report.generic_vs_closed
        );
        worst_ricci = worst_ricci.max(report.generic_vs_closed);

        // also exercise the generic closed displays on fully random data
        let conn = report.connection;
        let wm = report.working_metric;
        let r_dev = ricci_generic(&conn, &wm, &lift)
            .unwrap()
            .max_deviation(&ricci_closed(&conn, &wm, &lift).unwrap());
        let s_dev = (&scalar_generic(&conn, &wm, &lift).unwrap()
            - &scalar_closed(&conn, &wm, &lift).unwrap())
            .max_abs();
        assert!(r_dev.max(s_dev) <= DUAL_TOL);
        worst_ricci = worst_ricci.max(r_dev).max(s_dev);
    }

    println!(
        "criterion 2 (dual-formula equivalences): PASS — Riemann {worst_riemann:.2e}, \
         metric compatibility {worst_compat:.2e}, Ricci/scalar {worst_ricci:.2e} \
         (100 trials each, tolerance 1e-11)"
    );
}

#[test]
fn criterion_3_exact_reference_constants() {
    let mut rng = StdRng::seed_from_u64(0x5EED0003);
    // second metric contraction is identically 2
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(5..=12);
        let metric = Metric::new(
            random_nonvanishing(&mut rng, n),
            random_nonvanishing(&mut rng, n),
        )
        .unwrap();
        let (_, second) = metric.contractions();
        let dev = second
            .approx_eq(&CyclicFunction::constant(n, 2.0).unwrap(), EXACT_TOL)
            .unwrap();
        assert!(dev.within, "second contraction deviates {:.3e}", dev.max_deviation);
        worst = worst.max(dev.max_deviation);
    }

    // c = 2 cos(pi l / N) for the f_{l,phi} family, asserted through the
    // well-conditioned recurrence residual (c - f(n)) f(n+1) - 1, and the
    // period product (-1)^l
    for (n, l, phi) in [(6usize, 2usize, 0.37), (9, 4, 1.1), (12, 7, 0.9), (7, 3, 0.5)] {
        let f = nonconstant_x(n, l, c64(phi, 0.0)).unwrap();
        let c = 2.0 * (PI * l as f64 / n as f64).cos();
        for k in 0..n as i64 {
            let dev = ((c64(c, 0.0) - f.get(k)) * f.get(k + 1) - c64(1.0, 0.0)).norm();
            assert!(dev <= EXACT_TOL, "c mismatch {dev:.3e} at N={n} l={l}");
            worst = worst.max(dev);
        }
        let expected = if l % 2 == 0 { 1.0 } else { -1.0 };
        let dev = (f.period_product() - c64(expected, 0.0)).norm();
        assert!(dev <= EXACT_TOL, "period product deviates {dev:.3e}");
        worst = worst.max(dev);
    }

    // the Z_2 worked example
    for z in [c64(2.0, 0.0), c64(-0.3, 0.7), c64(0.11, -1.9)] {
        let g0 = c64(-1.3, 0.0);
        let (r1, r2) = z2_compat_residual(g0, g0, z, c64(1.0, 0.0) / z).unwrap();
        assert!(r1.norm() <= EXACT_TOL && r2.norm() <= EXACT_TOL);
        worst = worst.max(r1.norm()).max(r2.norm());
        // G_1 = -G_0 with S_0 S_1 = -1
        let (r1, r2) = z2_compat_residual(g0, -g0, z, c64(-1.0, 0.0) / z).unwrap();
        assert!(r1.norm() <= EXACT_TOL && r2.norm() <= EXACT_TOL);
        worst = worst.max(r1.norm()).max(r2.norm());
    }

    // the unique constant torus solution
    let sol = solve_constant_symmetric();
    assert_eq!((sol.a, sol.b, sol.c1, sol.c2, sol.w), (1.0, 1.0, 1.0, 1.0, 0.0));
    for r in six_equation_residuals(sol.a, sol.b, sol.c1, sol.c2, sol.w) {
        assert!(r.abs() <= EXACT_TOL);
    }
    let certificate = constant_solution_certificate(6, 6).unwrap();
    assert!(certificate <= EXACT_TOL, "torus certificate {certificate:.3e}");
    worst = worst.max(certificate);

    println!(
        "criterion 3 (reference constants): PASS — max deviation {worst:.2e} (tolerance 1e-13)"
    );
}

#[test]
fn criterion_4_star_uniqueness() {
    // odd N: exactly three solutions, exactly one star-compatible
    let metric = Metric::constant(7, -1.0, -1.0).unwrap();
    let cls = enumerate_connections(&metric).unwrap();
    assert_eq!(cls.solutions.len(), 3);
    let kept = zn_geometry::solver::star_filter(&cls.solutions, &metric, RESIDUAL_TOL).unwrap();
    assert_eq!(kept.len(), 1, "star filter must leave exactly one solution");
    let sol = &kept[0];
    let one = CyclicFunction::one(7).unwrap();
    for g in Gen::BOTH {
        assert!(sol.connection.a(g).approx_eq(&one, FLAT_TOL).unwrap().within);
        assert!(sol.connection.b(g).approx_eq(&one, FLAT_TOL).unwrap().within);
    }

    // even N: the kappa samples of the nonconstant-B family are filtered out too
    let metric = Metric::constant(8, -1.0, -1.0).unwrap();
    let cls = enumerate_connections(&metric).unwrap();
    let mut all = cls.solutions.clone();
    let family = cls.kappa_family.unwrap();
    for kappa in [c64(0.31, 0.0), c64(-0.2, 0.1), c64(0.9, 0.0)] {
        all.push(family.sample(kappa).unwrap());
    }
    let kept = zn_geometry::solver::star_filter(&all, &metric, RESIDUAL_TOL).unwrap();
    assert_eq!(kept.len(), 1);
    assert_eq!(kept[0].params.case, CaseTag::IIZero);

    println!(
        "criterion 4 (star-compatibility uniqueness): PASS — unique solution A = B = 1 \
         on Z_7 (3 candidates) and Z_8 (3 + 3 kappa samples)"
    );
}

#[test]
fn criterion_5_flat_constant_metrics() {
    let n = 6;
    let metric = Metric::constant(n, -1.0, -1.0).unwrap();
    let lift = Lift::standard(n).unwrap();
    let mut worst: f64 = 0.0;
    for case in [
        ClosedCase::A,
        ClosedCase::B,
        ClosedCase::C,
        ClosedCase::EvenExtra {
            swap: false,
            kappa: 0.3,
        },
        ClosedCase::EvenExtra {
            swap: true,
            kappa: -0.2,
        },
    ] {
        let report = scalar_closed_case(&metric, 1.0, case, &lift).unwrap();
        let max = report.report.scalar.max_abs();
        assert!(max <= FLAT_TOL, "case {case:?}: scalar {max:.3e}");
        worst = worst.max(max);
        if let Some(stencil) = &report.scalar_stencil {
            let s = stencil.max_abs();
            assert!(s <= FLAT_TOL);
            worst = worst.max(s);
        }
    }
    println!(
        "criterion 5 (flatness of constant metrics): PASS — max |R| {worst:.2e} \
         over cases a, b, c and the even-N family (tolerance 1e-12)"
    );
}

#[test]
fn criterion_6_continuous_limit() {
    let start = Instant::now();
    let g = |t: f64| 2.0 + (2.0 * PI * t).cos();
    let rows = continuous_limit_compare(&g, &[50, 100, 200], Sign::Minus).unwrap();
    assert!(
        rows[0].max_error > rows[1].max_error && rows[1].max_error > rows[2].max_error,
        "errors must decrease monotonically: {rows:?}"
    );
    let order = convergence_order(&rows);
    assert!(order >= 1.0, "measured convergence order {order:.2} < 1");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 2.0, "runtime {:.2}s", elapsed.as_secs_f64());
    println!(
        "criterion 6 (continuous limit): PASS — errors {:.2e} > {:.2e} > {:.2e}, \
         order {order:.2}, {:.2}s",
        rows[0].max_error,
        rows[1].max_error,
        rows[2].max_error,
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_7_inverse_round_trip() {
    // completing 50-step window, round-trip on the full interior
    let target = vec![0.1; 50];
    let g = inverse_metric(&target, [-1.0, -1.0, -1.0], Sign::Minus).unwrap();
    let mut worst: f64 = 0.0;
    for (i, &t) in target.iter().enumerate() {
        worst = worst.max((scala_r_stencil(&g, i + 1, Sign::Minus) - t).abs());
    }
    assert!(worst <= 1e-10, "round trip residual {worst:.3e}");

    // random smooth targets: the identity holds on every reconstructed
    // interior point (runs may end early; |G| >= 1e-4 keeps the stencil in
    // the regime where 1e-10 absolute accuracy is meaningful)
    let mut rng = StdRng::seed_from_u64(0x5EED0007);
    for _ in 0..3 {
        let amp = rng.random_range(0.02..0.08);
        let shift = rng.random_range(-0.02..0.06);
        let target: Vec<f64> = (0..50)
            .map(|k| shift + amp * (2.0 * PI * k as f64 / 50.0).sin())
            .collect();
        let values = match inverse_metric(&target, [-1.0, -1.0, -1.0], Sign::Minus) {
            Ok(v) => v,
            Err(blow) => blow.partial,
        };
        for i in 0..values.len().saturating_sub(3) {
            if values[i..i + 4].iter().any(|v| v.abs() < 1e-4) {
                break;
            }
            let v = scala_r_stencil(&values, i + 1, Sign::Minus);
            assert!((v - target[i]).abs() <= 1e-10);
            worst = worst.max((v - target[i]).abs());
        }
    }

    // R = +0.1: oscillating (sign-alternating differences) on the tracked window
    let osc = inverse_metric(&vec![0.1; 50], [-1.0, -1.0, -1.0], Sign::Minus).unwrap();
    let diffs: Vec<f64> = osc[..13].windows(2).map(|w| w[1] - w[0]).collect();
    let alternations = diffs.windows(2).filter(|d| d[0] * d[1] < 0.0).count();
    assert!(alternations >= 5, "expected oscillation, got {alternations} alternations");

    // R = -0.05: the metric decays to zero and the blow-up exit fires
    let blow = inverse_metric(&vec![-0.05; 400], [-1.0, -1.0, -1.0], Sign::Minus).unwrap_err();
    let tail = blow.partial.last().unwrap().abs();
    assert!(tail < 1e-3, "decaying metric before blow-up, |G| = {tail:.3e}");

    println!(
        "criterion 7 (inverse round-trip): PASS — round-trip {worst:.2e}, \
         {alternations} alternations for R = +0.1, blow-up at step {} for R = -0.05",
        blow.step
    );
}

#[test]
fn criterion_8_torus_families() {
    // (N, M) = (5, 6): flat circle x case II-a with gamma = 1.3
    let flat = Connection::identity(5).unwrap();
    let m5 = Metric::constant(5, -1.0, -1.0).unwrap();
    let m6 = Metric::constant(6, -1.0, -1.0 / 1.3).unwrap();
    let iia = enumerate_connections(&m6)
        .unwrap()
        .solutions
        .into_iter()
        .find(|s| s.params.case == CaseTag::IIA)
        .unwrap();
    let (conn, metric) = build_product_connection((&flat, &m5), (&iia.connection, &m6)).unwrap();
    let worst_56 = max_torus_residual(&torus_compat_residual(&conn, &metric).unwrap())
        .max(max_torus_residual(&torus_cotorsion_residual(&conn, &metric).unwrap()));
    assert!(worst_56 <= RESIDUAL_TOL, "(5,6) composite residual {worst_56:.3e}");

    // (N, M) = (6, 9): case I-a (l = 2) x case I-b (l = 3)
    let x6 = nonconstant_x(6, 2, c64(0.37, 0.0)).unwrap();
    let met6 = metric_from_x(&x6, &seed_metric(6)).unwrap();
    let ia = enumerate_connections(&met6)
        .unwrap()
        .solutions
        .into_iter()
        .find(|s| s.params.case == CaseTag::Ia)
        .unwrap();
    let x9 = nonconstant_x(9, 3, c64(1.1, 0.0)).unwrap();
    let met9 = metric_from_x(&x9, &seed_metric(9)).unwrap();
    let ib = enumerate_connections(&met9)
        .unwrap()
        .solutions
        .into_iter()
        .find(|s| s.params.case == CaseTag::Ib)
        .unwrap();
    for factor in [(&ia.connection, &met6), (&ib.connection, &met9)] {
        let summary = residual_summary(factor.0, factor.1).unwrap();
        assert!(summary.metric_compat <= RESIDUAL_TOL);
    }
    let (conn, metric) =
        build_product_connection((&ia.connection, &met6), (&ib.connection, &met9)).unwrap();
    let worst_69 = max_torus_residual(&torus_compat_residual(&conn, &metric).unwrap())
        .max(max_torus_residual(&torus_cotorsion_residual(&conn, &metric).unwrap()));
    assert!(worst_69 <= RESIDUAL_TOL, "(6,9) composite residual {worst_69:.3e}");

    // alternating family at N = M = 6: displayed identities hold exactly and
    // the full-system residual report is generated and recorded
    let (alt, alt_metric) =
        alternating_family(6, 6, zn_geometry::torus::Branch::Plus, zn_geometry::torus::Axis::First)
            .unwrap();
    let idents = alternating_identities(&alt).unwrap();
    assert!(idents <= EXACT_TOL, "B/W identities deviate {idents:.3e}");
    let compat = torus_compat_residual(&alt, &alt_metric).unwrap();
    let cot = torus_cotorsion_residual(&alt, &alt_metric).unwrap();
    assert_eq!(compat.len() + cot.len(), 52);
    let alt_report = max_torus_residual(&compat).max(max_torus_residual(&cot));
    assert!(alt_report.is_finite());

    println!(
        "criterion 8 (torus families): PASS — composites (5,6) {worst_56:.2e} and \
         (6,9) {worst_69:.2e} within 1e-10; alternating identities {idents:.2e}, \
         full-system report max residual {alt_report:.2e} (recorded)"
    );
}
