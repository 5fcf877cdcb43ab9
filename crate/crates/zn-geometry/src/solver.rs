//! Complete enumeration of torsion-free metric-compatible connections on
//! the minimal calculus over Z_N, N > 4.
//!
//! The classification is driven entirely by the profile
//! X_g = (R_g G_g) / G_{g^-1}: a compatible connection exists only when
//! X_g + 1/(R_g X_g) is a constant c, and then
//!
//! * constant X = gamma yields the discrete branches II-zero / II-a / II-b
//!   (the latter two only when gamma != -1), plus a one-parameter family of
//!   nonconstant-B solutions when gamma^N = (-1)^N, gamma != -1;
//! * nonconstant X yields the two discrete branches I-a / I-b and, when the
//!   period product of X equals (-1)^N, the kappa-parametrized family I-c.
//!
//! Every emitted solution is plugged back into the full residual suite
//! before being returned.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::calculus::Gen;
use crate::connection::{metric_compat_residual_closed, max_residual, Connection};
use crate::cyclic::{CyclicFunction, DEFAULT_TOL, ZERO_THRESHOLD};
use crate::dd::Cdd;
use crate::error::{Error, Result};
use crate::metric::Metric;

/// Tolerance for the structural case analysis (constancy of X, parity of
/// period products). Looser than the residual tolerance: it only routes the
/// enumeration, and every branch is residual-verified afterwards.
const STRUCTURE_TOL: f64 = 1e-8;

/// Minimum distance of phi from a cotangent pole of the f_{l,phi} family.
pub const POLE_TOL: f64 = 1e-6;

/// The metric ratio profile X_g together with the detected contraction
/// constant c (present iff X_p + 1/(R_p X_p) is constant within tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct XProfile {
    pub x_p: CyclicFunction,
    pub x_pt: CyclicFunction,
    pub c: Option<Complex64>,
    /// Max deviation of X_p + 1/(R_p X_p) from its mean, and the argmax.
    pub c_deviation: (f64, usize),
}

/// X_g = (R_g G_g)/G_{g^-1} for g = p, p~, with constancy detection of
/// X_g + 1/(R_g X_g).
pub fn x_profile(m: &Metric) -> XProfile {
    let x_p = m
        .g_p()
        .translate(1)
        .try_div(m.g_pt())
        .expect("metric nonvanishing by construction");
    let x_pt = m
        .g_pt()
        .translate(-1)
        .try_div(m.g_p())
        .expect("metric nonvanishing by construction");
    let candidate = &x_p + &x_p.translate(1).recip().expect("X nonvanishing");
    let mean = candidate.mean();
    let (argmax, deviation) = candidate
        .values()
        .iter()
        .map(|z| (z - mean).norm())
        .enumerate()
        .fold((0, 0.0), |acc, (n, d)| if d > acc.1 { (n, d) } else { acc });
    XProfile {
        x_p,
        x_pt,
        c: (deviation <= STRUCTURE_TOL).then_some(mean),
        c_deviation: (deviation, argmax),
    }
}

/// The nonconstant periodic solution of the recurrence
/// (c - f(n)) f(n+1) = 1, f(0) = f(N), with c = 2 cos(pi l / N):
///
/// ```text
///   f_{l,phi}(n) = cos(pi l / N) + sin(pi l / N) cot(phi - pi l (n+1) / N).
/// ```
///
/// phi may be complex; it must stay away from the cotangent poles, where the
/// family blows up and residual accuracy is destroyed.
pub fn nonconstant_x(n: usize, l: usize, phi: Complex64) -> Result<CyclicFunction> {
    crate::calculus::require_calculus_modulus(n)?;
    if l < 1 || l > n - 1 {
        return Err(Error::FamilyIndexOutOfRange { l, max: n - 1 });
    }
    let angle = PI * l as f64 / n as f64;
    let (cos_a, sin_a) = (angle.cos(), angle.sin());
    // reject phi near a pole of any sample point
    for k in 0..n {
        let arg = phi - Complex64::new(angle * (k + 1) as f64, 0.0);
        let s = arg.sin();
        if s.norm() < POLE_TOL {
            return Err(Error::CotangentPole {
                index: k,
                magnitude: s.norm(),
                tolerance: POLE_TOL,
            });
        }
    }
    CyclicFunction::from_fn(n, |k| {
        let arg = phi - Complex64::new(angle * (k + 1) as f64, 0.0);
        Complex64::new(cos_a, 0.0) + arg.cos() / arg.sin() * sin_a
    })
}

/// How the X profile of a metric sits inside the classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XKind {
    Constant { gamma: Complex64 },
    Nonconstant { l: usize, phi: Complex64 },
}

/// Which classification branch a solution belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    Ia,
    Ib,
    Ic,
    IIZero,
    IIA,
    IIB,
    IINonconst,
}

impl CaseTag {
    pub fn label(self) -> &'static str {
        match self {
            CaseTag::Ia => "Ia",
            CaseTag::Ib => "Ib",
            CaseTag::Ic => "Ic",
            CaseTag::IIZero => "IIzero",
            CaseTag::IIA => "IIa",
            CaseTag::IIB => "IIb",
            CaseTag::IINonconst => "IInonconst",
        }
    }
}

/// Classification parameters attached to an enumerated connection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    pub x_kind: XKind,
    pub case: CaseTag,
    pub kappa_p: Option<Complex64>,
    pub kappa_pt: Option<Complex64>,
}

/// One verified solution.
#[derive(Debug, Clone)]
pub struct ClassifiedConnection {
    pub connection: Connection,
    pub params: FamilyParams,
    /// Max metric-compatibility residual observed at the plug-back gate.
    pub plugback_residual: f64,
}

/// The kappa-parametrized branch (case I-c, or the nonconstant-B branch of
/// case II on even parity). Discrete members are obtained through
/// [`KappaFamily::sample`].
#[derive(Debug, Clone)]
pub struct KappaFamily {
    metric: Metric,
    x_dd: Vec<Cdd>,
    c_dd: Cdd,
    x_kind: XKind,
    case: CaseTag,
    /// Required value of kappa_p * kappa_p~ (zero on the II branch),
    /// evaluated with the mean contraction constant.
    pub kappa_product: Complex64,
}

/// Result of enumerating a metric: the discrete verified solutions, the
/// optional kappa family, and the exclusion diagnostics.
#[derive(Debug, Clone)]
pub struct Classification {
    pub solutions: Vec<ClassifiedConnection>,
    pub kappa_family: Option<KappaFamily>,
    pub diagnostics: Vec<String>,
}

fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

/// X_p in double-double: X_p(n) = G_p(n+1) / G_p~(n). The branch formulas
/// divide by 1 + X-type quantities that can pass arbitrarily close to zero,
/// so the whole construction is carried in compensated precision and only
/// the final coefficients are rounded back to f64.
fn x_dd(m: &Metric) -> Vec<Cdd> {
    let n = m.modulus();
    (0..n)
        .map(|k| {
            Cdd::from_c64(m.g_p().get(k as i64 + 1)).div(Cdd::from_c64(m.g_pt().get(k as i64)))
        })
        .collect()
}

/// Contraction constant c = X(n) + 1/X(n+1), averaged over the period.
fn c_dd(x: &[Cdd]) -> Cdd {
    let n = x.len();
    let mut acc = Cdd::from_f64(0.0);
    for k in 0..n {
        acc = acc.add(x[k]).add(x[(k + 1) % n].recip());
    }
    acc.div(Cdd::from_f64(n as f64))
}

/// Builds the connection with the given little-b profiles (double-double),
/// deriving A from the metric, rounding to f64, and verifying the
/// closed-form residuals before returning.
fn build_connection(
    m: &Metric,
    b_p: Vec<Cdd>,
    b_pt: Vec<Cdd>,
    params: FamilyParams,
    tol: f64,
) -> Result<ClassifiedConnection> {
    let n = m.modulus();
    // A_g(k) = G_g(k + s) / (G_g(k) (1 + b_{g^-1}(k + s))), s = shift(g^-1)
    let a_of = |g: Gen| -> Result<CyclicFunction> {
        let gi = g.inverse();
        let b_gi = match gi {
            Gen::P => &b_p,
            Gen::Pt => &b_pt,
        };
        let mut values = Vec::with_capacity(n);
        for k in 0..n {
            let shifted = wrap(k as i64 + gi.shift(), n);
            let denom_inner = Cdd::ONE.add(b_gi[shifted]);
            if denom_inner.abs() < ZERO_THRESHOLD {
                return Err(Error::FamilyExcluded(format!(
                    "A_{} denominator vanishes: |B_{}({})| = {:.3e}",
                    g.label(),
                    gi.label(),
                    shifted,
                    denom_inner.abs()
                )));
            }
            let a = Cdd::from_c64(m.g(g).get(k as i64 + gi.shift()))
                .div(Cdd::from_c64(m.g(g).values()[k]).mul(denom_inner));
            values.push(a.to_c64());
        }
        CyclicFunction::new(values)
    };
    let a_p = a_of(Gen::P)?;
    let a_pt = a_of(Gen::Pt)?;
    let to_b = |b: &[Cdd]| {
        CyclicFunction::new(b.iter().map(|v| Cdd::ONE.add(*v).to_c64()).collect())
    };
    let connection = Connection::new(a_p, a_pt, to_b(&b_p)?, to_b(&b_pt)?)?;
    let residuals = metric_compat_residual_closed(&connection, m)?;
    let worst = max_residual(&residuals);
    // the comparison is written so a NaN-poisoned residual also fails
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(worst <= tol) {
        return Err(Error::ResidualCheckFailed {
            context: format!("case {} plug-back", params.case.label()),
            residual: worst,
            tolerance: tol,
        });
    }
    Ok(ClassifiedConnection {
        connection,
        params,
        plugback_residual: worst,
    })
}

/// Recovers the canonical root gamma = exp(i pi l / N) (upper half-plane)
/// and the (l, phi) parameters of a nonconstant X profile.
fn recover_x_kind(x_p: &CyclicFunction, c: Complex64) -> XKind {
    let n = x_p.modulus();
    let disc = (c * c - Complex64::new(4.0, 0.0)).sqrt();
    let mut gamma = (c + disc) / 2.0;
    if gamma.im < 0.0 {
        gamma = (c - disc) / 2.0;
    }
    let l = ((gamma.arg() * n as f64 / PI).round() as i64).clamp(1, n as i64 - 1) as usize;
    // H^2 = gamma (f(0) gamma - 1)/(f(0) - gamma), then H = e^{i phi}
    let f0 = x_p.values()[0];
    let h_sq = gamma * (f0 * gamma - Complex64::new(1.0, 0.0)) / (f0 - gamma);
    let h = h_sq.sqrt();
    let phi = -Complex64::i() * h.ln();
    XKind::Nonconstant { l, phi }
}

/// kappa_g kappa_{g^-1} from the X data:
/// (X_p(N-1)/X_p(0) - 1) / (c + 2)^2.
pub fn kappa_product_from_x(x_p: &CyclicFunction, c: Complex64) -> Result<Complex64> {
    let c2 = c + Complex64::new(2.0, 0.0);
    if c2.norm() < STRUCTURE_TOL {
        return Err(Error::KappaConstraintUndefined);
    }
    let n = x_p.modulus();
    Ok((x_p.values()[n - 1] / x_p.values()[0] - Complex64::new(1.0, 0.0)) / (c2 * c2))
}

/// The same constraint in closed form: -H^2 (gamma-1)^2 / ((gamma+1)^2 (H^2-1)^2).
pub fn kappa_product_closed(gamma: Complex64, h: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let h2 = h * h;
    -h2 * (gamma - one).powu(2) / ((gamma + one).powu(2) * (h2 - one).powu(2))
}

/// The kappa product constraint for a classified family, evaluated through
/// both routes (the X data and the closed (gamma, H) form) and checked for
/// agreement. Undefined at c = -2, where only the constant solution X = -1
/// exists.
pub fn kappa_constraint(params: &FamilyParams, x_p: &CyclicFunction) -> Result<Complex64> {
    let n = x_p.modulus();
    let (gamma, h) = match params.x_kind {
        XKind::Nonconstant { l, phi } => (
            Complex64::from_polar(1.0, PI * l as f64 / n as f64),
            (Complex64::i() * phi).exp(),
        ),
        XKind::Constant { gamma } => {
            if (gamma + Complex64::new(1.0, 0.0)).norm() < STRUCTURE_TOL {
                return Err(Error::KappaConstraintUndefined);
            }
            // constant X degenerates the constraint to zero (X(N-1) = X(0))
            return kappa_product_from_x(x_p, gamma + 1.0 / gamma);
        }
    };
    let c = gamma + 1.0 / gamma;
    let from_x = kappa_product_from_x(x_p, c)?;
    let closed = kappa_product_closed(gamma, h);
    let deviation = (from_x - closed).norm();
    if deviation > 1e-12 * (1.0 + closed.norm()) {
        return Err(Error::ResidualCheckFailed {
            context: "kappa constraint dual evaluation".into(),
            residual: deviation,
            tolerance: 1e-12,
        });
    }
    Ok(from_x)
}

/// y_g^hom(n) = kappa (-1)^n prod_{k<n} X_p(k); both generators use the
/// running products of X_p.
fn y_hom(x: &[Cdd], kappa: Cdd) -> Vec<Cdd> {
    let mut acc = Cdd::ONE;
    x.iter()
        .enumerate()
        .map(|(n, &v)| {
            let out = if n % 2 == 0 { acc } else { acc.neg() };
            acc = acc.mul(v);
            out.mul(kappa)
        })
        .collect()
}

/// b_g of the second (kappa) type:
/// (c+2) R_{g^-1} X_g / (1 + R_{g^-1} X_g + (c+2) y_g^hom) - R_{g^-1} X_g - 1.
fn b_second_type(rx: &[Cdd], c: Cdd, y_hom_g: &[Cdd], label: &str) -> Result<Vec<Cdd>> {
    let c2 = c.add(Cdd::from_f64(2.0));
    let mut out = Vec::with_capacity(rx.len());
    for (n, (&r, &y)) in rx.iter().zip(y_hom_g).enumerate() {
        let denom = Cdd::ONE.add(r).add(c2.mul(y));
        if denom.abs() < ZERO_THRESHOLD {
            return Err(Error::FamilyExcluded(format!(
                "{label}: y_g^hom + y_g^0 vanishes at n = {n} (|denominator| = {:.3e})",
                denom.abs()
            )));
        }
        out.push(c2.mul(r).div(denom).sub(r).sub(Cdd::ONE));
    }
    Ok(out)
}

/// Candidate representatives of the contraction constant: the stored metric
/// satisfies the constancy of X + 1/(R X) only up to roundoff, and when X
/// passes close to -1 the branch formulas amplify the choice of
/// representative enormously. Every pointwise value plus the period mean is
/// tried; the plug-back gate keeps the first representative whose
/// connection verifies.
fn c_candidates(x: &[Cdd], c_mean: Cdd) -> Vec<Cdd> {
    let n = x.len();
    let mut out: Vec<Cdd> = (0..n).map(|k| x[k].add(x[(k + 1) % n].recip())).collect();
    out.push(c_mean);
    out
}

/// Runs `build` over the candidate constants, returning the verified
/// connection with the smallest plug-back residual, or the lowest-residual
/// failure when no candidate verifies.
fn best_over_candidates(
    candidates: &[Cdd],
    mut build: impl FnMut(Cdd) -> Result<ClassifiedConnection>,
) -> Result<ClassifiedConnection> {
    let mut best: Option<ClassifiedConnection> = None;
    let mut best_err: Option<Error> = None;
    for &c in candidates {
        match build(c) {
            Ok(sol) => {
                if best
                    .as_ref()
                    .is_none_or(|b| sol.plugback_residual < b.plugback_residual)
                {
                    best = Some(sol);
                }
            }
            Err(e) => {
                let keep = match (&best_err, &e) {
                    (None, _) => true,
                    (
                        Some(Error::ResidualCheckFailed { residual: old, .. }),
                        Error::ResidualCheckFailed { residual: new, .. },
                    ) => new < old,
                    (Some(Error::FamilyExcluded(_)), Error::ResidualCheckFailed { .. }) => true,
                    _ => false,
                };
                if keep {
                    best_err = Some(e);
                }
            }
        }
    }
    if let Some(sol) = best {
        return Ok(sol);
    }
    Err(best_err.unwrap_or_else(|| Error::FamilyExcluded("no candidate constants".into())))
}

impl KappaFamily {
    pub fn case(&self) -> CaseTag {
        self.case
    }

    pub fn modulus(&self) -> usize {
        self.metric.modulus()
    }

    /// Builds the family member for the given kappa_p; kappa_p~ is fixed by
    /// the product constraint (and is zero on the II branch).
    pub fn sample(&self, kappa_p: Complex64) -> Result<ClassifiedConnection> {
        match self.case {
            CaseTag::Ic => {
                if kappa_p.norm() < ZERO_THRESHOLD {
                    return Err(Error::InvalidParameter(
                        "case I-c needs kappa_p != 0 (kappa_p~ = product / kappa_p)".into(),
                    ));
                }
                self.sample_pair(Some(Cdd::from_c64(kappa_p)), None)
            }
            _ => self.sample_pair(Some(Cdd::from_c64(kappa_p)), Some(Cdd::from_f64(0.0))),
        }
    }

    /// The mirrored nonconstant-B sample of the case II branch (kappa on
    /// the p~ side instead).
    pub fn sample_pt(&self, kappa_pt: Complex64) -> Result<ClassifiedConnection> {
        match self.case {
            CaseTag::IINonconst => {
                self.sample_pair(Some(Cdd::from_f64(0.0)), Some(Cdd::from_c64(kappa_pt)))
            }
            CaseTag::Ic => {
                if kappa_pt.norm() < ZERO_THRESHOLD {
                    return Err(Error::InvalidParameter(
                        "case I-c needs kappa_p~ != 0 (kappa_p = product / kappa_p~)".into(),
                    ));
                }
                self.sample_pair(None, Some(Cdd::from_c64(kappa_pt)))
            }
            _ => unreachable!("kappa families are Ic or IInonconst"),
        }
    }

    /// Exactly one kappa may be left open on the I-c branch; the open one
    /// follows from the product constraint, which itself carries the
    /// representative c being tried.
    fn sample_pair(
        &self,
        fixed_p: Option<Cdd>,
        fixed_pt: Option<Cdd>,
    ) -> Result<ClassifiedConnection> {
        let label = self.case.label();
        let n = self.x_dd.len();
        let rx_p: Vec<Cdd> = (0..n).map(|k| self.x_dd[wrap(k as i64 - 1, n)]).collect();
        let rx_pt: Vec<Cdd> = (0..n).map(|k| self.x_dd[k].recip()).collect();
        best_over_candidates(&c_candidates(&self.x_dd, self.c_dd), |c| {
            let c2 = c.add(Cdd::from_f64(2.0));
            let product = self.x_dd[n - 1]
                .div(self.x_dd[0])
                .sub(Cdd::ONE)
                .div(c2.mul(c2));
            let (kappa_p, kappa_pt) = match (fixed_p, fixed_pt) {
                (Some(p), Some(pt)) => (p, pt),
                (Some(p), None) => (p, product.div(p)),
                (None, Some(pt)) => (product.div(pt), pt),
                (None, None) => unreachable!("at least one kappa is always pinned"),
            };
            let b_p = b_second_type(&rx_p, c, &y_hom(&self.x_dd, kappa_p), label)?;
            let b_pt = b_second_type(&rx_pt, c, &y_hom(&self.x_dd, kappa_pt), label)?;
            build_connection(
                &self.metric,
                b_p,
                b_pt,
                FamilyParams {
                    x_kind: self.x_kind,
                    case: self.case,
                    kappa_p: Some(kappa_p.to_c64()),
                    kappa_pt: Some(kappa_pt.to_c64()),
                },
                DEFAULT_TOL,
            )
        })
    }
}

/// Enumerates every torsion-free metric-compatible connection for the given
/// metric. Returns the discrete solutions (each plug-back verified), the
/// kappa family when one exists, and exclusion diagnostics.
///
/// Fails with [`Error::NonConstantContraction`] when the metric admits no
/// compatible connection at all, and with [`Error::FamilyExcluded`] when
/// every branch is excluded.
pub fn enumerate_connections(m: &Metric) -> Result<Classification> {
    let n = m.modulus();
    let profile = x_profile(m);
    let Some(c) = profile.c else {
        let (deviation, index) = profile.c_deviation;
        return Err(Error::NonConstantContraction { deviation, index });
    };
    let mut diagnostics = Vec::new();
    let mut solutions = Vec::new();
    let mut kappa_family = None;
    let x = x_dd(m);
    let cc = c_dd(&x);
    let zero: Vec<Cdd> = vec![Cdd::from_f64(0.0); n];

    let push = |sol: Result<ClassifiedConnection>,
                diagnostics: &mut Vec<String>,
                solutions: &mut Vec<ClassifiedConnection>| {
        match sol {
            Ok(s) => solutions.push(s),
            Err(e) => diagnostics.push(e.to_string()),
        }
    };

    if let Some(gamma) = profile.x_p.constant_value(STRUCTURE_TOL) {
        let x_kind = XKind::Constant { gamma };
        let gamma_dd = {
            let mut acc = Cdd::from_f64(0.0);
            for &v in &x {
                acc = acc.add(v);
            }
            acc.div(Cdd::from_f64(n as f64))
        };
        // II-zero: b = 0 on both generators, always a solution.
        push(
            build_connection(
                m,
                zero.clone(),
                zero.clone(),
                FamilyParams {
                    x_kind,
                    case: CaseTag::IIZero,
                    kappa_p: None,
                    kappa_pt: None,
                },
                DEFAULT_TOL,
            ),
            &mut diagnostics,
            &mut solutions,
        );
        if (gamma + Complex64::new(1.0, 0.0)).norm() <= STRUCTURE_TOL {
            diagnostics
                .push("gamma = -1: cases II-a and II-b coincide with II-zero".to_string());
        } else {
            // II-a: b_p = 0, b_p~ = -1 - 1/gamma.
            let b_iia = Cdd::ONE.add(gamma_dd.recip()).neg();
            push(
                build_connection(
                    m,
                    zero.clone(),
                    vec![b_iia; n],
                    FamilyParams {
                        x_kind,
                        case: CaseTag::IIA,
                        kappa_p: None,
                        kappa_pt: None,
                    },
                    DEFAULT_TOL,
                ),
                &mut diagnostics,
                &mut solutions,
            );
            // II-b: b_p = -1 - gamma, b_p~ = 0.
            let b_iib = Cdd::ONE.add(gamma_dd).neg();
            push(
                build_connection(
                    m,
                    vec![b_iib; n],
                    zero.clone(),
                    FamilyParams {
                        x_kind,
                        case: CaseTag::IIB,
                        kappa_p: None,
                        kappa_pt: None,
                    },
                    DEFAULT_TOL,
                ),
                &mut diagnostics,
                &mut solutions,
            );
            // nonconstant-B branch: needs gamma^N = (-1)^N.
            let parity =
                gamma.powu(n as u32) - Complex64::new(if n.is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0);
            if parity.norm() <= STRUCTURE_TOL {
                kappa_family = Some(KappaFamily {
                    metric: m.clone(),
                    x_dd: x.clone(),
                    c_dd: cc,
                    x_kind,
                    case: CaseTag::IINonconst,
                    kappa_product: Complex64::new(0.0, 0.0),
                });
            } else {
                diagnostics.push(format!(
                    "no nonconstant-B branch: |gamma^N - (-1)^N| = {:.3e}",
                    parity.norm()
                ));
            }
        }
    } else {
        let x_kind = recover_x_kind(&profile.x_p, c);
        let rx_p: Vec<Cdd> = (0..n).map(|k| x[wrap(k as i64 - 1, n)]).collect();
        let rx_pt: Vec<Cdd> = (0..n).map(|k| x[k].recip()).collect();
        let zero_hom = zero.clone();

        let candidates = c_candidates(&x, cc);

        // I-a: b_p of the first type, b_p~ of the second type with y^hom = 0.
        let ia = best_over_candidates(&candidates, |c| {
            let b_p: Vec<Cdd> = rx_p.iter().map(|r| Cdd::ONE.add(*r).neg()).collect();
            let b_pt = b_second_type(&rx_pt, c, &zero_hom, "case I-a (g = p~)")?;
            build_connection(
                m,
                b_p,
                b_pt,
                FamilyParams {
                    x_kind,
                    case: CaseTag::Ia,
                    kappa_p: None,
                    kappa_pt: None,
                },
                DEFAULT_TOL,
            )
        });
        push(ia, &mut diagnostics, &mut solutions);

        // I-b: the mirror image.
        let ib = best_over_candidates(&candidates, |c| {
            let b_pt: Vec<Cdd> = rx_pt.iter().map(|r| Cdd::ONE.add(*r).neg()).collect();
            let b_p = b_second_type(&rx_p, c, &zero_hom, "case I-b (g = p)")?;
            build_connection(
                m,
                b_p,
                b_pt,
                FamilyParams {
                    x_kind,
                    case: CaseTag::Ib,
                    kappa_p: None,
                    kappa_pt: None,
                },
                DEFAULT_TOL,
            )
        });
        push(ib, &mut diagnostics, &mut solutions);

        // I-c: needs the period product of X to be (-1)^N.
        let product = profile.x_p.period_product();
        let parity = product - Complex64::new(if n.is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0);
        if parity.norm() <= STRUCTURE_TOL {
            // kappa product constraint (X(N-1)/X(0) - 1) / (c+2)^2
            let c2 = cc.add(Cdd::from_f64(2.0));
            let product_dd = x[n - 1].div(x[0]).sub(Cdd::ONE).div(c2.mul(c2));
            kappa_family = Some(KappaFamily {
                metric: m.clone(),
                x_dd: x.clone(),
                c_dd: cc,
                x_kind,
                case: CaseTag::Ic,
                kappa_product: product_dd.to_c64(),
            });
        } else {
            diagnostics.push(format!(
                "no case I-c: period product of X deviates from (-1)^N by {:.3e} (N + l odd)",
                parity.norm()
            ));
        }
    }

    if solutions.is_empty() && kappa_family.is_none() {
        return Err(Error::FamilyExcluded(format!(
            "all branches excluded: {}",
            diagnostics.join("; ")
        )));
    }
    Ok(Classification {
        solutions,
        kappa_family,
        diagnostics,
    })
}

/// Keeps exactly the connections whose star-compatibility residuals stay
/// within `tol`. The metric must be real.
pub fn star_filter(
    sols: &[ClassifiedConnection],
    m: &Metric,
    tol: f64,
) -> Result<Vec<ClassifiedConnection>> {
    let imag = m.max_imag();
    if imag > tol {
        return Err(Error::MetricNotReal { imag });
    }
    Ok(sols
        .iter()
        .filter(|s| {
            max_residual(&crate::connection::star_compat_residual(&s.connection)) <= tol
        })
        .cloned()
        .collect())
}

/// The two metric-compatibility residuals of the Z_2 example, where the
/// whole connection is one function S and the metric one function G:
///
/// ```text
///   r1 = G_0 - G_1 + G_0 (S_0 - 1) + G_0 S_0 (S_1 - 1)
///   r2 = G_1 - G_0 + G_1 (S_1 - 1) + G_1 S_1 (S_0 - 1)
/// ```
///
/// Both vanish exactly when G_1 = +/- G_0 with S_0 S_1 = +/- 1 accordingly.
pub fn z2_compat_residual(
    g0: Complex64,
    g1: Complex64,
    s0: Complex64,
    s1: Complex64,
) -> Result<(Complex64, Complex64)> {
    for (label, g) in [("G_0", g0), ("G_1", g1)] {
        if g.norm() < ZERO_THRESHOLD {
            return Err(Error::InvalidParameter(format!(
                "{label} must be nonzero in the Z_2 example"
            )));
        }
    }
    let one = Complex64::new(1.0, 0.0);
    let r1 = g0 - g1 + g0 * (s0 - one) + g0 * s0 * (s1 - one);
    let r2 = g1 - g0 + g1 * (s1 - one) + g1 * s1 * (s0 - one);
    Ok((r1, r2))
}
