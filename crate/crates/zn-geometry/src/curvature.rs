//! Riemann, Ricci, scalar, and Einstein curvature: the generic pipeline
//! built from the connection machinery, the closed-form expressions for the
//! constant-X-ratio metrics, the continuous limit, and the inverse
//! (metric-from-curvature) recursion.
//!
//! The lift iota splits the wedge,
//! iota(theta_p /\ theta_p~) = theta_p (x) theta_p~
//!                              + beta (theta_p (x) theta_p~ + theta_p~ (x) theta_p),
//! with the standard choice beta = -1/2.

use num_complex::Complex64;

use crate::calculus::{differential, wedge, Gen, OneForm, Tensor2};
use crate::connection::Connection;
use crate::cyclic::{CyclicFunction, ZERO_THRESHOLD};
use crate::error::{Error, Result};
use crate::metric::{metric_from_x, Metric};
use crate::solver::x_profile;

/// Abort threshold for the inverse recursion: |1/G| beyond this signals the
/// metric collapsing to zero.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

/// The lift of two-forms into Omega^1 (x) Omega^1, parametrized by
/// beta in C(Z_N).
#[derive(Debug, Clone, PartialEq)]
pub struct Lift {
    beta: CyclicFunction,
}

impl Lift {
    pub fn new(beta: CyclicFunction) -> Self {
        Self { beta }
    }

    /// The standard choice beta = -1/2.
    pub fn standard(n: usize) -> Result<Self> {
        Ok(Self::new(CyclicFunction::constant(n, -0.5)?))
    }

    pub fn beta(&self) -> &CyclicFunction {
        &self.beta
    }

    /// iota applied to c . theta_p /\ theta_p~ (the two-form basis is
    /// central, so the coefficient passes straight through).
    pub fn apply(&self, coeff: &CyclicFunction) -> Result<Tensor2> {
        let n = coeff.modulus();
        let one = CyclicFunction::one(n)?;
        let mut t = Tensor2::zero(n)?;
        *t.slot_mut(Gen::P, Gen::Pt) = coeff * &(&one + &self.beta);
        *t.slot_mut(Gen::Pt, Gen::P) = coeff * &self.beta;
        Ok(t)
    }
}

/// A curvature value R_nabla(theta_g): an element of Omega^2 (x) Omega^1
/// over the central basis theta_p /\ theta_p~ (x) theta_a.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureForm {
    coeff: [CyclicFunction; 2],
}

impl CurvatureForm {
    pub fn coeff(&self, a: Gen) -> &CyclicFunction {
        &self.coeff[a.index()]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeff[0].max_abs().max(self.coeff[1].max_abs())
    }

    pub fn max_deviation(&self, other: &Self) -> f64 {
        (&self.coeff[0] - &other.coeff[0])
            .max_abs()
            .max((&self.coeff[1] - &other.coeff[1]).max_abs())
    }
}

/// R_nabla(theta_g) = (d (x) id - id /\ nabla) nabla theta_g computed
/// through the generic operations, for g = p, p~ (in that order).
pub fn riemann_direct(c: &Connection) -> Result<[CurvatureForm; 2]> {
    let n = c.modulus();
    let mut out = Vec::with_capacity(2);
    for g in Gen::BOTH {
        let nabla = c.nabla_basis(g);
        let mut slots = [CyclicFunction::zero(n)?, CyclicFunction::zero(n)?];
        // (d (x) id): (d T_xy /\ theta_x) (x) theta_y
        for x in Gen::BOTH {
            for y in Gen::BOTH {
                let dw = wedge(&differential(nabla.slot(x, y))?, &OneForm::basis(n, x)?)?;
                slots[y.index()] = &slots[y.index()] + dw.coeff();
            }
        }
        // (id /\ nabla): T_xy theta_x /\ nabla theta_y
        for x in Gen::BOTH {
            for y in Gen::BOTH {
                let coeff = nabla.slot(x, y);
                let inner = c.nabla_basis(y);
                // theta_x /\ (S_uv theta_u (x) theta_v) survives only for
                // u = x^-1, with theta_p~ /\ theta_p = -theta_p /\ theta_p~.
                let u = x.inverse();
                let sign = if x == Gen::P { 1.0 } else { -1.0 };
                for v in Gen::BOTH {
                    let commuted = coeff * &inner.slot(u, v).translate(-x.shift());
                    slots[v.index()] = &slots[v.index()] - &commuted.scale(sign);
                }
            }
        }
        out.push(CurvatureForm {
            coeff: [slots[0].clone(), slots[1].clone()],
        });
    }
    let pt = out.pop().expect("two entries");
    let p = out.pop().expect("one entry");
    Ok([p, pt])
}

/// The closed-form curvature coefficients rho_g = M_g theta_g + N_g theta_{g^-1}:
///
/// ```text
///   M_g = B_g (R_g A_g) - A_g (R_{g^-1} B_g) - (R_{g^-1} B_{g^-1} - 1)(B_g - 1)
///   N_g = (R_{g^-1} A_{g^-1})(1 - B_g) + B_g (R_g B_g - 1)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct RhoClosed {
    pub m: CyclicFunction,
    pub n: CyclicFunction,
}

impl RhoClosed {
    /// rho_g as a one-form (for reporting).
    pub fn as_one_form(&self, g: Gen) -> Result<OneForm> {
        let mut coeffs = [
            CyclicFunction::zero(self.m.modulus())?,
            CyclicFunction::zero(self.m.modulus())?,
        ];
        coeffs[g.index()] = self.m.clone();
        coeffs[g.inverse().index()] = self.n.clone();
        let [p, pt] = coeffs;
        OneForm::new(p, pt)
    }
}

/// Closed-form rho_g for g = p, p~ (in that order).
pub fn rho_closed(c: &Connection) -> [RhoClosed; 2] {
    let n = c.modulus();
    let one = CyclicFunction::one(n).expect("valid modulus");
    let mk = |g: Gen| {
        let gi = g.inverse();
        let m = &(&(c.b(g) * &c.a(g).translate(g.shift()))
            - &(c.a(g) * &c.b(g).translate(gi.shift())))
            - &(&(&c.b(gi).translate(gi.shift()) - &one) * &c.b_minus_one(g));
        let nn = &(&c.a(gi).translate(gi.shift()) * &(&one - c.b(g)))
            + &(c.b(g) * &(&c.b(g).translate(g.shift()) - &one));
        RhoClosed { m, n: nn }
    };
    [mk(Gen::P), mk(Gen::Pt)]
}

/// rho_closed repackaged in the canonical Omega^2 (x) Omega^1 basis so it can
/// be compared slotwise with [`riemann_direct`]:
/// R(theta_p) = theta_p /\ theta_p~ (x) rho_p, R(theta_p~) = -theta_p /\ theta_p~ (x) rho_p~.
pub fn riemann_closed(c: &Connection) -> Result<[CurvatureForm; 2]> {
    let [rho_p, rho_pt] = rho_closed(c);
    Ok([
        CurvatureForm {
            coeff: [rho_p.m.clone(), rho_p.n.clone()],
        },
        CurvatureForm {
            coeff: [-&rho_pt.n, -&rho_pt.m],
        },
    ])
}

/// Ricci tensor through the generic pipeline: lift the Riemann output back
/// into tensors and contract the first leg against the metric.
pub fn ricci_generic(c: &Connection, m: &Metric, lift: &Lift) -> Result<Tensor2> {
    let n = c.modulus();
    check_moduli(c, m)?;
    let riemann = riemann_direct(c)?;
    let mut out = Tensor2::zero(n)?;
    // g = G_p theta_p (x) theta_p~ + G_p~ theta_p~ (x) theta_p; for each term
    // contract (G_w theta_w, .) against the lifted R(theta_{w^-1}).
    for (w, g_w) in [(Gen::P, m.g_p()), (Gen::Pt, m.g_pt())] {
        let wi = w.inverse();
        for a in Gen::BOTH {
            // lifted first two legs of R(theta_wi): coeff (x) iota-basis (x) theta_a
            let lifted = lift.apply(riemann[wi.index()].coeff(a))?;
            for x in Gen::BOTH {
                for y in Gen::BOTH {
                    let t = lifted.slot(x, y);
                    if t.max_abs() == 0.0 {
                        continue;
                    }
                    // (G_w theta_w, t theta_x) = G_w (R_{w^-1} t) (theta_w, theta_x)
                    let pb = m.pairing_basis(w, x);
                    if pb.max_abs() == 0.0 {
                        continue;
                    }
                    let scalar = &(g_w * &t.translate(-w.shift())) * &pb;
                    // remaining legs theta_y (x) theta_a
                    let slot = out.slot_mut(y, a);
                    *slot = &slot.clone() + &scalar;
                }
            }
        }
    }
    Ok(out)
}

/// Ricci through the displayed closed form
/// Ricci = -(R_p~ beta / X_p~) theta_p (x) rho_p~
///         + ((1 + R_p beta) / X_p) theta_p~ (x) rho_p, left-normalized.
pub fn ricci_closed(c: &Connection, m: &Metric, lift: &Lift) -> Result<Tensor2> {
    let n = c.modulus();
    check_moduli(c, m)?;
    let profile = x_profile(m);
    let [rho_p, rho_pt] = rho_closed(c);
    let one = CyclicFunction::one(n)?;
    let beta = lift.beta();

    let front_p = (-&beta.translate(-1)).try_div(&profile.x_pt)?;
    let front_pt = (&one + &beta.translate(1)).try_div(&profile.x_p)?;

    let mut out = Tensor2::zero(n)?;
    *out.slot_mut(Gen::P, Gen::Pt) = &front_p * &rho_pt.m.translate(-1);
    *out.slot_mut(Gen::P, Gen::P) = &front_p * &rho_pt.n.translate(-1);
    *out.slot_mut(Gen::Pt, Gen::P) = &front_pt * &rho_p.m.translate(1);
    *out.slot_mut(Gen::Pt, Gen::Pt) = &front_pt * &rho_p.n.translate(1);
    Ok(out)
}

/// Scalar curvature through the generic pipeline: the pairing contraction
/// of the generic Ricci tensor.
pub fn scalar_generic(c: &Connection, m: &Metric, lift: &Lift) -> Result<CyclicFunction> {
    m.contract_tensor2(&ricci_generic(c, m, lift)?)
}

/// Scalar curvature through the displayed closed form
/// R = -(1/X_p~) R_p~(beta M_p~ / G_p~) + (1/X_p) R_p((1 + beta) M_p / G_p).
pub fn scalar_closed(c: &Connection, m: &Metric, lift: &Lift) -> Result<CyclicFunction> {
    let n = c.modulus();
    check_moduli(c, m)?;
    let profile = x_profile(m);
    let [rho_p, rho_pt] = rho_closed(c);
    let one = CyclicFunction::one(n)?;
    let beta = lift.beta();
    let term_pt = (beta * &rho_pt.m).try_div(m.g_pt())?.translate(-1);
    let term_p = (&(&one + beta) * &rho_p.m).try_div(m.g_p())?.translate(1);
    Ok(&term_p.try_div(&profile.x_p)? - &term_pt.try_div(&profile.x_pt)?)
}

/// Einstein = Ricci - (R / (g^(1), g^(2))) g. Fails when the first metric
/// contraction vanishes somewhere.
pub fn einstein(c: &Connection, m: &Metric, lift: &Lift) -> Result<Tensor2> {
    let ricci = ricci_generic(c, m, lift)?;
    let scalar = m.contract_tensor2(&ricci)?;
    let (first, _) = m.contractions();
    if let Some((index, _)) = first.vanishing_index() {
        return Err(Error::VanishingContraction { index });
    }
    let factor = scalar.try_div(&first)?;
    Ok(ricci.sub(&m.as_tensor2().map_slots(|s, _, _| &factor * s)))
}

fn check_moduli(c: &Connection, m: &Metric) -> Result<()> {
    if c.modulus() != m.modulus() {
        return Err(Error::ModulusMismatch {
            left: c.modulus(),
            right: m.modulus(),
        });
    }
    Ok(())
}

/// Everything the curvature pipeline produces for one (connection, metric,
/// lift) triple. `ricci`/`scalar`/`einstein` come from the generic pipeline;
/// the rho data come from the closed form of the Riemann curvature.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub rho_p: OneForm,
    pub rho_pt: OneForm,
    pub m_p: CyclicFunction,
    pub m_pt: CyclicFunction,
    pub n_p: CyclicFunction,
    pub n_pt: CyclicFunction,
    pub ricci: Tensor2,
    pub scalar: CyclicFunction,
    pub einstein: Tensor2,
}

/// Assembles the full curvature report, cross-checking the generic pipeline
/// against the closed forms on the way (max discrepancy returned alongside).
pub fn curvature_report(c: &Connection, m: &Metric, lift: &Lift) -> Result<(CurvatureReport, f64)> {
    let [rho_p, rho_pt] = rho_closed(c);
    let direct = riemann_direct(c)?;
    let closed = riemann_closed(c)?;
    let mut discrepancy = direct[0]
        .max_deviation(&closed[0])
        .max(direct[1].max_deviation(&closed[1]));

    let ricci = ricci_generic(c, m, lift)?;
    discrepancy = discrepancy.max(ricci.max_deviation(&ricci_closed(c, m, lift)?));
    let scalar = m.contract_tensor2(&ricci)?;
    discrepancy = discrepancy.max((&scalar - &scalar_closed(c, m, lift)?).max_abs());
    let einstein = einstein(c, m, lift)?;

    Ok((
        CurvatureReport {
            rho_p: rho_p.as_one_form(Gen::P)?,
            rho_pt: rho_pt.as_one_form(Gen::Pt)?,
            m_p: rho_p.m,
            m_pt: rho_pt.m,
            n_p: rho_p.n,
            n_pt: rho_pt.n,
            ricci,
            scalar,
            einstein,
        },
        discrepancy,
    ))
}

/// The connection branches with closed-form curvature for metrics with
/// constant ratio X_p = gamma > 0 and real negative G = G_p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedCase {
    /// B_p = B_p~ = 1.
    A,
    /// B_p = 1, B_p~ = -1/gamma.
    B,
    /// B_p = -gamma, B_p~ = 1.
    C,
    /// The even-N branch with one alternating B profile (gamma = 1):
    /// B(n) = (1 - 2 kappa (-1)^n) / (1 + 2 kappa (-1)^n) on the generator
    /// selected by `swap` (false: B_p alternates; true: B_p~ alternates).
    EvenExtra { swap: bool, kappa: f64 },
}

impl ClosedCase {
    /// Sign carried by this case in the gamma = 1, beta = -1/2 scalar
    /// curvature stencil: minus for case (a), plus for (b) and (c).
    pub fn stencil_sign(self) -> Option<Sign> {
        match self {
            ClosedCase::A => Some(Sign::Minus),
            ClosedCase::B | ClosedCase::C => Some(Sign::Plus),
            ClosedCase::EvenExtra { .. } => None,
        }
    }
}

/// Sign tag for the closed scalar-curvature stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Closed-form case report: the working metric and connection realizing the
/// case, the full pipeline output, the named case intermediates, the
/// closed-form Ricci/scalar displays, and the max discrepancy between the
/// generic pipeline and the closed displays.
#[derive(Debug, Clone)]
pub struct CaseReport {
    pub connection: Connection,
    /// The proportional metric (G_p = G, G_p~ = R_p G / gamma) the case
    /// formulas live on.
    pub working_metric: Metric,
    pub report: CurvatureReport,
    /// Named case intermediates (Z+/Z-/S+/S-/W+/W- or V+/V-/T+/T-).
    pub diagnostics: Vec<(&'static str, CyclicFunction)>,
    /// The case's displayed Ricci tensor.
    pub ricci_display: Tensor2,
    /// The case's displayed scalar curvature.
    pub scalar_display: CyclicFunction,
    /// The gamma = 1, beta = -1/2 four-point stencil value, when applicable.
    pub scalar_stencil: Option<CyclicFunction>,
    /// Max deviation between the generic pipeline and the closed displays.
    pub generic_vs_closed: f64,
}

/// Builds the case connection and working metric for a profile G < 0 and
/// ratio gamma > 0, evaluates the closed-form Ricci/scalar displays, and
/// cross-checks them against the generic pipeline.
///
/// The input metric must be real, negative, and wedge-compatible; its G_p
/// supplies the profile G. The case formulas are exact for the working
/// metric (G_p = G, G_p~ = R_p G / gamma), which carries the constant ratio
/// X_p = gamma.
pub fn scalar_closed_case(
    m: &Metric,
    gamma: f64,
    case: ClosedCase,
    lift: &Lift,
) -> Result<CaseReport> {
    let n = m.modulus();
    let flags = m.classify(crate::cyclic::DEFAULT_TOL);
    if !flags.is_real || !flags.is_negative {
        return Err(Error::InvalidParameter(
            "closed-form cases need a real negative metric profile".into(),
        ));
    }
    if !flags.is_wedge_compatible {
        return Err(Error::InvalidParameter(
            "closed-form cases read the profile G from a wedge-compatible metric (G_p = G_p~)"
                .into(),
        ));
    }
    if gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let g = m.g_p().clone();
    let x = CyclicFunction::constant(n, gamma)?;
    let working_metric = metric_from_x(&x, &g)?;

    let one = CyclicFunction::one(n)?;
    let (b_p, b_pt) = match case {
        ClosedCase::A => (one.clone(), one.clone()),
        ClosedCase::B => (one.clone(), CyclicFunction::constant(n, -1.0 / gamma)?),
        ClosedCase::C => (CyclicFunction::constant(n, -gamma)?, one.clone()),
        ClosedCase::EvenExtra { swap, kappa } => {
            if !n.is_multiple_of(2) {
                return Err(Error::ParityRequired { n, m: n });
            }
            if (gamma - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(
                    "the alternating-B branch needs gamma = 1 (gamma^N = (-1)^N with gamma > 0)"
                        .into(),
                ));
            }
            let alternating = CyclicFunction::from_fn(n, |k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::new((1.0 - 2.0 * kappa * s) / (1.0 + 2.0 * kappa * s), 0.0)
            })?;
            if alternating.min_abs() < ZERO_THRESHOLD {
                return Err(Error::FamilyExcluded(
                    "alternating B profile vanishes (kappa = +/- 1/2)".into(),
                ));
            }
            if swap {
                (one.clone(), alternating)
            } else {
                (alternating, one.clone())
            }
        }
    };
    // A from the metric-compatibility closed form
    let a_g = |gen: Gen, b_inv: &CyclicFunction| -> Result<CyclicFunction> {
        let gi = gen.inverse();
        working_metric
            .g(gen)
            .translate(gi.shift())
            .try_div(&(working_metric.g(gen) * &b_inv.translate(gi.shift())))
    };
    let connection = Connection::new(
        a_g(Gen::P, &b_pt)?,
        a_g(Gen::Pt, &b_p)?,
        b_p.clone(),
        b_pt.clone(),
    )?;

    // verify the case really is torsion-free metric-compatible
    let residuals =
        crate::connection::metric_compat_residual_closed(&connection, &working_metric)?;
    let worst = crate::connection::max_residual(&residuals);
    if worst > crate::cyclic::DEFAULT_TOL {
        return Err(Error::ResidualCheckFailed {
            context: "closed-form case plug-back".into(),
            residual: worst,
            tolerance: crate::cyclic::DEFAULT_TOL,
        });
    }

    let (report, mut generic_vs_closed) = curvature_report(&connection, &working_metric, lift)?;

    // case intermediates and displays
    let ratio_up = g.translate(1).try_div(&g)?; // G(n+1)/G(n)
    let ratio_down = g.translate(-1).try_div(&g)?; // G(n-1)/G(n)
    let z_plus = &ratio_up - &ratio_up.translate(-1);
    let z_minus = &ratio_up.recip()? - &ratio_down;
    let w_plus = z_plus.try_div(&g)?;
    let w_minus = z_minus.try_div(&g)?;
    let beta = lift.beta();
    let beta_m1 = beta.translate(-1);
    let one_beta_p1 = &one + &beta.translate(1);

    let mut diagnostics = Vec::new();
    let mut ricci_display = Tensor2::zero(n)?;
    let scalar_display;
    match case {
        ClosedCase::A => {
            *ricci_display.slot_mut(Gen::P, Gen::Pt) = (&beta_m1 * &z_plus).scale(gamma);
            *ricci_display.slot_mut(Gen::Pt, Gen::P) =
                (&one_beta_p1 * &z_minus.translate(1)).scale(1.0 / gamma);
            scalar_display = &(&beta_m1 * &w_plus).scale(gamma * gamma)
                + &(&one_beta_p1 * &w_minus.translate(1)).scale(1.0 / gamma);
            diagnostics.extend([
                ("Z+", z_plus.clone()),
                ("Z-", z_minus.clone()),
                ("W+", w_plus.clone()),
                ("W-", w_minus.clone()),
            ]);
        }
        ClosedCase::B | ClosedCase::C => {
            *ricci_display.slot_mut(Gen::P, Gen::Pt) = -&(&beta_m1 * &z_plus);
            *ricci_display.slot_mut(Gen::Pt, Gen::P) = -&(&one_beta_p1 * &z_minus.translate(1));
            if case == ClosedCase::B {
                let s_minus =
                    (&ratio_down - &CyclicFunction::constant(n, 1.0 / (gamma * gamma))?)
                        .scale(gamma * (gamma + 1.0));
                *ricci_display.slot_mut(Gen::P, Gen::P) = &beta_m1 * &s_minus;
                diagnostics.push(("S-", s_minus));
            } else {
                let s_plus = (&ratio_up - &CyclicFunction::constant(n, gamma * gamma)?)
                    .scale((gamma + 1.0) / (gamma * gamma));
                *ricci_display.slot_mut(Gen::Pt, Gen::Pt) = -&(&one_beta_p1 * &s_plus.translate(1));
                diagnostics.push(("S+", s_plus));
            }
            scalar_display = &(&beta_m1 * &w_plus).scale(-gamma) - &(&one_beta_p1 * &w_minus.translate(1));
            diagnostics.extend([
                ("Z+", z_plus.clone()),
                ("Z-", z_minus.clone()),
                ("W+", w_plus.clone()),
                ("W-", w_minus.clone()),
            ]);
        }
        ClosedCase::EvenExtra { .. } => {
            let b_ratio = b_pt.try_div(&b_p)?; // B_p~ / B_p
            let b_ratio_inv = b_ratio.recip()?;
            let v_plus = &(&b_ratio * &ratio_up) - &(&b_ratio_inv * &ratio_down.recip()?);
            let v_minus = &(&b_ratio * &g.translate(1).try_div(&g.translate(2))?)
                - &(&b_ratio_inv * &ratio_up.recip()?);
            let t_minus = &(&b_pt - &one) * &(&ratio_down + &b_pt.recip()?);
            let t_plus =
                &(&b_p - &one) * &(&g.translate(2).try_div(&g.translate(1))? + &b_p.recip()?);
            *ricci_display.slot_mut(Gen::P, Gen::Pt) = &beta_m1 * &v_plus;
            *ricci_display.slot_mut(Gen::Pt, Gen::P) = &one_beta_p1 * &v_minus;
            *ricci_display.slot_mut(Gen::P, Gen::P) = -&(&beta_m1 * &t_minus);
            *ricci_display.slot_mut(Gen::Pt, Gen::Pt) = &one_beta_p1 * &t_plus;
            scalar_display = &(&beta_m1 * &v_plus).try_div(&g)?
                + &(&one_beta_p1 * &v_minus).try_div(&g.translate(1))?;
            diagnostics.extend([
                ("V+", v_plus),
                ("V-", v_minus),
                ("T+", t_plus),
                ("T-", t_minus),
            ]);
        }
    }

    generic_vs_closed = generic_vs_closed
        .max(report.ricci.max_deviation(&ricci_display))
        .max((&report.scalar - &scalar_display).max_abs());

    // the gamma = 1, beta = -1/2 stencil
    let scalar_stencil = match case.stencil_sign() {
        Some(sign)
            if (gamma - 1.0).abs() <= 1e-12
                && beta
                    .constant_value(1e-12)
                    .is_some_and(|b| (b + Complex64::new(0.5, 0.0)).norm() <= 1e-12) =>
        {
            Some(scala_r(&g, sign)?)
        }
        _ => None,
    };

    Ok(CaseReport {
        connection,
        working_metric,
        report,
        diagnostics,
        ricci_display,
        scalar_display,
        scalar_stencil,
        generic_vs_closed,
    })
}

/// The closed scalar-curvature stencil for gamma = 1, beta = -1/2:
///
/// ```text
///   R(n) = +/- 1/2 [ (G(n+1)^3 + G(n)^3) / (G(n+1)^2 G(n)^2)
///                    - (1/G(n-1) + 1/G(n+2)) ]
/// ```
pub fn scala_r(g: &CyclicFunction, sign: Sign) -> Result<CyclicFunction> {
    let up = g.translate(1);
    let a = up.try_div(&(g * g))?;
    let b = g.try_div(&(&up * &up))?;
    let c = g.translate(-1).recip()?;
    let d = g.translate(2).recip()?;
    Ok((&(&a + &b) - &(&c + &d)).scale(0.5 * sign.factor()))
}

/// The same stencil on a finite (non-periodic) real window; `n` must have
/// two neighbors on the left and two on the right inside the slice.
pub fn scala_r_stencil(g: &[f64], n: usize, sign: Sign) -> f64 {
    let (gm1, g0, g1, g2) = (g[n - 1], g[n], g[n + 1], g[n + 2]);
    0.5 * sign.factor() * (g1 / (g0 * g0) + g0 / (g1 * g1) - 1.0 / gm1 - 1.0 / g2)
}

/// One row of the continuous-limit comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow {
    pub n: usize,
    pub max_error: f64,
}

/// Compares the discrete scalar curvature of G(n) = -g(n/N) against the
/// continuous limit +/-(g'' g - g'^2)/g^3, evaluated at the stencil
/// midpoints (n + 1/2)/N after rescaling by N^2. The continuum derivatives
/// are taken by high-order central differences of the sampler.
pub fn continuous_limit_compare(
    g: &dyn Fn(f64) -> f64,
    n_list: &[usize],
    sign: Sign,
) -> Result<Vec<LimitRow>> {
    let limit = |t: f64| {
        let h = 1e-4;
        let d1 = (-g(t + 2.0 * h) + 8.0 * g(t + h) - 8.0 * g(t - h) + g(t - 2.0 * h)) / (12.0 * h);
        let d2 = (-g(t + 2.0 * h) + 16.0 * g(t + h) - 30.0 * g(t) + 16.0 * g(t - h)
            - g(t - 2.0 * h))
            / (12.0 * h * h);
        -sign.factor() * (d2 * g(t) - d1 * d1) / g(t).powi(3)
    };
    continuous_limit_compare_with_limit(g, &limit, n_list, sign)
}

/// Same comparison with a caller-supplied analytic limit function.
pub fn continuous_limit_compare_with_limit(
    g: &dyn Fn(f64) -> f64,
    limit: &dyn Fn(f64) -> f64,
    n_list: &[usize],
    sign: Sign,
) -> Result<Vec<LimitRow>> {
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        crate::calculus::require_calculus_modulus(n)?;
        let profile = CyclicFunction::from_fn(n, |k| {
            let v = g(k as f64 / n as f64);
            Complex64::new(-v, 0.0)
        })?;
        if profile.min_abs() < ZERO_THRESHOLD {
            return Err(Error::InvalidParameter(
                "the continuum profile must stay away from zero".into(),
            ));
        }
        let discrete = scala_r(&profile, sign)?;
        let max_error = (0..n)
            .map(|k| {
                let target = limit((k as f64 + 0.5) / n as f64);
                (discrete.values()[k].re * (n * n) as f64 - target).abs()
            })
            .fold(0.0, f64::max);
        rows.push(LimitRow { n, max_error });
    }
    Ok(rows)
}

/// Least-squares slope of log(error) against log(1/N): the empirical
/// convergence order of a limit table.
pub fn convergence_order(rows: &[LimitRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.max_error > 0.0)
        .map(|r| (-(r.n as f64).ln(), r.max_error.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (sxx, sxy): (f64, f64) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 * p.0, a.1 + p.0 * p.1));
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Abort record of the inverse recursion: the metric collapsed (or its
/// reciprocal did) before the window was filled.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricBlowUp {
    /// Values produced before the abort (including the seeds).
    pub partial: Vec<f64>,
    /// Recursion step at which the abort happened (0-based target index).
    pub step: usize,
    /// The runaway reciprocal value |1/G|.
    pub reciprocal: f64,
}

impl std::fmt::Display for MetricBlowUp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "metric blow-up at step {}: |1/G| = {:.3e} crossed {:.0e}",
            self.step, self.reciprocal, BLOWUP_THRESHOLD
        )
    }
}

/// Solves the gamma = 1, beta = -1/2 stencil for the metric given a target
/// scalar-curvature window: seeds G(0), G(1), G(2) and then
///
/// ```text
///   1/G(n+2) = G(n+1)/G(n)^2 + G(n)/G(n+1)^2 - 1/G(n-1) - 2 R(n)/sign
/// ```
///
/// for n = 1..=len(r). The output has len(r) + 3 values; feeding it back
/// through the stencil reproduces the target exactly up to roundoff.
pub fn inverse_metric(
    r_target: &[f64],
    seeds: [f64; 3],
    sign: Sign,
) -> std::result::Result<Vec<f64>, MetricBlowUp> {
    let mut g = Vec::with_capacity(r_target.len() + 3);
    g.extend_from_slice(&seeds);
    for (i, &r) in r_target.iter().enumerate() {
        let n = i + 1;
        let recip = g[n + 1] / (g[n] * g[n]) + g[n] / (g[n + 1] * g[n + 1])
            - 1.0 / g[n - 1]
            - 2.0 * r * sign.factor();
        if recip.abs() > BLOWUP_THRESHOLD || recip.abs() < 1.0 / BLOWUP_THRESHOLD {
            return Err(MetricBlowUp {
                partial: g,
                step: n + 2,
                reciprocal: recip.abs(),
            });
        }
        g.push(1.0 / recip);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_fn(n: usize, seed: u64) -> CyclicFunction {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(13);
        CyclicFunction::from_fn(n, |_| {
            let mut next = || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            };
            c64(next(), next())
        })
        .unwrap()
    }

    fn random_connection(n: usize, seed: u64) -> Connection {
        Connection::new(
            random_fn(n, seed),
            random_fn(n, seed + 11),
            random_fn(n, seed + 23),
            random_fn(n, seed + 37),
        )
        .unwrap()
    }

    fn random_negative_profile(n: usize, seed: u64) -> CyclicFunction {
        random_fn(n, seed).map(|z| c64(-(0.6 + 0.8 * z.re * z.re), 0.0))
    }

    #[test]
    fn flat_connection_is_flat() {
        let n = 7;
        let c = Connection::identity(n).unwrap();
        let direct = riemann_direct(&c).unwrap();
        assert!(direct[0].max_abs() <= 1e-15 && direct[1].max_abs() <= 1e-15);
        let m = Metric::constant(n, -1.0, -1.0).unwrap();
        let lift = Lift::standard(n).unwrap();
        assert!(ricci_generic(&c, &m, &lift).unwrap().max_abs() <= 1e-15);
        assert!(scalar_generic(&c, &m, &lift).unwrap().max_abs() <= 1e-15);
        assert!(einstein(&c, &m, &lift).unwrap().max_abs() <= 1e-15);
    }

    #[test]
    fn riemann_direct_matches_closed_form() {
        for n in 5..=10 {
            for seed in 0..10 {
                let c = random_connection(n, seed * 131 + n as u64);
                let direct = riemann_direct(&c).unwrap();
                let closed = riemann_closed(&c).unwrap();
                for g in 0..2 {
                    let dev = direct[g].max_deviation(&closed[g]);
                    assert!(dev <= 1e-11, "N = {n}, seed = {seed}: deviation {dev}");
                }
            }
        }
    }

    #[test]
    fn case_iia_riemann_is_nonzero_and_matches() {
        let n = 6;
        let c = Connection::from_constants(n, 1.0, 1.0, 1.0, -1.0).unwrap();
        let direct = riemann_direct(&c).unwrap();
        assert!(direct[1].max_abs() > 0.5);
        let closed = riemann_closed(&c).unwrap();
        assert!(direct[0].max_deviation(&closed[0]) <= 1e-13);
        assert!(direct[1].max_deviation(&closed[1]) <= 1e-13);
    }

    #[test]
    fn ricci_and_scalar_generic_match_closed_displays() {
        for seed in 0..10 {
            let n = 5 + (seed as usize % 4);
            let c = random_connection(n, seed + 1000);
            // random nondegenerate metric
            let g_p = random_fn(n, seed + 1).map(|z| c64(0.7 + z.re * z.re, z.im * 0.3));
            let g_pt = random_fn(n, seed + 2).map(|z| c64(0.7 + z.re * z.re, z.im * 0.3));
            let m = Metric::new(g_p, g_pt).unwrap();
            let lift = Lift::new(random_fn(n, seed + 3));
            let ricci_g = ricci_generic(&c, &m, &lift).unwrap();
            let ricci_c = ricci_closed(&c, &m, &lift).unwrap();
            assert!(ricci_g.max_deviation(&ricci_c) <= 1e-11);
            let sc_g = scalar_generic(&c, &m, &lift).unwrap();
            let sc_c = scalar_closed(&c, &m, &lift).unwrap();
            assert!((&sc_g - &sc_c).max_abs() <= 1e-11);
        }
    }

    #[test]
    fn einstein_contraction_vanishes() {
        for seed in 0..6 {
            let n = 6;
            let c = random_connection(n, seed + 17);
            let g_p = random_fn(n, seed + 4).map(|z| c64(0.8 + z.re * z.re, 0.2 * z.im));
            let g_pt = random_fn(n, seed + 5).map(|z| c64(0.8 + z.re * z.re, 0.2 * z.im));
            let m = Metric::new(g_p, g_pt).unwrap();
            let lift = Lift::standard(n).unwrap();
            match einstein(&c, &m, &lift) {
                Ok(e) => {
                    let contracted = m.contract_tensor2(&e).unwrap();
                    assert!(contracted.max_abs() <= 1e-12);
                }
                Err(Error::VanishingContraction { .. }) => {} // admissible for random metrics
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn closed_cases_agree_with_pipeline_and_flatten_constant_metrics() {
        let n = 6;
        let m = Metric::constant(n, -1.0, -1.0).unwrap();
        let lift = Lift::standard(n).unwrap();
        for case in [
            ClosedCase::A,
            ClosedCase::B,
            ClosedCase::C,
            ClosedCase::EvenExtra {
                swap: false,
                kappa: 0.4,
            },
            ClosedCase::EvenExtra {
                swap: true,
                kappa: -0.3,
            },
        ] {
            let report = scalar_closed_case(&m, 1.0, case, &lift).unwrap();
            assert!(
                report.generic_vs_closed <= 1e-11,
                "case {case:?}: discrepancy {}",
                report.generic_vs_closed
            );
            assert!(
                report.report.scalar.max_abs() <= 1e-12,
                "constant metric must be flat in case {case:?}"
            );
            if let Some(stencil) = &report.scalar_stencil {
                assert!(stencil.max_abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn closed_cases_on_random_profiles() {
        let lift_of = |n: usize, seed| Lift::new(random_fn(n, seed).map(|z| c64(z.re, 0.0)));
        for seed in 0..8 {
            let n = 6 + 2 * (seed as usize % 3);
            let g = random_negative_profile(n, seed + 300);
            let m = Metric::new(g.clone(), g).unwrap();
            let gamma = 0.5 + (seed as f64) * 0.3;
            for case in [ClosedCase::A, ClosedCase::B, ClosedCase::C] {
                let report =
                    scalar_closed_case(&m, gamma, case, &lift_of(n, seed + 400)).unwrap();
                assert!(
                    report.generic_vs_closed <= 1e-11,
                    "case {case:?} gamma {gamma}: discrepancy {}",
                    report.generic_vs_closed
                );
            }
            let report = scalar_closed_case(
                &m,
                1.0,
                ClosedCase::EvenExtra {
                    swap: seed % 2 == 0,
                    kappa: 0.13 + 0.07 * seed as f64,
                },
                &lift_of(n, seed + 500),
            )
            .unwrap();
            assert!(report.generic_vs_closed <= 1e-11);
        }
    }

    #[test]
    fn ellipse_case_a_matches_stencil() {
        let n = 10;
        let m = crate::metric::ellipse_metric(1.0, 1.0, n, false).unwrap();
        let lift = Lift::standard(n).unwrap();
        let report = scalar_closed_case(&m, 1.0, ClosedCase::A, &lift).unwrap();
        let stencil = report.scalar_stencil.as_ref().unwrap();
        assert!((&report.report.scalar - stencil).max_abs() <= 1e-12);

        let m = crate::metric::ellipse_metric(2.0, 1.0, n, false).unwrap();
        let report = scalar_closed_case(&m, 1.0, ClosedCase::A, &lift).unwrap();
        let stencil = report.scalar_stencil.as_ref().unwrap();
        assert!((&report.report.scalar - stencil).max_abs() <= 1e-11);
        assert!(report.report.scalar.max_abs() > 1e-3, "true ellipse curves");
    }

    #[test]
    fn even_extra_scalar_matches_bp_ratio_formula() {
        // R(n) = 1/2 [ (B_p~/B_p)(1/G(n+2) - G(n+1)/G(n)^2)
        //              + (B_p/B_p~)(1/G(n-1) - G(n)/G(n+1)^2) ]
        let n = 8;
        let g = random_negative_profile(n, 77);
        let m = Metric::new(g.clone(), g.clone()).unwrap();
        let lift = Lift::standard(n).unwrap();
        let kappa = 0.35;
        let report = scalar_closed_case(
            &m,
            1.0,
            ClosedCase::EvenExtra { swap: false, kappa },
            &lift,
        )
        .unwrap();
        let b_p = report.connection.b(Gen::P).clone();
        let b_pt = report.connection.b(Gen::Pt).clone();
        let ratio = b_pt.try_div(&b_p).unwrap();
        let ratio_inv = b_p.try_div(&b_pt).unwrap();
        let term1 = &ratio
            * &(&g.translate(2).recip().unwrap()
                - &g.translate(1).try_div(&(&g * &g)).unwrap());
        let term2 = &ratio_inv
            * &(&g.translate(-1).recip().unwrap()
                - &g.try_div(&(&g.translate(1) * &g.translate(1))).unwrap());
        let expected = (&term1 + &term2).scale(0.5);
        assert!((&report.report.scalar - &expected).max_abs() <= 1e-12);
    }

    #[test]
    fn ellipse_einstein_is_finite_and_contracts_to_zero() {
        let n = 20;
        let m = crate::metric::ellipse_metric(2.0, 1.0, n, false).unwrap();
        let lift = Lift::standard(n).unwrap();
        let report = scalar_closed_case(&m, 1.0, ClosedCase::A, &lift).unwrap();
        let einstein = &report.report.einstein;
        assert!(einstein.max_abs().is_finite());
        assert!(einstein.max_abs() > 1e-6, "a true ellipse is not Einstein-flat");
        let contracted = report.working_metric.contract_tensor2(einstein).unwrap();
        assert!(contracted.max_abs() <= 1e-12);
    }

    #[test]
    fn numeric_and_exact_continuum_limits_agree() {
        let g = |t: f64| 2.0 + (2.0 * std::f64::consts::PI * t).cos();
        // exact limit of the minus-sign stencil: +(g'' g - g'^2)/g^3
        let exact = |t: f64| {
            let w = 2.0 * std::f64::consts::PI;
            let d1 = -w * (w * t).sin();
            let d2 = -w * w * (w * t).cos();
            (d2 * g(t) - d1 * d1) / g(t).powi(3)
        };
        let numeric = continuous_limit_compare(&g, &[50, 100], Sign::Minus).unwrap();
        let analytic =
            continuous_limit_compare_with_limit(&g, &exact, &[50, 100], Sign::Minus).unwrap();
        for (a, b) in numeric.iter().zip(&analytic) {
            assert!((a.max_error - b.max_error).abs() <= 1e-6 * (1.0 + b.max_error));
        }
    }

    #[test]
    fn geometric_profile_zeroes_the_stencil() {
        // G(n) = -q^n windowed: the bracket cancels exactly, matching the
        // vanishing continuum limit of g(t) = exp(k t).
        let q: f64 = 1.03;
        let window: Vec<f64> = (0..40).map(|k| -q.powi(k)).collect();
        for n in 1..37 {
            let v = scala_r_stencil(&window, n, Sign::Minus);
            assert!(v.abs() <= 1e-12, "stencil {v} at {n}");
        }
    }

    #[test]
    fn continuous_limit_converges_for_cosine_profile() {
        let g = |t: f64| 2.0 + (2.0 * std::f64::consts::PI * t).cos();
        let rows = continuous_limit_compare(&g, &[50, 100, 200], Sign::Minus).unwrap();
        assert!(rows[0].max_error > rows[1].max_error);
        assert!(rows[1].max_error > rows[2].max_error);
        let order = convergence_order(&rows);
        assert!(order >= 1.0, "measured order {order}");
    }

    #[test]
    fn continuous_limit_constant_profile_is_zero() {
        let g = |_: f64| 1.5;
        let rows = continuous_limit_compare(&g, &[50, 100], Sign::Plus).unwrap();
        for row in rows {
            assert!(row.max_error <= 1e-12);
        }
    }

    #[test]
    fn inverse_flat_target_stays_constant() {
        let r = vec![0.0; 50];
        let g = inverse_metric(&r, [-1.0, -1.0, -1.0], Sign::Minus).unwrap();
        assert_eq!(g.len(), 53);
        for v in &g {
            assert!((v + 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn inverse_round_trips_through_the_stencil() {
        // a completing run: constant positive curvature over 50 steps
        let r = vec![0.1; 50];
        let g = inverse_metric(&r, [-1.0, -1.0, -1.0], Sign::Minus).unwrap();
        assert_eq!(g.len(), 53);
        for (i, &target) in r.iter().enumerate() {
            let v = scala_r_stencil(&g, i + 1, Sign::Minus);
            assert!((v - target).abs() <= 1e-10, "step {i}: {v} vs {target}");
        }
        // nonconstant targets may leave the window early (the orbit is
        // unstable); the identity still holds on every reconstructed point
        let bad: Vec<f64> = (0..50)
            .map(|k| 0.05 * (2.0 * std::f64::consts::PI * k as f64 / 50.0).sin())
            .collect();
        let blow = inverse_metric(&bad, [-1.0, -1.0, -1.0], Sign::Minus).unwrap_err();
        assert!(blow.partial.len() >= 10);
        let mut checked = 0;
        #[allow(clippy::needless_range_loop)]
        for i in 0..blow.partial.len().saturating_sub(3) {
            // |1/G| eps-amplification caps the reproducible precision, so
            // only stencils with O(1) reciprocals are held to 1e-10
            if blow.partial[i..i + 4].iter().any(|g| g.abs() < 1e-4) {
                break;
            }
            let v = scala_r_stencil(&blow.partial, i + 1, Sign::Minus);
            assert!((v - bad[i]).abs() <= 1e-10);
            checked += 1;
        }
        assert!(checked >= 8, "too few verifiable prefix points: {checked}");
    }

    #[test]
    fn inverse_positive_curvature_oscillates() {
        let r = vec![0.1; 60];
        let g = inverse_metric(&r, [-1.0, -1.0, -1.0], Sign::Minus).unwrap();
        // the early window tracks the oscillating orbit before roundoff
        // kicks the iteration off the unstable cycle into decay
        let diffs: Vec<f64> = g[..13].windows(2).map(|w| w[1] - w[0]).collect();
        let alternations = diffs.windows(2).filter(|d| d[0] * d[1] < 0.0).count();
        assert!(
            alternations >= 5,
            "expected an oscillating profile, got {alternations} alternations in {diffs:?}"
        );
        // whereas the constant-curvature-free case is monotone flat
        let flat = inverse_metric(&[0.0; 20], [-1.0, -1.0, -1.0], Sign::Minus).unwrap();
        assert!(flat.windows(2).all(|w| (w[1] - w[0]).abs() < 1e-12));
    }

    #[test]
    fn inverse_negative_curvature_blows_up() {
        let r = vec![-0.05; 2000];
        match inverse_metric(&r, [-1.0, -1.0, -1.0], Sign::Minus) {
            Err(blow) => {
                assert!(blow.reciprocal >= BLOWUP_THRESHOLD || blow.reciprocal <= 1.0 / BLOWUP_THRESHOLD);
                assert!(blow.partial.len() >= 3);
                // the metric decays towards zero before the abort
                let tail = blow.partial[blow.partial.len() - 1].abs();
                assert!(tail < 1e-3);
            }
            Ok(_) => panic!("constant negative curvature must blow up"),
        }
    }
}
