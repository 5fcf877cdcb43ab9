//! Bimodule metrics on Omega^1: pairings, contractions, classification
//! flags, and the example-metric generators.
//!
//! A nondegenerate metric is the central element
//! g = G_p theta_p (x) theta_p~ + G_p~ theta_p~ (x) theta_p together with
//! the pairing (theta_a, theta_b) = delta_{a^-1, b} / (R_{a^-1} G_{a^-1}),
//! for everywhere-nonvanishing functions G_p, G_p~.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::calculus::{require_calculus_modulus, Gen, OneForm, Tensor2};
use crate::cyclic::{CyclicFunction, ZERO_THRESHOLD};
use crate::error::{Error, Result};

/// A nondegenerate bimodule metric (G_p, G_p~).
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    g: [CyclicFunction; 2],
}

/// Structure flags of a metric, all judged at an absolute tolerance.
///
/// `is_negative` implies `is_real` by construction. Real negative
/// coefficients are exactly the Hilbert C*-module regime, where
/// <w1, w2> = (w1^*, w2) is a positive-definite inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricFlags {
    pub is_real: bool,
    pub is_negative: bool,
    /// Whether the metric is killed by the wedge (quantum symmetric),
    /// equivalently G_p = G_p~.
    pub is_wedge_compatible: bool,
    /// Left invariance, equivalently both coefficients constant.
    pub is_left_invariant: bool,
}

impl Metric {
    pub fn new(g_p: CyclicFunction, g_pt: CyclicFunction) -> Result<Self> {
        if g_p.modulus() != g_pt.modulus() {
            return Err(Error::ModulusMismatch {
                left: g_p.modulus(),
                right: g_pt.modulus(),
            });
        }
        require_calculus_modulus(g_p.modulus())?;
        if let Some((index, magnitude)) = g_p.vanishing_index() {
            return Err(Error::DegenerateMetric {
                which: "G_p",
                index,
                magnitude,
            });
        }
        if let Some((index, magnitude)) = g_pt.vanishing_index() {
            return Err(Error::DegenerateMetric {
                which: "G_pt",
                index,
                magnitude,
            });
        }
        Ok(Self { g: [g_p, g_pt] })
    }

    /// Constant metric with the given coefficient values.
    pub fn constant(
        n: usize,
        g_p: impl Into<Complex64>,
        g_pt: impl Into<Complex64>,
    ) -> Result<Self> {
        Self::new(
            CyclicFunction::constant(n, g_p)?,
            CyclicFunction::constant(n, g_pt)?,
        )
    }

    pub fn modulus(&self) -> usize {
        self.g[0].modulus()
    }

    pub fn g(&self, gen: Gen) -> &CyclicFunction {
        &self.g[gen.index()]
    }

    pub fn g_p(&self) -> &CyclicFunction {
        self.g(Gen::P)
    }

    pub fn g_pt(&self) -> &CyclicFunction {
        self.g(Gen::Pt)
    }

    /// The metric as the central element of Omega^1 (x) Omega^1.
    pub fn as_tensor2(&self) -> Tensor2 {
        let n = self.modulus();
        let mut t = Tensor2::zero(n).expect("modulus validated at construction");
        *t.slot_mut(Gen::P, Gen::Pt) = self.g_p().clone();
        *t.slot_mut(Gen::Pt, Gen::P) = self.g_pt().clone();
        t
    }

    /// The basis pairing (theta_a, theta_b) = delta_{a^-1,b} / (R_{a^-1} G_{a^-1}).
    ///
    /// Nonvanishing of the metric coefficients is guaranteed at
    /// construction, so the reciprocal always exists.
    pub fn pairing_basis(&self, a: Gen, b: Gen) -> CyclicFunction {
        let n = self.modulus();
        if b != a.inverse() {
            return CyclicFunction::zero(n).expect("valid modulus");
        }
        self.g(a.inverse())
            .translate(a.inverse().shift())
            .recip()
            .expect("metric nonvanishing by construction")
    }

    /// The bimodule pairing of two one-forms:
    /// (omega, eta) = sum_{a} omega_a (R_{a^-1} eta_{a^-1}) (theta_a, theta_{a^-1}).
    pub fn pairing(&self, omega: &OneForm, eta: &OneForm) -> Result<CyclicFunction> {
        if omega.modulus() != self.modulus() || eta.modulus() != self.modulus() {
            return Err(Error::ModulusMismatch {
                left: omega.modulus(),
                right: self.modulus(),
            });
        }
        let term_p = &(omega.coeff_p() * &eta.coeff_pt().translate(-1))
            * &self.pairing_basis(Gen::P, Gen::Pt);
        let term_pt = &(omega.coeff_pt() * &eta.coeff_p().translate(1))
            * &self.pairing_basis(Gen::Pt, Gen::P);
        Ok(&term_p + &term_pt)
    }

    /// Pairing contraction of a left-normalized Tensor2:
    /// (T_(1), T_(2)) = T_pp~ (theta_p, theta_p~) + T_p~p (theta_p~, theta_p).
    pub fn contract_tensor2(&self, t: &Tensor2) -> Result<CyclicFunction> {
        if t.modulus() != self.modulus() {
            return Err(Error::ModulusMismatch {
                left: t.modulus(),
                right: self.modulus(),
            });
        }
        let term_p = t.slot(Gen::P, Gen::Pt) * &self.pairing_basis(Gen::P, Gen::Pt);
        let term_pt = t.slot(Gen::Pt, Gen::P) * &self.pairing_basis(Gen::Pt, Gen::P);
        Ok(&term_p + &term_pt)
    }

    /// Both contractions of the metric. The first is
    /// G_p / (R_p~ G_p~) + G_p~ / (R_p G_p); the second, computed through the
    /// pairing exactly as defined, is identically 2.
    pub fn contractions(&self) -> (CyclicFunction, CyclicFunction) {
        let first = self.contract_tensor2(&self.as_tensor2()).expect("same modulus");
        // (g^(2), g^(1)) = (theta_p~, G_p theta_p) + (theta_p, G_p~ theta_p~)
        let second = &(&self.g_p().translate(1) * &self.pairing_basis(Gen::Pt, Gen::P))
            + &(&self.g_pt().translate(-1) * &self.pairing_basis(Gen::P, Gen::Pt));
        (first, second)
    }

    /// Residuals of the two nondegeneracy identities of the pairing:
    /// (omega, g^(1)) g^(2) - omega and g^(1) (g^(2), omega) - omega.
    pub fn nondegeneracy_residuals(&self, omega: &OneForm) -> Result<(OneForm, OneForm)> {
        let n = self.modulus();
        // (omega, G_p theta_p) theta_p~ + (omega, G_p~ theta_p~) theta_p
        let pair_with = |eta: &OneForm| -> Result<(CyclicFunction, CyclicFunction)> {
            let gp_form = OneForm::basis(n, Gen::P)?.left_mul(self.g_p());
            let gpt_form = OneForm::basis(n, Gen::Pt)?.left_mul(self.g_pt());
            Ok((self.pairing(eta, &gp_form)?, self.pairing(eta, &gpt_form)?))
        };
        let (on_p, on_pt) = pair_with(omega)?;
        let first = OneForm::new(on_pt, on_p)?.sub(omega);

        // g^(1) (g^(2), omega): coefficients commute through theta_g
        let pt_omega = self.pairing(&OneForm::basis(n, Gen::Pt)?, omega)?;
        let p_omega = self.pairing(&OneForm::basis(n, Gen::P)?, omega)?;
        let second = OneForm::new(
            self.g_p() * &pt_omega.translate(-1),
            self.g_pt() * &p_omega.translate(1),
        )?
        .sub(omega);
        Ok((first, second))
    }

    /// Reality, negativity, wedge compatibility, and left invariance flags.
    pub fn classify(&self, tol: f64) -> MetricFlags {
        let max_imag = self
            .g
            .iter()
            .flat_map(|g| g.values())
            .map(|z| z.im.abs())
            .fold(0.0, f64::max);
        let is_real = max_imag <= tol;
        let is_negative = is_real
            && self
                .g
                .iter()
                .flat_map(|g| g.values())
                .all(|z| z.re < -ZERO_THRESHOLD);
        let is_wedge_compatible = self
            .g_p()
            .approx_eq(self.g_pt(), tol)
            .expect("same modulus")
            .within;
        let is_left_invariant = self.g_p().constant_value(tol).is_some()
            && self.g_pt().constant_value(tol).is_some();
        MetricFlags {
            is_real,
            is_negative,
            is_wedge_compatible,
            is_left_invariant,
        }
    }

    /// Max |Im G_g| over both coefficients.
    pub fn max_imag(&self) -> f64 {
        self.g
            .iter()
            .flat_map(|g| g.values())
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }
}

/// Metric of an N-gon inscribed in the ellipse x^2/a^2 + y^2/b^2 = 1, with
/// vertices at angles 2 pi k / N and G(k) = -(chord length from vertex k to
/// k+1)^2 on both generators.
///
/// With `continuum_scale`, G is multiplied by (N / 2 pi)^2 so that chord
/// lengths are measured against the unit-speed parametrization.
pub fn ellipse_metric(a: f64, b: f64, n: usize, continuum_scale: bool) -> Result<Metric> {
    require_calculus_modulus(n)?;
    if a < ZERO_THRESHOLD || b < ZERO_THRESHOLD {
        return Err(Error::InvalidParameter(format!(
            "degenerate ellipse axes a = {a}, b = {b}"
        )));
    }
    let point = |k: usize| {
        let t = 2.0 * PI * k as f64 / n as f64;
        (a * t.cos(), b * t.sin())
    };
    let scale = if continuum_scale {
        (n as f64 / (2.0 * PI)).powi(2)
    } else {
        1.0
    };
    let g = CyclicFunction::from_fn(n, |k| {
        let (x0, y0) = point(k);
        let (x1, y1) = point((k + 1) % n);
        let chord_sq = (x1 - x0).powi(2) + (y1 - y0).powi(2);
        Complex64::new(-chord_sq * scale, 0.0)
    })?;
    Metric::new(g.clone(), g)
}

/// Reconstructs a metric from a target profile X_p = X and a seed for G_p:
/// G_p = seed and G_p~(n) = G_p(n+1) / X(n).
pub fn metric_from_x(x: &CyclicFunction, g_p_seed: &CyclicFunction) -> Result<Metric> {
    if let Some((index, magnitude)) = x.vanishing_index() {
        return Err(Error::DegenerateMetric {
            which: "X",
            index,
            magnitude,
        });
    }
    let g_pt = g_p_seed.translate(1).try_div(x)?;
    Metric::new(g_p_seed.clone(), g_pt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{nonconstant_x, x_profile};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_metric(n: usize, seed: u64) -> Metric {
        let mut state = seed.wrapping_mul(0x2545F4914F6CDD1D).wrapping_add(7);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut coeff = || {
            CyclicFunction::from_fn(n, |_| {
                // keep away from zero
                let r = 0.5 + 1.5 * next();
                let phi = 2.0 * PI * next();
                Complex64::from_polar(r, phi)
            })
            .unwrap()
        };
        Metric::new(coeff(), coeff()).unwrap()
    }

    #[test]
    fn degenerate_metrics_are_rejected() {
        let mut values = vec![c(-1.0, 0.0); 6];
        values[2] = c(0.0, 0.0);
        let g = CyclicFunction::new(values).unwrap();
        match Metric::new(g, CyclicFunction::constant(6, -1.0).unwrap()) {
            Err(Error::DegenerateMetric { index: 2, .. }) => {}
            other => panic!("expected degenerate metric, got {other:?}"),
        }
    }

    #[test]
    fn basis_pairing_selects_inverse_generator() {
        let m = Metric::constant(6, -1.0, -1.0).unwrap();
        assert_eq!(m.pairing_basis(Gen::P, Gen::P).max_abs(), 0.0);
        let tp = OneForm::basis(6, Gen::P).unwrap();
        assert_eq!(m.pairing(&tp, &tp).unwrap().max_abs(), 0.0);
        // (theta_p, theta_p~) = 1/(R_p~ G_p~) = -1 for G_p~ = -1
        let tpt = OneForm::basis(6, Gen::Pt).unwrap();
        let pair = m.pairing(&tp, &tpt).unwrap();
        assert!(pair
            .approx_eq(&CyclicFunction::constant(6, -1.0).unwrap(), 0.0)
            .unwrap()
            .within);
    }

    #[test]
    fn nondegeneracy_identities_hold() {
        for seed in 0..10 {
            let m = random_metric(7, seed);
            let omega = OneForm::new(
                random_metric(7, seed + 31).g_p().clone(),
                random_metric(7, seed + 57).g_pt().clone(),
            )
            .unwrap();
            let (r1, r2) = m.nondegeneracy_residuals(&omega).unwrap();
            assert!(r1.max_abs() <= 1e-12, "first identity: {}", r1.max_abs());
            assert!(r2.max_abs() <= 1e-12, "second identity: {}", r2.max_abs());
        }
    }

    #[test]
    fn second_contraction_is_two() {
        for seed in 0..10 {
            let m = random_metric(8, seed);
            let (_, second) = m.contractions();
            assert!(second
                .approx_eq(&CyclicFunction::constant(8, 2.0).unwrap(), 1e-13)
                .unwrap()
                .within);
        }
    }

    #[test]
    fn constant_metric_first_contraction() {
        let m = Metric::constant(6, -1.0, -1.0).unwrap();
        let (first, _) = m.contractions();
        assert!(first
            .approx_eq(&CyclicFunction::constant(6, 2.0).unwrap(), 1e-14)
            .unwrap()
            .within);
    }

    #[test]
    fn case_one_family_first_contraction_is_c() {
        // For a metric built from f_{l,phi}, the first contraction is the
        // constant c = 2 cos(pi l / N).
        let n = 6;
        let l = 2;
        let x = nonconstant_x(n, l, c(0.9, 0.0)).unwrap();
        let seed = CyclicFunction::constant(n, -1.0).unwrap();
        let m = metric_from_x(&x, &seed).unwrap();
        let (first, _) = m.contractions();
        let expected = 2.0 * (PI * l as f64 / n as f64).cos();
        assert!(first
            .approx_eq(&CyclicFunction::constant(n, expected).unwrap(), 1e-12)
            .unwrap()
            .within);
    }

    #[test]
    fn classify_flags() {
        let all = Metric::constant(6, -2.0, -2.0).unwrap().classify(1e-10);
        assert!(all.is_real && all.is_negative && all.is_wedge_compatible && all.is_left_invariant);

        let n = 6;
        let g = CyclicFunction::from_fn(n, |k| c(-1.0 - k as f64 / n as f64, 0.0)).unwrap();
        let flags = Metric::new(g.clone(), g).unwrap().classify(1e-10);
        assert!(flags.is_real && flags.is_negative);
        assert!(!flags.is_left_invariant);
        assert!(flags.is_wedge_compatible);

        let mixed = Metric::constant(6, -1.0, -2.0).unwrap().classify(1e-10);
        assert!(!mixed.is_wedge_compatible);

        let complexm = Metric::constant(6, c(-1.0, 0.5), c(-1.0, 0.5))
            .unwrap()
            .classify(1e-10);
        assert!(!complexm.is_real && !complexm.is_negative);
    }

    #[test]
    fn classify_is_scale_invariant_up_to_sign() {
        let m = random_metric(7, 3);
        let real = Metric::new(m.g_p().map(|z| c(-z.norm(), 0.0)), m.g_pt().map(|z| c(-z.norm(), 0.0))).unwrap();
        let scaled = Metric::new(real.g_p().scale(2.5), real.g_pt().scale(2.5)).unwrap();
        assert_eq!(real.classify(1e-10), scaled.classify(1e-10));
        let flipped = Metric::new(real.g_p().scale(-1.0), real.g_pt().scale(-1.0)).unwrap();
        assert!(!flipped.classify(1e-10).is_negative);
        assert!(flipped.classify(1e-10).is_real);
    }

    #[test]
    fn hexagon_chord_is_unit() {
        // regular hexagon on the unit circle: chord = 2 sin(pi/6) = 1
        let m = ellipse_metric(1.0, 1.0, 6, false).unwrap();
        assert!(m
            .g_p()
            .approx_eq(&CyclicFunction::constant(6, -1.0).unwrap(), 1e-14)
            .unwrap()
            .within);
        assert!(matches!(
            ellipse_metric(1.0, 1.0, 4, false),
            Err(Error::UnsupportedModulus { n: 4 })
        ));
    }

    #[test]
    fn ellipse_metric_scales_quadratically() {
        let m1 = ellipse_metric(2.0, 1.0, 10, false).unwrap();
        let m2 = ellipse_metric(6.0, 3.0, 10, false).unwrap();
        let scaled = m1.g_p().scale(9.0);
        assert!(m2.g_p().approx_eq(&scaled, 1e-12).unwrap().within);
    }

    #[test]
    fn ellipse_chord_matches_coordinate_oracle() {
        // direct chord computation at k = 0 for a = 2, b = 1, N = 10
        let n = 10;
        let (a, b) = (2.0, 1.0);
        let t = 2.0 * PI / n as f64;
        let expected = -((a * t.cos() - a).powi(2) + (b * t.sin()).powi(2));
        let m = ellipse_metric(a, b, n, false).unwrap();
        assert!((m.g_p().values()[0].re - expected).abs() < 1e-14);
        assert!(m.g_p().values()[0].im == 0.0);
    }

    #[test]
    fn metric_from_x_constant_cases() {
        let n = 6;
        let seed = CyclicFunction::constant(n, -1.0).unwrap();
        let one = CyclicFunction::one(n).unwrap();
        let m = metric_from_x(&one, &seed).unwrap();
        assert!(m
            .g_pt()
            .approx_eq(&CyclicFunction::constant(n, -1.0).unwrap(), 1e-14)
            .unwrap()
            .within);

        let gamma = c(2.0, 0.0);
        let m = metric_from_x(&CyclicFunction::constant(n, gamma).unwrap(), &seed).unwrap();
        assert!(m
            .g_pt()
            .approx_eq(&CyclicFunction::constant(n, -0.5).unwrap(), 1e-14)
            .unwrap()
            .within);
    }

    #[test]
    fn metric_from_x_round_trips_x_profile() {
        let n = 6;
        let x = nonconstant_x(n, 3, c(1.0, 0.0)).unwrap();
        let seed = CyclicFunction::constant(n, -1.0).unwrap();
        let m = metric_from_x(&x, &seed).unwrap();
        let profile = x_profile(&m);
        assert!(profile.x_p.approx_eq(&x, 1e-12).unwrap().within);
        // l = 3 on Z_6 sits at c = 2 cos(pi/2) = 0
        assert!(profile.c.unwrap().norm() < 1e-12);
    }
}
