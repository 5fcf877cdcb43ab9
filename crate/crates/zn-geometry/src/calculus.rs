//! The minimal bicovariant first-order calculus on Z_N (N > 4).
//!
//! The calculus is generated by the two invariant one-forms theta_p and
//! theta_p~ with
//!
//! ```text
//!   f theta_g = theta_g R_g(f),          theta_p^* = -theta_p~,
//!   d f       = -[theta_p + theta_p~, f],
//!   theta_g /\ theta_h = -theta_h /\ theta_g,   d theta_g = 0,
//!   d omega   = theta /\ omega + omega /\ theta,   theta = -(theta_p + theta_p~).
//! ```
//!
//! All coefficients are stored fully left-normalized: an operation that
//! would put a function to the right of a basis form immediately commutes
//! it back using theta_g f = (R_{g^-1} f) theta_g. This gives every form
//! and tensor a unique canonical representation, so equality testing is
//! pointwise comparison of coefficient functions.
//!
//! Only the antisymmetry consequence of the canonical bicovariant braiding is
//! used for the wedge; the braiding itself is never materialized.

use num_complex::Complex64;

use crate::cyclic::CyclicFunction;
use crate::error::{Error, Result};

/// The two calculus generators: `P` is the group generator +1, `Pt` its
/// inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gen {
    P,
    Pt,
}

impl Gen {
    pub const BOTH: [Gen; 2] = [Gen::P, Gen::Pt];

    pub fn inverse(self) -> Self {
        match self {
            Gen::P => Gen::Pt,
            Gen::Pt => Gen::P,
        }
    }

    /// The translation offset of R_g under the p = +1 convention.
    pub fn shift(self) -> i64 {
        match self {
            Gen::P => 1,
            Gen::Pt => -1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Gen::P => 0,
            Gen::Pt => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Gen::P => "p",
            Gen::Pt => "pt",
        }
    }
}

pub(crate) fn require_calculus_modulus(n: usize) -> Result<()> {
    if n <= 4 {
        return Err(Error::UnsupportedModulus { n });
    }
    Ok(())
}

fn check_modulus(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::ModulusMismatch { left: a, right: b });
    }
    Ok(())
}

/// An element of Omega^1 in the left-coefficient basis:
/// omega = omega_p theta_p + omega_p~ theta_p~.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    coeff: [CyclicFunction; 2],
}

impl OneForm {
    pub fn new(coeff_p: CyclicFunction, coeff_pt: CyclicFunction) -> Result<Self> {
        check_modulus(coeff_p.modulus(), coeff_pt.modulus())?;
        require_calculus_modulus(coeff_p.modulus())?;
        Ok(Self {
            coeff: [coeff_p, coeff_pt],
        })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(CyclicFunction::zero(n)?, CyclicFunction::zero(n)?)
    }

    /// The invariant basis form theta_g.
    pub fn basis(n: usize, g: Gen) -> Result<Self> {
        let mut form = Self::zero(n)?;
        form.coeff[g.index()] = CyclicFunction::one(n)?;
        Ok(form)
    }

    /// theta = -(theta_p + theta_p~), the inner form of the calculus.
    pub fn theta(n: usize) -> Result<Self> {
        Self::new(
            CyclicFunction::constant(n, -1.0)?,
            CyclicFunction::constant(n, -1.0)?,
        )
    }

    pub fn modulus(&self) -> usize {
        self.coeff[0].modulus()
    }

    pub fn coeff(&self, g: Gen) -> &CyclicFunction {
        &self.coeff[g.index()]
    }

    pub fn coeff_p(&self) -> &CyclicFunction {
        self.coeff(Gen::P)
    }

    pub fn coeff_pt(&self) -> &CyclicFunction {
        self.coeff(Gen::Pt)
    }

    /// Left module action f . omega.
    pub fn left_mul(&self, f: &CyclicFunction) -> Self {
        Self {
            coeff: [f * &self.coeff[0], f * &self.coeff[1]],
        }
    }

    /// Right module action omega . f, commuted to the canonical left form:
    /// (omega_a theta_a) f = omega_a (R_{a^-1} f) theta_a.
    pub fn right_mul(&self, f: &CyclicFunction) -> Self {
        Self {
            coeff: [
                &self.coeff[0] * &f.translate(-1),
                &self.coeff[1] * &f.translate(1),
            ],
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            coeff: [
                &self.coeff[0] + &other.coeff[0],
                &self.coeff[1] + &other.coeff[1],
            ],
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coeff: [
                &self.coeff[0] - &other.coeff[0],
                &self.coeff[1] - &other.coeff[1],
            ],
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            coeff: [-&self.coeff[0], -&self.coeff[1]],
        }
    }

    pub fn scale(&self, z: impl Into<Complex64> + Copy) -> Self {
        Self {
            coeff: [self.coeff[0].scale(z), self.coeff[1].scale(z)],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeff[0].max_abs().max(self.coeff[1].max_abs())
    }
}

/// An element of Omega^2; the basis is the single two-form
/// theta_p /\ theta_p~ (which is central, since its group degree is e).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    coeff: CyclicFunction,
}

impl TwoForm {
    pub fn new(coeff: CyclicFunction) -> Result<Self> {
        require_calculus_modulus(coeff.modulus())?;
        Ok(Self { coeff })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(CyclicFunction::zero(n)?)
    }

    pub fn modulus(&self) -> usize {
        self.coeff.modulus()
    }

    pub fn coeff(&self) -> &CyclicFunction {
        &self.coeff
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            coeff: &self.coeff + &other.coeff,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeff.max_abs()
    }
}

/// An element of Omega^1 (x)_A Omega^1 over the ordered basis pairs
/// (a, b) in {p, p~}^2, with all coefficients on the far left.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2 {
    coeff: [[CyclicFunction; 2]; 2],
}

impl Tensor2 {
    pub fn new(coeff: [[CyclicFunction; 2]; 2]) -> Result<Self> {
        let n = coeff[0][0].modulus();
        for row in &coeff {
            for c in row {
                check_modulus(n, c.modulus())?;
            }
        }
        require_calculus_modulus(n)?;
        Ok(Self { coeff })
    }

    pub fn zero(n: usize) -> Result<Self> {
        let z = CyclicFunction::zero(n)?;
        Ok(Self {
            coeff: [[z.clone(), z.clone()], [z.clone(), z]],
        })
    }

    /// theta_a (x) theta_b.
    pub fn basis(n: usize, a: Gen, b: Gen) -> Result<Self> {
        let mut t = Self::zero(n)?;
        t.coeff[a.index()][b.index()] = CyclicFunction::one(n)?;
        Ok(t)
    }

    pub fn modulus(&self) -> usize {
        self.coeff[0][0].modulus()
    }

    pub fn slot(&self, a: Gen, b: Gen) -> &CyclicFunction {
        &self.coeff[a.index()][b.index()]
    }

    pub fn slot_mut(&mut self, a: Gen, b: Gen) -> &mut CyclicFunction {
        &mut self.coeff[a.index()][b.index()]
    }

    /// Left module action f . T.
    pub fn left_mul(&self, f: &CyclicFunction) -> Self {
        self.map_slots(|c, _, _| f * c)
    }

    /// Right module action T . f: the coefficient commutes through both
    /// basis legs, T_{ab} theta_a theta_b f = T_{ab} (R_{a^-1} R_{b^-1} f)
    /// theta_a theta_b.
    pub fn right_mul(&self, f: &CyclicFunction) -> Self {
        self.map_slots(|c, a, b| c * &f.translate(-a.shift() - b.shift()))
    }

    pub fn map_slots(&self, f: impl Fn(&CyclicFunction, Gen, Gen) -> CyclicFunction) -> Self {
        let mk = |a: Gen, b: Gen| f(self.slot(a, b), a, b);
        Self {
            coeff: [
                [mk(Gen::P, Gen::P), mk(Gen::P, Gen::Pt)],
                [mk(Gen::Pt, Gen::P), mk(Gen::Pt, Gen::Pt)],
            ],
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.map_slots(|c, a, b| c + other.slot(a, b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.map_slots(|c, a, b| c - other.slot(a, b))
    }

    pub fn neg(&self) -> Self {
        self.map_slots(|c, _, _| -c)
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in Gen::BOTH {
            for b in Gen::BOTH {
                m = m.max(self.slot(a, b).max_abs());
            }
        }
        m
    }

    /// Max slotwise deviation from another tensor.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }
}

/// An element of Omega^1 (x) Omega^1 (x) Omega^1 over ordered basis triples.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    coeff: [[[CyclicFunction; 2]; 2]; 2],
}

impl Tensor3 {
    pub fn zero(n: usize) -> Result<Self> {
        require_calculus_modulus(n)?;
        let z = CyclicFunction::zero(n)?;
        Ok(Self {
            coeff: [
                [[z.clone(), z.clone()], [z.clone(), z.clone()]],
                [[z.clone(), z.clone()], [z.clone(), z]],
            ],
        })
    }

    pub fn modulus(&self) -> usize {
        self.coeff[0][0][0].modulus()
    }

    pub fn slot(&self, a: Gen, b: Gen, c: Gen) -> &CyclicFunction {
        &self.coeff[a.index()][b.index()][c.index()]
    }

    pub fn slot_mut(&mut self, a: Gen, b: Gen, c: Gen) -> &mut CyclicFunction {
        &mut self.coeff[a.index()][b.index()][c.index()]
    }

    pub fn add(&self, other: &Self) -> Self {
        self.map_slots(|f, a, b, c| f + other.slot(a, b, c))
    }

    pub fn map_slots(
        &self,
        f: impl Fn(&CyclicFunction, Gen, Gen, Gen) -> CyclicFunction,
    ) -> Self {
        let mk = |a: Gen, b: Gen, c: Gen| f(self.slot(a, b, c), a, b, c);
        Self {
            coeff: [
                [
                    [mk(Gen::P, Gen::P, Gen::P), mk(Gen::P, Gen::P, Gen::Pt)],
                    [mk(Gen::P, Gen::Pt, Gen::P), mk(Gen::P, Gen::Pt, Gen::Pt)],
                ],
                [
                    [mk(Gen::Pt, Gen::P, Gen::P), mk(Gen::Pt, Gen::P, Gen::Pt)],
                    [mk(Gen::Pt, Gen::Pt, Gen::P), mk(Gen::Pt, Gen::Pt, Gen::Pt)],
                ],
            ],
        }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in Gen::BOTH {
            for b in Gen::BOTH {
                for c in Gen::BOTH {
                    m = m.max(self.slot(a, b, c).max_abs());
                }
            }
        }
        m
    }

    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.map_slots(|f, a, b, c| f - other.slot(a, b, c)).max_abs()
    }
}

/// d f = -[theta_p + theta_p~, f] = (f - R_p~ f) theta_p + (f - R_p f) theta_p~.
pub fn differential(f: &CyclicFunction) -> Result<OneForm> {
    OneForm::new(f - &f.translate(-1), f - &f.translate(1))
}

/// omega /\ eta, coefficients commuted left before antisymmetrizing:
/// the theta_p /\ theta_p~ coefficient is
/// omega_p (R_p~ eta_p~) - omega_p~ (R_p eta_p).
pub fn wedge(omega: &OneForm, eta: &OneForm) -> Result<TwoForm> {
    check_modulus(omega.modulus(), eta.modulus())?;
    let pos = omega.coeff_p() * &eta.coeff_pt().translate(-1);
    let neg = omega.coeff_pt() * &eta.coeff_p().translate(1);
    TwoForm::new(&pos - &neg)
}

/// d omega = theta /\ omega + omega /\ theta.
pub fn d_one_form(omega: &OneForm) -> Result<TwoForm> {
    let theta = OneForm::theta(omega.modulus())?;
    Ok(wedge(&theta, omega)?.add(&wedge(omega, &theta)?))
}

/// The antilinear star on one-forms: (f theta_g)^* = theta_g^* conj(f)
/// with theta_p^* = -theta_p~, normalized back to left coefficients.
pub fn star(omega: &OneForm) -> OneForm {
    // (f theta_p)^* = -theta_p~ conj(f) = -(R_p conj f) theta_p~ and
    // (f theta_p~)^* = -(R_p~ conj f) theta_p.
    OneForm {
        coeff: [
            -&omega.coeff_pt().conj().translate(-1),
            -&omega.coeff_p().conj().translate(1),
        ],
    }
}

/// omega (x)_A eta with coefficients normalized to the far left:
/// slot (a, b) = omega_a (R_{a^-1} eta_b).
pub fn tensor(omega: &OneForm, eta: &OneForm) -> Result<Tensor2> {
    check_modulus(omega.modulus(), eta.modulus())?;
    let mut out = Tensor2::zero(omega.modulus())?;
    for a in Gen::BOTH {
        for b in Gen::BOTH {
            *out.slot_mut(a, b) = omega.coeff(a) * &eta.coeff(b).translate(-a.shift());
        }
    }
    Ok(out)
}

/// T (x)_A eta for a Tensor2 and a OneForm:
/// slot (a, b, c) = T_{ab} (R_{b^-1} R_{a^-1} eta_c).
pub fn tensor2_with_one_form(t: &Tensor2, eta: &OneForm) -> Result<Tensor3> {
    check_modulus(t.modulus(), eta.modulus())?;
    let mut out = Tensor3::zero(t.modulus())?;
    for a in Gen::BOTH {
        for b in Gen::BOTH {
            for c in Gen::BOTH {
                *out.slot_mut(a, b, c) =
                    t.slot(a, b) * &eta.coeff(c).translate(-a.shift() - b.shift());
            }
        }
    }
    Ok(out)
}

/// omega (x)_A T for a OneForm and a Tensor2:
/// slot (a, b, c) = omega_a (R_{a^-1} T_{bc}).
pub fn one_form_with_tensor2(omega: &OneForm, t: &Tensor2) -> Result<Tensor3> {
    check_modulus(omega.modulus(), t.modulus())?;
    let mut out = Tensor3::zero(t.modulus())?;
    for a in Gen::BOTH {
        for b in Gen::BOTH {
            for c in Gen::BOTH {
                *out.slot_mut(a, b, c) = omega.coeff(a) * &t.slot(b, c).translate(-a.shift());
            }
        }
    }
    Ok(out)
}
