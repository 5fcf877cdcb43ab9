//! Minimal double-double (compensated) arithmetic for the solver internals.
//!
//! The classification formulas divide by quantities like 1 + R_g X_g that
//! can pass arbitrarily close to zero while the inputs stay O(1). Evaluated
//! naively in f64 the resulting connection coefficients lose half their
//! digits and the plug-back residuals inherit the damage. Carrying the
//! branch construction in ~31-digit double-double precision and rounding at
//! the end returns the correctly rounded solution, so the f64 residual
//! suite sees only evaluation roundoff.

use num_complex::Complex64;

/// An unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, f64::mul_add(a, b, -p))
}

impl Dd {
    pub(crate) const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub(crate) const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub(crate) fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[cfg(test)]
    pub(crate) fn abs(self) -> f64 {
        self.to_f64().abs()
    }

    pub(crate) fn neg(self) -> Self {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub(crate) fn add(self, other: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    pub(crate) fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    pub(crate) fn mul(self, other: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    pub(crate) fn div(self, other: Self) -> Self {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul(Dd::from_f64(q1)));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul(Dd::from_f64(q2)));
        let q3 = r.hi / other.hi;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }
}

/// Complex number with double-double components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub(crate) const ONE: Cdd = Cdd {
        re: Dd::ONE,
        im: Dd::ZERO,
    };

    pub(crate) fn from_c64(z: Complex64) -> Self {
        Cdd {
            re: Dd::from_f64(z.re),
            im: Dd::from_f64(z.im),
        }
    }

    pub(crate) fn from_f64(v: f64) -> Self {
        Cdd {
            re: Dd::from_f64(v),
            im: Dd::ZERO,
        }
    }

    pub(crate) fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub(crate) fn abs(self) -> f64 {
        self.to_c64().norm()
    }

    pub(crate) fn neg(self) -> Self {
        Cdd {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub(crate) fn add(self, other: Self) -> Self {
        Cdd {
            re: self.re.add(other.re),
            im: self.im.add(other.im),
        }
    }

    pub(crate) fn sub(self, other: Self) -> Self {
        Cdd {
            re: self.re.sub(other.re),
            im: self.im.sub(other.im),
        }
    }

    pub(crate) fn mul(self, other: Self) -> Self {
        Cdd {
            re: self.re.mul(other.re).sub(self.im.mul(other.im)),
            im: self.re.mul(other.im).add(self.im.mul(other.re)),
        }
    }

    pub(crate) fn div(self, other: Self) -> Self {
        let denom = other.re.mul(other.re).add(other.im.mul(other.im));
        let re = self.re.mul(other.re).add(self.im.mul(other.im)).div(denom);
        let im = self.im.mul(other.re).sub(self.re.mul(other.im)).div(denom);
        Cdd { re, im }
    }

    pub(crate) fn recip(self) -> Self {
        Cdd::ONE.div(self)
    }
}
