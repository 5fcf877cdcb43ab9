//! Complex-valued functions on Z_N and on Z_N x Z_M grids.
//!
//! Everything downstream (forms, metrics, connections, curvature) is built
//! from pointwise arithmetic and group translations of these functions.
//! The generator convention is fixed once and for all: p corresponds to the
//! residue +1, its inverse p~ to -1, and the right translation acts as
//! (R_p f)(n) = f(n + 1).

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute threshold separating genuine zeros from roundoff; metric values
/// are O(1) in every worked example.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Default absolute tolerance for residual suites (formulas involve at most
/// a handful of multiplications/divisions of O(1) quantities).
pub const DEFAULT_TOL: f64 = 1e-10;

fn wrap(index: i64, modulus: usize) -> usize {
    index.rem_euclid(modulus as i64) as usize
}

/// Outcome of an absolute comparison of two functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationReport {
    /// Whether the maximum deviation is within the requested tolerance.
    pub within: bool,
    /// max_n |f(n) - g(n)|.
    pub max_deviation: f64,
    /// Index realizing the maximum.
    pub argmax: usize,
}

/// Pointwise operations exposed through [`CyclicFunction::pointwise`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointwiseOp {
    Add,
    Sub,
    Mul,
    Div,
    Conj,
    Scale(Complex64),
}

/// A complex-valued function on Z_N, stored by residue 0..N-1.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicFunction {
    modulus: usize,
    values: Vec<Complex64>,
}

impl CyclicFunction {
    /// Wraps a value vector; the modulus is the vector length.
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::ModulusTooSmall { n: values.len() });
        }
        Ok(Self {
            modulus: values.len(),
            values,
        })
    }

    /// Builds a function by evaluating `f` on residues 0..N-1.
    pub fn from_fn(modulus: usize, f: impl FnMut(usize) -> Complex64) -> Result<Self> {
        Self::new((0..modulus).map(f).collect())
    }

    /// The constant function.
    pub fn constant(modulus: usize, value: impl Into<Complex64>) -> Result<Self> {
        let value = value.into();
        Self::new(vec![value; modulus])
    }

    /// The zero function.
    pub fn zero(modulus: usize) -> Result<Self> {
        Self::constant(modulus, 0.0)
    }

    /// The constant one.
    pub fn one(modulus: usize) -> Result<Self> {
        Self::constant(modulus, 1.0)
    }

    /// The point indicator e_g with e_g(h) = delta_{g,h}.
    pub fn indicator(modulus: usize, at: usize) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::ModulusTooSmall { n: modulus });
        }
        if at >= modulus {
            return Err(Error::InvalidParameter(format!(
                "indicator point {at} outside 0..{modulus}"
            )));
        }
        Self::from_fn(modulus, |n| {
            if n == at {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at an arbitrary (wrapping) integer index.
    pub fn get(&self, index: i64) -> Complex64 {
        self.values[wrap(index, self.modulus)]
    }

    /// Right translation by k generators: result(n) = f(n + k).
    ///
    /// `translate(f, 1)` is R_p, `translate(f, -1)` is R_p~.
    pub fn translate(&self, k: i64) -> Self {
        Self {
            modulus: self.modulus,
            values: (0..self.modulus)
                .map(|n| self.get(n as i64 + k))
                .collect(),
        }
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    /// Multiplication by a scalar.
    pub fn scale(&self, z: impl Into<Complex64>) -> Self {
        let z = z.into();
        self.map(|v| v * z)
    }

    /// Applies `f` to every value.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            modulus: self.modulus,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    fn check_same_modulus(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            });
        }
        Ok(())
    }

    /// Pointwise division, rejecting divisors below [`ZERO_THRESHOLD`].
    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        self.check_same_modulus(rhs)?;
        let mut values = Vec::with_capacity(self.modulus);
        for (n, (&a, &b)) in self.values.iter().zip(&rhs.values).enumerate() {
            if b.norm() < ZERO_THRESHOLD {
                return Err(Error::DivisionByZero {
                    index: n,
                    magnitude: b.norm(),
                    threshold: ZERO_THRESHOLD,
                });
            }
            values.push(a / b);
        }
        Ok(Self {
            modulus: self.modulus,
            values,
        })
    }

    /// Pointwise reciprocal 1/f.
    pub fn recip(&self) -> Result<Self> {
        Self::one(self.modulus)?.try_div(self)
    }

    /// Dispatcher form of the pointwise algebra operations.
    ///
    /// `Conj` and `Scale` ignore `other`; the binary operations require it.
    pub fn pointwise(&self, other: Option<&Self>, op: PointwiseOp) -> Result<Self> {
        let binary = |name: &str| -> Result<&Self> {
            other.ok_or_else(|| {
                Error::InvalidParameter(format!("pointwise {name} needs a second operand"))
            })
        };
        match op {
            PointwiseOp::Add => {
                let g = binary("add")?;
                self.check_same_modulus(g)?;
                Ok(self + g)
            }
            PointwiseOp::Sub => {
                let g = binary("sub")?;
                self.check_same_modulus(g)?;
                Ok(self - g)
            }
            PointwiseOp::Mul => {
                let g = binary("mul")?;
                self.check_same_modulus(g)?;
                Ok(self * g)
            }
            PointwiseOp::Div => self.try_div(binary("div")?),
            PointwiseOp::Conj => Ok(self.conj()),
            PointwiseOp::Scale(z) => Ok(self.scale(z)),
        }
    }

    /// max_n |f(n)|.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// min_n |f(n)|.
    pub fn min_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the first vanishing value, if any.
    pub fn vanishing_index(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .enumerate()
            .find(|(_, z)| z.norm() < ZERO_THRESHOLD)
            .map(|(n, z)| (n, z.norm()))
    }

    /// Absolute comparison with a max-deviation report.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> Result<DeviationReport> {
        self.check_same_modulus(other)?;
        let (argmax, max_deviation) = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).norm())
            .enumerate()
            .fold((0, 0.0), |acc, (n, d)| if d > acc.1 { (n, d) } else { acc });
        Ok(DeviationReport {
            within: max_deviation <= tol,
            max_deviation,
            argmax,
        })
    }

    /// Arithmetic mean of the values.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.modulus as f64
    }

    /// Returns the mean if the function deviates from it by at most `tol`.
    pub fn constant_value(&self, tol: f64) -> Option<Complex64> {
        let mean = self.mean();
        self.values
            .iter()
            .all(|z| (z - mean).norm() <= tol)
            .then_some(mean)
    }

    /// Product of all values over one period.
    pub fn period_product(&self) -> Complex64 {
        self.values.iter().product()
    }

    /// Running products prod_{k < n} f(k) for n = 0..N-1 (empty product = 1).
    pub fn running_products(&self) -> Vec<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        self.values
            .iter()
            .map(|&z| {
                let out = acc;
                acc *= z;
                out
            })
            .collect()
    }
}

macro_rules! cyclic_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &CyclicFunction {
            type Output = CyclicFunction;
            fn $method(self, rhs: &CyclicFunction) -> CyclicFunction {
                assert_eq!(
                    self.modulus, rhs.modulus,
                    "modulus mismatch in pointwise arithmetic"
                );
                CyclicFunction {
                    modulus: self.modulus,
                    values: self
                        .values
                        .iter()
                        .zip(&rhs.values)
                        .map(|(&a, &b)| a $op b)
                        .collect(),
                }
            }
        }
    };
}

cyclic_binop!(Add, add, +);
cyclic_binop!(Sub, sub, -);
cyclic_binop!(Mul, mul, *);

impl Neg for &CyclicFunction {
    type Output = CyclicFunction;
    fn neg(self) -> CyclicFunction {
        self.map(|z| -z)
    }
}

/// A complex-valued function on the grid Z_N x Z_M, row index in Z_N.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    moduli: (usize, usize),
    values: Vec<Complex64>, // row-major, N rows of M values
}

impl GridFunction {
    pub fn new(n: usize, m: usize, values: Vec<Complex64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::ModulusTooSmall { n });
        }
        if m < 2 {
            return Err(Error::ModulusTooSmall { n: m });
        }
        if values.len() != n * m {
            return Err(Error::InvalidParameter(format!(
                "grid value count {} does not match {n} x {m}",
                values.len()
            )));
        }
        Ok(Self {
            moduli: (n, m),
            values,
        })
    }

    pub fn from_fn(n: usize, m: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                values.push(f(i, j));
            }
        }
        Self::new(n, m, values)
    }

    pub fn constant(n: usize, m: usize, value: impl Into<Complex64>) -> Result<Self> {
        let value = value.into();
        Self::new(n, m, vec![value; n * m])
    }

    pub fn zero(n: usize, m: usize) -> Result<Self> {
        Self::constant(n, m, 0.0)
    }

    /// Extends a circle function constantly along the second (Z_M) axis.
    pub fn from_circle_n(f: &CyclicFunction, m: usize) -> Result<Self> {
        Self::from_fn(f.modulus(), m, |i, _| f.values()[i])
    }

    /// Extends a circle function constantly along the first (Z_N) axis.
    pub fn from_circle_m(f: &CyclicFunction, n: usize) -> Result<Self> {
        Self::from_fn(n, f.modulus(), |_, j| f.values()[j])
    }

    pub fn moduli(&self) -> (usize, usize) {
        self.moduli
    }

    /// Row-major values: N rows of M entries.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, i: i64, j: i64) -> Complex64 {
        let (n, m) = self.moduli;
        self.values[wrap(i, n) * m + wrap(j, m)]
    }

    /// Translation by (dn, dm): result(i, j) = f(i + dn, j + dm).
    pub fn translate(&self, dn: i64, dm: i64) -> Self {
        let (n, m) = self.moduli;
        Self {
            moduli: self.moduli,
            values: (0..n * m)
                .map(|k| self.get((k / m) as i64 + dn, (k % m) as i64 + dm))
                .collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, z: impl Into<Complex64>) -> Self {
        let z = z.into();
        self.map(|v| v * z)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            moduli: self.moduli,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.moduli != other.moduli {
            return Err(Error::GridShapeMismatch {
                left: self.moduli,
                right: other.moduli,
            });
        }
        Ok(())
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        let mut values = Vec::with_capacity(self.values.len());
        for (k, (&a, &b)) in self.values.iter().zip(&rhs.values).enumerate() {
            if b.norm() < ZERO_THRESHOLD {
                return Err(Error::DivisionByZero {
                    index: k,
                    magnitude: b.norm(),
                    threshold: ZERO_THRESHOLD,
                });
            }
            values.push(a / b);
        }
        Ok(Self {
            moduli: self.moduli,
            values,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn vanishing_index(&self) -> Option<(usize, usize, f64)> {
        let m = self.moduli.1;
        self.values
            .iter()
            .enumerate()
            .find(|(_, z)| z.norm() < ZERO_THRESHOLD)
            .map(|(k, z)| (k / m, k % m, z.norm()))
    }
}

macro_rules! grid_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &GridFunction {
            type Output = GridFunction;
            fn $method(self, rhs: &GridFunction) -> GridFunction {
                assert_eq!(
                    self.moduli, rhs.moduli,
                    "grid shape mismatch in pointwise arithmetic"
                );
                GridFunction {
                    moduli: self.moduli,
                    values: self
                        .values
                        .iter()
                        .zip(&rhs.values)
                        .map(|(&a, &b)| a $op b)
                        .collect(),
                }
            }
        }
    };
}

grid_binop!(Add, add, +);
grid_binop!(Sub, sub, -);
grid_binop!(Mul, mul, *);

impl Neg for &GridFunction {
    type Output = GridFunction;
    fn neg(self) -> GridFunction {
        self.map(|z| -z)
    }
}
