//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Two functions/forms living on different cyclic groups were combined.
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: usize, right: usize },

    /// Grid shapes disagree.
    #[error("grid shape mismatch: {left:?} vs {right:?}")]
    GridShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    /// A cyclic function needs at least two points.
    #[error("modulus {n} too small: cyclic functions require N >= 2")]
    ModulusTooSmall { n: usize },

    /// Calculus-level objects exist only for N > 4: for N = 2, 3, 4 the
    /// generator p and its inverse fail p^2 != p~^2 and the two-function
    /// parametrization of sigma breaks down.
    #[error(
        "modulus {n} unsupported: the minimal calculus on Z_N and its connection \
         classification require N > 4 (for N in {{2, 3, 4}} the generator and its \
         inverse satisfy degenerate relations such as p^2 = p~^2)"
    )]
    UnsupportedModulus { n: usize },

    /// Pointwise division hit a value below the zero threshold.
    #[error(
        "division by a value of magnitude {magnitude:.3e} at index {index} \
         (below the zero threshold {threshold:.0e})"
    )]
    DivisionByZero {
        index: usize,
        magnitude: f64,
        threshold: f64,
    },

    /// A metric coefficient vanishes somewhere.
    #[error(
        "degenerate metric: |{which}({index})| = {magnitude:.3e} is below the zero threshold"
    )]
    DegenerateMetric {
        which: &'static str,
        index: usize,
        magnitude: f64,
    },

    /// The nonconstant-X family parameter phi sits on (or too close to) a
    /// cotangent pole, where the family values blow up.
    #[error(
        "phi is within {tolerance:.0e} of a cotangent pole of the f_(l,phi) family \
         (|sin(phi - pi*l*(n+1)/N)| = {magnitude:.3e} at n = {index})"
    )]
    CotangentPole {
        index: usize,
        magnitude: f64,
        tolerance: f64,
    },

    /// Family index l out of range.
    #[error("family index l = {l} out of range 1..={max}")]
    FamilyIndexOutOfRange { l: usize, max: usize },

    /// No torsion-free metric-compatible connection exists: the constancy
    /// condition X_g + 1/(R_g X_g) = const fails for this metric.
    #[error(
        "no compatible connection: X_g + 1/(R_g X_g) is not constant \
         (max deviation {deviation:.3e} at n = {index})"
    )]
    NonConstantContraction { deviation: f64, index: usize },

    /// A classification branch is excluded (vanishing denominator, parity,
    /// or an invertibility requirement).
    #[error("connection family excluded: {0}")]
    FamilyExcluded(String),

    /// The kappa product constraint is undefined at c = -2 (only the constant
    /// solution X = -1 exists there).
    #[error("kappa constraint inapplicable: c = -2 admits only the constant solution X = -1")]
    KappaConstraintUndefined,

    /// Star-compatibility filtering expects a real metric.
    #[error("star filtering requires a real metric (max |Im G| = {imag:.3e})")]
    MetricNotReal { imag: f64 },

    /// The Einstein tensor needs a nonvanishing first metric contraction.
    #[error("first metric contraction vanishes at n = {index}; Einstein tensor undefined")]
    VanishingContraction { index: usize },

    /// The alternating torus family needs both moduli even.
    #[error("the alternating family requires both N and M even: got N = {n}, M = {m}")]
    ParityRequired { n: usize, m: usize },

    /// Generic invalid-parameter error.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A residual suite failed where a verified solution was required.
    #[error("residual check failed: {context} has max residual {residual:.3e} > {tolerance:.0e}")]
    ResidualCheckFailed {
        context: String,
        residual: f64,
        tolerance: f64,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
