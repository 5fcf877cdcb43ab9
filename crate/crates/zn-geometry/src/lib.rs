//! Noncommutative Riemannian geometry of discretized circles and tori.
//!
//! The crate implements the minimal bicovariant differential calculus on
//! the finite cyclic group Z_N (N > 4) and on products Z_N x Z_M, bimodule
//! metrics on its one-forms, the complete classification of torsion-free
//! metric-compatible bimodule connections, and the associated curvature:
//! Riemann, Ricci, scalar, and Einstein tensors, with closed forms, a
//! continuous-limit comparison, and the inverse metric-from-curvature
//! recursion.
//!
//! Everything is numerical (complex double precision) and residual-driven:
//! each analytic family can be plugged back into the defining equations and
//! the residuals inspected pointwise.
//!
//! Quick tour:
//!
//! ```
//! use zn_geometry::cyclic::CyclicFunction;
//! use zn_geometry::metric::Metric;
//! use zn_geometry::solver::enumerate_connections;
//! use zn_geometry::connection::residual_summary;
//!
//! // the constant metric G = -1 on Z_7 admits exactly three torsion-free
//! // metric-compatible connections
//! let metric = Metric::constant(7, -1.0, -1.0).unwrap();
//! let classification = enumerate_connections(&metric).unwrap();
//! assert_eq!(classification.solutions.len(), 3);
//! for sol in &classification.solutions {
//!     let summary = residual_summary(&sol.connection, &metric).unwrap();
//!     assert!(summary.metric_compat < 1e-12);
//! }
//! # let _ = CyclicFunction::one(7).unwrap();
//! ```

pub mod calculus;
pub mod connection;
pub mod curvature;
pub mod cyclic;
mod dd;
mod error;
pub mod json;
pub mod metric;
pub mod solver;
pub mod torus;

pub use error::{Error, Result};
