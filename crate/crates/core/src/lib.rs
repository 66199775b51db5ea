//! Geodesics on the tangent bundle of the maximal real flag manifold
//! `SO(n)/S(O(1) x ... x O(1))` with the Sasaki metric of a diagonal
//! invariant metric, together with the exact `n = 2` hyperboloid model and a
//! numerical ODE oracle used to check every closed form.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hyperboloid;
pub mod invariant_metric;
pub mod ode;
pub mod semidirect;
pub mod so_algebra;
pub mod tangent_geodesics;

pub use error::{Error, Result};
pub use hyperboloid::{ChartPoint, HyperboloidPoint};
pub use invariant_metric::DiagonalMetric;
pub use semidirect::{GStarElement, TangentPoint};
pub use so_algebra::{AlgebraVector, SkewMatrix};
