//! Sasaki geodesics on the tangent bundle of the maximal flag manifold
//! whose projection is the one-parameter curve `exp(t w_ij) . o`.
//!
//! A curve is described by its fiber coefficients `x_rs(t)` in the frame of
//! fundamental fields `w_rs*`. Horizontal geodesics are parallel fields,
//! oblique ones solve `x_uv'' = -(sum mu (x')^2) x_uv` on the indices that
//! commute with `w_ij`.

mod curve;
mod horizontal;
mod oblique;
mod transport;

pub use curve::{
    BlockComponent, CurveSpec, FieldAlongBase, FieldJet, Jet, SampledCurve, MIN_SAMPLES,
};
pub use horizontal::{
    classify, horizontal_family_ii, horizontal_residual, solve_horizontal_pair, Block,
    HorizontalPair, HorizontalResidual, IndexRegime, EQUAL_WEIGHT_TOL,
};
pub use oblique::{
    gaussian_growth_integral, oblique_series_argument, oblique_series_coefficients,
    oblique_series_eval, oblique_system_residual, solve_oblique_scalar, solve_oblique_system,
    ObliqueScalarSolution, SERIES_GUARD,
};
pub use transport::{
    covariant_jet, parallel_transport, sasaki_residual, transport_trajectory, CovariantJet,
    SasakiResidual, Transported, TRANSPORT_ATOL, TRANSPORT_RTOL,
};
