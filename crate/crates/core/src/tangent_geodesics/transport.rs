//! Parallel transport along `exp(t w_ij) . o` and the Sasaki geodesic residual.

use crate::error::{Error, Result};
use crate::invariant_metric::DiagonalMetric;
use crate::ode::{rk_adaptive, AdaptiveOptions, IvpProblem, Trajectory};
use crate::so_algebra::{check_index, AlgebraVector};

use super::curve::FieldAlongBase;

/// Tolerances used by [`parallel_transport`].
pub const TRANSPORT_RTOL: f64 = 1e-12;
pub const TRANSPORT_ATOL: f64 = 1e-14;

/// A transported vector in two coordinate systems.
#[derive(Clone, Debug, PartialEq)]
pub struct Transported {
    /// Fundamental-field coordinates `X(t)`: the vector is `X(t)*(zeta(t))`.
    pub fiber: AlgebraVector,
    /// Body-frame coordinates `e^{-t ad w_ij} X(t)`, i.e. the vector pulled
    /// back to the origin. Its `g`-norm is the Riemannian length.
    pub frame: AlgebraVector,
}

fn check(g: &DiagonalMetric, i: usize, j: usize, v0: &AlgebraVector) -> Result<()> {
    check_index(g.n(), i, j)?;
    if v0.n() != g.n() {
        return Err(Error::DimensionMismatch {
            left: g.n(),
            right: v0.n(),
        });
    }
    Ok(())
}

/// `X' = -e^{t ad w} nabla_origin(w, e^{-t ad w} X)`, the transport system
/// in fundamental-field coordinates, written for time running with
/// `direction` (`+1` or `-1`).
fn transport_rhs<'a>(
    g: &'a DiagonalMetric,
    i: usize,
    j: usize,
    direction: f64,
) -> impl Fn(f64, &[f64], &mut [f64]) + 'a {
    let n = g.n();
    let w = AlgebraVector::basis(n, i, j).expect("validated index");
    move |s: f64, y: &[f64], dy: &mut [f64]| {
        let t = direction * s;
        let x = AlgebraVector::from_coeffs(n, y.to_vec()).expect("state length");
        let body = x.adjoint_rotate(i, j, t);
        let back = g.nabla_unchecked(&w, &body).adjoint_rotate(i, j, -t);
        for (d, b) in dy.iter_mut().zip(back.coeffs()) {
            *d = -direction * b;
        }
    }
}

/// Accepted integrator nodes of the transport of `v0` over `[0, t1]`
/// (`t1 > 0`), states in fundamental-field coordinates.
pub fn transport_trajectory(
    g: &DiagonalMetric,
    i: usize,
    j: usize,
    v0: &AlgebraVector,
    t1: f64,
    opts: AdaptiveOptions,
) -> Result<Trajectory> {
    check(g, i, j, v0)?;
    let p = IvpProblem::new(transport_rhs(g, i, j, 1.0), 0.0, t1, v0.coeffs().to_vec())?;
    rk_adaptive(&p, opts)
}

/// Parallel transport of `v0` (given at the origin) along `exp(t w_ij) . o`
/// to time `t`, integrating the full linear system for every index at once.
pub fn parallel_transport(
    g: &DiagonalMetric,
    i: usize,
    j: usize,
    v0: &AlgebraVector,
    t: f64,
) -> Result<Transported> {
    check(g, i, j, v0)?;
    if !t.is_finite() {
        return Err(Error::InvalidStep(format!(
            "transport time {t} is not finite"
        )));
    }
    let fiber = if t == 0.0 {
        v0.clone()
    } else {
        let direction = t.signum();
        let p = IvpProblem::new(
            transport_rhs(g, i, j, direction),
            0.0,
            t.abs(),
            v0.coeffs().to_vec(),
        )?;
        let traj = rk_adaptive(&p, AdaptiveOptions::new(TRANSPORT_RTOL, TRANSPORT_ATOL))?;
        AlgebraVector::from_coeffs(g.n(), traj.final_state().to_vec())?
    };
    let frame = fiber.adjoint_rotate(i, j, t);
    Ok(Transported { fiber, frame })
}

/// Defects of the two Sasaki geodesic equations, in the body frame:
///
/// ```text
/// base:  nabla_zeta' zeta' + R(gamma, nabla_zeta' gamma) zeta'
/// fiber: nabla_zeta' nabla_zeta' gamma + g(nabla_zeta' gamma, nabla_zeta' gamma) gamma
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct SasakiResidual {
    pub base_defect: AlgebraVector,
    pub fiber_defect: AlgebraVector,
}

impl SasakiResidual {
    pub fn max_abs(&self) -> f64 {
        self.base_defect
            .norm_inf()
            .max(self.fiber_defect.norm_inf())
    }
}

/// Body-frame data of a field at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariantJet {
    /// `V = e^{-t ad w} X`.
    pub value: AlgebraVector,
    /// `nabla_zeta' gamma`.
    pub first: AlgebraVector,
    /// `nabla_zeta' nabla_zeta' gamma`.
    pub second: AlgebraVector,
}

/// Covariant derivatives of a field along `exp(t w_ij) . o`, pulled back to
/// the origin.
///
/// With `V = e^{-t ad w} X` and `L = Lambda(w)` the frame connection,
/// `nabla gamma = V' + L V` and `nabla nabla gamma = V'' + 2 L V' + L^2 V`,
/// where `V' = e^{-t ad w}(X' - [w, X])` and
/// `V'' = e^{-t ad w}(X'' - 2[w, X'] + [w, [w, X]])`.
pub fn covariant_jet(g: &DiagonalMetric, field: &FieldAlongBase, t: f64) -> Result<CovariantJet> {
    if g.n() != field.n() {
        return Err(Error::DimensionMismatch {
            left: g.n(),
            right: field.n(),
        });
    }
    let (i, j) = field.base();
    let w = field.base_direction();
    let x = field.jet(t)?;
    let wx = w.bracket_unchecked(&x.value);
    let rot = |v: &AlgebraVector| v.adjoint_rotate(i, j, t);

    let v = rot(&x.value);
    let v1 = rot(&(&x.d1 - &wx));
    let mut inner = x.d2.clone();
    inner.axpy(-2.0, &w.bracket_unchecked(&x.d1));
    inner += &w.bracket_unchecked(&wx);
    let v2 = rot(&inner);

    let lam = |y: &AlgebraVector| g.frame_unchecked(&w, y);
    let lv = lam(&v);
    let first = &v1 + &lv;
    let mut second = v2;
    second.axpy(2.0, &lam(&v1));
    second += &lam(&lv);
    Ok(CovariantJet {
        value: v,
        first,
        second,
    })
}

/// The Sasaki geodesic defects of `field` at `t`.
pub fn sasaki_residual(
    g: &DiagonalMetric,
    field: &FieldAlongBase,
    t: f64,
) -> Result<SasakiResidual> {
    let cj = covariant_jet(g, field, t)?;
    let w = field.base_direction();
    let mut base_defect = g.frame_unchecked(&w, &w);
    base_defect += &g.curvature_unchecked(&cj.value, &cj.first, &w);
    let mut fiber_defect = cj.second;
    fiber_defect.axpy(g.inner_unchecked(&cj.first, &cj.first), &cj.value);
    Ok(SasakiResidual {
        base_defect,
        fiber_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tangent_geodesics::{
        horizontal_family_ii, solve_horizontal_pair, solve_oblique_system, CurveSpec, IndexRegime,
        ObliqueScalarSolution,
    };
    use std::collections::BTreeMap;

    fn generic4() -> DiagonalMetric {
        DiagonalMetric::new(4, vec![1.3, 0.7, 2.2, 1.9, 0.6, 1.1]).unwrap()
    }

    fn w(n: usize, i: usize, j: usize) -> AlgebraVector {
        AlgebraVector::basis(n, i, j).unwrap()
    }

    #[test]
    fn fixed_vectors_are_transported_to_themselves() {
        let g = generic4();
        for t in [0.5, -1.0, 3.0] {
            let r = parallel_transport(&g, 2, 1, &w(4, 2, 1), t).unwrap();
            assert!((&r.fiber - &w(4, 2, 1)).norm_inf() < 1e-12);
            let r = parallel_transport(&g, 2, 1, &w(4, 4, 3), t).unwrap();
            assert!((&r.fiber - &w(4, 4, 3)).norm_inf() < 1e-12);
        }
    }

    #[test]
    fn transport_matches_closed_form_and_preserves_norm() {
        let g = generic4();
        let pair = solve_horizontal_pair(&g, 4, 1, 3, IndexRegime::Between, 0.6, -0.9).unwrap();
        let field = pair.field(4, 4, 1).unwrap();
        let v0 = field.value(0.0).unwrap();
        let n0 = g.norm_sq(&v0).unwrap();
        for t in [0.7, 2.0, -1.5, 6.0] {
            let r = parallel_transport(&g, 4, 1, &v0, t).unwrap();
            assert!((&r.fiber - &field.value(t).unwrap()).norm_inf() < 1e-9);
            assert!((g.norm_sq(&r.frame).unwrap() - n0).abs() < 1e-10);
        }
    }

    #[test]
    fn horizontal_families_are_sasaki_geodesics() {
        let g = generic4();
        for (i, j) in [(2, 1), (3, 2), (4, 1)] {
            for s in (1..=4).filter(|&s| s != i && s != j) {
                let regime = IndexRegime::of_free_index(i, j, s);
                let f = solve_horizontal_pair(&g, i, j, s, regime, 1.1, 0.4)
                    .unwrap()
                    .field(4, i, j)
                    .unwrap();
                for t in [0.0, 1.3, 5.0] {
                    assert!(sasaki_residual(&g, &f, t).unwrap().max_abs() < 1e-13);
                }
            }
        }
        let f = horizontal_family_ii(&g, 2, 1, &BTreeMap::from([((2, 1), 1.0), ((4, 3), 1.0)]))
            .unwrap();
        assert!(sasaki_residual(&g, &f, 0.9).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn oblique_fields_are_sasaki_geodesics() {
        let g = generic4();
        let scalar = FieldAlongBase::new(4, 3, 2)
            .unwrap()
            .with(
                3,
                2,
                CurveSpec::ObliqueScalar(ObliqueScalarSolution::new(g.mu(3, 2), 0.2, 0.9).unwrap()),
            )
            .unwrap();
        for t in [0.0, 0.4, 1.0] {
            assert!(sasaki_residual(&g, &scalar, t).unwrap().max_abs() < 1e-9);
        }

        let mut x0 = AlgebraVector::zeros(4);
        let mut v0 = AlgebraVector::zeros(4);
        x0.set(2, 1, 0.3);
        x0.set(4, 3, -0.5);
        v0.set(2, 1, 0.8);
        v0.set(4, 3, 0.4);
        let f = solve_oblique_system(&g, 2, 1, &x0, &v0, 1.0, 500).unwrap();
        for k in 0..=10 {
            let r = sasaki_residual(&g, &f, k as f64 / 10.0).unwrap();
            assert!(r.max_abs() < 1e-7, "{r:?}");
        }
    }

    #[test]
    fn quadratic_field_defect_value() {
        use crate::tangent_geodesics::SampledCurve;
        let g = DiagonalMetric::equal(3, 1.0).unwrap();
        let h = 1e-3;
        let values: Vec<f64> = (0..2001).map(|k| (k as f64 * h).powi(2)).collect();
        let f = FieldAlongBase::new(3, 2, 1)
            .unwrap()
            .with(
                2,
                1,
                CurveSpec::numeric(SampledCurve::new(0.0, h, values).unwrap()),
            )
            .unwrap();
        let r = sasaki_residual(&g, &f, 1.0).unwrap();
        assert!((r.fiber_defect.get(2, 1) - 6.0).abs() < 1e-6);
        assert!(r.base_defect.norm_inf() < 1e-12);
    }
}
