//! Oblique geodesics: the system `x_uv'' = -(sum mu (x')^2) x_uv` on indices
//! that commute with the base direction, and its scalar reduction
//! `x'' = -mu x (x')^2`.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::invariant_metric::DiagonalMetric;
use crate::ode::{rk4_fixed, IvpProblem};
use crate::so_algebra::{basis_pairs, AlgebraVector};

use super::curve::{CurveSpec, FieldAlongBase, Jet, SampledCurve};
use super::horizontal::{classify, IndexRegime};

/// Largest series argument accepted by [`oblique_series_eval`].
pub const SERIES_GUARD: f64 = 0.5;

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = r * XGK[k];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * r, ((kronrod - gauss) * r).abs())
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64) {
    let (v, e) = gk15(f, a, b);
    if e <= tol || depth == 0 || (b - a).abs() < 1e-15 * a.abs().max(b.abs()).max(1.0) {
        return (v, e);
    }
    let m = 0.5 * (a + b);
    let (v1, e1) = adaptive(f, a, m, 0.5 * tol, depth - 1);
    let (v2, e2) = adaptive(f, m, b, 0.5 * tol, depth - 1);
    (v1 + v2, e1 + e2)
}

/// `int_a^b exp(mu u^2 / 2) du` by adaptive Gauss-Kronrod quadrature.
pub fn gaussian_growth_integral(mu: f64, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let f = |u: f64| (0.5 * mu * u * u).exp();
    let scale = f(a).max(f(b)) * (b - a).abs();
    let (v, _) = adaptive(&f, a, b, 1e-15 * scale.max(f64::MIN_POSITIVE), 40);
    if !v.is_finite() {
        return Err(Error::Convergence(format!(
            "quadrature of exp(mu u^2/2) over [{a}, {b}] overflowed"
        )));
    }
    Ok(v)
}

/// Closed description of the scalar oblique solution through `(x0, v0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObliqueScalarSolution {
    pub mu: f64,
    pub x0: f64,
    pub v0: f64,
    /// First integral `x' exp(mu x^2 / 2)`.
    pub c: f64,
}

impl ObliqueScalarSolution {
    pub fn new(mu: f64, x0: f64, v0: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidMetric(format!(
                "oblique weight mu = {mu} must be positive and finite"
            )));
        }
        let c = v0 * (0.5 * mu * x0 * x0).exp();
        if !c.is_finite() || !x0.is_finite() {
            return Err(Error::Convergence(format!(
                "first integral overflows for mu = {mu}, x0 = {x0}, v0 = {v0}"
            )));
        }
        Ok(Self { mu, x0, v0, c })
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        invert_integral(self, t)
    }
}

fn invert_integral(sol: &ObliqueScalarSolution, t: f64) -> Result<f64> {
    let ObliqueScalarSolution { mu, x0, v0, c } = *sol;
    if v0 == 0.0 || t == 0.0 {
        return Ok(x0);
    }
    let target = c * t;
    // The integrand is at least 1, so the root lies within |target| of x0.
    let (mut lo, mut hi) = if target > 0.0 {
        (x0, x0 + target)
    } else {
        (x0 + target, x0)
    };
    let g = |x: f64| gaussian_growth_integral(mu, x0, x).map(|v| v - target);
    let mut x = (x0 + v0 * t).clamp(lo, hi);
    for _ in 0..200 {
        let gx = g(x)?;
        if gx == 0.0 {
            return Ok(x);
        }
        if gx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - gx * (-0.5 * mu * x * x).exp();
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300)
            || hi - lo <= f64::EPSILON * x.abs()
        {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Convergence(format!(
        "root of the oblique first integral not bracketed to precision at t = {t}"
    )))
}

/// `x(t)` for `x'' = -mu x (x')^2`, `x(0) = x0`, `x'(0) = v0`.
///
/// Uses the first integral `x' = C exp(-mu x^2 / 2)`, `C = v0 exp(mu x0^2 / 2)`,
/// and solves `int_{x0}^{x} exp(mu u^2 / 2) du = C t`, which is strictly
/// monotone in `x`.
pub fn solve_oblique_scalar(mu: f64, x0: f64, v0: f64, t: f64) -> Result<f64> {
    ObliqueScalarSolution::new(mu, x0, v0)?.value(t)
}

pub(crate) fn oblique_scalar_jet(sol: &ObliqueScalarSolution, t: f64) -> Result<Jet> {
    let x = sol.value(t)?;
    let d1 = sol.c * (-0.5 * sol.mu * x * x).exp();
    Ok(Jet {
        value: x,
        d1,
        d2: -sol.mu * x * d1 * d1,
    })
}

/// Exact coefficients `c_0 = 1`, `c_k = sum_{m<k} c_m c_{k-1-m} / ((m+1)(2m+1))`.
pub fn oblique_series_coefficients(k_max: usize) -> Vec<BigRational> {
    let mut c: Vec<BigRational> = Vec::with_capacity(k_max + 1);
    c.push(BigRational::one());
    for k in 1..=k_max {
        let mut sum = BigRational::zero();
        for m in 0..k {
            let denom = BigInt::from((m + 1) * (2 * m + 1));
            sum += &c[m] * &c[k - 1 - m] / BigRational::from_integer(denom);
        }
        c.push(sum);
    }
    c
}

const SERIES_TERMS: usize = 64;

fn series_coefficients_f64() -> &'static [f64] {
    static COEFFS: OnceLock<Vec<f64>> = OnceLock::new();
    COEFFS.get_or_init(|| {
        oblique_series_coefficients(SERIES_TERMS)
            .iter()
            .map(|c| c.to_f64().expect("finite rational"))
            .collect()
    })
}

/// The series argument `sqrt(mu/2) (C t + int_0^{x0} exp(mu u^2/2) du)`.
pub fn oblique_series_argument(mu: f64, x0: f64, v0: f64, t: f64) -> Result<f64> {
    let sol = ObliqueScalarSolution::new(mu, x0, v0)?;
    Ok((0.5 * mu).sqrt() * (sol.c * t + gaussian_growth_integral(mu, 0.0, x0)?))
}

/// Series form of the scalar oblique solution,
/// `x = sqrt(2/mu) sum (-1)^k c_k / (2k+1) z^(2k+1)` with `z` from
/// [`oblique_series_argument`]; requires `|z| <= 0.5`.
pub fn oblique_series_eval(mu: f64, x0: f64, v0: f64, t: f64) -> Result<f64> {
    let z = oblique_series_argument(mu, x0, v0, t)?;
    series_at(mu, z)
}

pub(crate) fn series_at(mu: f64, z: f64) -> Result<f64> {
    if !(z.abs() <= SERIES_GUARD) {
        return Err(Error::SeriesRange(z));
    }
    let z2 = z * z;
    let mut power = z;
    let mut sum = 0.0;
    for (k, ck) in series_coefficients_f64().iter().enumerate() {
        let term = ck / (2 * k + 1) as f64 * power;
        sum += if k % 2 == 0 { term } else { -term };
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        power *= z2;
    }
    Ok((2.0 / mu).sqrt() * sum)
}

fn oblique_indices(n: usize, i: usize, j: usize) -> Vec<(usize, usize)> {
    basis_pairs(n)
        .filter(|&(r, s)| classify(i, j, r, s) == IndexRegime::Fixed)
        .collect()
}

fn check_support(
    i: usize,
    j: usize,
    entries: impl Iterator<Item = ((usize, usize), bool)>,
) -> Result<()> {
    for ((r, s), nonzero) in entries {
        if nonzero && classify(i, j, r, s) != IndexRegime::Fixed {
            return Err(Error::NotDisjoint { i, j, r, s });
        }
    }
    Ok(())
}

/// `x_uv'' + (mu_ij (x_ij')^2 + sum_{r,s not in {i,j}} mu_rs (x_rs')^2) x_uv`
/// for every index `(u,v)` that is `(i,j)` or disjoint from `{i, j}`.
pub fn oblique_system_residual(
    g: &DiagonalMetric,
    field: &FieldAlongBase,
    t: f64,
) -> Result<BTreeMap<(usize, usize), f64>> {
    let n = field.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch {
            left: g.n(),
            right: n,
        });
    }
    let (i, j) = field.base();
    check_support(i, j, field.support().map(|(&k, _)| (k, true)))?;
    let jet = field.jet(t)?;
    let energy = g.inner_unchecked(&jet.d1, &jet.d1);
    Ok(oblique_indices(n, i, j)
        .into_iter()
        .map(|(r, s)| ((r, s), jet.d2.get(r, s) + energy * jet.value.get(r, s)))
        .collect())
}

/// Integrates the oblique system from `(x0, v0)` on `[0, t1]` with RK4 on
/// `steps` uniform steps and wraps the samples as a field along the base.
/// Positions and velocities are both kept, so `x'` is the integrator's own
/// and only `x''` is taken from a difference stencil.
pub fn solve_oblique_system(
    g: &DiagonalMetric,
    i: usize,
    j: usize,
    x0: &AlgebraVector,
    v0: &AlgebraVector,
    t1: f64,
    steps: usize,
) -> Result<FieldAlongBase> {
    let n = g.n();
    x0.same_dim(v0)?;
    if x0.n() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: x0.n(),
        });
    }
    let mut field = FieldAlongBase::new(n, i, j)?;
    check_support(i, j, x0.iter().map(|(k, v)| (k, v != 0.0)))?;
    check_support(i, j, v0.iter().map(|(k, v)| (k, v != 0.0)))?;
    if steps + 1 < super::curve::MIN_SAMPLES {
        return Err(Error::TooFewPoints {
            got: steps + 1,
            need: super::curve::MIN_SAMPLES,
        });
    }

    let idx = oblique_indices(n, i, j);
    let m = idx.len();
    let mu: Vec<f64> = idx.iter().map(|&(r, s)| g.mu(r, s)).collect();
    let mut y0 = Vec::with_capacity(2 * m);
    y0.extend(idx.iter().map(|&(r, s)| x0.get(r, s)));
    y0.extend(idx.iter().map(|&(r, s)| v0.get(r, s)));
    let active: Vec<bool> = (0..m).map(|k| y0[k] != 0.0 || y0[m + k] != 0.0).collect();

    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let energy: f64 = (0..m).map(|k| mu[k] * y[m + k] * y[m + k]).sum();
        for k in 0..m {
            dy[k] = y[m + k];
            dy[m + k] = -energy * y[k];
        }
    };
    let problem = IvpProblem::new(rhs, 0.0, t1, y0)?;
    let traj = rk4_fixed(&problem, t1 / steps as f64)?;
    let h = t1 / steps as f64;
    for (k, &(r, s)) in idx.iter().enumerate() {
        if !active[k] {
            continue;
        }
        let sampled = |c: usize| -> Result<Arc<SampledCurve>> {
            let values = traj.states.iter().map(|st| st[c]).collect();
            Ok(Arc::new(SampledCurve::new(0.0, h, values)?))
        };
        field.set(
            r,
            s,
            CurveSpec::ObliqueSystem {
                position: sampled(k)?,
                velocity: sampled(m + k)?,
            },
        )?;
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{rk_adaptive, AdaptiveOptions};

    fn rational(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn series_coefficients_exact() {
        let c = oblique_series_coefficients(3);
        assert_eq!(c[0], rational(1, 1));
        assert_eq!(c[1], rational(1, 1));
        assert_eq!(c[2], rational(7, 6));
        assert_eq!(c[3], rational(127, 90));
    }

    #[test]
    fn quadrature_against_erfi_series() {
        // int_0^x e^{u^2} du = sum x^(2k+1) / (k! (2k+1))
        let x: f64 = 0.8;
        let mut term = x;
        let mut sum = 0.0;
        for k in 0..40 {
            sum += term / (2 * k + 1) as f64;
            term *= x * x / (k + 1) as f64;
        }
        let q = gaussian_growth_integral(2.0, 0.0, x).unwrap();
        assert!((q - sum).abs() < 1e-14);
        assert_eq!(gaussian_growth_integral(2.0, 0.3, 0.3).unwrap(), 0.0);
        assert!(
            (gaussian_growth_integral(1.0, 0.5, -0.2).unwrap()
                + gaussian_growth_integral(1.0, -0.2, 0.5).unwrap())
            .abs()
                < 1e-15
        );
    }

    #[test]
    fn scalar_examples() {
        for t in [0.0, 1.0, 7.5] {
            assert_eq!(solve_oblique_scalar(1.3, 0.4, 0.0, t).unwrap(), 0.4);
        }
        let x = solve_oblique_scalar(2.0, 0.0, 1.0, 0.1).unwrap();
        assert!((x - 0.09967).abs() < 5e-6);
        assert!((gaussian_growth_integral(2.0, 0.0, x).unwrap() - 0.1).abs() < 1e-14);

        let (mu, x0, v0) = (1.7, -0.3, 0.9);
        assert_eq!(solve_oblique_scalar(mu, x0, v0, 0.0).unwrap(), x0);
        let h = 1e-5;
        let d = (solve_oblique_scalar(mu, x0, v0, h).unwrap()
            - solve_oblique_scalar(mu, x0, v0, -h).unwrap())
            / (2.0 * h);
        assert!((d - v0).abs() < 1e-6);
    }

    #[test]
    fn scalar_satisfies_ode_by_differences() {
        let (mu, x0, v0) = (2.0, 0.2, -1.1);
        let h = 1e-4;
        let f = |t| solve_oblique_scalar(mu, x0, v0, t).unwrap();
        for t in [0.3, 1.0, 2.5] {
            let d1 = (f(t + h) - f(t - h)) / (2.0 * h);
            let d2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
            assert!((d2 + mu * f(t) * d1 * d1).abs() < 1e-5);
        }
    }

    #[test]
    fn scalar_matches_adaptive_oracle() {
        let (mu, x0, v0) = (2.0, 0.0, 1.0);
        let p = IvpProblem::new(
            move |_, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[1];
                dy[1] = -mu * y[0] * y[1] * y[1];
            },
            0.0,
            5.0,
            vec![x0, v0],
        )
        .unwrap();
        let tr = rk_adaptive(&p, AdaptiveOptions::new(1e-12, 1e-14)).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert!((solve_oblique_scalar(mu, x0, v0, *t).unwrap() - s[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn series_examples() {
        assert_eq!(oblique_series_eval(1.5, 0.0, 2.0, 0.0).unwrap(), 0.0);
        let x = oblique_series_eval(2.0, 0.0, 1.0, 0.1).unwrap();
        assert!((x - solve_oblique_scalar(2.0, 0.0, 1.0, 0.1).unwrap()).abs() < 1e-13);
        assert!(matches!(series_at(2.0, 0.8), Err(Error::SeriesRange(_))));
        for (mu, x0, v0, t) in [(0.7, 0.1, 0.3, 0.4), (3.0, -0.05, 0.2, 1.0)] {
            let s = oblique_series_eval(mu, x0, v0, t).unwrap();
            let q = solve_oblique_scalar(mu, x0, v0, t).unwrap();
            assert!((s - q).abs() < 1e-12, "{s} vs {q}");
        }
    }

    #[test]
    fn system_residual_examples() {
        let g = DiagonalMetric::equal(4, 1.0).unwrap();
        let constant = FieldAlongBase::new(4, 2, 1)
            .unwrap()
            .with(2, 1, CurveSpec::Constant(0.5))
            .unwrap()
            .with(4, 3, CurveSpec::Constant(-2.0))
            .unwrap();
        let r = oblique_system_residual(&g, &constant, 0.3).unwrap();
        assert!(r.values().all(|v| *v == 0.0));
        assert_eq!(r.len(), 2);

        let ts: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let linear = FieldAlongBase::new(4, 2, 1)
            .unwrap()
            .with(
                2,
                1,
                CurveSpec::numeric(SampledCurve::from_times(&ts, ts.clone()).unwrap()),
            )
            .unwrap();
        // x_21 = t: residual is 0 + (1 * 1^2) * t.
        let r = oblique_system_residual(&g, &linear, 0.8).unwrap();
        assert!((r[&(2, 1)] - 0.8).abs() < 1e-12);

        let scalar = FieldAlongBase::new(3, 2, 1)
            .unwrap()
            .with(
                2,
                1,
                CurveSpec::ObliqueScalar(ObliqueScalarSolution::new(1.0, 0.1, 0.7).unwrap()),
            )
            .unwrap();
        let g3 = DiagonalMetric::equal(3, 1.0).unwrap();
        for t in [0.0, 0.5, 1.0] {
            assert!(oblique_system_residual(&g3, &scalar, t).unwrap()[&(2, 1)].abs() < 1e-8);
        }

        let bad = FieldAlongBase::new(4, 2, 1)
            .unwrap()
            .with(3, 1, CurveSpec::Constant(1.0))
            .unwrap();
        assert!(matches!(
            oblique_system_residual(&g, &bad, 0.0),
            Err(Error::NotDisjoint { .. })
        ));
    }

    #[test]
    fn integrated_system_residual_small() {
        let g = DiagonalMetric::new(4, vec![1.2, 0.8, 1.5, 0.9, 2.0, 0.6]).unwrap();
        let mut x0 = AlgebraVector::zeros(4);
        let mut v0 = AlgebraVector::zeros(4);
        x0.set(2, 1, 0.3);
        x0.set(4, 3, -0.5);
        v0.set(2, 1, 0.8);
        v0.set(4, 3, 0.4);
        let f = solve_oblique_system(&g, 2, 1, &x0, &v0, 1.0, 500).unwrap();
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            let r = oblique_system_residual(&g, &f, t).unwrap();
            assert!(r.values().all(|v| v.abs() < 1e-7), "{r:?} at {t}");
        }
        v0.set(3, 1, 1.0);
        assert!(solve_oblique_system(&g, 2, 1, &x0, &v0, 1.0, 500).is_err());
    }
}
