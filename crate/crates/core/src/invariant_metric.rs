//! Diagonal invariant metrics on the maximal flag manifold and the
//! associated connection and curvature at the origin.
//!
//! A metric is given by positive weights `mu_ij` with
//! `g(w_ij, w_rs) = mu_ij` when `(r,s) = (i,j)` and `0` otherwise.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::so_algebra::{algebra_dim, basis_index, basis_pairs, check_index, AlgebraVector};

/// Denominator below which a 2-plane is treated as degenerate.
pub const PLANE_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalMetric {
    n: usize,
    mu: Vec<f64>,
}

fn check_weight(i: usize, j: usize, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::NonPositiveWeight { i, j, value });
    }
    Ok(())
}

impl DiagonalMetric {
    /// Weights in basis order.
    pub fn new(n: usize, mu: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        if mu.len() != algebra_dim(n) {
            return Err(Error::CoefficientLength {
                got: mu.len(),
                expected: algebra_dim(n),
            });
        }
        for ((i, j), &m) in basis_pairs(n).zip(&mu) {
            check_weight(i, j, m)?;
        }
        Ok(Self { n, mu })
    }

    /// The bi-invariant metric `mu * Euclidean`.
    pub fn equal(n: usize, mu: f64) -> Result<Self> {
        Self::new(n, vec![mu; algebra_dim(n)])
    }

    /// Weights from a sparse map; missing entries default to 1.
    pub fn from_map(n: usize, entries: &BTreeMap<(usize, usize), f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        let mut mu = vec![1.0; algebra_dim(n)];
        for (&(i, j), &m) in entries {
            check_index(n, i, j)?;
            check_weight(i, j, m)?;
            mu[basis_index(i, j)] = m;
        }
        Ok(Self { n, mu })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.mu
    }

    /// `mu_ij` for `i > j`.
    pub fn mu(&self, i: usize, j: usize) -> f64 {
        self.mu[basis_index(i, j)]
    }

    /// `mu` for an unordered pair, `mu_ab = mu_ba`.
    pub fn mu_pair(&self, a: usize, b: usize) -> f64 {
        if a > b {
            self.mu(a, b)
        } else {
            self.mu(b, a)
        }
    }

    fn check(&self, x: &AlgebraVector) -> Result<()> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: x.n(),
            });
        }
        Ok(())
    }

    /// `g(X, Y) = sum mu_ij x_ij y_ij`.
    pub fn inner(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.inner_unchecked(x, y))
    }

    pub(crate) fn inner_unchecked(&self, x: &AlgebraVector, y: &AlgebraVector) -> f64 {
        self.mu
            .iter()
            .zip(x.coeffs().iter().zip(y.coeffs()))
            .map(|(m, (a, b))| m * a * b)
            .sum()
    }

    pub fn norm_sq(&self, x: &AlgebraVector) -> Result<f64> {
        self.inner(x, x)
    }

    /// `mu * X` coefficientwise, the metric as a map to the dual.
    fn lower(&self, x: &AlgebraVector) -> AlgebraVector {
        let coeffs = self.mu.iter().zip(x.coeffs()).map(|(m, c)| m * c).collect();
        AlgebraVector::from_coeffs(self.n, coeffs).expect("same length")
    }

    /// The operator `P` with `g(X, Y) = Q(P X, Y)`: `p_ij = mu_ij / (2(n-2))`.
    pub fn killing_operator(&self) -> Result<Vec<f64>> {
        if self.n == 2 {
            return Err(Error::DegenerateKilling);
        }
        let q = 2.0 * (self.n as f64 - 2.0);
        Ok(self.mu.iter().map(|m| m / q).collect())
    }

    /// `U(X, Y)` defined by `2 g(U(X,Y), Z) = g([Z,X],Y) + g([Z,Y],X)`.
    ///
    /// Uses `g([Z,X],Y) = <Z, [X, mu Y]>` for the ad-invariant coefficient
    /// dot product, so `U = ([X, mu Y] + [Y, mu X]) / (2 mu)`.
    pub fn u_operator(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.u_unchecked(x, y))
    }

    fn u_unchecked(&self, x: &AlgebraVector, y: &AlgebraVector) -> AlgebraVector {
        let mut u = x.bracket_unchecked(&self.lower(y));
        u += &y.bracket_unchecked(&self.lower(x));
        for (c, m) in u.coeffs_mut().iter_mut().zip(&self.mu) {
            *c /= 2.0 * m;
        }
        u
    }

    /// `nabla_{X*} Y* (o) = -1/2 [X, Y] + U(X, Y)`.
    pub fn nabla_origin(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.nabla_unchecked(x, y))
    }

    pub(crate) fn nabla_unchecked(&self, x: &AlgebraVector, y: &AlgebraVector) -> AlgebraVector {
        let mut out = self.u_unchecked(x, y);
        out.axpy(-0.5, &x.bracket_unchecked(y));
        out
    }

    /// Connection map in the left-invariant frame,
    /// `Lambda(X) Y = 1/2 [X, Y] + U(X, Y)`.
    ///
    /// Covariant derivatives of fields written as `sum c_k(t) (a(t) w_k)`
    /// along a curve with body velocity `X` pick up `Lambda(X)` rather than
    /// the fundamental-field connection `nabla_origin`; the two differ by `[X, Y]`.
    pub fn frame_connection(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.frame_unchecked(x, y))
    }

    pub(crate) fn frame_unchecked(&self, x: &AlgebraVector, y: &AlgebraVector) -> AlgebraVector {
        let mut out = self.u_unchecked(x, y);
        out.axpy(0.5, &x.bracket_unchecked(y));
        out
    }

    /// Riemann tensor at the origin,
    /// `R(X,Y)Z = Lambda(X)Lambda(Y)Z - Lambda(Y)Lambda(X)Z - Lambda([X,Y])Z`.
    ///
    /// Sign convention: equal weights give `-1/4 [[X,Y],Z]` and positive
    /// sectional curvature `1/(4 mu)` on coordinate planes of `so(3)`.
    pub fn curvature(
        &self,
        x: &AlgebraVector,
        y: &AlgebraVector,
        z: &AlgebraVector,
    ) -> Result<AlgebraVector> {
        self.check(x)?;
        self.check(y)?;
        self.check(z)?;
        Ok(self.curvature_unchecked(x, y, z))
    }

    pub(crate) fn curvature_unchecked(
        &self,
        x: &AlgebraVector,
        y: &AlgebraVector,
        z: &AlgebraVector,
    ) -> AlgebraVector {
        let mut out = self.frame_unchecked(x, &self.frame_unchecked(y, z));
        out -= &self.frame_unchecked(y, &self.frame_unchecked(x, z));
        out -= &self.frame_unchecked(&x.bracket_unchecked(y), z);
        out
    }

    /// `g(R(X,Y)Y, X) / (|X|^2 |Y|^2 - g(X,Y)^2)`.
    pub fn sectional_curvature(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        if self.n == 2 {
            return Err(Error::NoTwoPlanes);
        }
        let xy = self.inner_unchecked(x, y);
        let denom = self.inner_unchecked(x, x) * self.inner_unchecked(y, y) - xy * xy;
        if denom < PLANE_TOL {
            return Err(Error::DegeneratePlane(denom));
        }
        let r = self.curvature_unchecked(x, y, y);
        Ok(self.inner_unchecked(&r, x) / denom)
    }

    /// Parses `{"n": int, "mu": {"i,j": float, ...}}`. `mu` may also be a
    /// single number for the equal-weight metric.
    pub fn from_json_value(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::InvalidMetric("expected a JSON object".into()))?;
        let n = obj
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::InvalidMetric("missing integer field \"n\"".into()))?
            as usize;
        match obj.get("mu") {
            None => Self::equal(n, 1.0),
            Some(Value::Number(m)) => {
                let m = m.as_f64().unwrap_or(f64::NAN);
                Self::equal(n, m)
            }
            Some(Value::Object(entries)) => {
                let mut map = BTreeMap::new();
                for (key, v) in entries {
                    let (i, j) = parse_pair(key)?;
                    let m = v.as_f64().ok_or_else(|| {
                        Error::InvalidMetric(format!("weight for \"{key}\" is not a number"))
                    })?;
                    map.insert((i, j), m);
                }
                Self::from_map(n, &map)
            }
            Some(_) => Err(Error::InvalidMetric(
                "\"mu\" must be a number or an object".into(),
            )),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json_value(&serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Value {
        let mu: Map<String, Value> = basis_pairs(self.n)
            .zip(&self.mu)
            .map(|((i, j), &m)| (format!("{i},{j}"), Value::from(m)))
            .collect();
        serde_json::json!({ "n": self.n, "mu": mu })
    }
}

fn parse_pair(key: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidMetric(format!("bad index key \"{key}\", expected \"i,j\""));
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    let i = a.trim().parse().map_err(|_| bad())?;
    let j = b.trim().parse().map_err(|_| bad())?;
    Ok((i, j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, i: usize, j: usize) -> AlgebraVector {
        AlgebraVector::basis(n, i, j).unwrap()
    }

    fn metric123() -> DiagonalMetric {
        DiagonalMetric::new(3, vec![1.0, 2.0, 3.0]).unwrap()
    }

    /// Direct Eq.-(2) solve against the basis, independent of the closed form.
    fn u_by_basis(g: &DiagonalMetric, x: &AlgebraVector, y: &AlgebraVector) -> AlgebraVector {
        let n = g.n();
        let mut u = AlgebraVector::zeros(n);
        for (r, s) in basis_pairs(n) {
            let z = w(n, r, s);
            let num = g.inner(&z.bracket(x).unwrap(), y).unwrap()
                + g.inner(&z.bracket(y).unwrap(), x).unwrap();
            u.set(r, s, num / (2.0 * g.mu(r, s)));
        }
        u
    }

    #[test]
    fn inner_examples() {
        let g = DiagonalMetric::new(3, vec![1.5, 1.0, 1.0]).unwrap();
        assert_eq!(g.inner(&w(3, 2, 1), &w(3, 2, 1)).unwrap(), 1.5);
        assert_eq!(g.inner(&w(3, 2, 1), &w(3, 3, 1)).unwrap(), 0.0);
        let x = &(&w(3, 2, 1) * 2.0) + &w(3, 3, 1);
        assert_eq!(g.inner(&x, &w(3, 2, 1)).unwrap(), 3.0);
        assert!(g.inner(&w(3, 2, 1), &w(4, 2, 1)).is_err());
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(DiagonalMetric::new(3, vec![1.0, 0.0, 1.0]).is_err());
        assert!(DiagonalMetric::new(3, vec![1.0, -2.0, 1.0]).is_err());
        assert!(DiagonalMetric::new(3, vec![1.0, f64::NAN, 1.0]).is_err());
        assert!(DiagonalMetric::new(3, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn killing_operator_examples() {
        let mut m = BTreeMap::new();
        m.insert((2, 1), 2.0);
        let g = DiagonalMetric::from_map(3, &m).unwrap();
        assert_eq!(g.killing_operator().unwrap()[0], 1.0);
        let g4 = DiagonalMetric::equal(4, 4.0).unwrap();
        assert!(g4.killing_operator().unwrap().iter().all(|&p| p == 1.0));
        assert!(matches!(
            DiagonalMetric::equal(2, 1.0).unwrap().killing_operator(),
            Err(Error::DegenerateKilling)
        ));
    }

    #[test]
    fn u_examples() {
        let g = metric123();
        for (i, j) in basis_pairs(3) {
            assert_eq!(
                g.u_operator(&w(3, i, j), &w(3, i, j)).unwrap().norm_inf(),
                0.0
            );
        }
        let u = g.u_operator(&w(3, 3, 1), &w(3, 3, 2)).unwrap();
        assert!((&u - &w(3, 2, 1).scale(0.5)).norm_inf() < 1e-15);

        let eq = DiagonalMetric::equal(4, 2.5).unwrap();
        let x = AlgebraVector::from_coeffs(4, vec![1.0, -2.0, 0.5, 3.0, 0.1, -0.7]).unwrap();
        let y = AlgebraVector::from_coeffs(4, vec![0.3, 0.2, -1.0, 1.0, 2.0, 0.4]).unwrap();
        assert!(eq.u_operator(&x, &y).unwrap().norm_inf() < 1e-15);
    }

    #[test]
    fn u_matches_basis_solve() {
        let g = DiagonalMetric::new(4, vec![0.7, 1.3, 2.1, 0.9, 1.7, 2.9]).unwrap();
        for (a, b) in basis_pairs(4) {
            for (c, d) in basis_pairs(4) {
                let (x, y) = (w(4, a, b), w(4, c, d));
                let diff = &g.u_operator(&x, &y).unwrap() - &u_by_basis(&g, &x, &y);
                assert!(diff.norm_inf() < 1e-14);
            }
        }
    }

    #[test]
    fn nabla_examples() {
        let g = metric123();
        assert_eq!(
            g.nabla_origin(&w(3, 3, 2), &w(3, 3, 2)).unwrap().norm_inf(),
            0.0
        );
        let v = g.nabla_origin(&w(3, 3, 1), &w(3, 3, 2)).unwrap();
        assert!(v.norm_inf() < 1e-15);

        let eq = DiagonalMetric::equal(3, 1.0).unwrap();
        let (x, y) = (w(3, 2, 1), &w(3, 3, 1) + &w(3, 3, 2));
        let expected = x.bracket(&y).unwrap().scale(-0.5);
        assert!((&eq.nabla_origin(&x, &y).unwrap() - &expected).norm_inf() < 1e-15);
    }

    #[test]
    fn torsion_free() {
        let g = DiagonalMetric::new(4, vec![0.7, 1.3, 2.1, 0.9, 1.7, 2.9]).unwrap();
        let x = AlgebraVector::from_coeffs(4, vec![1.0, -2.0, 0.5, 3.0, 0.1, -0.7]).unwrap();
        let y = AlgebraVector::from_coeffs(4, vec![0.3, 0.2, -1.0, 1.0, 2.0, 0.4]).unwrap();
        let lhs = &g.nabla_origin(&x, &y).unwrap() - &g.nabla_origin(&y, &x).unwrap();
        assert!((&lhs + &x.bracket(&y).unwrap()).norm_inf() < 1e-12);
    }

    #[test]
    fn curvature_examples() {
        let g = metric123();
        let x = &w(3, 2, 1) + &w(3, 3, 2).scale(0.5);
        assert_eq!(g.curvature(&x, &x, &w(3, 3, 1)).unwrap().norm_inf(), 0.0);

        let g2 = DiagonalMetric::equal(2, 3.0).unwrap();
        let x2 = w(2, 2, 1);
        assert_eq!(g2.curvature(&x2, &x2, &x2).unwrap().norm_inf(), 0.0);
        assert!(matches!(
            g2.sectional_curvature(&x2, &x2),
            Err(Error::NoTwoPlanes)
        ));

        for mu in [0.5, 1.0, 2.0] {
            let eq = DiagonalMetric::equal(3, mu).unwrap();
            for (a, b) in [((2, 1), (3, 1)), ((2, 1), (3, 2)), ((3, 1), (3, 2))] {
                let k = eq
                    .sectional_curvature(&w(3, a.0, a.1), &w(3, b.0, b.1))
                    .unwrap();
                assert!((k - 0.25 / mu).abs() < 1e-14);
            }
        }
        assert!(matches!(
            g.sectional_curvature(&x, &x.scale(2.0)),
            Err(Error::DegeneratePlane(_))
        ));
    }

    /// Besse's formula for `g(R(X,Y)Y,X)` on a homogeneous space with
    /// discrete isotropy, used as an independent oracle.
    #[test]
    fn sectional_matches_besse_formula() {
        let g = DiagonalMetric::new(4, vec![0.7, 1.3, 2.1, 0.9, 1.7, 2.9]).unwrap();
        let x = AlgebraVector::from_coeffs(4, vec![1.0, -2.0, 0.5, 3.0, 0.1, -0.7]).unwrap();
        let y = AlgebraVector::from_coeffs(4, vec![0.3, 0.2, -1.0, 1.0, 2.0, 0.4]).unwrap();
        let xy = x.bracket(&y).unwrap();
        let ip = |a: &AlgebraVector, b: &AlgebraVector| g.inner(a, b).unwrap();
        let uxy = g.u_operator(&x, &y).unwrap();
        let besse = -0.75 * ip(&xy, &xy)
            - 0.5 * ip(&x.bracket(&xy).unwrap(), &y)
            - 0.5 * ip(&y.bracket(&y.bracket(&x).unwrap()).unwrap(), &x)
            + ip(&uxy, &uxy)
            - ip(
                &g.u_operator(&x, &x).unwrap(),
                &g.u_operator(&y, &y).unwrap(),
            );
        let r = g.curvature(&x, &y, &y).unwrap();
        assert!((ip(&r, &x) - besse).abs() < 1e-11);
    }

    #[test]
    fn json_roundtrip() {
        let g =
            DiagonalMetric::from_json_str(r#"{"n": 3, "mu": {"3,1": 2.0, "3, 2": 3}}"#).unwrap();
        assert_eq!(g.weights(), &[1.0, 2.0, 3.0]);
        assert_eq!(DiagonalMetric::from_json_value(&g.to_json()).unwrap(), g);
        assert_eq!(
            DiagonalMetric::from_json_str(r#"{"n": 4, "mu": 2.5}"#).unwrap(),
            DiagonalMetric::equal(4, 2.5).unwrap()
        );
        assert!(DiagonalMetric::from_json_str(r#"{"n": 3, "mu": {"2,1": -1}}"#).is_err());
        assert!(DiagonalMetric::from_json_str(r#"{"n": 3, "mu": {"1,2": 1}}"#).is_err());
        assert!(DiagonalMetric::from_json_str(r#"{"n": 3, "mu": {"21": 1}}"#).is_err());
        assert!(DiagonalMetric::from_json_str("{").is_err());
    }
}
