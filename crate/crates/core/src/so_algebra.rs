//! Small dense algebra for `so(n)`.
//!
//! The basis is `w_ij = E_ij - E_ji` for `1 <= j < i <= n` (1-based), ordered
//! lexicographically on `(i, j)`: `(2,1), (3,1), (3,2), (4,1), ...`. Every
//! coefficient sequence in the crate uses this ordering.
//!
//! Helpers that take an "extended" index pair `(a, b)` accept `a < b` as well,
//! reading `w_ab = -w_ba`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Structural tolerance for antisymmetry of computed matrices.
pub const SKEW_TOL: f64 = 1e-12;

/// Dimension of `so(n)`.
pub fn algebra_dim(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of `w_ij` (i > j, 1-based) in the lexicographic basis.
pub fn basis_index(i: usize, j: usize) -> usize {
    debug_assert!(i > j && j >= 1);
    (i - 1) * (i - 2) / 2 + (j - 1)
}

/// Lexicographic list of basis index pairs.
pub fn basis_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (2..=n).flat_map(|i| (1..i).map(move |j| (i, j)))
}

/// Validates a basis index pair for `so(n)`.
pub fn check_index(n: usize, i: usize, j: usize) -> Result<()> {
    if i == 0 || j == 0 || i > n || j > n {
        return Err(Error::IndexOutOfRange { n, i, j });
    }
    if i <= j {
        return Err(Error::NotLowerIndex { i, j });
    }
    Ok(())
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    Ok(())
}

/// Basis slot and sign of `w_ab` for an extended pair, `None` when `a == b`.
fn extended_slot(a: usize, b: usize) -> Option<(usize, f64)> {
    match a.cmp(&b) {
        std::cmp::Ordering::Greater => Some((basis_index(a, b), 1.0)),
        std::cmp::Ordering::Less => Some((basis_index(b, a), -1.0)),
        std::cmp::Ordering::Equal => None,
    }
}

/// An antisymmetric `n x n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix(DMatrix<f64>);

impl SkewMatrix {
    /// Wraps `m` after checking antisymmetry to [`SKEW_TOL`].
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        let defect = (&m + m.transpose()).amax();
        if defect > SKEW_TOL * (1.0 + m.amax()) {
            return Err(Error::NotAntisymmetric(defect));
        }
        Ok(Self(m))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Matrix commutator `XY - YX`.
    pub fn bracket(&self, other: &SkewMatrix) -> Result<SkewMatrix> {
        bracket(self, other)
    }
}

/// `w_ij = E_ij - E_ji`.
pub fn basis_element(n: usize, i: usize, j: usize) -> Result<SkewMatrix> {
    check_index(n, i, j)?;
    let mut m = DMatrix::zeros(n, n);
    m[(i - 1, j - 1)] = 1.0;
    m[(j - 1, i - 1)] = -1.0;
    Ok(SkewMatrix(m))
}

/// Matrix commutator of two skew matrices.
pub fn bracket(x: &SkewMatrix, y: &SkewMatrix) -> Result<SkewMatrix> {
    if x.n() != y.n() {
        return Err(Error::DimensionMismatch {
            left: x.n(),
            right: y.n(),
        });
    }
    Ok(SkewMatrix(&x.0 * &y.0 - &y.0 * &x.0))
}

/// `Q(X, Y) = -(n-2) tr(XY)`, the negative Killing form of `so(n)`.
pub fn killing_q(x: &SkewMatrix, y: &SkewMatrix) -> Result<f64> {
    if x.n() != y.n() {
        return Err(Error::DimensionMismatch {
            left: x.n(),
            right: y.n(),
        });
    }
    let n = x.n() as f64;
    let trace: f64 =
        x.0.iter()
            .zip(y.0.transpose().iter())
            .map(|(a, b)| a * b)
            .sum();
    Ok(-(n - 2.0) * trace)
}

/// `exp(t w_ij)`: rotation by `t` in the `(i, j)` coordinate plane.
pub fn givens_exp(n: usize, i: usize, j: usize, t: f64) -> Result<DMatrix<f64>> {
    check_index(n, i, j)?;
    let (s, c) = t.sin_cos();
    let mut m = DMatrix::identity(n, n);
    m[(i - 1, i - 1)] = c;
    m[(j - 1, j - 1)] = c;
    m[(i - 1, j - 1)] = s;
    m[(j - 1, i - 1)] = -s;
    Ok(m)
}

/// Max-entry defect of `a^T a = I` and `det a = 1`.
pub fn special_orthogonal_defect(a: &DMatrix<f64>) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let ortho = (a.transpose() * a - DMatrix::<f64>::identity(n, n)).amax();
    let det = (a.determinant() - 1.0).abs();
    ortho.max(det)
}

/// Coefficients of an element of `so(n)` in the lexicographic basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraVector {
    n: usize,
    coeffs: Vec<f64>,
}

impl AlgebraVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            coeffs: vec![0.0; algebra_dim(n)],
        }
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        let expected = algebra_dim(n);
        if coeffs.len() != expected {
            return Err(Error::CoefficientLength {
                got: coeffs.len(),
                expected,
            });
        }
        Ok(Self { n, coeffs })
    }

    /// The basis vector `w_ij`.
    pub fn basis(n: usize, i: usize, j: usize) -> Result<Self> {
        check_index(n, i, j)?;
        let mut v = Self::zeros(n);
        v.coeffs[basis_index(i, j)] = 1.0;
        Ok(v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient `x_ij` (`i > j`).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeffs[basis_index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.coeffs[basis_index(i, j)] = value;
    }

    /// Coefficient of `w_ab` for an extended pair (`w_ab = -w_ba`).
    pub fn get_extended(&self, a: usize, b: usize) -> f64 {
        extended_slot(a, b).map_or(0.0, |(k, sign)| sign * self.coeffs[k])
    }

    /// Adds `value * w_ab` for an extended pair.
    pub fn add_extended(&mut self, a: usize, b: usize, value: f64) {
        if let Some((k, sign)) = extended_slot(a, b) {
            self.coeffs[k] += sign * value;
        }
    }

    fn set_extended(&mut self, a: usize, b: usize, value: f64) {
        if let Some((k, sign)) = extended_slot(a, b) {
            self.coeffs[k] = sign * value;
        }
    }

    /// `((i, j), x_ij)` in basis order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        basis_pairs(self.n).zip(self.coeffs.iter().copied())
    }

    pub fn to_skew(&self) -> SkewMatrix {
        let mut m = DMatrix::zeros(self.n, self.n);
        for ((i, j), c) in self.iter() {
            m[(i - 1, j - 1)] = c;
            m[(j - 1, i - 1)] = -c;
        }
        SkewMatrix(m)
    }

    /// Reads the strictly lower triangle of `m`.
    pub fn from_skew(m: &SkewMatrix) -> Self {
        let n = m.n();
        let coeffs = basis_pairs(n).map(|(i, j)| m.0[(i - 1, j - 1)]).collect();
        Self { n, coeffs }
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn same_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Lie bracket computed from the structure constants
    /// `[w_ab, w_cd] = d_bc w_ad - d_ac w_bd - d_bd w_ac + d_ad w_bc`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(self.bracket_unchecked(other))
    }

    pub(crate) fn bracket_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.n);
        for ((a, b), x) in self.iter() {
            if x == 0.0 {
                continue;
            }
            for ((c, d), y) in other.iter() {
                if y == 0.0 {
                    continue;
                }
                let xy = x * y;
                if b == c {
                    out.add_extended(a, d, xy);
                }
                if a == c {
                    out.add_extended(b, d, -xy);
                }
                if b == d {
                    out.add_extended(a, c, -xy);
                }
                if a == d {
                    out.add_extended(b, c, xy);
                }
            }
        }
        out
    }

    /// `Ad(a) X = a X a^T` for orthogonal `a`.
    pub fn conjugate(&self, a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != self.n || a.ncols() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: a.nrows(),
            });
        }
        let m = a * self.to_skew().0 * a.transpose();
        Ok(Self::from_skew(&SkewMatrix(m)))
    }

    /// `e^{-t ad(w_ij)} X`, applied pairwise through the rotation relations.
    ///
    /// For every `k` outside `{i, j}` the pair `(w_ik, w_jk)` turns by `t`:
    /// `w_ik -> cos t w_ik + sin t w_jk`, `w_jk -> cos t w_jk - sin t w_ik`.
    /// `w_ij` and everything disjoint from `{i, j}` is fixed.
    pub fn adjoint_rotate(&self, i: usize, j: usize, t: f64) -> Self {
        let (s, c) = t.sin_cos();
        let mut out = self.clone();
        for k in (1..=self.n).filter(|&k| k != i && k != j) {
            let alpha = self.get_extended(i, k);
            let beta = self.get_extended(j, k);
            out.set_extended(i, k, alpha * c - beta * s);
            out.set_extended(j, k, alpha * s + beta * c);
        }
        out
    }
}

impl fmt::Display for AlgebraVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "[")?;
        for ((i, j), c) in self.iter().filter(|(_, c)| *c != 0.0) {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{c} w{i}{j}")?;
        }
        write!(f, "]")
    }
}

impl Add for &AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, rhs: &AlgebraVector) -> AlgebraVector {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, rhs: &AlgebraVector) -> AlgebraVector {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &AlgebraVector {
    type Output = AlgebraVector;
    fn neg(self) -> AlgebraVector {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &AlgebraVector {
    type Output = AlgebraVector;
    fn mul(self, rhs: f64) -> AlgebraVector {
        self.scale(rhs)
    }
}

impl AddAssign<&AlgebraVector> for AlgebraVector {
    fn add_assign(&mut self, rhs: &AlgebraVector) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&AlgebraVector> for AlgebraVector {
    fn sub_assign(&mut self, rhs: &AlgebraVector) {
        self.axpy(-1.0, rhs);
    }
}

/// `e^{-t ad(w_ij)} w_rs` as a coefficient vector.
pub fn adjoint_rotation(
    n: usize,
    i: usize,
    j: usize,
    t: f64,
    r: usize,
    s: usize,
) -> Result<AlgebraVector> {
    check_index(n, i, j)?;
    let v = AlgebraVector::basis(n, r, s)?;
    Ok(v.adjoint_rotate(i, j, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn w(n: usize, i: usize, j: usize) -> AlgebraVector {
        AlgebraVector::basis(n, i, j).unwrap()
    }

    #[test]
    fn basis_element_examples() {
        let m = basis_element(2, 2, 1).unwrap();
        assert_eq!(
            m.matrix(),
            &DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
        );

        let m = basis_element(3, 3, 1).unwrap();
        assert_eq!(m.matrix()[(2, 0)], 1.0);
        assert_eq!(m.matrix()[(0, 2)], -1.0);
        assert_eq!(m.matrix().iter().filter(|x| **x != 0.0).count(), 2);

        assert!(matches!(
            basis_element(3, 1, 1),
            Err(Error::NotLowerIndex { .. })
        ));
        assert!(matches!(
            basis_element(3, 4, 1),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn basis_ordering() {
        let pairs: Vec<_> = basis_pairs(4).collect();
        assert_eq!(pairs, vec![(2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3)]);
        for (k, (i, j)) in pairs.into_iter().enumerate() {
            assert_eq!(basis_index(i, j), k);
        }
    }

    #[test]
    fn bracket_examples() {
        let b = w(3, 2, 1).bracket(&w(3, 3, 1)).unwrap();
        assert_eq!(b, w(3, 3, 2));
        let b = w(3, 2, 1).bracket(&w(3, 3, 2)).unwrap();
        assert_eq!(b, -&w(3, 3, 1));
        assert_eq!(
            w(3, 2, 1).bracket(&w(3, 2, 1)).unwrap(),
            AlgebraVector::zeros(3)
        );
        assert!(w(3, 2, 1).bracket(&w(4, 2, 1)).is_err());
    }

    #[test]
    fn structure_constants_match_matrix_commutator() {
        for n in 2..=5 {
            for (a, b) in basis_pairs(n) {
                for (c, d) in basis_pairs(n) {
                    let x = w(n, a, b);
                    let y = w(n, c, d);
                    let via_matrix =
                        AlgebraVector::from_skew(&bracket(&x.to_skew(), &y.to_skew()).unwrap());
                    assert_eq!(x.bracket(&y).unwrap(), via_matrix);
                }
            }
        }
    }

    #[test]
    fn jacobi_identity_exact() {
        let n = 4;
        let basis: Vec<_> = basis_pairs(n).map(|(i, j)| w(n, i, j)).collect();
        for x in &basis {
            for y in &basis {
                for z in &basis {
                    let t1 = x.bracket(y).unwrap().bracket(z).unwrap();
                    let t2 = y.bracket(z).unwrap().bracket(x).unwrap();
                    let t3 = z.bracket(x).unwrap().bracket(y).unwrap();
                    let sum = &(&t1 + &t2) + &t3;
                    assert_eq!(sum.norm_inf(), 0.0);
                }
            }
        }
    }

    #[test]
    fn killing_examples() {
        let q = |n, a: (usize, usize), b: (usize, usize)| {
            killing_q(
                &basis_element(n, a.0, a.1).unwrap(),
                &basis_element(n, b.0, b.1).unwrap(),
            )
            .unwrap()
        };
        assert_eq!(q(3, (2, 1), (2, 1)), 2.0);
        assert_eq!(q(3, (2, 1), (3, 1)), 0.0);
        assert_eq!(q(2, (2, 1), (2, 1)), 0.0);
        assert_eq!(q(5, (4, 2), (4, 2)), 6.0);
    }

    #[test]
    fn killing_ad_invariance() {
        let n = 4;
        let basis: Vec<_> = basis_pairs(n)
            .map(|(i, j)| basis_element(n, i, j).unwrap())
            .collect();
        for x in &basis {
            for y in &basis {
                assert_eq!(killing_q(x, y).unwrap(), killing_q(y, x).unwrap());
                for z in &basis {
                    let lhs = killing_q(&bracket(z, x).unwrap(), y).unwrap()
                        + killing_q(x, &bracket(z, y).unwrap()).unwrap();
                    assert_eq!(lhs, 0.0);
                }
            }
        }
    }

    #[test]
    fn givens_examples() {
        assert_eq!(givens_exp(2, 2, 1, 0.0).unwrap(), DMatrix::identity(2, 2));
        let r = givens_exp(2, 2, 1, FRAC_PI_2).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((r - expected).amax() < 1e-15);
        let t = 0.731;
        let p = givens_exp(3, 3, 1, t).unwrap() * givens_exp(3, 3, 1, -t).unwrap();
        assert!((p - DMatrix::identity(3, 3)).amax() < 1e-12);
        assert!(special_orthogonal_defect(&givens_exp(5, 4, 2, 2.3).unwrap()) < 1e-12);
    }

    #[test]
    fn adjoint_rotation_examples() {
        let v = adjoint_rotation(3, 2, 1, 0.37, 2, 1).unwrap();
        assert_eq!(v, w(3, 2, 1));
        let v = adjoint_rotation(4, 2, 1, FRAC_PI_2, 4, 3).unwrap();
        assert_eq!(v, w(4, 4, 3));

        // i=3, j=1, (r,s)=(3,2): w_32 = w_ik with k=2 -> cos w_32 + sin w_12 = -sin w_21.
        let v = adjoint_rotation(3, 3, 1, FRAC_PI_2, 3, 2).unwrap();
        assert!(v.get(3, 2).abs() < 1e-15);
        assert!((v.get(2, 1) + 1.0).abs() < 1e-15);
        let oracle = w(3, 3, 2)
            .conjugate(&givens_exp(3, 3, 1, -FRAC_PI_2).unwrap())
            .unwrap();
        assert!((&v - &oracle).norm_inf() < 1e-12);
    }

    #[test]
    fn adjoint_rotation_inverse() {
        let n = 5;
        for (i, j) in basis_pairs(n) {
            for (r, s) in basis_pairs(n) {
                let v = adjoint_rotation(n, i, j, 1.234, r, s).unwrap();
                let back = v.adjoint_rotate(i, j, -1.234);
                assert!((&back - &w(n, r, s)).norm_inf() < 1e-12);
            }
        }
    }

    #[test]
    fn vector_roundtrip_through_skew() {
        let v = AlgebraVector::from_coeffs(4, vec![1.0, -2.0, 0.5, 3.0, 0.0, -1.5]).unwrap();
        assert_eq!(AlgebraVector::from_skew(&v.to_skew()), v);
        assert!(AlgebraVector::from_coeffs(4, vec![1.0; 5]).is_err());
    }
}
