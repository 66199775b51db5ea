//! The semidirect group `G* = so(n) x_Ad SO(n)` and its action on the
//! tangent bundle of the maximal flag manifold.
//!
//! Tangent vectors are stored in the trivialization `(X, aH) <-> X*(a.o)`:
//! the fiber coordinate does not depend on which coset representative is
//! chosen, so `(a h, X)` and `(a, X)` are the same point for every `h` in the
//! discrete isotropy `S(O(1) x ... x O(1))`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::so_algebra::{special_orthogonal_defect, AlgebraVector};

/// Tolerance on `a^T a = I`, `det a = 1` for group parts.
pub const GROUP_TOL: f64 = 1e-10;

fn check_group(a: &DMatrix<f64>, n: usize) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: a.nrows(),
        });
    }
    let defect = special_orthogonal_defect(a);
    if defect > GROUP_TOL {
        return Err(Error::NotSpecialOrthogonal(defect));
    }
    Ok(())
}

/// An element `(X, a)` of `G*`.
#[derive(Clone, Debug, PartialEq)]
pub struct GStarElement {
    x: AlgebraVector,
    a: DMatrix<f64>,
}

impl GStarElement {
    pub fn new(x: AlgebraVector, a: DMatrix<f64>) -> Result<Self> {
        check_group(&a, x.n())?;
        Ok(Self { x, a })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            x: AlgebraVector::zeros(n),
            a: DMatrix::identity(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn algebra_part(&self) -> &AlgebraVector {
        &self.x
    }

    pub fn group_part(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// `(X, a)(Y, b) = (X + Ad(a) Y, ab)`.
    pub fn mul(&self, other: &GStarElement) -> Result<GStarElement> {
        self.x.same_dim(&other.x)?;
        let mut x = other.x.conjugate(&self.a)?;
        x += &self.x;
        Ok(Self {
            x,
            a: &self.a * &other.a,
        })
    }

    /// `(X, a)^{-1} = (-Ad(a^{-1}) X, a^{-1})`.
    pub fn inverse(&self) -> GStarElement {
        let a_inv = self.a.transpose();
        let x = -&self
            .x
            .conjugate(&a_inv)
            .expect("group part matches algebra dimension");
        Self { x, a: a_inv }
    }

    /// Max-entry distance to `other` in both components.
    pub fn distance(&self, other: &GStarElement) -> f64 {
        (&self.x - &other.x)
            .norm_inf()
            .max((&self.a - &other.a).amax())
    }
}

/// An element `(X, Y)` of the Lie algebra `so(n) x_ad so(n)` of `G*`;
/// the first slot is the abelian factor.
#[derive(Clone, Debug, PartialEq)]
pub struct GStarAlgebraElement {
    pub translation: AlgebraVector,
    pub rotation: AlgebraVector,
}

impl GStarAlgebraElement {
    pub fn new(translation: AlgebraVector, rotation: AlgebraVector) -> Result<Self> {
        translation.same_dim(&rotation)?;
        Ok(Self {
            translation,
            rotation,
        })
    }

    pub fn norm_inf(&self) -> f64 {
        self.translation.norm_inf().max(self.rotation.norm_inf())
    }
}

/// `[(X1, Y1), (X2, Y2)] = ([Y1, X2] - [Y2, X1], [Y1, Y2])`.
pub fn gstar_bracket(
    u: &GStarAlgebraElement,
    v: &GStarAlgebraElement,
) -> Result<GStarAlgebraElement> {
    u.translation.same_dim(&v.translation)?;
    let mut first = u.rotation.bracket(&v.translation)?;
    first -= &v.rotation.bracket(&u.translation)?;
    let second = u.rotation.bracket(&v.rotation)?;
    Ok(GStarAlgebraElement {
        translation: first,
        rotation: second,
    })
}

/// A coset `aH` in `SO(n) / S(O(1) x ... x O(1))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coset {
    representative: DMatrix<f64>,
}

impl Coset {
    pub fn new(representative: DMatrix<f64>) -> Result<Self> {
        let n = representative.nrows();
        check_group(&representative, n)?;
        Ok(Self { representative })
    }

    pub fn origin(n: usize) -> Self {
        Self {
            representative: DMatrix::identity(n, n),
        }
    }

    pub fn representative(&self) -> &DMatrix<f64> {
        &self.representative
    }

    /// Representative with the largest entry of each of the first `n-1`
    /// columns made positive; the last column absorbs the parity so the
    /// determinant stays 1.
    pub fn canonical(&self) -> Coset {
        let mut m = self.representative.clone();
        let n = m.ncols();
        for k in 0..n.saturating_sub(1) {
            let col = m.column(k);
            let pivot =
                col.iter().copied().fold(
                    0.0_f64,
                    |best, x| if x.abs() > best.abs() { x } else { best },
                );
            if pivot < 0.0 {
                m.column_mut(k).neg_mut();
                m.column_mut(n - 1).neg_mut();
            }
        }
        Coset { representative: m }
    }

    /// `a^{-1} b` is a diagonal sign matrix (determinant 1) to within `tol`.
    pub fn same_as(&self, other: &Coset, tol: f64) -> bool {
        isotropy_sign_pattern(
            &(self.representative.transpose() * &other.representative),
            tol,
        )
        .is_some()
    }
}

/// The sign pattern of `h` if it lies in `S(O(1) x ... x O(1))` to within `tol`.
pub fn isotropy_sign_pattern(h: &DMatrix<f64>, tol: f64) -> Option<Vec<i8>> {
    if !h.is_square() {
        return None;
    }
    let n = h.nrows();
    let mut signs = Vec::with_capacity(n);
    for r in 0..n {
        for c in 0..n {
            let x = h[(r, c)];
            if r == c {
                if (x.abs() - 1.0).abs() > tol {
                    return None;
                }
            } else if x.abs() > tol {
                return None;
            }
        }
        signs.push(if h[(r, r)] > 0.0 { 1 } else { -1 });
    }
    let parity: i32 = signs.iter().map(|&s| s as i32).product();
    (parity == 1).then_some(signs)
}

/// A tangent vector `X*(a.o)` of the flag manifold, stored as `(aH, X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentPoint {
    base: DMatrix<f64>,
    fiber: AlgebraVector,
}

impl TangentPoint {
    pub fn new(base: DMatrix<f64>, fiber: AlgebraVector) -> Result<Self> {
        check_group(&base, fiber.n())?;
        Ok(Self { base, fiber })
    }

    /// The zero vector at the origin `o = eH`.
    pub fn origin_zero(n: usize) -> Self {
        Self {
            base: DMatrix::identity(n, n),
            fiber: AlgebraVector::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.fiber.n()
    }

    pub fn base(&self) -> &DMatrix<f64> {
        &self.base
    }

    pub fn fiber(&self) -> &AlgebraVector {
        &self.fiber
    }

    /// The vector translated back to the origin: `Ad(a^{-1}) X`, so that the
    /// point is `(d phi_a)_o (Ad(a^{-1})X)*(o)`. Depends on the representative.
    pub fn body_fiber(&self) -> AlgebraVector {
        self.fiber
            .conjugate(&self.base.transpose())
            .expect("base matches fiber dimension")
    }

    /// Same point of `T F`: equal fibers and equal cosets.
    pub fn same_point(&self, other: &TangentPoint, tol: f64) -> bool {
        self.n() == other.n()
            && (&self.fiber - &other.fiber).norm_inf() <= tol
            && isotropy_sign_pattern(&(self.base.transpose() * &other.base), tol).is_some()
    }
}

/// The action `phi~((X, a), v) = (d phi_a)(v) + X*(a . pi(v))`.
///
/// In the `(aH, X)` trivialization the base moves to `a . base` and the fiber
/// to `Ad(a) fiber + X`, using `(d phi_a) Y*(p) = (Ad(a) Y)*(a p)`.
pub fn action_tangent(p: &GStarElement, v: &TangentPoint) -> Result<TangentPoint> {
    p.x.same_dim(&v.fiber)?;
    let mut fiber = v.fiber.conjugate(&p.a)?;
    fiber += &p.x;
    Ok(TangentPoint {
        base: &p.a * &v.base,
        fiber,
    })
}

/// An element of `G*` carrying `v` to `w`: `a = base_w base_v^{-1}`,
/// `X = fiber_w - Ad(a) fiber_v`.
pub fn transitive_element(v: &TangentPoint, w: &TangentPoint) -> Result<GStarElement> {
    v.fiber.same_dim(&w.fiber)?;
    let a = &w.base * v.base.transpose();
    let x = &w.fiber - &v.fiber.conjugate(&a)?;
    GStarElement::new(x, a)
}

/// `Omega((X, a) H*) = (X, aH)`.
pub fn omega(p: &GStarElement) -> (AlgebraVector, Coset) {
    (
        p.x.clone(),
        Coset {
            representative: p.a.clone(),
        }
        .canonical(),
    )
}

/// Inverse of [`omega`]: a representative `(X, a)` of the class.
pub fn omega_inverse(x: &AlgebraVector, coset: &Coset) -> Result<GStarElement> {
    GStarElement::new(x.clone(), coset.canonical().representative)
}

/// Two elements of `G*` define the same class in `G*/H*`.
pub fn same_class(p: &GStarElement, q: &GStarElement, tol: f64) -> bool {
    let rel = p.inverse().mul(q).expect("same dimension");
    rel.x.norm_inf() <= tol && isotropy_sign_pattern(&rel.a, tol).is_some()
}

/// Whether `p` fixes the zero vector at the origin, i.e. `p` lies in `H* = {0} x H`.
pub fn fixes_origin_zero(p: &GStarElement, tol: f64) -> bool {
    let zero = TangentPoint::origin_zero(p.n());
    action_tangent(p, &zero)
        .map(|img| img.same_point(&zero, tol))
        .unwrap_or(false)
}
