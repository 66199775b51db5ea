//! Horizontal geodesics: fields parallel along `zeta(t) = exp(t w_ij) . o`.
//!
//! For `s` outside `{i, j}` the coefficients on the pair containing `i`
//! (`a`) and the pair containing `j` (`b`) form a closed two-by-two block.
//! Writing the field in the body frame `V = e^{-t ad w_ij} X` turns the
//! parallel-transport condition into the constant-coefficient system
//! `v_is' = -P v_js`, `v_js' = Q v_is` with
//! `P = (mu_a + mu_b - mu_ij) / (2 mu_a)` and `Q = (mu_a + mu_b - mu_ij) / (2 mu_b)`.
//! Every other coefficient is constant.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::invariant_metric::DiagonalMetric;
use crate::so_algebra::{basis_pairs, check_index};

use super::curve::{BlockComponent, CurveSpec, FieldAlongBase};

/// How a basis index `(r, s)` sits relative to the base direction `(i, j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexRegime {
    /// `(r, s) = (i, j)` or `{r, s}` disjoint from `{i, j}`: the coefficient is constant.
    Fixed,
    /// The free index lies strictly between `j` and `i`.
    Between,
    /// The free index is below `j`.
    Below,
    /// The free index is above `i`.
    Above,
}

impl IndexRegime {
    pub fn name(self) -> &'static str {
        match self {
            IndexRegime::Fixed => "fixed",
            IndexRegime::Between => "between",
            IndexRegime::Below => "below",
            IndexRegime::Above => "above",
        }
    }

    /// Regime of the block through the free index `s`.
    pub fn of_free_index(i: usize, j: usize, s: usize) -> IndexRegime {
        if s < j {
            IndexRegime::Below
        } else if s > i {
            IndexRegime::Above
        } else {
            IndexRegime::Between
        }
    }
}

impl fmt::Display for IndexRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for IndexRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "between" => Ok(IndexRegime::Between),
            "below" => Ok(IndexRegime::Below),
            "above" => Ok(IndexRegime::Above),
            "fixed" => Ok(IndexRegime::Fixed),
            other => Err(Error::InvalidRegime(format!(
                "unknown regime \"{other}\" (expected between, below or above)"
            ))),
        }
    }
}

/// Regime of basis index `(r, s)` relative to the base direction `(i, j)`.
pub fn classify(i: usize, j: usize, r: usize, s: usize) -> IndexRegime {
    let hits_i = r == i || s == i;
    let hits_j = r == j || s == j;
    match (hits_i, hits_j) {
        (true, true) | (false, false) => IndexRegime::Fixed,
        (true, false) => IndexRegime::of_free_index(i, j, if r == i { s } else { r }),
        (false, true) => IndexRegime::of_free_index(i, j, if r == j { s } else { r }),
    }
}

/// Basis pairs and orientation signs of the block through `s`:
/// `w_a = sigma_a w_is`, `w_b = sigma_b w_js`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Block {
    pub free: usize,
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub sigma_a: f64,
    pub sigma_b: f64,
}

impl Block {
    pub fn new(i: usize, j: usize, s: usize) -> Self {
        let ordered = |x: usize, y: usize| if x > y { (x, y) } else { (y, x) };
        Self {
            free: s,
            a: ordered(i, s),
            b: ordered(j, s),
            sigma_a: if i > s { 1.0 } else { -1.0 },
            sigma_b: if j > s { 1.0 } else { -1.0 },
        }
    }

    /// `sigma_a sigma_b`: `-1` between, `+1` below and above.
    pub fn kappa(&self) -> f64 {
        self.sigma_a * self.sigma_b
    }

    /// `(P, Q)` of the body-frame system.
    pub fn body_coefficients(&self, g: &DiagonalMetric, i: usize, j: usize) -> (f64, f64) {
        let (ma, mb) = (g.mu(self.a.0, self.a.1), g.mu(self.b.0, self.b.1));
        let num = ma + mb - g.mu(i, j);
        (num / (2.0 * ma), num / (2.0 * mb))
    }
}

/// Left-hand sides of the parallel-transport equations at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalResidual {
    pub values: BTreeMap<(usize, usize), f64>,
    pub regimes: BTreeMap<(usize, usize), IndexRegime>,
}

impl HorizontalResidual {
    pub fn max_abs(&self) -> f64 {
        self.values.values().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Residual of the parallel-transport system along `exp(t w_ij) . o`.
///
/// Fixed indices contribute `x_rs'`. Each block through `s` contributes, with
/// `alpha = sigma_a x_a`, `beta = sigma_b x_b`, `A = 1 - P`, `B = 1 - Q`,
///
/// ```text
/// e_a = sigma_a (cos t alpha' - sin t beta' - A (sin t alpha + cos t beta))
/// e_b = sigma_b (sin t alpha' + cos t beta' + B (cos t alpha - sin t beta))
/// ```
///
/// which are the body-frame equations `v_is' + P v_js`, `v_js' - Q v_is`.
pub fn horizontal_residual(
    g: &DiagonalMetric,
    field: &FieldAlongBase,
    t: f64,
) -> Result<HorizontalResidual> {
    let n = field.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch {
            left: g.n(),
            right: n,
        });
    }
    let (i, j) = field.base();
    let jet = field.jet(t)?;
    let (sn, cs) = t.sin_cos();
    let mut values = BTreeMap::new();
    let mut regimes = BTreeMap::new();
    for (r, s) in basis_pairs(n) {
        if classify(i, j, r, s) == IndexRegime::Fixed {
            values.insert((r, s), jet.d1.get(r, s));
            regimes.insert((r, s), IndexRegime::Fixed);
        }
    }
    for s in (1..=n).filter(|&s| s != i && s != j) {
        let blk = Block::new(i, j, s);
        let regime = IndexRegime::of_free_index(i, j, s);
        let (p, q) = blk.body_coefficients(g, i, j);
        let (big_a, big_b) = (1.0 - p, 1.0 - q);
        let alpha = blk.sigma_a * jet.value.get(blk.a.0, blk.a.1);
        let beta = blk.sigma_b * jet.value.get(blk.b.0, blk.b.1);
        let dalpha = blk.sigma_a * jet.d1.get(blk.a.0, blk.a.1);
        let dbeta = blk.sigma_b * jet.d1.get(blk.b.0, blk.b.1);
        let ea = cs * dalpha - sn * dbeta - big_a * (sn * alpha + cs * beta);
        let eb = sn * dalpha + cs * dbeta + big_b * (cs * alpha - sn * beta);
        values.insert(blk.a, blk.sigma_a * ea);
        values.insert(blk.b, blk.sigma_b * eb);
        regimes.insert(blk.a, regime);
        regimes.insert(blk.b, regime);
    }
    Ok(HorizontalResidual { values, regimes })
}

/// Closed-form solution of one block of the parallel-transport system.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalPair {
    pub regime: IndexRegime,
    pub block: Block,
    /// Coefficient on `block.a` (the pair containing `i`).
    pub first: CurveSpec,
    /// Coefficient on `block.b` (the pair containing `j`).
    pub second: CurveSpec,
    /// Frequency `sqrt(P Q)` of the body-frame rotation.
    pub body_frequency: f64,
    /// When `mu_a = mu_b` the pair is `(a cos wt - b sin wt, b cos wt + a sin wt)`
    /// with this `w`.
    pub circle_frequency: Option<f64>,
}

impl HorizontalPair {
    /// The field along `exp(t w_ij) . o` carrying just this block.
    pub fn field(&self, n: usize, i: usize, j: usize) -> Result<FieldAlongBase> {
        FieldAlongBase::new(n, i, j)?
            .with(self.block.a.0, self.block.a.1, self.first.clone())?
            .with(self.block.b.0, self.block.b.1, self.second.clone())
    }
}

/// Relative tolerance for treating `mu_a` and `mu_b` as equal.
pub const EQUAL_WEIGHT_TOL: f64 = 1e-15;

/// Solves the block through `s` with `x_a(0) = a`, `x_b(0) = b`.
///
/// The rotating-frame substitution `z = e^{-t ad w_ij} x` gives
/// `z' = -[[0, p], [q, 0]] z` with `p = kappa P`, `q = -kappa Q`, and
/// `x_a = cos t z_a + kappa sin t z_b`, `x_b = cos t z_b - kappa sin t z_a`.
/// Since `pq = -PQ <= 0` the body frame always rotates (or is constant when
/// `mu_a + mu_b = mu_ij`). With `mu_a = mu_b` the coefficient pair itself
/// rotates at `-kappa (1 - P)`, returned as trigonometric pairs.
pub fn solve_horizontal_pair(
    g: &DiagonalMetric,
    i: usize,
    j: usize,
    s: usize,
    regime: IndexRegime,
    a: f64,
    b: f64,
) -> Result<HorizontalPair> {
    let n = g.n();
    check_index(n, i, j)?;
    if s == 0 || s > n || s == i || s == j {
        return Err(Error::InvalidRegime(format!(
            "free index {s} must be in 1..={n} and differ from {i} and {j}"
        )));
    }
    let actual = IndexRegime::of_free_index(i, j, s);
    if regime != actual {
        return Err(Error::InvalidRegime(format!(
            "index {s} with base ({i},{j}) is in the {actual} regime, not {regime}"
        )));
    }
    let block = Block::new(i, j, s);
    let kappa = block.kappa();
    let (p_body, q_body) = block.body_coefficients(g, i, j);
    let body_frequency = (p_body * q_body).sqrt();
    let (ma, mb) = (g.mu(block.a.0, block.a.1), g.mu(block.b.0, block.b.1));

    if (ma - mb).abs() <= EQUAL_WEIGHT_TOL * ma.max(mb) {
        let omega = -kappa * (1.0 - p_body);
        return Ok(HorizontalPair {
            regime,
            block,
            first: CurveSpec::TrigPair {
                cos_amp: a,
                sin_amp: -b,
                omega,
            },
            second: CurveSpec::TrigPair {
                cos_amp: b,
                sin_amp: a,
                omega,
            },
            body_frequency,
            circle_frequency: Some(omega),
        });
    }

    let spec = |component| CurveSpec::RotatingFrame {
        component,
        kappa,
        z0: [a, b],
        p: kappa * p_body,
        q: -kappa * q_body,
    };
    Ok(HorizontalPair {
        regime,
        block,
        first: spec(BlockComponent::First),
        second: spec(BlockComponent::Second),
        body_frequency,
        circle_frequency: None,
    })
}

/// The constant field with the given coefficients, each on `(i, j)` or on an
/// index disjoint from `{i, j}`; parallel along `exp(t w_ij) . o`.
pub fn horizontal_family_ii(
    g: &DiagonalMetric,
    i: usize,
    j: usize,
    coeffs: &BTreeMap<(usize, usize), f64>,
) -> Result<FieldAlongBase> {
    let n = g.n();
    let mut field = FieldAlongBase::new(n, i, j)?;
    for (&(r, s), &c) in coeffs {
        check_index(n, r, s)?;
        if classify(i, j, r, s) != IndexRegime::Fixed {
            return Err(Error::NotDisjoint { i, j, r, s });
        }
        field.set(r, s, CurveSpec::Constant(c))?;
    }
    Ok(field)
}
