//! The `n = 2` model: `T S^1` realized as the one-sheeted hyperboloid
//! `x^2 + y^2 - z^2 = 1`, whose rulings are the tangent lines of the base
//! circle.
//!
//! The chart `X(u, v) = (cos u - v sin u, sin u + v cos u, v)` is flat for the
//! Sasaki metric, `X* g = (mu/4)(du^2 + dv^2)`, so geodesics are images of
//! straight lines `a u + b v = c`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::semidirect::TangentPoint;
use crate::so_algebra::special_orthogonal_defect;

/// Tolerance on the defining equation of the hyperboloid, relative to `1 + z^2`.
pub const SURFACE_TOL: f64 = 1e-10;
/// Tolerance on tangency, relative to `|w| |grad|`.
pub const TANGENT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperboloidPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl HyperboloidPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let p = Self { x, y, z };
        let defect = p.defect();
        if !(defect <= SURFACE_TOL * (1.0 + z * z)) {
            return Err(Error::NotOnHyperboloid(defect));
        }
        Ok(p)
    }

    /// `|x^2 + y^2 - z^2 - 1|`.
    pub fn defect(&self) -> f64 {
        (self.x * self.x + self.y * self.y - self.z * self.z - 1.0).abs()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    fn unchecked(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(u: f64) -> f64 {
    let w = u.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// A point `(u, v)` of the chart, `u` in `(-pi, pi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint {
    pub u: f64,
    pub v: f64,
}

impl ChartPoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self {
            u: wrap_angle(u),
            v,
        }
    }
}

/// The chart line `a u + b v = c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartLine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ChartLine {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if a == 0.0 && b == 0.0 {
            return Err(Error::DegenerateLine);
        }
        Ok(Self { a, b, c })
    }

    /// `a u + b v - c`.
    pub fn defect(&self, u: f64, v: f64) -> f64 {
        self.a * u + self.b * v - self.c
    }
}

fn check_rotation(q: &DMatrix<f64>) -> Result<()> {
    if q.nrows() != 2 || q.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            left: 2,
            right: q.nrows(),
        });
    }
    let d = special_orthogonal_defect(q);
    if d > 1e-10 {
        return Err(Error::NotSpecialOrthogonal(d));
    }
    Ok(())
}

/// `F(QH) = (a^2 - c^2, 2ac)` with `(a, c)` the first column of `Q`;
/// invariant under `Q -> -Q`.
pub fn f_map(q: &DMatrix<f64>) -> Result<[f64; 2]> {
    check_rotation(q)?;
    let (a, c) = (q[(0, 0)], q[(1, 0)]);
    Ok([a * a - c * c, 2.0 * a * c])
}

fn check_circle(p: [f64; 2]) -> Result<f64> {
    let r = p[0].hypot(p[1]);
    let d = (r - 1.0).abs();
    if !(d <= 1e-10) {
        return Err(Error::NotOnCircle(d));
    }
    Ok(r)
}

/// A rotation `Q` with `F(QH) = p`.
///
/// On `x >= 0` this is the `(x+1)`-chart `a = sqrt((1+x)/2)`, `c = y/(2a)`;
/// on `x < 0` the complementary half-angle chart `c = sqrt((1-x)/2)`,
/// `a = y/(2c)`, which stays well conditioned near `(-1, 0)` and returns
/// exactly `[[0, -1], [1, 0]]` there.
pub fn g_inverse(p: [f64; 2]) -> Result<DMatrix<f64>> {
    let r = check_circle(p)?;
    let (x, y) = (p[0] / r, p[1] / r);
    let (a, c) = if x >= 0.0 {
        let a = ((1.0 + x) / 2.0).sqrt();
        (a, y / (2.0 * a))
    } else {
        let c = ((1.0 - x) / 2.0).sqrt();
        (y / (2.0 * c), c)
    };
    Ok(DMatrix::from_row_slice(2, 2, &[a, -c, c, a]))
}

fn check_point(q: &HyperboloidPoint) -> Result<()> {
    HyperboloidPoint::new(q.x, q.y, q.z).map(|_| ())
}

/// Foot point on `S^1` of the ruling through `q`:
/// `((x + yz)/(1+z^2), (y - xz)/(1+z^2))`.
pub fn p_projection(q: &HyperboloidPoint) -> Result<[f64; 2]> {
    check_point(q)?;
    Ok(project(q))
}

fn project(q: &HyperboloidPoint) -> [f64; 2] {
    let d = 1.0 + q.z * q.z;
    [(q.x + q.y * q.z) / d, (q.y - q.x * q.z) / d]
}

/// Fiber vector of `q` in `T_{P(q)} S^1`:
/// `(z(-y + xz)/(1+z^2), z(x + yz)/(1+z^2))`, equal to `(-ts, tr)` at
/// `(r - ts, s + tr, t)`.
pub fn psi_map(q: &HyperboloidPoint) -> Result<[f64; 2]> {
    check_point(q)?;
    let d = 1.0 + q.z * q.z;
    Ok([q.z * (-q.y + q.x * q.z) / d, q.z * (q.x + q.y * q.z) / d])
}

/// The point of `H` over `base` with fiber vector `fiber` (tangent to the circle).
pub fn psi_inverse(base: [f64; 2], fiber: [f64; 2]) -> Result<HyperboloidPoint> {
    check_circle(base)?;
    let [r, s] = base;
    let normal = fiber[0] * r + fiber[1] * s;
    if normal.abs() > TANGENT_TOL * (1.0 + fiber[0].hypot(fiber[1])) {
        return Err(Error::NotTangent(normal.abs()));
    }
    let t = -fiber[0] * s + fiber[1] * r;
    Ok(HyperboloidPoint::unchecked(r - t * s, s + t * r, t))
}

/// `X(u, v) = (cos u - v sin u, sin u + v cos u, v)`, for any real `u`.
pub fn embed(u: f64, v: f64) -> HyperboloidPoint {
    let (s, c) = u.sin_cos();
    HyperboloidPoint::unchecked(c - v * s, s + v * c, v)
}

pub fn chart_embed(c: &ChartPoint) -> HyperboloidPoint {
    embed(c.u, c.v)
}

/// Inverse chart: `v = z`, `u = arg P(q)` in `(-pi, pi]`.
pub fn chart_invert(q: &HyperboloidPoint) -> Result<ChartPoint> {
    let [r, s] = p_projection(q)?;
    Ok(ChartPoint::new(s.atan2(r), q.z))
}

/// Vertical and horizontal generators of `T_q H`.
fn generators(q: &HyperboloidPoint) -> ([f64; 3], [f64; 3]) {
    let d = 1.0 + q.z * q.z;
    (
        [(-q.y + q.x * q.z) / d, (q.x + q.y * q.z) / d, 1.0],
        [-q.y, q.x, 0.0],
    )
}

/// Coordinates of a tangent vector in the generator frame `(e_v, e_h)`.
fn frame_coordinates(q: &HyperboloidPoint, w: [f64; 3]) -> Result<(f64, f64)> {
    let grad = [q.x, q.y, -q.z];
    let dot = w[0] * grad[0] + w[1] * grad[1] + w[2] * grad[2];
    let wn = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    let gn = (grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2]).sqrt();
    if dot.abs() > TANGENT_TOL * (wn * gn).max(1.0) {
        return Err(Error::NotTangent(dot.abs()));
    }
    let (ev, eh) = generators(q);
    let alpha = w[2];
    let rest = [w[0] - alpha * ev[0], w[1] - alpha * ev[1]];
    let beta = (rest[0] * eh[0] + rest[1] * eh[1]) / (q.x * q.x + q.y * q.y);
    Ok((alpha, beta))
}

/// The Sasaki form of `H`: both generators have squared norm `mu/4` and are
/// orthogonal; extended bilinearly.
pub fn sasaki_form(q: &HyperboloidPoint, w1: [f64; 3], w2: [f64; 3], mu: f64) -> Result<f64> {
    check_point(q)?;
    let (a1, b1) = frame_coordinates(q, w1)?;
    let (a2, b2) = frame_coordinates(q, w2)?;
    Ok(0.25 * mu * (a1 * a2 + b1 * b2))
}

/// `(e_v, e_h)` at `q`, exposed for diagnostics.
pub fn sasaki_generators(q: &HyperboloidPoint) -> Result<([f64; 3], [f64; 3])> {
    check_point(q)?;
    Ok(generators(q))
}

/// Type of a geodesic of `H` by its chart line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeodesicCase {
    /// `a = 0`: a horizontal circle `z = c/b`.
    Horizontal,
    /// `b = 0`: a ruling.
    Vertical,
    /// `ab != 0`: a spiral.
    Oblique,
}

impl GeodesicCase {
    pub fn name(self) -> &'static str {
        match self {
            GeodesicCase::Horizontal => "horizontal",
            GeodesicCase::Vertical => "vertical",
            GeodesicCase::Oblique => "oblique",
        }
    }
}

/// A geodesic `t -> X(u0 + t du, v0 + t dv)`; `u0` is not wrapped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartGeodesic {
    pub u0: f64,
    pub v0: f64,
    pub du: f64,
    pub dv: f64,
    pub mu: f64,
}

impl ChartGeodesic {
    pub fn chart_at(&self, t: f64) -> (f64, f64) {
        (self.u0 + t * self.du, self.v0 + t * self.dv)
    }

    pub fn point(&self, t: f64) -> HyperboloidPoint {
        let (u, v) = self.chart_at(t);
        embed(u, v)
    }

    pub fn case(&self) -> GeodesicCase {
        if self.dv == 0.0 {
            GeodesicCase::Horizontal
        } else if self.du == 0.0 {
            GeodesicCase::Vertical
        } else {
            GeodesicCase::Oblique
        }
    }

    /// Speed in the chart, `|(du, dv)|`.
    pub fn chart_speed(&self) -> f64 {
        self.du.hypot(self.dv)
    }

    /// Sasaki speed, `sqrt(mu)/2 |(du, dv)|`.
    pub fn speed(&self) -> f64 {
        0.5 * self.mu.sqrt() * self.chart_speed()
    }

    /// Same curve traversed at unit chart speed.
    pub fn unit_chart_speed(&self) -> ChartGeodesic {
        let s = self.chart_speed();
        ChartGeodesic {
            du: self.du / s,
            dv: self.dv / s,
            ..*self
        }
    }

    /// The chart line `dv u - du v = dv u0 - du v0` carrying the curve.
    pub fn line(&self) -> ChartLine {
        ChartLine {
            a: self.dv,
            b: -self.du,
            c: self.dv * self.u0 - self.du * self.v0,
        }
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidMetric(format!(
            "weight mu = {mu} must be positive and finite"
        )));
    }
    Ok(())
}

/// The geodesic over the chart line `a u + b v = c`, parametrized as printed:
/// `u = t, v = c/b` when `a = 0`; `u = c/a, v = t` when `b = 0`;
/// `u = t, v = (c - a t)/b` otherwise.
pub fn geodesic_from_line(line: &ChartLine, mu: f64) -> Result<ChartGeodesic> {
    let ChartLine { a, b, c } = ChartLine::new(line.a, line.b, line.c)?;
    check_mu(mu)?;
    Ok(if a == 0.0 {
        ChartGeodesic {
            u0: 0.0,
            v0: c / b,
            du: 1.0,
            dv: 0.0,
            mu,
        }
    } else if b == 0.0 {
        ChartGeodesic {
            u0: c / a,
            v0: 0.0,
            du: 0.0,
            dv: 1.0,
            mu,
        }
    } else {
        ChartGeodesic {
            u0: 0.0,
            v0: c / b,
            du: 1.0,
            dv: -a / b,
            mu,
        }
    })
}

/// Shortest chart segment between two points, on `t` in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicSegment {
    pub geodesic: ChartGeodesic,
    /// Both lifts `du = +pi` and `du = -pi` have equal length; `+pi` was taken.
    pub tie: bool,
}

impl GeodesicSegment {
    /// Sasaki length of the segment.
    pub fn length(&self) -> f64 {
        self.geodesic.speed()
    }
}

/// Relative tolerance for detecting the `|du| = pi` tie.
pub const TIE_TOL: f64 = 1e-12;

/// The straight segment in the flat cylinder `(u mod 2 pi, v)` from `p` to
/// `q`, using the lift of `du` with the smallest absolute value.
pub fn geodesic_between(
    p: &HyperboloidPoint,
    q: &HyperboloidPoint,
    mu: f64,
) -> Result<GeodesicSegment> {
    check_mu(mu)?;
    let cp = chart_invert(p)?;
    let cq = chart_invert(q)?;
    let mut du = wrap_angle(cq.u - cp.u);
    let dv = cq.v - cp.v;
    let tie = (du.abs() - PI).abs() <= TIE_TOL * PI;
    if tie {
        du = PI;
    }
    if du == 0.0 && dv == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(GeodesicSegment {
        geodesic: ChartGeodesic {
            u0: cp.u,
            v0: cp.v,
            du,
            dv,
            mu,
        },
        tie,
    })
}

/// The horizontal lift
/// `(cos 2(t+t0) - 2 xi sin 2(t+t0), sin 2(t+t0) + 2 xi cos 2(t+t0), 2 xi)`,
/// i.e. `X(2(t + t0), 2 xi)`.
pub fn horizontal_lift_curve(xi: f64, t0: f64, mu: f64) -> Result<ChartGeodesic> {
    check_mu(mu)?;
    Ok(ChartGeodesic {
        u0: 2.0 * t0,
        v0: 2.0 * xi,
        du: 2.0,
        dv: 0.0,
        mu,
    })
}

/// Image in `H` of the tangent vector `xi w_21*` at the coset of `q`:
/// with `(r, s) = F(q)` the point is `(r - 2 xi s, s + 2 xi r, 2 xi)`.
/// The factor 2 is the derivative of the double-angle map `F`.
pub fn flag_to_hyperboloid(q: &DMatrix<f64>, xi: f64) -> Result<HyperboloidPoint> {
    let [r, s] = f_map(q)?;
    let t = 2.0 * xi;
    Ok(HyperboloidPoint::unchecked(r - t * s, s + t * r, t))
}

/// [`flag_to_hyperboloid`] for a tangent point of the `n = 2` flag manifold.
pub fn tangent_point_to_hyperboloid(v: &TangentPoint) -> Result<HyperboloidPoint> {
    if v.n() != 2 {
        return Err(Error::DimensionMismatch {
            left: 2,
            right: v.n(),
        });
    }
    flag_to_hyperboloid(v.base(), v.fiber().get(2, 1))
}

/// Wavefront OBJ text of the ruled surface `X(u, v)` on `u` in `[-pi, pi)`,
/// `v` in `[-v_max, v_max]`, closed in `u`.
pub fn obj_mesh(n_u: usize, n_v: usize, v_max: f64) -> Result<String> {
    if n_u < 3 || n_v < 2 {
        return Err(Error::InvalidGrid(format!(
            "mesh needs at least 3 x 2 vertices, got {n_u} x {n_v}"
        )));
    }
    if !(v_max > 0.0 && v_max.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "v_max = {v_max} must be positive"
        )));
    }
    let mut out = String::new();
    writeln!(
        out,
        "# one-sheeted hyperboloid x^2 + y^2 - z^2 = 1, ruled by X(u, v)"
    )
    .unwrap();
    for k in 0..n_u {
        let u = -PI + 2.0 * PI * k as f64 / n_u as f64;
        for m in 0..n_v {
            let v = -v_max + 2.0 * v_max * m as f64 / (n_v - 1) as f64;
            let p = embed(u, v);
            writeln!(out, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z).unwrap();
        }
    }
    let id = |k: usize, m: usize| (k % n_u) * n_v + m + 1;
    for k in 0..n_u {
        for m in 0..n_v - 1 {
            writeln!(
                out,
                "f {} {} {} {}",
                id(k, m),
                id(k + 1, m),
                id(k + 1, m + 1),
                id(k, m + 1)
            )
            .unwrap();
        }
    }
    Ok(out)
}
