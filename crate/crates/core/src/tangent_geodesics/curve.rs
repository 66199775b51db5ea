//! Coefficient functions `x_rs(t)` and fields along `exp(t w_ij) . o`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ode::fornberg_weights;
use crate::so_algebra::{basis_pairs, check_index, AlgebraVector};

use super::oblique::{oblique_scalar_jet, ObliqueScalarSolution};

/// Value and first two derivatives of a scalar function at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Samples on a uniform grid `t0, t0 + h, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve {
    t0: f64,
    h: f64,
    values: Vec<f64>,
}

/// Smallest sample count that supports a six-point window.
pub const MIN_SAMPLES: usize = 6;

impl SampledCurve {
    pub fn new(t0: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite() && t0.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "grid must start at a finite time with positive spacing (t0 = {t0}, h = {h})"
            )));
        }
        if values.len() < MIN_SAMPLES {
            return Err(Error::TooFewPoints {
                got: values.len(),
                need: MIN_SAMPLES,
            });
        }
        Ok(Self { t0, h, values })
    }

    /// Builds from explicit times, which must be strictly increasing and
    /// uniformly spaced to within `1e-9` relative.
    pub fn from_times(times: &[f64], values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} times for {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::TooFewPoints {
                got: times.len(),
                need: MIN_SAMPLES,
            });
        }
        let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        for (k, w) in times.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::InvalidGrid(format!(
                    "times not strictly increasing at index {}",
                    k + 1
                )));
            }
            let expected = times[0] + (k + 1) as f64 * h;
            if (w[1] - expected).abs() > 1e-9 * h.max(expected.abs()) {
                return Err(Error::InvalidGrid("times are not uniformly spaced".into()));
            }
        }
        Self::new(times[0], h, values)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.h * (self.values.len() - 1) as f64
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Local polynomial jet: the five-point central stencil at interior
    /// nodes, otherwise a six-point window around `t`.
    pub fn jet(&self, t: f64) -> Result<Jet> {
        let n = self.values.len();
        let slack = 1e-9 * self.h;
        if !(t >= self.t0 - slack && t <= self.t1() + slack) {
            return Err(Error::NotDifferentiable {
                t,
                reason: format!("outside the sampled interval [{}, {}]", self.t0, self.t1()),
            });
        }
        let pos = (t - self.t0) / self.h;
        let nearest = pos.round();
        let k = nearest as isize;
        let (start, width) = if (pos - nearest).abs() < 1e-9 && k >= 2 && k + 2 < n as isize {
            (k as usize - 2, 5)
        } else {
            let s = (pos.floor() as isize - 2).clamp(0, n as isize - 6) as usize;
            (s, 6)
        };
        let nodes: Vec<f64> = (0..width).map(|m| (start + m) as f64).collect();
        let w = fornberg_weights(pos, &nodes, 2);
        let window = &self.values[start..start + width];
        let dot = |ws: &[f64]| ws.iter().zip(window).map(|(a, b)| a * b).sum::<f64>();
        Ok(Jet {
            value: dot(&w[0]),
            d1: dot(&w[1]) / self.h,
            d2: dot(&w[2]) / (self.h * self.h),
        })
    }
}

/// Which of the two coefficients of a rotating-frame block a spec describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockComponent {
    /// The coefficient on the basis pair containing `i`.
    First,
    /// The coefficient on the basis pair containing `j`.
    Second,
}

/// A coefficient function `x_rs(t)`.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveSpec {
    Constant(f64),
    /// `cos_amp cos(omega t) + sin_amp sin(omega t)`.
    TrigPair {
        cos_amp: f64,
        sin_amp: f64,
        omega: f64,
    },
    /// One coordinate of `x = rot(t) z` where `z' = -[[0, p], [q, 0]] z`,
    /// `x_1 = cos t z_1 + kappa sin t z_2`, `x_2 = cos t z_2 - kappa sin t z_1`.
    RotatingFrame {
        component: BlockComponent,
        kappa: f64,
        z0: [f64; 2],
        p: f64,
        q: f64,
    },
    /// Solution of `x'' = -mu x (x')^2` with `x(0) = x0`, `x'(0) = v0`.
    ObliqueScalar(ObliqueScalarSolution),
    /// One coordinate of a numerically integrated oblique system: the
    /// integrator's position and velocity samples on the same grid.
    ObliqueSystem {
        position: Arc<SampledCurve>,
        velocity: Arc<SampledCurve>,
    },
    NumericSamples(Arc<SampledCurve>),
}

/// `z(t)`, `z'(t)`, `z''(t)` for `z' = -M z`, `M = [[0, p], [q, 0]]`.
fn rotating_z(z0: [f64; 2], p: f64, q: f64, t: f64) -> [[f64; 2]; 3] {
    let pq = p * q;
    let (za, zb) = if pq < 0.0 {
        let w = (-pq).sqrt();
        let (s, c) = (w * t).sin_cos();
        (z0[0] * c - p / w * z0[1] * s, z0[1] * c - q / w * z0[0] * s)
    } else if pq > 0.0 {
        let w = pq.sqrt();
        let (s, c) = ((w * t).sinh(), (w * t).cosh());
        (z0[0] * c - p / w * z0[1] * s, z0[1] * c - q / w * z0[0] * s)
    } else {
        (z0[0] - p * t * z0[1], z0[1] - q * t * z0[0])
    };
    [[za, zb], [-p * zb, -q * za], [pq * za, pq * zb]]
}

impl CurveSpec {
    pub fn zero() -> Self {
        CurveSpec::Constant(0.0)
    }

    pub fn numeric(curve: SampledCurve) -> Self {
        CurveSpec::NumericSamples(Arc::new(curve))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CurveSpec::Constant(_) => "constant",
            CurveSpec::TrigPair { .. } => "trig_pair",
            CurveSpec::RotatingFrame { .. } => "rotating_frame",
            CurveSpec::ObliqueScalar(_) => "oblique_scalar",
            CurveSpec::ObliqueSystem { .. } => "oblique_system",
            CurveSpec::NumericSamples(_) => "numeric_samples",
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, CurveSpec::Constant(c) if *c == 0.0)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.jet(t)?.value)
    }

    pub fn jet(&self, t: f64) -> Result<Jet> {
        match self {
            CurveSpec::Constant(c) => Ok(Jet {
                value: *c,
                d1: 0.0,
                d2: 0.0,
            }),
            CurveSpec::TrigPair {
                cos_amp,
                sin_amp,
                omega,
            } => {
                let (s, c) = (omega * t).sin_cos();
                let value = cos_amp * c + sin_amp * s;
                Ok(Jet {
                    value,
                    d1: omega * (sin_amp * c - cos_amp * s),
                    d2: -omega * omega * value,
                })
            }
            CurveSpec::RotatingFrame {
                component,
                kappa,
                z0,
                p,
                q,
            } => {
                let [z, dz, ddz] = rotating_z(*z0, *p, *q, t);
                // x = cos t u + kappa sin t v, with (u, v) = (z1, z2) or (z2, -z1).
                let pick = |z: [f64; 2]| match component {
                    BlockComponent::First => (z[0], z[1]),
                    BlockComponent::Second => (z[1], -z[0]),
                };
                let ((u, v), (du, dv), (ddu, ddv)) = (pick(z), pick(dz), pick(ddz));
                let (s, c) = t.sin_cos();
                Ok(Jet {
                    value: c * u + kappa * s * v,
                    d1: -s * u + c * du + kappa * (c * v + s * dv),
                    d2: -c * u - 2.0 * s * du + c * ddu + kappa * (-s * v + 2.0 * c * dv + s * ddv),
                })
            }
            CurveSpec::ObliqueScalar(sol) => oblique_scalar_jet(sol, t),
            CurveSpec::ObliqueSystem { position, velocity } => {
                // x' comes from the integrator; only x'' is differenced
                let v = velocity.jet(t)?;
                Ok(Jet {
                    value: position.jet(t)?.value,
                    d1: v.value,
                    d2: v.d1,
                })
            }
            CurveSpec::NumericSamples(samples) => samples.jet(t),
        }
    }
}

/// A field `gamma(t) = sum x_rs(t) w_rs*(zeta(t))` along `zeta(t) = exp(t w_ij) . o`.
///
/// Coefficients are fundamental-field coordinates; indices without an
/// entry are identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldAlongBase {
    n: usize,
    base: (usize, usize),
    coeffs: BTreeMap<(usize, usize), CurveSpec>,
}

/// `X(t)`, `X'(t)`, `X''(t)` as algebra vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldJet {
    pub value: AlgebraVector,
    pub d1: AlgebraVector,
    pub d2: AlgebraVector,
}

impl FieldAlongBase {
    pub fn new(n: usize, i: usize, j: usize) -> Result<Self> {
        check_index(n, i, j)?;
        Ok(Self {
            n,
            base: (i, j),
            coeffs: BTreeMap::new(),
        })
    }

    /// Sets the coefficient on `w_rs`; a zero constant clears it.
    pub fn set(&mut self, r: usize, s: usize, spec: CurveSpec) -> Result<()> {
        check_index(self.n, r, s)?;
        if spec.is_zero() {
            self.coeffs.remove(&(r, s));
        } else {
            self.coeffs.insert((r, s), spec);
        }
        Ok(())
    }

    pub fn with(mut self, r: usize, s: usize, spec: CurveSpec) -> Result<Self> {
        self.set(r, s, spec)?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> (usize, usize) {
        self.base
    }

    /// The velocity `w_ij` of the base curve.
    pub fn base_direction(&self) -> AlgebraVector {
        AlgebraVector::basis(self.n, self.base.0, self.base.1).expect("validated")
    }

    pub fn coeff(&self, r: usize, s: usize) -> Option<&CurveSpec> {
        self.coeffs.get(&(r, s))
    }

    /// Non-zero coefficients in basis order.
    pub fn support(&self) -> impl Iterator<Item = (&(usize, usize), &CurveSpec)> {
        self.coeffs.iter()
    }

    pub fn value(&self, t: f64) -> Result<AlgebraVector> {
        Ok(self.jet(t)?.value)
    }

    pub fn jet(&self, t: f64) -> Result<FieldJet> {
        let mut value = AlgebraVector::zeros(self.n);
        let mut d1 = AlgebraVector::zeros(self.n);
        let mut d2 = AlgebraVector::zeros(self.n);
        for (&(r, s), spec) in &self.coeffs {
            let j = spec.jet(t)?;
            value.set(r, s, j.value);
            d1.set(r, s, j.d1);
            d2.set(r, s, j.d2);
        }
        Ok(FieldJet { value, d1, d2 })
    }

    /// Row of coefficient values at `t` in basis order.
    pub fn row(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.value(t)?.coeffs().to_vec())
    }

    /// Basis pairs of the ambient algebra, for column headers.
    pub fn columns(&self) -> Vec<(usize, usize)> {
        basis_pairs(self.n).collect()
    }
}
