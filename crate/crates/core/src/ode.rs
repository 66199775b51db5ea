//! Numerical initial-value solvers and finite differences.
//!
//! These are the independent oracle for every closed form in the crate and
//! never call into the closed-form code paths. All routines are
//! deterministic: identical inputs give bit-identical outputs.

use crate::error::{Error, Result};

/// `y' = f(t, y)` on `[t0, t1]` with `y(t0) = y0`. The right-hand side writes
/// the derivative into its third argument.
pub struct IvpProblem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    rhs: F,
    t0: f64,
    t1: f64,
    y0: Vec<f64>,
}

impl<F> IvpProblem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(rhs: F, t0: f64, t1: f64, y0: Vec<f64>) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(Error::InvalidStep(format!(
                "interval [{t0}, {t1}] must be finite with t1 > t0"
            )));
        }
        if y0.is_empty() {
            return Err(Error::InvalidStep("empty initial state".into()));
        }
        Ok(Self { rhs, t0, t1, y0 })
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    fn eval(&self, t: f64, y: &[f64]) -> Vec<f64> {
        let mut dy = vec![0.0; y.len()];
        (self.rhs)(t, y, &mut dy);
        dy
    }
}

/// Accepted solver nodes with derivatives for Hermite dense output.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivs: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory has at least one node")
    }

    /// Cubic Hermite interpolation between the bracketing nodes; clamps
    /// outside the covered interval.
    pub fn sample(&self, t: f64) -> Vec<f64> {
        let last = self.times.len() - 1;
        if t <= self.times[0] {
            return self.states[0].clone();
        }
        if t >= self.times[last] {
            return self.states[last].clone();
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let (ta, tb) = (self.times[k], self.times[k + 1]);
        let h = tb - ta;
        let s = (t - ta) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        (0..self.states[k].len())
            .map(|i| {
                h00 * self.states[k][i]
                    + h10 * h * self.derivs[k][i]
                    + h01 * self.states[k + 1][i]
                    + h11 * h * self.derivs[k + 1][i]
            })
            .collect()
    }
}

fn check_finite(t: f64, y: &[f64]) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(t))
    }
}

fn axpy_into(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..y.len() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

/// Classical fourth-order Runge-Kutta on the grid `t0, t0 + step, ...`,
/// with a final (possibly shorter) step landing exactly on `t1`.
pub fn rk4_fixed<F>(p: &IvpProblem<F>, step: f64) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let span = p.t1 - p.t0;
    if !(step > 0.0) || step > span * (1.0 + 1e-12) {
        return Err(Error::InvalidStep(format!(
            "step {step} must lie in (0, {span}]"
        )));
    }
    let count = ((span / step) - 1e-9).ceil().max(1.0) as usize;
    let dim = p.dim();
    let mut times = Vec::with_capacity(count + 1);
    let mut states = Vec::with_capacity(count + 1);
    let mut derivs = Vec::with_capacity(count + 1);

    let mut t = p.t0;
    let mut y = p.y0.clone();
    let mut k1 = p.eval(t, &y);
    times.push(t);
    states.push(y.clone());
    derivs.push(k1.clone());
    let mut tmp = vec![0.0; dim];
    for k in 0..count {
        let t_next = if k + 1 == count {
            p.t1
        } else {
            p.t0 + (k + 1) as f64 * step
        };
        let h = t_next - t;
        axpy_into(&mut tmp, &y, 0.5 * h, &[(1.0, &k1)]);
        let k2 = p.eval(t + 0.5 * h, &tmp);
        axpy_into(&mut tmp, &y, 0.5 * h, &[(1.0, &k2)]);
        let k3 = p.eval(t + 0.5 * h, &tmp);
        axpy_into(&mut tmp, &y, h, &[(1.0, &k3)]);
        let k4 = p.eval(t + h, &tmp);
        let mut next = vec![0.0; dim];
        axpy_into(
            &mut next,
            &y,
            h / 6.0,
            &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)],
        );
        check_finite(t_next, &next)?;
        t = t_next;
        y = next;
        k1 = p.eval(t, &y);
        times.push(t);
        states.push(y.clone());
        derivs.push(k1.clone());
    }
    Ok(Trajectory {
        times,
        states,
        derivs,
    })
}

/// Controls for [`rk_adaptive`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    /// Upper bound on the step size; the whole interval when `None`.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl AdaptiveOptions {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            h0: None,
            max_step: None,
            max_steps: 1_000_000,
        }
    }
}

/// Smallest admissible step before the integrator gives up.
pub const MIN_STEP: f64 = 1e-14;

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Embedded Dormand-Prince 5(4) with standard step control (local
/// extrapolation, FSAL). Dense output between accepted nodes is cubic
/// Hermite through [`Trajectory::sample`].
pub fn rk_adaptive<F>(p: &IvpProblem<F>, opts: AdaptiveOptions) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let AdaptiveOptions {
        rtol,
        atol,
        h0,
        max_step,
        max_steps,
    } = opts;
    if !(rtol > 0.0 && atol > 0.0 && rtol.is_finite() && atol.is_finite()) {
        return Err(Error::InvalidTolerance { rtol, atol });
    }
    let dim = p.dim();
    let span = p.t1 - p.t0;
    let h_max = max_step.unwrap_or(span).min(span);

    let mut t = p.t0;
    let mut y = p.y0.clone();
    let mut k1 = p.eval(t, &y);
    check_finite(t, &k1)?;

    let scale = |y: &[f64], z: &[f64], i: usize| atol + rtol * y[i].abs().max(z[i].abs());
    let mut h = match h0 {
        Some(h) if h > 0.0 => h.min(h_max),
        Some(h) => {
            return Err(Error::InvalidStep(format!(
                "initial step {h} must be positive"
            )))
        }
        None => {
            // Hairer-Norsett-Wanner starting step heuristic.
            let d0 = rms((0..dim).map(|i| y[i] / scale(&y, &y, i)));
            let d1 = rms((0..dim).map(|i| k1[i] / scale(&y, &y, i)));
            let h_a = if d0 < 1e-5 || d1 < 1e-5 {
                1e-6
            } else {
                0.01 * d0 / d1
            };
            let y1: Vec<f64> = (0..dim).map(|i| y[i] + h_a * k1[i]).collect();
            let f1 = p.eval(t + h_a, &y1);
            let d2 = rms((0..dim).map(|i| (f1[i] - k1[i]) / scale(&y, &y, i))) / h_a;
            let h_b = if d1.max(d2) <= 1e-15 {
                (h_a * 1e-3).max(1e-6)
            } else {
                (0.01 / d1.max(d2)).powf(0.2)
            };
            (100.0 * h_a).min(h_b).min(h_max)
        }
    };

    let mut times = vec![t];
    let mut states = vec![y.clone()];
    let mut derivs = vec![k1.clone()];
    let mut tmp = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];
    let mut steps = 0usize;

    while t < p.t1 {
        if steps >= max_steps {
            return Err(Error::TooManySteps(max_steps));
        }
        steps += 1;
        let last = t + h >= p.t1 || (p.t1 - (t + h)) < 1e-12 * span;
        if last {
            h = p.t1 - t;
        }
        if h < MIN_STEP {
            return Err(Error::StepUnderflow { t, h });
        }

        axpy_into(&mut tmp, &y, h, &[(A21, &k1)]);
        let k2 = p.eval(t + C2 * h, &tmp);
        axpy_into(&mut tmp, &y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = p.eval(t + C3 * h, &tmp);
        axpy_into(&mut tmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = p.eval(t + C4 * h, &tmp);
        axpy_into(
            &mut tmp,
            &y,
            h,
            &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
        );
        let k5 = p.eval(t + C5 * h, &tmp);
        axpy_into(
            &mut tmp,
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        let k6 = p.eval(t + h, &tmp);
        axpy_into(
            &mut y5,
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let t_new = if last { p.t1 } else { t + h };
        let k7 = p.eval(t_new, &y5);

        let err = rms((0..dim).map(|i| {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            e / scale(&y, &y5, i)
        }));

        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            check_finite(t_new, &y5)?;
            t = t_new;
            std::mem::swap(&mut y, &mut y5);
            k1 = k7;
            times.push(t);
            states.push(y.clone());
            derivs.push(k1.clone());
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * fac).min(h_max);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(Trajectory {
        times,
        states,
        derivs,
    })
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = it.fold((0.0, 0usize), |(s, c), v| (s + v * v, c + 1));
    if count == 0 {
        0.0
    } else {
        (sum / count as f64).sqrt()
    }
}

/// Fornberg's finite-difference weights.
///
/// Returns `w[m][k]`: the weight of `f(nodes[k])` in the approximation of
/// the `m`-th derivative at `z`, for `m = 0..=order`.
pub fn fornberg_weights(z: f64, nodes: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Minimum number of samples accepted by [`finite_difference`].
pub const FD_MIN_POINTS: usize = 5;

/// First or second derivative of uniformly spaced samples.
///
/// Interior points use the 5-point central stencil (fourth order). Points
/// within two nodes of an end use a one-sided window, of 5 points for the
/// first derivative and 6 for the second, so accuracy stays fourth order.
pub fn finite_difference(values: &[f64], h: f64, order: usize) -> Result<Vec<f64>> {
    if !(order == 1 || order == 2) {
        return Err(Error::InvalidGrid(format!(
            "derivative order must be 1 or 2, got {order}"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidGrid(format!("spacing {h} must be positive")));
    }
    let n = values.len();
    if n < FD_MIN_POINTS {
        return Err(Error::TooFewPoints {
            got: n,
            need: FD_MIN_POINTS,
        });
    }
    let width = if order == 2 && n >= 6 { 6 } else { 5 };
    let mut out = Vec::with_capacity(n);
    let mut cache: Vec<(usize, isize, Vec<f64>)> = Vec::new();
    for k in 0..n {
        let start = if k >= 2 && k + 2 < n {
            k - 2
        } else if k < 2 {
            0
        } else {
            n - width
        };
        let len = if k >= 2 && k + 2 < n { 5 } else { width };
        let offset = k as isize - start as isize;
        let weights = match cache.iter().find(|(l, o, _)| *l == len && *o == offset) {
            Some((_, _, w)) => w.clone(),
            None => {
                let nodes: Vec<f64> = (0..len).map(|m| m as f64).collect();
                let w = fornberg_weights(offset as f64, &nodes, order).swap_remove(order);
                cache.push((len, offset, w.clone()));
                w
            }
        };
        let d: f64 = weights
            .iter()
            .zip(&values[start..start + len])
            .map(|(w, v)| w * v)
            .sum();
        out.push(d / h.powi(order as i32));
    }
    Ok(out)
}
