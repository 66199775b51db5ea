//! `orbitgeo check`: seeded randomized audit of the core identities.
//!
//! Every sample draws from its own ChaCha stream `(audit, index)` under the
//! run seed, so results do not depend on the thread count.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;

use orbitgeo::hyperboloid::{chart_embed, chart_invert, f_map, g_inverse, ChartPoint};
use orbitgeo::semidirect::{action_tangent, GStarElement, TangentPoint};
use orbitgeo::so_algebra::{adjoint_rotation, basis_pairs, givens_exp, AlgebraVector};
use orbitgeo::tangent_geodesics::{
    parallel_transport, sasaki_residual, solve_horizontal_pair, CurveSpec, FieldAlongBase,
    IndexRegime, ObliqueScalarSolution,
};
use orbitgeo::DiagonalMetric;

use crate::config;
use crate::error::{CliError, CliResult};
use crate::output::{self, finite};
use crate::{Common, Outcome};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub samples: Option<usize>,
    pub n_max: Option<usize>,
}

pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_N_MAX: usize = 5;

struct Audit {
    name: &'static str,
    tol: f64,
    run: fn(&mut ChaCha8Rng, usize) -> f64,
}

fn metric(r: &mut ChaCha8Rng, n: usize) -> DiagonalMetric {
    let dim = n * (n - 1) / 2;
    DiagonalMetric::new(n, (0..dim).map(|_| r.gen_range(0.5..3.0)).collect())
        .expect("positive weights")
}

fn vector(r: &mut ChaCha8Rng, n: usize) -> AlgebraVector {
    let dim = n * (n - 1) / 2;
    AlgebraVector::from_coeffs(n, (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect())
        .expect("length")
}

fn rotation(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    basis_pairs(n).fold(DMatrix::identity(n, n), |a, (i, j)| {
        a * givens_exp(n, i, j, r.gen_range(-PI..PI)).expect("valid index")
    })
}

fn index(r: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let i = r.gen_range(2..=n);
    (i, r.gen_range(1..i))
}

fn dim(r: &mut ChaCha8Rng, lo: usize, n_max: usize) -> usize {
    r.gen_range(lo..=n_max.max(lo))
}

fn adjoint(r: &mut ChaCha8Rng, n_max: usize) -> f64 {
    let n = dim(r, 2, n_max);
    let ((i, j), (p, q)) = (index(r, n), index(r, n));
    let t = r.gen_range(-10.0..10.0);
    let got = adjoint_rotation(n, i, j, t, p, q).expect("valid index");
    let g = givens_exp(n, i, j, -t).expect("valid index");
    let m = &g
        * AlgebraVector::basis(n, p, q)
            .expect("valid index")
            .to_skew()
            .matrix()
        * g.transpose();
    basis_pairs(n)
        .map(|(a, b)| (got.get(a, b) - m[(a - 1, b - 1)]).abs())
        .fold(0.0, f64::max)
}

fn horizontal_block(
    r: &mut ChaCha8Rng,
    n_max: usize,
) -> (DiagonalMetric, FieldAlongBase, usize, usize) {
    let n = dim(r, 3, n_max);
    let (i, j) = index(r, n);
    let s = loop {
        let s = r.gen_range(1..=n);
        if s != i && s != j {
            break s;
        }
    };
    let g = metric(r, n);
    let (a, b) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
    let field = solve_horizontal_pair(&g, i, j, s, IndexRegime::of_free_index(i, j, s), a, b)
        .and_then(|p| p.field(n, i, j))
        .expect("valid block");
    (g, field, i, j)
}

fn horizontal_vs_transport(r: &mut ChaCha8Rng, n_max: usize) -> f64 {
    let (g, field, i, j) = horizontal_block(r, n_max);
    let t = r.gen_range(-2.0 * PI..2.0 * PI);
    let v0 = field.value(0.0).expect("closed form");
    let moved = parallel_transport(&g, i, j, &v0, t).expect("transport");
    (&moved.fiber - &field.value(t).expect("closed form")).norm_inf()
}

fn sasaki_horizontal(r: &mut ChaCha8Rng, n_max: usize) -> f64 {
    let (g, field, _, _) = horizontal_block(r, n_max);
    let t = r.gen_range(0.0..2.0 * PI);
    sasaki_residual(&g, &field, t).expect("residual").max_abs()
}

fn sasaki_oblique(r: &mut ChaCha8Rng, n_max: usize) -> f64 {
    let n = dim(r, 2, n_max);
    let (i, j) = index(r, n);
    let g = metric(r, n);
    let sol =
        ObliqueScalarSolution::new(g.mu(i, j), r.gen_range(-1.0..1.0), r.gen_range(-2.0..2.0))
            .expect("valid data");
    let field = FieldAlongBase::new(n, i, j)
        .and_then(|f| f.with(i, j, CurveSpec::ObliqueScalar(sol)))
        .expect("valid field");
    sasaki_residual(&g, &field, r.gen_range(0.0..3.0))
        .expect("residual")
        .max_abs()
}

fn transport_isometry(r: &mut ChaCha8Rng, n_max: usize) -> f64 {
    let n = dim(r, 2, n_max);
    let g = metric(r, n);
    let (i, j) = index(r, n);
    let v0 = vector(r, n);
    let out =
        parallel_transport(&g, i, j, &v0, r.gen_range(-2.0 * PI..2.0 * PI)).expect("transport");
    (g.norm_sq(&v0).expect("dim").sqrt() - g.norm_sq(&out.frame).expect("dim").sqrt()).abs()
}

fn curvature_identities(r: &mut ChaCha8Rng, n_max: usize) -> f64 {
    let n = dim(r, 3, n_max);
    let g = metric(r, n);
    let (x, y, z) = (vector(r, n), vector(r, n), vector(r, n));
    let rc = |a: &AlgebraVector, b: &AlgebraVector, c: &AlgebraVector| {
        g.curvature(a, b, c).expect("dim")
    };
    let mut bianchi = rc(&x, &y, &z);
    bianchi += &rc(&y, &z, &x);
    bianchi += &rc(&z, &x, &y);
    bianchi
        .norm_inf()
        .max((&rc(&x, &y, &z) + &rc(&y, &x, &z)).norm_inf())
}

fn hyperboloid_roundtrip(r: &mut ChaCha8Rng, _n_max: usize) -> f64 {
    let th = r.gen_range(-PI..PI);
    let p = [th.cos(), th.sin()];
    let q = f_map(&g_inverse(p).expect("on circle")).expect("rotation");
    let (u, v) = (r.gen_range(-PI..PI), r.gen_range(-5.0..5.0));
    let c = chart_invert(&chart_embed(&ChartPoint::new(u, v))).expect("on surface");
    let du = (c.u - u).abs();
    (q[0] - p[0])
        .abs()
        .max((q[1] - p[1]).abs())
        .max(du.min(2.0 * PI - du))
        .max((c.v - v).abs())
}

fn semidirect_composition(r: &mut ChaCha8Rng, n_max: usize) -> f64 {
    let n = dim(r, 2, n_max);
    let v = TangentPoint::new(rotation(r, n), vector(r, n)).expect("valid point");
    let p = GStarElement::new(vector(r, n), rotation(r, n)).expect("valid element");
    let q = GStarElement::new(vector(r, n), rotation(r, n)).expect("valid element");
    let lhs = action_tangent(&p.mul(&q).expect("dim"), &v).expect("dim");
    let rhs = action_tangent(&p, &action_tangent(&q, &v).expect("dim")).expect("dim");
    (lhs.fiber() - rhs.fiber())
        .norm_inf()
        .max((lhs.base() - rhs.base()).amax())
}

const AUDITS: [Audit; 8] = [
    Audit {
        name: "adjoint_rotation",
        tol: 1e-12,
        run: adjoint,
    },
    Audit {
        name: "horizontal_vs_transport",
        tol: 1e-8,
        run: horizontal_vs_transport,
    },
    Audit {
        name: "sasaki_horizontal",
        tol: 1e-7,
        run: sasaki_horizontal,
    },
    Audit {
        name: "sasaki_oblique_scalar",
        tol: 1e-7,
        run: sasaki_oblique,
    },
    Audit {
        name: "transport_isometry",
        tol: 1e-8,
        run: transport_isometry,
    },
    Audit {
        name: "curvature_identities",
        tol: 1e-10,
        run: curvature_identities,
    },
    Audit {
        name: "hyperboloid_roundtrip",
        tol: 1e-10,
        run: hyperboloid_roundtrip,
    },
    Audit {
        name: "semidirect_composition",
        tol: 1e-10,
        run: semidirect_composition,
    },
];

pub fn run(args: &Common) -> CliResult<Outcome> {
    let cfg = match args.config.as_deref() {
        Some(path) => config::load::<CheckConfig>(Some(path))?.body,
        None => CheckConfig::default(),
    };
    let samples = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let n_max = cfg.n_max.unwrap_or(DEFAULT_N_MAX);
    if samples == 0 {
        return Err(CliError::input("\"samples\" must be positive"));
    }
    if !(2..=12).contains(&n_max) {
        return Err(CliError::input(format!(
            "\"n_max\" must be in 2..=12, got {n_max}"
        )));
    }
    if let Some(t) = args.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::input(format!(
                "tolerance must be positive, got {t}"
            )));
        }
    }
    let seed = args.seed.unwrap_or(0);

    let mut rows = Vec::new();
    let mut passed = true;
    let mut failing = Vec::new();
    for (a, audit) in AUDITS.iter().enumerate() {
        let worst = (0..samples)
            .into_par_iter()
            .map(|k| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(((a as u64) << 32) | k as u64);
                (audit.run)(&mut r, n_max)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0f64, |m, x| if x.is_nan() || x > m { x } else { m });
        let tol = args.tol.unwrap_or(audit.tol);
        let ok = worst <= tol;
        passed &= ok;
        if !ok {
            failing.push(audit.name);
        }
        rows.push(json!({
            "name": audit.name,
            "max_deviation": finite(worst),
            "tol": tol,
            "pass": ok,
        }));
    }
    let report = json!({
        "seed": seed,
        "samples": samples,
        "n_max": n_max,
        "audits": rows,
        "pass": passed,
    });
    match &args.out {
        Some(dir) => {
            output::ensure_dir(dir)?;
            output::write_json(dir, "check.json", &report)?;
        }
        None => println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("JSON values serialize")
        ),
    }
    let summary = if passed {
        format!(
            "check: {} audits x {samples} samples passed (seed {seed})",
            AUDITS.len()
        )
    } else {
        format!("check: failing audits {failing:?} (seed {seed})")
    };
    Ok(Outcome { passed, summary })
}
