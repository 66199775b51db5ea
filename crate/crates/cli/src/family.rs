//! `orbitgeo family`: sample a geodesic family and audit its residuals.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use orbitgeo::so_algebra::{basis_pairs, check_index, AlgebraVector};
use orbitgeo::tangent_geodesics::{
    horizontal_family_ii, horizontal_residual, oblique_system_residual, sasaki_residual,
    solve_horizontal_pair, solve_oblique_system, CurveSpec, FieldAlongBase, IndexRegime,
    ObliqueScalarSolution,
};
use orbitgeo::DiagonalMetric;

use crate::config::{self, grid, pair_map, tolerance, MetricSource};
use crate::error::{CliError, CliResult};
use crate::output;
use crate::{Common, Outcome};

pub const DEFAULT_TOL: f64 = 1e-7;
/// Largest RK4 step used for the oblique system.
pub const DEFAULT_RK4_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Horizontal1,
    Horizontal2,
    Oblique,
}

impl FamilyKind {
    fn name(self) -> &'static str {
        match self {
            FamilyKind::Horizontal1 => "horizontal1",
            FamilyKind::Horizontal2 => "horizontal2",
            FamilyKind::Oblique => "oblique",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub n: usize,
    pub mu: Option<Value>,
    pub metric_file: Option<std::path::PathBuf>,
    pub base: [usize; 2],
    pub family: FamilyKind,
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    pub tol: Option<f64>,
    // horizontal1
    pub s: Option<usize>,
    pub regime: Option<String>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    // horizontal2
    pub coeffs: Option<BTreeMap<String, f64>>,
    // oblique: numbers for the scalar solution on the base index, maps for the system
    pub x0: Option<Value>,
    pub v0: Option<Value>,
    pub rk4_step: Option<f64>,
}

struct Built {
    field: FieldAlongBase,
    details: Value,
}

fn require<T: Copy>(v: Option<T>, family: FamilyKind, key: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::input(format!("family {} needs \"{key}\"", family.name())))
}

fn reject_foreign(c: &FamilyConfig) -> CliResult<()> {
    let present = |name: &'static str, set: bool| set.then_some(name);
    let foreign: Vec<&str> = match c.family {
        FamilyKind::Horizontal1 => vec![
            present("coeffs", c.coeffs.is_some()),
            present("x0", c.x0.is_some()),
            present("v0", c.v0.is_some()),
            present("rk4_step", c.rk4_step.is_some()),
        ],
        FamilyKind::Horizontal2 => vec![
            present("s", c.s.is_some()),
            present("regime", c.regime.is_some()),
            present("a", c.a.is_some()),
            present("b", c.b.is_some()),
            present("x0", c.x0.is_some()),
            present("v0", c.v0.is_some()),
            present("rk4_step", c.rk4_step.is_some()),
        ],
        FamilyKind::Oblique => vec![
            present("s", c.s.is_some()),
            present("regime", c.regime.is_some()),
            present("a", c.a.is_some()),
            present("b", c.b.is_some()),
            present("coeffs", c.coeffs.is_some()),
        ],
    }
    .into_iter()
    .flatten()
    .collect();
    if foreign.is_empty() {
        Ok(())
    } else {
        Err(CliError::input(format!(
            "keys {foreign:?} do not apply to family {}",
            c.family.name()
        )))
    }
}

fn algebra_vector(n: usize, value: &Value, key: &str) -> CliResult<AlgebraVector> {
    let map: BTreeMap<String, f64> = serde_json::from_value(value.clone())
        .map_err(|e| CliError::input(format!("\"{key}\" must map \"i,j\" to numbers: {e}")))?;
    let mut v = AlgebraVector::zeros(n);
    for ((r, s), x) in pair_map(&map)? {
        check_index(n, r, s)?;
        v.set(r, s, x);
    }
    Ok(v)
}

fn build(c: &FamilyConfig, g: &DiagonalMetric) -> CliResult<Built> {
    let (n, [i, j]) = (c.n, c.base);
    match c.family {
        FamilyKind::Horizontal1 => {
            let s = require(c.s, c.family, "s")?;
            let a = require(c.a, c.family, "a")?;
            let b = require(c.b, c.family, "b")?;
            let regime = match &c.regime {
                Some(r) => r.parse::<IndexRegime>()?,
                None if s >= 1 && s <= n => IndexRegime::of_free_index(i, j, s),
                None => {
                    return Err(CliError::input(format!(
                        "free index s = {s} outside 1..={n}"
                    )))
                }
            };
            let pair = solve_horizontal_pair(g, i, j, s, regime, a, b)?;
            let details = json!({
                "regime": pair.regime.name(),
                "block": [[pair.block.a.0, pair.block.a.1], [pair.block.b.0, pair.block.b.1]],
                "body_frequency": pair.body_frequency,
                "circle_frequency": pair.circle_frequency,
                "initial": [a, b],
            });
            Ok(Built {
                field: pair.field(n, i, j)?,
                details,
            })
        }
        FamilyKind::Horizontal2 => {
            let coeffs = c
                .coeffs
                .as_ref()
                .ok_or_else(|| CliError::input("family horizontal2 needs \"coeffs\""))?;
            let field = horizontal_family_ii(g, i, j, &pair_map(coeffs)?)?;
            Ok(Built {
                field,
                details: json!({ "coeffs": coeffs }),
            })
        }
        FamilyKind::Oblique => {
            let (x0, v0) = match (&c.x0, &c.v0) {
                (Some(x0), Some(v0)) => (x0, v0),
                _ => return Err(CliError::input("family oblique needs \"x0\" and \"v0\"")),
            };
            if let (Some(x0), Some(v0)) = (x0.as_f64(), v0.as_f64()) {
                check_index(n, i, j)?;
                let sol = ObliqueScalarSolution::new(g.mu(i, j), x0, v0)?;
                let field =
                    FieldAlongBase::new(n, i, j)?.with(i, j, CurveSpec::ObliqueScalar(sol))?;
                return Ok(Built {
                    field,
                    details: json!({
                        "kind": "scalar",
                        "x0": x0,
                        "v0": v0,
                        "first_integral": sol.c,
                    }),
                });
            }
            if c.t0 < 0.0 {
                return Err(CliError::input(
                    "the oblique system is integrated forward from t = 0; need t0 >= 0",
                ));
            }
            let x0 = algebra_vector(n, x0, "x0")?;
            let v0 = algebra_vector(n, v0, "v0")?;
            let step = c.rk4_step.unwrap_or(DEFAULT_RK4_STEP);
            if !(step > 0.0 && step.is_finite()) {
                return Err(CliError::input(format!(
                    "\"rk4_step\" must be positive, got {step}"
                )));
            }
            let internal = ((c.t1 / step).ceil() as usize).max(c.steps - 1).max(10);
            let field = solve_oblique_system(g, i, j, &x0, &v0, c.t1, internal)?;
            Ok(Built {
                field,
                details: json!({
                    "kind": "system",
                    "rk4_steps": internal,
                    "x0": x0.iter().filter(|(_, v)| *v != 0.0).map(|((r, s), v)| (format!("{r},{s}"), v)).collect::<BTreeMap<_, _>>(),
                    "v0": v0.iter().filter(|(_, v)| *v != 0.0).map(|((r, s), v)| (format!("{r},{s}"), v)).collect::<BTreeMap<_, _>>(),
                }),
            })
        }
    }
}

struct Sample {
    row: Vec<f64>,
    horizontal: Option<f64>,
    oblique: Option<f64>,
    sasaki: f64,
}

fn sample(
    g: &DiagonalMetric,
    field: &FieldAlongBase,
    family: FamilyKind,
    t: f64,
) -> CliResult<Sample> {
    let value = field.value(t)?;
    let mut row = Vec::with_capacity(value.dim() + 1);
    row.push(t);
    row.extend_from_slice(value.coeffs());
    let horizontal = match family {
        FamilyKind::Oblique => None,
        _ => Some(horizontal_residual(g, field, t)?.max_abs()),
    };
    let oblique = match family {
        FamilyKind::Oblique => Some(
            oblique_system_residual(g, field, t)?
                .values()
                .fold(0.0f64, |m, r| m.max(r.abs())),
        ),
        _ => None,
    };
    Ok(Sample {
        row,
        horizontal,
        oblique,
        sasaki: sasaki_residual(g, field, t)?.max_abs(),
    })
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |m, r| if r.is_nan() || r > m { r } else { m })
}

pub fn run(args: &Common) -> CliResult<Outcome> {
    let cfg = config::load::<FamilyConfig>(args.config.as_deref())?;
    let out = args
        .out
        .as_deref()
        .ok_or_else(|| CliError::input("missing --out <dir>"))?;
    let c = &cfg.body;
    reject_foreign(c)?;
    let g = MetricSource {
        mu: c.mu.clone(),
        metric_file: c.metric_file.clone(),
    }
    .resolve(c.n, &cfg.dir)?;
    check_index(c.n, c.base[0], c.base[1])?;
    let times = grid(c.t0, c.t1, c.steps)?;
    let tol = tolerance(args.tol, c.tol, DEFAULT_TOL)?;
    let built = build(c, &g)?;

    let samples = times
        .par_iter()
        .map(|&t| sample(&g, &built.field, c.family, t))
        .collect::<CliResult<Vec<_>>>()?;

    let mut header = vec!["t".to_string()];
    header.extend(basis_pairs(c.n).map(|(r, s)| format!("x_{r}_{s}")));
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.row.clone()).collect();

    let horizontal = samples
        .iter()
        .all(|s| s.horizontal.is_some())
        .then(|| max_of(samples.iter().filter_map(|s| s.horizontal)));
    let oblique = samples
        .iter()
        .all(|s| s.oblique.is_some())
        .then(|| max_of(samples.iter().filter_map(|s| s.oblique)));
    let sasaki = max_of(samples.iter().map(|s| s.sasaki));
    let worst = max_of([horizontal, oblique, Some(sasaki)].into_iter().flatten());
    let passed = worst <= tol;

    output::ensure_dir(out)?;
    output::write_text(out, "trajectory.csv", &output::csv(&header, &rows))?;
    let summary = json!({
        "family": c.family.name(),
        "n": c.n,
        "base": c.base,
        "mu": g.to_json()["mu"],
        "t0": c.t0,
        "t1": c.t1,
        "steps": c.steps,
        "tol": tol,
        "columns": header,
        "trajectory": "trajectory.csv",
        "details": built.details,
        "max_horizontal_residual": horizontal.map(output::finite),
        "max_oblique_residual": oblique.map(output::finite),
        "max_sasaki_residual": output::finite(sasaki),
        "pass": passed,
    });
    output::write_json(out, "summary.json", &summary)?;

    let mut msg = format!(
        "family {}: {} rows, max Sasaki residual {sasaki:.3e}",
        c.family.name(),
        rows.len()
    );
    if let Some(h) = horizontal {
        msg += &format!(", max horizontal residual {h:.3e}");
    }
    if let Some(o) = oblique {
        msg += &format!(", max oblique residual {o:.3e}");
    }
    msg += &format!(" (tol {tol:.1e})");
    Ok(Outcome {
        passed,
        summary: msg,
    })
}
