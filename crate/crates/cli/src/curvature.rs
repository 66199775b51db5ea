//! `orbitgeo curvature`: sectional curvatures of the coordinate planes.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use orbitgeo::so_algebra::{basis_pairs, AlgebraVector};
use orbitgeo::DiagonalMetric;

use crate::config::{self, tolerance, MetricSource};
use crate::error::{CliError, CliResult};
use crate::output::{self, finite};
use crate::{Common, Outcome};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureConfig {
    pub n: usize,
    pub mu: Option<Value>,
    pub metric_file: Option<PathBuf>,
    pub tol: Option<f64>,
}

pub struct Report {
    pub json: Value,
    pub passed: bool,
    pub summary: String,
}

/// Curvature report for `g`; `n = 2` is rejected since `so(2)` is abelian.
pub fn report(g: &DiagonalMetric, tol: f64) -> CliResult<Report> {
    let n = g.n();
    if n < 3 {
        return Err(orbitgeo::Error::NoTwoPlanes.into());
    }
    let basis: Vec<((usize, usize), AlgebraVector)> = basis_pairs(n)
        .map(|(i, j)| ((i, j), AlgebraVector::basis(n, i, j).expect("basis pair")))
        .collect();
    // (x, y, K, commuting): disjoint index pairs commute and are flat
    let mut planes = Vec::new();
    for (p, (x_idx, x)) in basis.iter().enumerate() {
        for (y_idx, y) in &basis[p + 1..] {
            let commuting = x.bracket(y)?.norm_inf() == 0.0;
            planes.push((*x_idx, *y_idx, g.sectional_curvature(x, y)?, commuting));
        }
    }

    let (bianchi, antisymmetry) = basis
        .par_iter()
        .map(|(_, x)| {
            let (mut b, mut a) = (0.0f64, 0.0f64);
            for (_, y) in &basis {
                for (_, z) in &basis {
                    let rxy = g.curvature(x, y, z).expect("same dimension");
                    let mut sum = rxy.clone();
                    sum += &g.curvature(y, z, x).expect("same dimension");
                    sum += &g.curvature(z, x, y).expect("same dimension");
                    b = b.max(sum.norm_inf());
                    a = a.max((&rxy + &g.curvature(y, x, z).expect("same dimension")).norm_inf());
                }
            }
            (b, a)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0f64, 0.0f64), |(b, a), (b2, a2)| (b.max(b2), a.max(a2)));

    let w = g.weights();
    let equal_mu = w.iter().all(|&m| m == w[0]);
    let k0 = planes[0].2;
    let spread = planes.iter().map(|p| (p.2 - k0).abs()).fold(0.0, f64::max);
    let expected = equal_mu.then(|| 0.25 / w[0]);
    let deviation = expected.map(|e| {
        planes
            .iter()
            .map(|p| (p.2 - if p.3 { 0.0 } else { e }).abs())
            .fold(0.0, f64::max)
    });
    let constant = spread <= tol;

    let mut passed = bianchi <= tol && antisymmetry <= tol;
    if let Some(d) = deviation {
        passed &= d <= tol;
    }
    let json = json!({
        "n": n,
        "mu": g.to_json()["mu"],
        "tol": tol,
        "planes": planes
            .iter()
            .map(|(x, y, k, c)| {
                json!({ "x": [x.0, x.1], "y": [y.0, y.1], "k": finite(*k), "commuting": c })
            })
            .collect::<Vec<_>>(),
        "min_curvature": finite(planes.iter().map(|p| p.2).fold(f64::INFINITY, f64::min)),
        "max_curvature": finite(planes.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max)),
        "equal_mu": equal_mu,
        "constant_on_coordinate_planes": constant,
        "expected_equal_mu_curvature": expected,
        "max_deviation_from_expected": deviation,
        "bianchi_max": finite(bianchi),
        "antisymmetry_max": finite(antisymmetry),
        "pass": passed,
    });
    let summary = format!(
        "curvature: n = {n}, {} coordinate planes, K in [{:.6}, {:.6}]{}, Bianchi {bianchi:.3e}",
        planes.len(),
        planes.iter().map(|p| p.2).fold(f64::INFINITY, f64::min),
        planes.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max),
        if equal_mu { ", equal weights" } else { "" },
    );
    Ok(Report {
        json,
        passed,
        summary,
    })
}

pub fn run(args: &Common) -> CliResult<Outcome> {
    let cfg = config::load::<CurvatureConfig>(args.config.as_deref())?;
    let c = &cfg.body;
    if c.n == 2 {
        return Err(CliError::Geometry(orbitgeo::Error::NoTwoPlanes));
    }
    let g = MetricSource {
        mu: c.mu.clone(),
        metric_file: c.metric_file.clone(),
    }
    .resolve(c.n, &cfg.dir)?;
    let tol = tolerance(args.tol, c.tol, DEFAULT_TOL)?;
    let r = report(&g, tol)?;
    match &args.out {
        Some(dir) => {
            output::ensure_dir(dir)?;
            output::write_json(dir, "curvature.json", &r.json)?;
        }
        None => println!(
            "{}",
            serde_json::to_string_pretty(&r.json).expect("JSON values serialize")
        ),
    }
    Ok(Outcome {
        passed: r.passed,
        summary: r.summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_weights_give_quarter_over_mu() {
        let r = report(&DiagonalMetric::equal(3, 1.0).unwrap(), 1e-9).unwrap();
        assert!(r.passed);
        for p in r.json["planes"].as_array().unwrap() {
            assert!((p["k"].as_f64().unwrap() - 0.25).abs() < 1e-9);
        }
        assert_eq!(r.json["constant_on_coordinate_planes"], true);
    }

    #[test]
    fn disjoint_planes_are_flat() {
        let r = report(&DiagonalMetric::equal(4, 2.0).unwrap(), 1e-9).unwrap();
        assert!(r.passed);
        for p in r.json["planes"].as_array().unwrap() {
            let k = p["k"].as_f64().unwrap();
            let expect = if p["commuting"] == true { 0.0 } else { 0.125 };
            assert!((k - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn generic_weights_pass_bianchi() {
        let g = DiagonalMetric::new(3, vec![1.0, 2.0, 3.0]).unwrap();
        let r = report(&g, 1e-9).unwrap();
        assert!(r.passed);
        assert!(r.json["bianchi_max"].as_f64().unwrap() < 1e-12);
        assert_eq!(r.json["expected_equal_mu_curvature"], Value::Null);
    }

    #[test]
    fn abelian_case_rejected() {
        let err = report(&DiagonalMetric::equal(2, 1.0).unwrap(), 1e-9)
            .err()
            .unwrap();
        assert!(err.to_string().contains("abelian"));
    }
}
