//! `orbitgeo hyperboloid`: geodesic polylines and the surface mesh of the
//! `n = 2` model.

use serde::Deserialize;
use serde_json::json;

use orbitgeo::hyperboloid::{
    chart_invert, geodesic_from_line, horizontal_lift_curve, obj_mesh, wrap_angle, ChartGeodesic,
    ChartLine,
};

use crate::config::{self, grid, tolerance};
use crate::error::{CliError, CliResult};
use crate::output::{self, finite};
use crate::{Common, Outcome};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftConfig {
    pub xi: f64,
    #[serde(default)]
    pub t0: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default = "default_n_u")]
    pub n_u: usize,
    #[serde(default = "default_n_v")]
    pub n_v: usize,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
}

fn default_n_u() -> usize {
    64
}

fn default_n_v() -> usize {
    17
}

fn default_v_max() -> f64 {
    3.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperboloidConfig {
    /// Chart line `a u + b v = c`.
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    /// Horizontal lift of the constant fiber `xi` instead of a line.
    pub lift: Option<LiftConfig>,
    #[serde(default = "one")]
    pub mu: f64,
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    #[serde(default)]
    pub unit_speed: bool,
    pub tol: Option<f64>,
    pub mesh: Option<MeshConfig>,
}

fn one() -> f64 {
    1.0
}

fn geodesic(c: &HyperboloidConfig) -> CliResult<(ChartGeodesic, ChartLine, &'static str)> {
    match (&c.lift, c.a, c.b, c.c) {
        (Some(l), None, None, None) => {
            let geo = horizontal_lift_curve(l.xi, l.t0, c.mu)?;
            Ok((geo, geo.line(), "lift"))
        }
        (None, Some(a), Some(b), Some(cc)) => {
            let line = ChartLine::new(a, b, cc)?;
            Ok((geodesic_from_line(&line, c.mu)?, line, "line"))
        }
        _ => Err(CliError::input(
            "give either the line coefficients \"a\", \"b\", \"c\" or a \"lift\" object",
        )),
    }
}

pub fn run(args: &Common) -> CliResult<Outcome> {
    let cfg = config::load::<HyperboloidConfig>(args.config.as_deref())?;
    let out = args
        .out
        .as_deref()
        .ok_or_else(|| CliError::input("missing --out <dir>"))?;
    let c = &cfg.body;
    let tol = tolerance(args.tol, c.tol, DEFAULT_TOL)?;
    let (mut geo, line, source) = geodesic(c)?;
    if c.unit_speed {
        geo = geo.unit_chart_speed();
    }
    let times = grid(c.t0, c.t1, c.steps)?;

    let mut curve = Vec::with_capacity(times.len());
    let mut chart = Vec::with_capacity(times.len());
    let (mut line_defect, mut surface_defect) = (0.0f64, 0.0f64);
    let mut crossings = 0usize;
    let mut last_u: Option<f64> = None;
    for &t in &times {
        let p = geo.point(t);
        let (u_param, _) = geo.chart_at(t);
        let inv = chart_invert(&p)?;
        // lift the wrapped angle back next to the parameter value
        let u_lift = u_param + wrap_angle(inv.u - u_param);
        line_defect = line_defect.max(line.defect(u_lift, inv.v).abs());
        surface_defect = surface_defect.max(p.defect() / (1.0 + p.z * p.z));
        if let Some(prev) = last_u {
            if (inv.u - prev).abs() > std::f64::consts::PI {
                crossings += 1;
            }
        }
        last_u = Some(inv.u);
        curve.push(vec![t, p.x, p.y, p.z]);
        chart.push(vec![t, inv.u, inv.v]);
    }
    let passed = line_defect <= tol && surface_defect <= tol;

    output::ensure_dir(out)?;
    let head = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    output::write_text(
        out,
        "curve.csv",
        &output::csv(&head(&["t", "x", "y", "z"]), &curve),
    )?;
    output::write_text(
        out,
        "chart.csv",
        &output::csv(&head(&["t", "u", "v"]), &chart),
    )?;
    let mut files = vec!["curve.csv", "chart.csv"];
    if let Some(m) = &c.mesh {
        output::write_text(out, "hyperboloid.obj", &obj_mesh(m.n_u, m.n_v, m.v_max)?)?;
        files.push("hyperboloid.obj");
    }
    let metadata = json!({
        "case": geo.case().name(),
        "source": source,
        "line": { "a": line.a, "b": line.b, "c": line.c },
        "parametrization": {
            "u0": geo.u0, "v0": geo.v0, "du": geo.du, "dv": geo.dv,
            "unit_chart_speed": c.unit_speed,
        },
        "mu": c.mu,
        "sasaki_speed": geo.speed(),
        "t0": c.t0,
        "t1": c.t1,
        "steps": c.steps,
        "tol": tol,
        "chart_boundary": {
            "crossings": crossings,
            "note": "chart.csv reports u in (-pi, pi]; each crossing is a jump of 2 pi across the seam u = pi, where the chart is continued periodically",
        },
        "max_line_defect": finite(line_defect),
        "max_relative_surface_defect": finite(surface_defect),
        "files": files,
        "pass": passed,
    });
    output::write_json(out, "metadata.json", &metadata)?;
    Ok(Outcome {
        passed,
        summary: format!(
            "hyperboloid: {} geodesic, {} points, max line defect {line_defect:.3e} (tol {tol:.1e})",
            geo.case().name(),
            times.len()
        ),
    })
}
