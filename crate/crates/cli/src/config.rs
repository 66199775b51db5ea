//! JSON run configurations.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use orbitgeo::DiagonalMetric;

use crate::error::{CliError, CliResult};

/// A parsed config file together with its directory, against which
/// relative paths inside it are resolved.
pub struct ConfigFile<T> {
    pub dir: PathBuf,
    pub body: T,
}

pub fn load<T: DeserializeOwned>(path: Option<&Path>) -> CliResult<ConfigFile<T>> {
    let path = path.ok_or_else(|| CliError::input("missing --config <path>"))?;
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let body = serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(ConfigFile { dir, body })
}

/// Metric given inline (`"mu"`: number or `{"i,j": value}`, default 1) or
/// through `"metric_file"`.
#[derive(Clone, Debug, Default, Deserialize)]
pub struct MetricSource {
    pub mu: Option<Value>,
    pub metric_file: Option<PathBuf>,
}

impl MetricSource {
    pub fn resolve(&self, n: usize, dir: &Path) -> CliResult<DiagonalMetric> {
        let g = match (&self.mu, &self.metric_file) {
            (Some(_), Some(_)) => {
                return Err(CliError::input(
                    "give either \"mu\" or \"metric_file\", not both",
                ))
            }
            (_, Some(file)) => {
                let path = dir.join(file);
                let text = fs::read_to_string(&path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                let value: Value = serde_json::from_str(&text)
                    .map_err(|source| CliError::Parse { path, source })?;
                DiagonalMetric::from_json_value(&value)?
            }
            (mu, None) => {
                let mut v = json!({ "n": n });
                if let Some(mu) = mu {
                    v["mu"] = mu.clone();
                }
                DiagonalMetric::from_json_value(&v)?
            }
        };
        if g.n() != n {
            return Err(CliError::input(format!(
                "metric is for n = {}, config says n = {n}",
                g.n()
            )));
        }
        Ok(g)
    }
}

/// Parses an `"i,j"` key.
pub fn parse_pair(key: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::input(format!("bad index key \"{key}\", expected \"i,j\""));
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

pub fn pair_map(entries: &BTreeMap<String, f64>) -> CliResult<BTreeMap<(usize, usize), f64>> {
    entries
        .iter()
        .map(|(k, &v)| Ok((parse_pair(k)?, v)))
        .collect()
}

/// Uniform grid of `steps` points on `[t0, t1]`.
pub fn grid(t0: f64, t1: f64, steps: usize) -> CliResult<Vec<f64>> {
    if steps < 2 {
        return Err(CliError::input(format!(
            "\"steps\" must be at least 2, got {steps}"
        )));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(CliError::input(format!(
            "need finite t0 < t1, got [{t0}, {t1}]"
        )));
    }
    let h = (t1 - t0) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| {
            if k + 1 == steps {
                t1
            } else {
                t0 + h * k as f64
            }
        })
        .collect())
}

/// `--tol` wins over the config value, which wins over the default.
pub fn tolerance(flag: Option<f64>, config: Option<f64>, default: f64) -> CliResult<f64> {
    let tol = flag.or(config).unwrap_or(default);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::input(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(tol)
}
