//! Experiment configuration: flat `key = value` files with dotted sections,
//! command-line overrides and the `NAV_SEED` environment variable.
//!
//! ```text
//! # comments and blank lines are ignored
//! scenario.sigma_att0_deg = 200
//! scenario.n_runs = 50
//! noise.sigma_y = 1.0
//! experiment.filters = tfg_iekf, ekf
//! ```
//!
//! Resolution order, lowest to highest priority: built-in defaults, config
//! file, environment (seed only), command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use tfgnav::filters::CovarianceUpdate;
use tfgnav::sim::InitMode;
use tfgnav::{FilterKind, ScenarioConfig};

use crate::CliError;

pub const SEED_ENV: &str = "NAV_SEED";

/// Fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: ScenarioConfig,
    pub filters: Vec<FilterKind>,
    pub output_dir: PathBuf,
    pub emit_timeseries: bool,
    pub workers: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            filters: FilterKind::ALL.to_vec(),
            output_dir: PathBuf::from("results"),
            emit_timeseries: false,
            workers: default_workers(),
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub sigma_att0_deg: Option<f64>,
    pub runs: Option<i64>,
    pub seed: Option<u64>,
    pub filters: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub timeseries: bool,
    pub workers: Option<i64>,
}

fn invalid(key: &str, msg: impl Into<String>) -> CliError {
    CliError::InvalidValue {
        key: key.to_string(),
        msg: msg.into(),
    }
}

fn number<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| invalid(key, format!("cannot parse {raw:?} as a number")))
}

fn finite(key: &str, raw: &str) -> Result<f64, CliError> {
    let v: f64 = number(key, raw)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, "must be finite"))
    }
}

fn at_least(key: &str, raw: &str, bound: f64) -> Result<f64, CliError> {
    let v = finite(key, raw)?;
    if v >= bound {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be >= {bound}, got {v}")))
    }
}

fn positive(key: &str, raw: &str) -> Result<f64, CliError> {
    let v = finite(key, raw)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be > 0, got {v}")))
    }
}

fn count(key: &str, raw: &str, min: i64) -> Result<i64, CliError> {
    let v: i64 = number(key, raw)?;
    if v >= min {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be >= {min}, got {v}")))
    }
}

fn flag(key: &str, raw: &str) -> Result<bool, CliError> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(invalid(key, format!("expected true or false, got {raw:?}"))),
    }
}

pub fn parse_filters(key: &str, raw: &str) -> Result<Vec<FilterKind>, CliError> {
    let mut out = Vec::new();
    for name in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kind: FilterKind = name.parse().map_err(|_| {
            invalid(
                key,
                format!("unknown filter {name:?} (expected tfg_iekf, imperfect_iekf or ekf)"),
            )
        })?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err(invalid(key, "at least one filter is required"));
    }
    Ok(out)
}

fn u32_rate(key: &str, raw: &str) -> Result<u32, CliError> {
    let v = count(key, raw, 1)?;
    u32::try_from(v).map_err(|_| invalid(key, format!("must be <= {}", u32::MAX)))
}

/// Applies one `key = value` assignment to `spec`.
pub fn apply(spec: &mut ExperimentSpec, key: &str, raw: &str) -> Result<(), CliError> {
    let sc = &mut spec.scenario;
    match key {
        "scenario.circle_rate_deg_s" => sc.circle_rate_deg_s = finite(key, raw)?,
        "scenario.speed" => sc.speed = at_least(key, raw, 0.0)?,
        "scenario.odo_rate" => sc.odo_rate = u32_rate(key, raw)?,
        "scenario.gps_rate" => sc.gps_rate = u32_rate(key, raw)?,
        "scenario.circle_duration" => sc.circle_duration = positive(key, raw)?,
        "scenario.straight_duration" => sc.straight_duration = positive(key, raw)?,
        "scenario.true_scale" => sc.true_scale = positive(key, raw)?,
        "scenario.true_lever_x" => sc.true_lever[0] = finite(key, raw)?,
        "scenario.true_lever_y" => sc.true_lever[1] = finite(key, raw)?,
        "scenario.sigma_att0_deg" => sc.sigma_att0_deg = at_least(key, raw, 0.0)?,
        "scenario.n_runs" => sc.n_runs = count(key, raw, 1)? as usize,
        "scenario.seed" => sc.master_seed = number(key, raw)?,
        "scenario.init" => {
            sc.init = match raw {
                "gps" => InitMode::Gps,
                "truth" => InitMode::Truth,
                _ => return Err(invalid(key, format!("expected gps or truth, got {raw:?}"))),
            }
        }
        "scenario.cutoff_s" => sc.convergence_cutoff_s = at_least(key, raw, 0.0)?,
        "scenario.rmse_convergent_only" => sc.rmse_convergent_only = flag(key, raw)?,
        "scenario.joseph" => {
            sc.covariance_update = if flag(key, raw)? {
                CovarianceUpdate::Joseph
            } else {
                CovarianceUpdate::Standard
            }
        }
        "noise.sigma_omega_deg_s" => sc.noise.sigma_omega_deg_s = at_least(key, raw, 0.0)?,
        "noise.sigma_u" => sc.noise.sigma_u = at_least(key, raw, 0.0)?,
        "noise.sigma_y" => sc.noise.sigma_y = at_least(key, raw, 0.0)?,
        "noise.pseudo_noise_s" => sc.noise.pseudo_noise_s = at_least(key, raw, 0.0)?,
        "noise.pseudo_noise_lever" => sc.noise.pseudo_noise_lever = at_least(key, raw, 0.0)?,
        "experiment.filters" => spec.filters = parse_filters(key, raw)?,
        "experiment.output_dir" => spec.output_dir = PathBuf::from(raw),
        "experiment.timeseries" => spec.emit_timeseries = flag(key, raw)?,
        "experiment.workers" => spec.workers = count(key, raw, 1)? as usize,
        _ => return Err(CliError::UnknownKey(key.to_string())),
    }
    Ok(())
}

/// Applies every assignment of a config file body.
pub fn apply_text(spec: &mut ExperimentSpec, text: &str) -> Result<(), CliError> {
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CliError::Syntax {
            line: n + 1,
            msg: format!("expected key = value, got {line:?}"),
        })?;
        apply(spec, key.trim(), value.trim())?;
    }
    Ok(())
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Resolves a spec from `base` (the preset), an optional config file body,
/// the seed environment variable value and command-line overrides.
pub fn resolve(
    base: ExperimentSpec,
    file: Option<&str>,
    env_seed: Option<&str>,
    flags: &Overrides,
) -> Result<ExperimentSpec, CliError> {
    let mut spec = base;
    if let Some(text) = file {
        apply_text(&mut spec, text)?;
    }
    if let Some(raw) = env_seed {
        spec.scenario.master_seed = number(SEED_ENV, raw.trim())?;
    }
    if let Some(v) = flags.sigma_att0_deg {
        apply(&mut spec, "scenario.sigma_att0_deg", &v.to_string())
            .map_err(|e| e.renamed("--sigma-att0"))?;
    }
    if let Some(v) = flags.runs {
        apply(&mut spec, "scenario.n_runs", &v.to_string()).map_err(|e| e.renamed("--runs"))?;
    }
    if let Some(v) = flags.seed {
        spec.scenario.master_seed = v;
    }
    if let Some(list) = &flags.filters {
        spec.filters = parse_filters("--filters", list)?;
    }
    if let Some(dir) = &flags.output_dir {
        spec.output_dir = dir.clone();
    }
    if flags.timeseries {
        spec.emit_timeseries = true;
    }
    if let Some(v) = flags.workers {
        apply(&mut spec, "experiment.workers", &v.to_string())
            .map_err(|e| e.renamed("--workers"))?;
    }
    spec.scenario
        .validate()
        .map_err(|e| CliError::Scenario(e.to_string()))?;
    Ok(spec)
}
