//! Result files and the console table.
//!
//! Every number written to CSV uses 17 significant digits (`{:.16e}`), which
//! round-trips an `f64` exactly and keeps reruns byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use tfgnav::sim::{FilterSummary, FilterTrack, McSummary};

use crate::{CliError, ExperimentSpec};

pub const RMSE_HEADER: &str = "time_s,rmse_yaw_rad,rmse_pos_m,rmse_scale,rmse_lever_m";
pub const RUN_HEADER: &str =
    "time_s,err_yaw_rad,env_3sigma_rad,err_pos_m,err_scale,err_lever_m,verdict";

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn rmse_csv(times: &[f64], filter: &FilterSummary) -> String {
    let r = &filter.rmse;
    let mut out = String::with_capacity(times.len() * 120);
    out.push_str(RMSE_HEADER);
    out.push('\n');
    for (k, t) in times.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(*t),
            num(r.yaw[k]),
            num(r.position[k]),
            num(r.scale[k]),
            num(r.lever[k])
        );
    }
    out
}

pub fn run_csv(times: &[f64], track: &FilterTrack) -> String {
    let e = &track.errors;
    let verdict = track.verdict.as_str();
    let mut out = String::with_capacity(times.len() * 150);
    out.push_str(RUN_HEADER);
    out.push('\n');
    for (k, t) in times.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(*t),
            num(e.yaw[k]),
            num(track.envelope[k]),
            num(e.position[k]),
            num(e.scale[k]),
            num(e.lever[k]),
            verdict
        );
    }
    out
}

/// `summary.json` contents. Only inputs that influence the numbers are echoed
/// (no output path or worker count), so the file depends on the experiment
/// alone.
pub fn summary_json(spec: &ExperimentSpec, summary: &McSummary) -> Value {
    let convergence: Vec<Value> = summary
        .filters
        .iter()
        .map(|f| {
            json!({
                "filter": f.kind.name(),
                "runs": f.runs,
                "convergent": f.convergent,
                "divergent": f.divergent,
                "failed": f.failed,
                "nonpositive_scale_runs": f.nonpositive_scale_runs,
                "rate": f.convergence_rate,
            })
        })
        .collect();
    let rmse: Vec<Value> = summary
        .filters
        .iter()
        .map(|f| {
            json!({
                "filter": f.kind.name(),
                "runs_included": f.rmse_runs,
                "aggregates": f.aggregates,
            })
        })
        .collect();
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": spec.scenario.master_seed,
        "config": {
            "scenario": spec.scenario,
            "filters": spec.filters.iter().map(|k| k.name()).collect::<Vec<_>>(),
            "timeseries": spec.emit_timeseries,
        },
        "convergence": convergence,
        "rmse": {
            "convergent_only": summary.rmse_convergent_only,
            "filters": rmse,
        },
    })
}

/// Convergence table for the alignment experiment,
/// one row per filter.
pub fn convergence_table(spec: &ExperimentSpec, summary: &McSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Convergence rates (sigma_att0 = {} deg, {} runs, seed {})",
        spec.scenario.sigma_att0_deg, summary.n_runs, spec.scenario.master_seed
    );
    let _ = writeln!(
        out,
        "{:<12} {:>11} {:>10} {:>8}",
        "Filter", "Convergent", "Divergent", "Rate"
    );
    for f in &summary.filters {
        let _ = writeln!(
            out,
            "{:<12} {:>11} {:>10} {:>7.0}%",
            f.kind.label(),
            f.convergent,
            f.divergent,
            100.0 * f.convergence_rate
        );
    }
    out
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
