use std::io::Write;

use tfgnav::sim::McSummary;
use tfgnav::{run_monte_carlo, verify};

use crate::output::{self, convergence_table, rmse_csv, run_csv, summary_json};
use crate::{CliError, ExperimentSpec};

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: McSummary,
    pub runs_executed: usize,
}

impl ExperimentOutcome {
    pub fn complete(&self, spec: &ExperimentSpec) -> bool {
        self.runs_executed == spec.scenario.n_runs
    }
}

/// Runs the Monte-Carlo experiment, writes every result file under
/// `spec.output_dir` and prints the convergence table to `console`.
pub fn run_experiment(
    spec: &ExperimentSpec,
    console: &mut dyn Write,
) -> Result<ExperimentOutcome, CliError> {
    let (records, summary) = run_monte_carlo(&spec.scenario, &spec.filters, spec.workers)?;

    let dir = &spec.output_dir;
    output::create_dir(dir)?;
    let json = serde_json::to_string_pretty(&summary_json(spec, &summary))?;
    output::write(&dir.join("summary.json"), &(json + "\n"))?;
    for filter in &summary.filters {
        let path = dir.join(format!("rmse_{}.csv", filter.kind.name()));
        output::write(&path, &rmse_csv(&summary.times, filter))?;
    }
    if spec.emit_timeseries {
        let runs = dir.join("runs");
        output::create_dir(&runs)?;
        for record in &records {
            for track in &record.tracks {
                let path = runs.join(format!("run_{}_{}.csv", record.run_id, track.kind.name()));
                output::write(&path, &run_csv(&record.times, track))?;
            }
        }
    }

    let table = convergence_table(spec, &summary);
    console
        .write_all(table.as_bytes())
        .map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })?;
    Ok(ExperimentOutcome {
        runs_executed: records.len(),
        summary,
    })
}

/// Runs the property suites and prints one line per check. Returns whether
/// every check passed.
pub fn run_checks(samples: usize, seed: u64, console: &mut dyn Write) -> Result<bool, CliError> {
    let reports = verify::run_all(samples, seed);
    let io = |source| CliError::Io {
        path: "<stdout>".into(),
        source,
    };
    for r in &reports {
        writeln!(console, "{r}").map_err(io)?;
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    writeln!(console, "{} checks, {} failed", reports.len(), failed).map_err(io)?;
    Ok(failed == 0)
}
