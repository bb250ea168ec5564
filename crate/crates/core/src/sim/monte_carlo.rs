use nalgebra::Vector2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NavError, Result};
use crate::filters::{predict, update_with, FilterBelief, FilterKind, InitialUncertainty};
use crate::geom2d::wrap_angle;
use crate::sim::convergence::{classify_convergence, Verdict};
use crate::sim::noise::{corrupt, gaussian, RunSeed, Stream};
use crate::sim::scenario::{generate_truth, InitMode, ScenarioConfig, Truth};
use crate::tfg::TfgState;

/// Per-step error magnitudes of one filter against truth.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrackErrors {
    /// Wrapped heading error `θ̂ − θ`, rad.
    pub yaw: Vec<f64>,
    /// `‖x̂ − x‖`, m.
    pub position: Vec<f64>,
    /// `ŝ − s`.
    pub scale: Vec<f64>,
    /// `‖X̂ − X‖`, m.
    pub lever: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterTrack {
    pub kind: FilterKind,
    pub estimates: Vec<TfgState>,
    /// `3·sqrt(P_θθ)` at each step.
    pub envelope: Vec<f64>,
    pub errors: TrackErrors,
    pub verdict: Verdict,
    /// Set when the filter hit a numerical failure; the belief is frozen from
    /// that step on.
    pub failure: Option<String>,
}

impl FilterTrack {
    pub fn min_scale(&self) -> f64 {
        self.estimates
            .iter()
            .map(|s| s.scale)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McRunRecord {
    pub run_id: usize,
    pub times: Vec<f64>,
    pub truth: Vec<TfgState>,
    pub tracks: Vec<FilterTrack>,
}

impl McRunRecord {
    pub fn track(&self, kind: FilterKind) -> Option<&FilterTrack> {
        self.tracks.iter().find(|t| t.kind == kind)
    }
}

/// Initial beliefs for the requested filters. All kinds share the same random
/// draw, so they start from the same mean.
pub fn sample_initial_belief(
    cfg: &ScenarioConfig,
    truth0: &TfgState,
    first_fix: &Vector2<f64>,
    kinds: &[FilterKind],
    seed: RunSeed,
) -> Result<Vec<FilterBelief>> {
    let sigma = cfg.sigma_att0_deg.to_radians();
    let mean = match cfg.init {
        InitMode::Gps => {
            let mut rng = seed.rng(Stream::InitialBelief);
            let theta = truth0.theta + gaussian(&mut rng, sigma);
            TfgState::original(theta, 1.0, *first_fix, Vector2::zeros())?
        }
        InitMode::Truth => truth0.to_original(),
    };
    let cov = InitialUncertainty::with_attitude(sigma).covariance();
    kinds
        .iter()
        .map(|&k| FilterBelief::new(k, mean, cov))
        .collect()
}

fn track_errors(estimates: &[TfgState], truth: &[TfgState]) -> TrackErrors {
    let mut out = TrackErrors::default();
    for (e, t) in estimates.iter().zip(truth) {
        out.yaw.push(wrap_angle(e.theta - t.theta));
        out.position.push((e.x - t.x).norm());
        out.scale.push(e.scale - t.scale);
        out.lever.push((e.lever - t.lever).norm());
    }
    out
}

/// Runs every requested filter on one noise realization, step-synchronously:
/// predict at each odometry step, update whenever a fix is due.
pub fn run_single(
    cfg: &ScenarioConfig,
    truth: &Truth,
    kinds: &[FilterKind],
    run_id: usize,
) -> Result<McRunRecord> {
    let seed = RunSeed::new(cfg.master_seed, run_id as u64);
    let noise = cfg.noise_config();
    let sensors = corrupt(truth, &noise, seed);
    let first_fix = sensors
        .fixes
        .first()
        .ok_or_else(|| NavError::InvalidArgument("scenario has no GNSS fix".into()))?;
    let beliefs = sample_initial_belief(cfg, &truth.states[0], &first_fix.y, kinds, seed)?;
    let n = truth.inputs.len();
    let every = cfg.gps_period_steps();

    let tracks = beliefs
        .into_iter()
        .map(|mut belief| {
            let mut estimates = Vec::with_capacity(n + 1);
            let mut envelope = Vec::with_capacity(n + 1);
            let mut failure = None;
            estimates.push(belief.mean);
            envelope.push(belief.yaw_envelope());
            for k in 1..=n {
                if failure.is_none() {
                    let step = predict(&belief, &sensors.inputs[k - 1], &noise).and_then(|b| {
                        if k % every == 0 {
                            let fix = &sensors.fixes[k / every];
                            update_with(&b, fix, &noise, cfg.covariance_update).map(|(b, _)| b)
                        } else {
                            Ok(b)
                        }
                    });
                    match step {
                        Ok(b) => belief = b,
                        Err(e) => failure = Some(format!("step {k}: {e}")),
                    }
                }
                estimates.push(belief.mean);
                envelope.push(belief.yaw_envelope());
            }
            let errors = track_errors(&estimates, &truth.states);
            let verdict = if failure.is_some() {
                Verdict::Divergent
            } else {
                classify_convergence(
                    &truth.times,
                    &errors.yaw,
                    &envelope,
                    cfg.convergence_cutoff_s,
                )
            };
            FilterTrack {
                kind: belief.kind,
                estimates,
                envelope,
                errors,
                verdict,
                failure,
            }
        })
        .collect();

    Ok(McRunRecord {
        run_id,
        times: truth.times.clone(),
        truth: truth.states.clone(),
        tracks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmseSeries {
    pub yaw: Vec<f64>,
    pub position: Vec<f64>,
    pub scale: Vec<f64>,
    pub lever: Vec<f64>,
}

/// Time averages of the per-step RMSE curves over fixed windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RmseAggregates {
    pub yaw_initial: f64,
    /// Mean yaw RMSE while circling, `0 ≤ t ≤ circle_duration`.
    pub yaw_circle_mean: f64,
    /// Means over the last 10 s.
    pub yaw_final_10s: f64,
    pub position_final_10s: f64,
    pub scale_final_10s: f64,
    pub lever_final_10s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterSummary {
    pub kind: FilterKind,
    pub runs: usize,
    pub convergent: usize,
    pub divergent: usize,
    pub failed: usize,
    /// Runs in which the scale estimate went to zero or below at some step.
    pub nonpositive_scale_runs: usize,
    pub convergence_rate: f64,
    /// Number of runs entering the RMSE.
    pub rmse_runs: usize,
    pub aggregates: RmseAggregates,
    #[serde(skip)]
    pub rmse: RmseSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub n_runs: usize,
    pub rmse_convergent_only: bool,
    #[serde(skip)]
    pub times: Vec<f64>,
    pub filters: Vec<FilterSummary>,
}

impl McSummary {
    pub fn filter(&self, kind: FilterKind) -> Option<&FilterSummary> {
        self.filters.iter().find(|f| f.kind == kind)
    }
}

fn rmse_curve(
    tracks: &[&FilterTrack],
    n: usize,
    pick: impl Fn(&TrackErrors) -> &[f64],
) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let sum: f64 = tracks.iter().map(|t| pick(&t.errors)[k].powi(2)).sum();
            (sum / tracks.len() as f64).sqrt()
        })
        .collect()
}

fn window_mean(times: &[f64], values: &[f64], from: f64, to: f64) -> f64 {
    let (sum, count) = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= from - 1e-9 && **t <= to + 1e-9)
        .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
    sum / count as f64
}

/// Aggregates run records (in `run_id` order) into per-filter statistics.
pub fn summarize(cfg: &ScenarioConfig, records: &[McRunRecord], kinds: &[FilterKind]) -> McSummary {
    let times = records.first().map(|r| r.times.clone()).unwrap_or_default();
    let n = times.len();
    let t_end = times.last().copied().unwrap_or(0.0);
    let filters = kinds
        .iter()
        .map(|&kind| {
            let tracks: Vec<&FilterTrack> = records.iter().filter_map(|r| r.track(kind)).collect();
            let convergent = tracks
                .iter()
                .filter(|t| t.verdict == Verdict::Convergent)
                .count();
            let included: Vec<&FilterTrack> = if cfg.rmse_convergent_only {
                tracks
                    .iter()
                    .copied()
                    .filter(|t| t.verdict == Verdict::Convergent)
                    .collect()
            } else {
                tracks.clone()
            };
            let rmse = RmseSeries {
                yaw: rmse_curve(&included, n, |e| &e.yaw),
                position: rmse_curve(&included, n, |e| &e.position),
                scale: rmse_curve(&included, n, |e| &e.scale),
                lever: rmse_curve(&included, n, |e| &e.lever),
            };
            let tail = t_end - 10.0;
            let aggregates = RmseAggregates {
                yaw_initial: rmse.yaw.first().copied().unwrap_or(f64::NAN),
                yaw_circle_mean: window_mean(&times, &rmse.yaw, 0.0, cfg.circle_duration),
                yaw_final_10s: window_mean(&times, &rmse.yaw, tail, t_end),
                position_final_10s: window_mean(&times, &rmse.position, tail, t_end),
                scale_final_10s: window_mean(&times, &rmse.scale, tail, t_end),
                lever_final_10s: window_mean(&times, &rmse.lever, tail, t_end),
            };
            FilterSummary {
                kind,
                runs: tracks.len(),
                convergent,
                divergent: tracks.len() - convergent,
                failed: tracks.iter().filter(|t| t.failure.is_some()).count(),
                nonpositive_scale_runs: tracks.iter().filter(|t| t.min_scale() <= 0.0).count(),
                convergence_rate: convergent as f64 / tracks.len().max(1) as f64,
                rmse_runs: included.len(),
                aggregates,
                rmse,
            }
        })
        .collect();
    McSummary {
        n_runs: records.len(),
        rmse_convergent_only: cfg.rmse_convergent_only,
        times,
        filters,
    }
}

/// Runs `cfg.n_runs` independent runs on a pool of `workers` threads.
/// Results are identical for any worker count.
pub fn run_monte_carlo(
    cfg: &ScenarioConfig,
    kinds: &[FilterKind],
    workers: usize,
) -> Result<(Vec<McRunRecord>, McSummary)> {
    if kinds.is_empty() {
        return Err(NavError::InvalidArgument("no filter selected".into()));
    }
    let truth = generate_truth(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| NavError::InvalidArgument(format!("cannot build worker pool: {e}")))?;
    let records = pool.install(|| {
        (0..cfg.n_runs)
            .into_par_iter()
            .map(|id| run_single(cfg, &truth, kinds, id))
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = summarize(cfg, &records, kinds);
    Ok((records, summary))
}
