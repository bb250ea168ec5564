//! Ground truth, sensor simulation and the Monte-Carlo alignment experiment.

mod convergence;
mod monte_carlo;
mod noise;
mod scenario;

pub use convergence::{classify_convergence, Verdict};
pub use monte_carlo::{
    run_monte_carlo, run_single, sample_initial_belief, summarize, FilterSummary, FilterTrack,
    McRunRecord, McSummary, RmseAggregates, RmseSeries, TrackErrors,
};
pub use noise::{corrupt, RunSeed, SensorStreams, Stream};
pub use scenario::{generate_truth, InitMode, ScenarioConfig, SensorNoise, Truth, DEFAULT_SEED};
