//! Invariant Kalman filtering on the two-frame group for planar wheeled
//! robots with GNSS, an unknown odometry scale and an unknown antenna lever
//! arm.
//!
//! * [`geom2d`]: SO(2) / Sim(2) primitives with closed-form exp/log.
//! * [`tfg`]: the two-frame group state, its actions, errors and exp/log.
//! * [`models`]: dynamics, measurements and closed-form error maps.
//! * [`filters`]: TFG-IEKF, imperfect IEKF and EKF on a shared Riccati core.
//! * [`sim`]: truth generation, sensor noise and the Monte-Carlo experiment.
//! * [`verify`]: randomized property suites with independent oracles.

pub mod error;
pub mod filters;
pub mod geom2d;
pub mod models;
pub mod sim;
pub mod tfg;
pub mod verify;

pub use error::{NavError, Result};
pub use filters::{
    predict, update, CovarianceUpdate, FilterBelief, FilterKind, InitialUncertainty, NoiseConfig,
};
pub use geom2d::{rot, sim2_exp, sim2_log, Rot2, Sim2Element};
pub use models::{measure, propagate, OdometryInput, PositionMeasurement, Problem};
pub use sim::{run_monte_carlo, McRunRecord, McSummary, ScenarioConfig, Verdict};
pub use tfg::{
    innovation, left_error, scaled_error, tfg_exp, tfg_log, LeverConvention, Tangent, TfgError,
    TfgState,
};
