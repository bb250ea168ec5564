use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::filters::{CovarianceUpdate, NoiseConfig};
use crate::models::{measure, propagate, OdometryInput, PositionMeasurement, Problem};
use crate::tfg::TfgState;

/// Sensor noise levels in the units a user would quote them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorNoise {
    pub sigma_omega_deg_s: f64,
    pub sigma_u: f64,
    pub sigma_y: f64,
    pub pseudo_noise_s: f64,
    pub pseudo_noise_lever: f64,
}

impl Default for SensorNoise {
    fn default() -> Self {
        Self {
            sigma_omega_deg_s: 0.5,
            sigma_u: 0.1,
            sigma_y: 1.0,
            pseudo_noise_s: 1e-6,
            pseudo_noise_lever: 1e-6,
        }
    }
}

impl SensorNoise {
    /// Perfect sensors; the filters' pseudo-noise stays at its default so
    /// the Riccati recursion remains well-posed.
    pub fn noiseless() -> Self {
        Self {
            sigma_omega_deg_s: 0.0,
            sigma_u: 0.0,
            sigma_y: 0.0,
            ..Self::default()
        }
    }
}

/// How the filters' initial means are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Heading perturbed by the attitude prior, position from the first fix,
    /// unit scale and zero lever arm.
    #[default]
    Gps,
    /// Exact initial state (noiseless sanity runs).
    Truth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub circle_rate_deg_s: f64,
    /// Physical speed, m/s.
    pub speed: f64,
    /// Odometry rate, Hz.
    pub odo_rate: u32,
    /// GNSS rate, Hz; must divide `odo_rate`.
    pub gps_rate: u32,
    pub circle_duration: f64,
    pub straight_duration: f64,
    pub true_scale: f64,
    pub true_lever: [f64; 2],
    pub noise: SensorNoise,
    pub sigma_att0_deg: f64,
    pub n_runs: usize,
    pub master_seed: u64,
    pub init: InitMode,
    /// Convergence is judged on samples at or after this time, s.
    pub convergence_cutoff_s: f64,
    /// Restrict RMSE aggregation to convergent runs.
    pub rmse_convergent_only: bool,
    pub covariance_update: CovarianceUpdate,
}

pub const DEFAULT_SEED: u64 = 2024;

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            circle_rate_deg_s: 7.0,
            speed: 5.0,
            odo_rate: 10,
            gps_rate: 1,
            circle_duration: 60.0,
            straight_duration: 60.0,
            true_scale: 1.1,
            true_lever: [1.0, 0.5],
            noise: SensorNoise::default(),
            sigma_att0_deg: 100.0,
            n_runs: 50,
            master_seed: DEFAULT_SEED,
            init: InitMode::Gps,
            convergence_cutoff_s: 20.0,
            rmse_convergent_only: false,
            covariance_update: CovarianceUpdate::Standard,
        }
    }
}

impl ScenarioConfig {
    /// The σ⁰_att = 200° alignment experiment.
    pub fn table1() -> Self {
        Self {
            sigma_att0_deg: 200.0,
            ..Self::default()
        }
    }

    pub fn dt(&self) -> f64 {
        1.0 / f64::from(self.odo_rate)
    }

    /// Odometry steps between two GNSS fixes.
    pub fn gps_period_steps(&self) -> usize {
        (self.odo_rate / self.gps_rate) as usize
    }

    pub fn circle_steps(&self) -> usize {
        (self.circle_duration * f64::from(self.odo_rate)).round() as usize
    }

    pub fn total_steps(&self) -> usize {
        self.circle_steps() + (self.straight_duration * f64::from(self.odo_rate)).round() as usize
    }

    pub fn noise_config(&self) -> NoiseConfig {
        NoiseConfig {
            sigma_omega: self.noise.sigma_omega_deg_s.to_radians(),
            sigma_u: self.noise.sigma_u,
            sigma_y: self.noise.sigma_y,
            dt: self.dt(),
            pseudo_noise_s: self.noise.pseudo_noise_s,
            pseudo_noise_lever: self.noise.pseudo_noise_lever,
        }
    }

    pub fn true_lever(&self) -> Vector2<f64> {
        Vector2::new(self.true_lever[0], self.true_lever[1])
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(msg: String) -> Result<()> {
            Err(NavError::InvalidArgument(msg))
        }
        if self.odo_rate == 0 || self.gps_rate == 0 {
            return bad("odo_rate and gps_rate must be positive".into());
        }
        if !self.odo_rate.is_multiple_of(self.gps_rate) {
            return bad(format!(
                "odo_rate ({}) must be an integer multiple of gps_rate ({})",
                self.odo_rate, self.gps_rate
            ));
        }
        if !(self.circle_duration > 0.0 && self.straight_duration > 0.0) {
            return bad("phase durations must be positive".into());
        }
        if self.n_runs == 0 {
            return bad("n_runs must be at least 1".into());
        }
        if !(self.true_scale > 0.0 && self.true_scale.is_finite()) {
            return bad(format!(
                "true_scale must be positive, got {}",
                self.true_scale
            ));
        }
        if !(self.sigma_att0_deg >= 0.0 && self.sigma_att0_deg.is_finite()) {
            return bad("sigma_att0 must be non-negative".into());
        }
        if !(self.speed.is_finite() && self.circle_rate_deg_s.is_finite()) {
            return bad("speed and circle rate must be finite".into());
        }
        if self.circle_rate_deg_s.to_radians().abs() * self.dt() >= std::f64::consts::PI {
            return bad("circle rate too large for the odometry rate".into());
        }
        self.noise_config().validate()
    }
}

/// Noiseless ground truth on the odometry time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub times: Vec<f64>,
    /// `states[k]` at `times[k]`; one more entry than `inputs`.
    pub states: Vec<TfgState>,
    /// `inputs[k]` moves `states[k]` to `states[k + 1]`.
    pub inputs: Vec<OdometryInput>,
    /// Noiseless antenna fixes at the GNSS epochs, starting at step 0.
    pub fixes: Vec<PositionMeasurement>,
}

/// Circle at constant rate, then straight, at constant physical speed.
///
/// The odometer reports `u = (speed·dt / s_true, 0)` so that the physical
/// displacement `s·R·u` has length `speed·dt`.
pub fn generate_truth(cfg: &ScenarioConfig) -> Result<Truth> {
    cfg.validate()?;
    let dt = cfg.dt();
    let n = cfg.total_steps();
    let n_circle = cfg.circle_steps();
    let every = cfg.gps_period_steps();
    let omega = cfg.circle_rate_deg_s.to_radians() * dt;
    let u = Vector2::new(cfg.speed * dt / cfg.true_scale, 0.0);

    let mut state = TfgState::original(0.0, cfg.true_scale, Vector2::zeros(), cfg.true_lever())?;
    let mut states = Vec::with_capacity(n + 1);
    let mut inputs = Vec::with_capacity(n);
    states.push(state);
    for k in 0..n {
        let input = OdometryInput::new(if k < n_circle { omega } else { 0.0 }, u)?;
        state = propagate(&state, &input, Problem::PoseLeverScale)?;
        inputs.push(input);
        states.push(state);
    }
    let fixes = (0..=n)
        .step_by(every)
        .map(|k| PositionMeasurement {
            y: measure(&states[k]),
            time_index: k,
        })
        .collect();
    Ok(Truth {
        times: (0..=n).map(|k| k as f64 * dt).collect(),
        states,
        inputs,
        fixes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom2d::wrap_angle;
    use approx::assert_abs_diff_eq;

    #[test]
    fn full_circle_closes() {
        let cfg = ScenarioConfig {
            odo_rate: 7,
            circle_duration: 360.0 / 7.0,
            straight_duration: 1.0,
            ..ScenarioConfig::default()
        };
        let truth = generate_truth(&cfg).unwrap();
        assert_eq!(cfg.circle_steps(), 360);
        let end_of_circle = truth.states[360];
        assert!(wrap_angle(end_of_circle.theta - truth.states[0].theta).abs() < 1e-9);
        // back at the start point, too
        assert!((end_of_circle.x - truth.states[0].x).norm() < 1e-9);
    }

    #[test]
    fn straight_phase_keeps_heading() {
        let cfg = ScenarioConfig::default();
        let truth = generate_truth(&cfg).unwrap();
        let start = cfg.circle_steps();
        let heading = truth.states[start].theta;
        for s in &truth.states[start..] {
            assert_eq!(s.theta, heading);
        }
        let step = truth.states[start + 1].x - truth.states[start].x;
        assert_abs_diff_eq!(step.norm(), cfg.speed * cfg.dt(), epsilon = 1e-12);
    }

    #[test]
    fn grid_and_fix_layout() {
        let cfg = ScenarioConfig::default();
        let truth = generate_truth(&cfg).unwrap();
        assert_eq!(truth.states.len(), 1201);
        assert_eq!(truth.inputs.len(), 1200);
        assert_eq!(truth.fixes.len(), 121);
        assert_eq!(truth.fixes[3].time_index, 30);
        assert_abs_diff_eq!(truth.times[1200], 120.0, epsilon = 1e-9);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let zero = ScenarioConfig {
            circle_duration: 0.0,
            ..ScenarioConfig::default()
        };
        assert!(generate_truth(&zero).is_err());
        let rates = ScenarioConfig {
            odo_rate: 10,
            gps_rate: 3,
            ..ScenarioConfig::default()
        };
        assert!(rates.validate().is_err());
        let runs = ScenarioConfig {
            n_runs: 0,
            ..ScenarioConfig::default()
        };
        assert!(runs.validate().is_err());
    }
}
