//! The three estimators compared in the alignment experiment.
//!
//! All of them share one Riccati predict/update core and differ only in how
//! an error vector `δ ∈ ℝ⁶` maps to a state (their retraction) and in the
//! Jacobians that follow from it:
//!
//! * [`FilterKind::TfgIekf`]: `χ' = χ̂' • exp(ξ)` on the two-frame group with
//!   the down-scaled lever arm. `F` and `H` depend on the input only.
//! * [`FilterKind::ImperfectIekf`]: SE(2) left-invariant error on heading and
//!   position, additive on scale and lever arm.
//! * [`FilterKind::Ekf`]: additive on every coordinate.
//!
//! Error ordering is always `(θ, s, x[2], X[2])`.

use nalgebra::{Matrix2, Matrix2x6, Matrix6, Matrix6x2, Vector2, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geom2d::{rot_unchecked, sim2_exp, sim2_log, skew_unit, wrap_angle, Sim2Element};
use crate::models::{measure, propagate_unchecked, OdometryInput, PositionMeasurement};
use crate::tfg::{innovation, left_error, tfg_exp, tfg_log, LeverConvention, Tangent, TfgState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    TfgIekf,
    ImperfectIekf,
    Ekf,
}

impl FilterKind {
    pub const ALL: [FilterKind; 3] = [
        FilterKind::TfgIekf,
        FilterKind::ImperfectIekf,
        FilterKind::Ekf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::TfgIekf => "tfg_iekf",
            FilterKind::ImperfectIekf => "imperfect_iekf",
            FilterKind::Ekf => "ekf",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FilterKind::TfgIekf => "TFG-IEKF",
            FilterKind::ImperfectIekf => "Imp. IEKF",
            FilterKind::Ekf => "EKF",
        }
    }
}

impl std::fmt::Display for FilterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FilterKind {
    type Err = NavError;

    fn from_str(s: &str) -> Result<Self> {
        FilterKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| NavError::InvalidArgument(format!("unknown filter kind `{s}`")))
    }
}

/// Sensor and process noise levels. Rates are per second; `dt` converts them
/// to per-step increments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Gyro noise, rad/s.
    pub sigma_omega: f64,
    /// Odometry velocity noise, m/s per axis.
    pub sigma_u: f64,
    /// GNSS position noise, m per axis.
    pub sigma_y: f64,
    /// Odometry period, s.
    pub dt: f64,
    /// Per-step random walk on the scale coordinate.
    pub pseudo_noise_s: f64,
    /// Per-step random walk on the lever-arm coordinates, m.
    pub pseudo_noise_lever: f64,
}

impl NoiseConfig {
    pub fn zero(dt: f64) -> Self {
        Self {
            sigma_omega: 0.0,
            sigma_u: 0.0,
            sigma_y: 0.0,
            dt,
            pseudo_noise_s: 0.0,
            pseudo_noise_lever: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("sigma_omega", self.sigma_omega),
            ("sigma_u", self.sigma_u),
            ("sigma_y", self.sigma_y),
            ("dt", self.dt),
            ("pseudo_noise_s", self.pseudo_noise_s),
            ("pseudo_noise_lever", self.pseudo_noise_lever),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value >= 0.0) {
                return Err(NavError::InvalidArgument(format!(
                    "{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Standard `(I − KH)P` or Joseph-form covariance update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceUpdate {
    #[default]
    Standard,
    Joseph,
}

/// Diagonal prior standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialUncertainty {
    pub sigma_theta: f64,
    /// Log-scale for the TFG-IEKF, linear scale for the baselines.
    pub sigma_s: f64,
    pub sigma_x: f64,
    pub sigma_lever: f64,
}

impl InitialUncertainty {
    pub fn with_attitude(sigma_theta: f64) -> Self {
        Self {
            sigma_theta,
            sigma_s: 0.2,
            sigma_x: 2.0,
            sigma_lever: 1.0,
        }
    }

    pub fn covariance(&self) -> Matrix6<f64> {
        let d = Vector6::new(
            self.sigma_theta,
            self.sigma_s,
            self.sigma_x,
            self.sigma_x,
            self.sigma_lever,
            self.sigma_lever,
        );
        Matrix6::from_diagonal(&d.component_mul(&d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterBelief {
    /// Always in the original lever-arm convention.
    pub mean: TfgState,
    pub cov: Matrix6<f64>,
    pub kind: FilterKind,
}

impl FilterBelief {
    pub fn new(kind: FilterKind, mean: TfgState, cov: Matrix6<f64>) -> Result<Self> {
        if !cov.iter().all(|v| v.is_finite()) {
            return Err(NavError::InvalidArgument(
                "covariance must be finite".into(),
            ));
        }
        if (cov - cov.transpose()).amax() > 1e-10 {
            return Err(NavError::InvalidArgument(
                "covariance must be symmetric".into(),
            ));
        }
        Ok(Self {
            mean: mean.to_original(),
            cov,
            kind,
        })
    }

    /// 3σ bound on the heading error.
    pub fn yaw_envelope(&self) -> f64 {
        3.0 * self.cov[(0, 0)].max(0.0).sqrt()
    }
}

fn se2(theta: f64, x: Vector2<f64>) -> Sim2Element {
    Sim2Element {
        theta,
        scale: 1.0,
        trans: x,
    }
}

/// State whose error with respect to `mean` is `delta`, in the coordinates of
/// `kind`. This is also the mean correction applied by [`update`].
pub fn retract(kind: FilterKind, mean: &TfgState, delta: &Vector6<f64>) -> Result<TfgState> {
    let mean = mean.to_original();
    match kind {
        FilterKind::TfgIekf => apply_tfg_correction(&mean, &tfg_exp(&Tangent(*delta))?),
        FilterKind::ImperfectIekf => {
            let step = sim2_exp(delta[0], 0.0, Vector2::new(delta[2], delta[3]))?;
            let pose = se2(mean.theta, mean.x).compose(&step);
            Ok(TfgState {
                theta: pose.theta,
                scale: mean.scale + delta[1],
                x: pose.trans,
                lever: mean.lever + Vector2::new(delta[4], delta[5]),
                convention: LeverConvention::Original,
            })
        }
        FilterKind::Ekf => Ok(TfgState {
            theta: wrap_angle(mean.theta + delta[0]),
            scale: mean.scale + delta[1],
            x: mean.x + Vector2::new(delta[2], delta[3]),
            lever: mean.lever + Vector2::new(delta[4], delta[5]),
            convention: LeverConvention::Original,
        }),
    }
}

/// Inverse of [`retract`]: error coordinates of `truth` relative to `mean`.
pub fn local(kind: FilterKind, mean: &TfgState, truth: &TfgState) -> Result<Vector6<f64>> {
    let (mean, truth) = (mean.to_original(), truth.to_original());
    match kind {
        FilterKind::TfgIekf => {
            let e = left_error(&mean.to_primed(), &truth.to_primed())?;
            Ok(tfg_log(&e)?.0)
        }
        FilterKind::ImperfectIekf => {
            let rel = se2(mean.theta, mean.x)
                .inverse()
                .compose(&se2(truth.theta, truth.x));
            let (dt, _, dx) = sim2_log(&rel)?;
            let dl = truth.lever - mean.lever;
            Ok(Vector6::new(
                dt,
                truth.scale - mean.scale,
                dx.x,
                dx.y,
                dl.x,
                dl.y,
            ))
        }
        FilterKind::Ekf => {
            let dx = truth.x - mean.x;
            let dl = truth.lever - mean.lever;
            Ok(Vector6::new(
                wrap_angle(truth.theta - mean.theta),
                truth.scale - mean.scale,
                dx.x,
                dx.y,
                dl.x,
                dl.y,
            ))
        }
    }
}

/// Two-frame correction `χ̂'⁺ = χ̂' • L` written out in original variables:
/// `θ⁺ = θ + L_θ`, `s⁺ = s·L_s`, `x⁺ = x + s·R·L_x`,
/// `X⁺ = s·L_s·L_X' + R(L_θ)⁻¹·X`.
pub fn apply_tfg_correction(mean: &TfgState, correction: &TfgState) -> Result<TfgState> {
    let mean = mean.to_original();
    if correction.convention != LeverConvention::Primed {
        return Err(NavError::ConventionMismatch {
            expected: "primed",
            found: "original",
        });
    }
    if !(mean.scale > 0.0) {
        return Err(NavError::InvalidArgument(format!(
            "TFG-IEKF mean needs a positive scale, got {}",
            mean.scale
        )));
    }
    Ok(TfgState {
        theta: wrap_angle(mean.theta + correction.theta),
        scale: mean.scale * correction.scale,
        x: mean.x + mean.frame() * correction.x,
        lever: correction.lever * (mean.scale * correction.scale)
            + rot_unchecked(-correction.theta) * mean.lever,
        convention: LeverConvention::Original,
    })
}

/// Error-propagation Jacobian. The TFG-IEKF branch never reads `mean`.
pub fn jacobian_f(kind: FilterKind, mean: &TfgState, input: &OdometryInput) -> Matrix6<f64> {
    let j = skew_unit();
    let mut f = Matrix6::identity();
    match kind {
        FilterKind::TfgIekf | FilterKind::ImperfectIekf => {
            let back = rot_unchecked(-input.omega);
            let heading_gain = match kind {
                FilterKind::TfgIekf => 1.0,
                _ => mean.scale,
            };
            f.fixed_view_mut::<2, 1>(2, 0)
                .copy_from(&(back * j * input.u * heading_gain));
            f.fixed_view_mut::<2, 1>(2, 1).copy_from(&(back * input.u));
            f.fixed_view_mut::<2, 2>(2, 2).copy_from(&back);
        }
        FilterKind::Ekf => {
            let ru = mean.rotation() * input.u;
            f.fixed_view_mut::<2, 1>(2, 0)
                .copy_from(&(j * ru * mean.scale));
            f.fixed_view_mut::<2, 1>(2, 1).copy_from(&ru);
        }
    }
    f
}

/// Per-step process noise in the error coordinates of `kind`.
pub fn process_noise(kind: FilterKind, mean: &TfgState, noise: &NoiseConfig) -> Matrix6<f64> {
    let odo = match kind {
        FilterKind::TfgIekf => noise.sigma_u * noise.dt,
        FilterKind::ImperfectIekf | FilterKind::Ekf => noise.sigma_u * noise.dt * mean.scale,
    };
    let gyro = noise.sigma_omega * noise.dt;
    let d = Vector6::new(
        gyro * gyro,
        noise.pseudo_noise_s * noise.pseudo_noise_s,
        odo * odo,
        odo * odo,
        noise.pseudo_noise_lever * noise.pseudo_noise_lever,
        noise.pseudo_noise_lever * noise.pseudo_noise_lever,
    );
    Matrix6::from_diagonal(&d)
}

/// Measurement Jacobian of the residual and the residual noise covariance.
pub fn jacobian_h(
    kind: FilterKind,
    mean: &TfgState,
    noise: &NoiseConfig,
) -> Result<(Matrix2x6<f64>, Matrix2<f64>)> {
    let mean = mean.to_original();
    let var = noise.sigma_y * noise.sigma_y;
    let mut h = Matrix2x6::zeros();
    match kind {
        FilterKind::TfgIekf => {
            if !(mean.scale > 0.0) {
                return Err(NavError::InvalidArgument(format!(
                    "TFG-IEKF needs a positive scale, got {}",
                    mean.scale
                )));
            }
            h.fixed_view_mut::<2, 2>(0, 2)
                .copy_from(&Matrix2::identity());
            h.fixed_view_mut::<2, 2>(0, 4)
                .copy_from(&Matrix2::identity());
            let n = Matrix2::identity() * (var / (mean.scale * mean.scale));
            Ok((h, n))
        }
        FilterKind::ImperfectIekf | FilterKind::Ekf => {
            let r = mean.rotation();
            h.fixed_view_mut::<2, 1>(0, 0)
                .copy_from(&(skew_unit() * r * mean.lever));
            let dx = if kind == FilterKind::Ekf {
                Matrix2::identity()
            } else {
                r
            };
            h.fixed_view_mut::<2, 2>(0, 2).copy_from(&dx);
            h.fixed_view_mut::<2, 2>(0, 4).copy_from(&r);
            Ok((h, Matrix2::identity() * var))
        }
    }
}

/// Residual driving the update: the group innovation for the TFG-IEKF,
/// `y − h(χ̂)` for the baselines.
pub fn residual(kind: FilterKind, mean: &TfgState, y: &Vector2<f64>) -> Result<Vector2<f64>> {
    match kind {
        FilterKind::TfgIekf => innovation(&mean.to_original(), y),
        FilterKind::ImperfectIekf | FilterKind::Ekf => Ok(y - measure(mean)),
    }
}

/// `K = P·Hᵀ·(H·P·Hᵀ + N)⁻¹`.
pub fn kalman_gain(
    p: &Matrix6<f64>,
    h: &Matrix2x6<f64>,
    n: &Matrix2<f64>,
) -> Result<Matrix6x2<f64>> {
    let s = h * p * h.transpose() + n;
    let s_inv = s
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| NavError::NumericalFailure("innovation covariance is singular".into()))?;
    Ok(p * h.transpose() * s_inv)
}

fn symmetrize(p: &Matrix6<f64>) -> Matrix6<f64> {
    (p + p.transpose()) * 0.5
}

fn ensure_finite(p: &Matrix6<f64>, stage: &str) -> Result<()> {
    if p.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NavError::NumericalFailure(format!(
            "non-finite covariance after {stage}"
        )))
    }
}

pub fn predict(
    belief: &FilterBelief,
    input: &OdometryInput,
    noise: &NoiseConfig,
) -> Result<FilterBelief> {
    let f = jacobian_f(belief.kind, &belief.mean, input);
    let q = process_noise(belief.kind, &belief.mean, noise);
    let cov = symmetrize(&(f * belief.cov * f.transpose() + q));
    ensure_finite(&cov, "prediction")?;
    Ok(FilterBelief {
        mean: propagate_unchecked(&belief.mean, input),
        cov,
        kind: belief.kind,
    })
}

pub fn update(
    belief: &FilterBelief,
    meas: &PositionMeasurement,
    noise: &NoiseConfig,
) -> Result<(FilterBelief, Vector2<f64>)> {
    update_with(belief, meas, noise, CovarianceUpdate::Standard)
}

pub fn update_with(
    belief: &FilterBelief,
    meas: &PositionMeasurement,
    noise: &NoiseConfig,
    form: CovarianceUpdate,
) -> Result<(FilterBelief, Vector2<f64>)> {
    let (h, n) = jacobian_h(belief.kind, &belief.mean, noise)?;
    let z = residual(belief.kind, &belief.mean, &meas.y)?;
    let k = kalman_gain(&belief.cov, &h, &n)?;
    let delta = k * z;
    let mean = retract(belief.kind, &belief.mean, &delta)?;
    let ikh = Matrix6::identity() - k * h;
    let cov = match form {
        CovarianceUpdate::Standard => ikh * belief.cov,
        CovarianceUpdate::Joseph => ikh * belief.cov * ikh.transpose() + k * n * k.transpose(),
    };
    let cov = symmetrize(&cov);
    ensure_finite(&cov, "update")?;
    Ok((
        FilterBelief {
            mean,
            cov,
            kind: belief.kind,
        },
        z,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(x: f64, y: f64) -> Vector2<f64> {
        Vector2::new(x, y)
    }

    fn noise() -> NoiseConfig {
        NoiseConfig {
            sigma_omega: 0.5f64.to_radians(),
            sigma_u: 0.1,
            sigma_y: 1.0,
            dt: 0.1,
            pseudo_noise_s: 1e-6,
            pseudo_noise_lever: 1e-6,
        }
    }

    fn mean() -> TfgState {
        TfgState::original(0.7, 1.2, v(3.0, -4.0), v(0.8, 0.3)).unwrap()
    }

    #[test]
    fn kind_names_round_trip() {
        for k in FilterKind::ALL {
            assert_eq!(k.name().parse::<FilterKind>().unwrap(), k);
        }
        assert!("ukf".parse::<FilterKind>().is_err());
    }

    #[test]
    fn tfg_predict_is_identity_without_motion_or_noise() {
        let cov = InitialUncertainty::with_attitude(1.0).covariance();
        let b = FilterBelief::new(FilterKind::TfgIekf, mean(), cov).unwrap();
        let out = predict(&b, &OdometryInput::zero(), &NoiseConfig::zero(0.1)).unwrap();
        assert_eq!(out.mean, b.mean);
        assert_eq!(out.cov, b.cov);
    }

    #[test]
    fn tfg_odometry_noise_enters_isotropically() {
        let only_u = NoiseConfig {
            sigma_u: 0.1,
            ..NoiseConfig::zero(0.1)
        };
        let b = FilterBelief::new(FilterKind::TfgIekf, mean(), Matrix6::zeros()).unwrap();
        let input = OdometryInput::new(0.3, v(0.5, 0.0)).unwrap();
        let out = predict(&b, &input, &only_u).unwrap();
        let block = out.cov.fixed_view::<2, 2>(2, 2).into_owned();
        assert_abs_diff_eq!(block, Matrix2::identity() * 1e-4, epsilon = 1e-18);
        assert_eq!(out.cov[(0, 0)], 0.0);
    }

    #[test]
    fn tfg_jacobian_example() {
        let input = OdometryInput::new(0.0, v(1.0, 0.0)).unwrap();
        let f = jacobian_f(FilterKind::TfgIekf, &mean(), &input);
        assert_eq!(
            f.fixed_view::<2, 1>(2, 0).into_owned(),
            nalgebra::Vector2::new(0.0, 1.0)
        );
        assert_eq!(
            f.fixed_view::<2, 1>(2, 1).into_owned(),
            nalgebra::Vector2::new(1.0, 0.0)
        );
        assert_eq!(f.fixed_view::<2, 2>(2, 2).into_owned(), Matrix2::identity());
    }

    #[test]
    fn zero_input_jacobians_are_identity() {
        for k in FilterKind::ALL {
            assert_eq!(
                jacobian_f(k, &mean(), &OdometryInput::zero()),
                Matrix6::identity()
            );
        }
    }

    #[test]
    fn measurement_jacobian_examples() {
        let (h, n) = jacobian_h(FilterKind::TfgIekf, &mean(), &noise()).unwrap();
        let mut expected = Matrix2x6::zeros();
        expected.fixed_view_mut::<2, 2>(0, 2).fill_with_identity();
        expected.fixed_view_mut::<2, 2>(0, 4).fill_with_identity();
        assert_eq!(h, expected);
        assert_abs_diff_eq!(n, Matrix2::identity() / 1.44, epsilon = 1e-15);

        let at_zero = TfgState::original(0.0, 1.0, v(0.0, 0.0), v(1.0, 0.0)).unwrap();
        let (h, n) = jacobian_h(FilterKind::Ekf, &at_zero, &noise()).unwrap();
        assert_eq!(h.fixed_view::<2, 1>(0, 0).into_owned(), v(0.0, 1.0));
        assert_eq!(n, Matrix2::identity());
    }

    #[test]
    fn gain_on_toy_problem() {
        let mut h = Matrix2x6::zeros();
        h.fixed_view_mut::<2, 2>(0, 2).fill_with_identity();
        let k = kalman_gain(&Matrix6::identity(), &h, &Matrix2::identity()).unwrap();
        assert_abs_diff_eq!(k, h.transpose() / 2.0, epsilon = 1e-15);

        let mean = TfgState::original(0.0, 1.0, v(0.0, 0.0), v(0.0, 0.0)).unwrap();
        let z = v(2.0, -4.0);
        let shifted = retract(FilterKind::Ekf, &mean, &(k * z)).unwrap();
        assert_abs_diff_eq!(shifted.x, z / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn singular_innovation_covariance_is_reported() {
        let b = FilterBelief::new(FilterKind::Ekf, mean(), Matrix6::zeros()).unwrap();
        let meas = PositionMeasurement {
            y: v(0.0, 0.0),
            time_index: 0,
        };
        let err = update(&b, &meas, &NoiseConfig::zero(0.1)).unwrap_err();
        assert!(matches!(err, NavError::NumericalFailure(_)));
    }

    #[test]
    fn consistent_measurement_leaves_mean_and_contracts_cov() {
        for kind in FilterKind::ALL {
            let cov = InitialUncertainty::with_attitude(0.5).covariance();
            let b = FilterBelief::new(kind, mean(), cov).unwrap();
            let meas = PositionMeasurement {
                y: measure(&b.mean),
                time_index: 10,
            };
            let (out, z) = update(&b, &meas, &noise()).unwrap();
            assert!(z.norm() < 1e-12);
            assert!(local(kind, &b.mean, &out.mean).unwrap().amax() < 1e-12);
            assert!(out.cov.trace() < b.cov.trace());
        }
    }

    #[test]
    fn joseph_form_agrees_with_standard_at_optimal_gain() {
        let cov = InitialUncertainty::with_attitude(0.5).covariance();
        let b = FilterBelief::new(FilterKind::ImperfectIekf, mean(), cov).unwrap();
        let meas = PositionMeasurement {
            y: v(4.0, -3.0),
            time_index: 10,
        };
        let (a, _) = update_with(&b, &meas, &noise(), CovarianceUpdate::Standard).unwrap();
        let (j, _) = update_with(&b, &meas, &noise(), CovarianceUpdate::Joseph).unwrap();
        assert!((a.cov - j.cov).amax() < 1e-10);
        assert_eq!(a.mean, j.mean);
    }

    #[test]
    fn retract_local_round_trip() {
        let d = Vector6::new(0.3, 0.05, 0.4, -0.2, 0.1, 0.3);
        for kind in FilterKind::ALL {
            let t = retract(kind, &mean(), &d).unwrap();
            assert!((local(kind, &mean(), &t).unwrap() - d).amax() < 1e-12);
        }
    }

    #[test]
    fn tfg_correction_keeps_scale_positive() {
        let d = Vector6::new(0.0, -10.0, 0.0, 0.0, 0.0, 0.0);
        let t = retract(FilterKind::TfgIekf, &mean(), &d).unwrap();
        assert!(t.scale > 0.0);
        let e = retract(FilterKind::Ekf, &mean(), &d).unwrap();
        assert!(e.scale < 0.0);
    }
}
