//! Discrete-time vehicle dynamics and GNSS measurements for the three
//! problems, together with the closed-form error maps they induce.
//!
//! All three problems share [`TfgState`] in the original convention:
//! problem 1 freezes `scale = 1` and `lever = 0`, problem 2 freezes
//! `scale = 1`, problem 3 estimates everything.

use nalgebra::Vector2;

use crate::error::{NavError, Result};
use crate::geom2d::{rot_unchecked, wrap_angle};
use crate::tfg::{LeverConvention, TfgError, TfgState};

/// Which estimation problem a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    /// Heading and position, antenna at the rear-axle midpoint.
    Pose,
    /// Adds an unknown lever arm.
    PoseLever,
    /// Adds an unknown odometry scale on top of the lever arm.
    PoseLeverScale,
}

impl Problem {
    pub const ALL: [Problem; 3] = [Problem::Pose, Problem::PoseLever, Problem::PoseLeverScale];

    pub fn number(self) -> u8 {
        match self {
            Problem::Pose => 1,
            Problem::PoseLever => 2,
            Problem::PoseLeverScale => 3,
        }
    }

    /// Checks the frozen fields of an original-convention state.
    pub fn check(self, chi: &TfgState) -> Result<()> {
        let frozen_scale = matches!(self, Problem::Pose | Problem::PoseLever);
        if frozen_scale && chi.scale != 1.0 {
            return Err(NavError::FrozenField {
                problem: self.number(),
                field: "scale",
            });
        }
        if self == Problem::Pose && chi.lever != Vector2::zeros() {
            return Err(NavError::FrozenField {
                problem: self.number(),
                field: "lever",
            });
        }
        Ok(())
    }
}

/// One odometry step: heading increment and body-frame displacement as
/// reported by the wheels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometryInput {
    pub omega: f64,
    pub u: Vector2<f64>,
}

impl OdometryInput {
    pub fn new(omega: f64, u: Vector2<f64>) -> Result<Self> {
        if !(omega.is_finite() && u.iter().all(|v| v.is_finite())) {
            return Err(NavError::InvalidArgument(
                "odometry input must be finite".into(),
            ));
        }
        if omega.abs() >= std::f64::consts::PI {
            return Err(NavError::InvalidArgument(format!(
                "per-step rotation must be below π, got {omega}"
            )));
        }
        Ok(Self { omega, u })
    }

    pub fn zero() -> Self {
        Self {
            omega: 0.0,
            u: Vector2::zeros(),
        }
    }
}

/// A world-frame position fix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionMeasurement {
    pub y: Vector2<f64>,
    pub time_index: usize,
}

/// `θ⁺ = θ + ω`, `x⁺ = x + s·R·u`, scale and lever arm constant.
pub fn propagate(chi: &TfgState, input: &OdometryInput, problem: Problem) -> Result<TfgState> {
    let chi = chi.to_original();
    problem.check(&chi)?;
    Ok(propagate_unchecked(&chi, input))
}

/// Dynamics without the frozen-field check; used by filters whose means may
/// leave the valid domain (e.g. an EKF scale estimate below zero).
pub fn propagate_unchecked(chi: &TfgState, input: &OdometryInput) -> TfgState {
    TfgState {
        theta: wrap_angle(chi.theta + input.omega),
        x: chi.x + chi.rotation() * input.u * chi.scale,
        ..*chi
    }
}

/// GNSS antenna position `x + R·X`.
pub fn measure(chi: &TfgState) -> Vector2<f64> {
    let o = chi.to_original();
    o.x + o.rotation() * o.lever
}

/// One-step error propagation, depending on the error and input only.
pub fn error_propagate_closed_form(err: &TfgError, input: &OdometryInput) -> TfgError {
    let inner = err.e_x + rot_unchecked(err.e_theta) * input.u * err.e_s - input.u;
    TfgError {
        e_x: rot_unchecked(-input.omega) * inner,
        ..*err
    }
}

/// Error after the state correction `χ̂'⁺ = χ̂' • L`, i.e. `L⁻¹ • E`.
pub fn error_update_closed_form(err: &TfgError, correction: &TfgState) -> Result<TfgError> {
    if correction.convention != LeverConvention::Primed {
        return Err(NavError::ConventionMismatch {
            expected: "primed",
            found: "original",
        });
    }
    let l_inv = correction.inverse()?;
    Ok(TfgError::from_group(&l_inv.compose(&err.as_group())?))
}
