//! The two-frame group on `((θ, s), x, X')`.
//!
//! The frame group `G = SO(2) × ℝ₊` acts on both vector slots by
//! `(θ, s) ∗ v = s·R(θ)·v`. The group law is
//!
//! ```text
//! χ₁ • χ₂ = (g₁g₂,  x₁ + g₁∗x₂,  X'₂ + g₂⁻¹∗X'₁)
//! ```
//!
//! and positions are observed through `χ ∗_y y = x + g∗X' + g∗y`, so that the
//! measurement `h(χ) = χ ∗_y 0` is compatible with the law.
//!
//! States carry a [`LeverConvention`] flag. Group operations are only defined
//! in the primed convention (`X' = X/s`); dynamics, measurements and reported
//! errors live in the original one.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector6};

use crate::error::{NavError, Result};
use crate::geom2d::{left_jacobian, left_jacobian_inv, rot_unchecked, wrap_angle};

/// Whether the `lever` slot stores `X` or `X' = X/s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeverConvention {
    Original,
    Primed,
}

impl LeverConvention {
    fn name(self) -> &'static str {
        match self {
            LeverConvention::Original => "original",
            LeverConvention::Primed => "primed",
        }
    }
}

/// Full navigation state: heading, odometry scale, world position and
/// body-frame lever arm.
///
/// Baseline filters may drive `scale` to zero or below; group operations
/// require it positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfgState {
    pub theta: f64,
    pub scale: f64,
    pub x: Vector2<f64>,
    pub lever: Vector2<f64>,
    pub convention: LeverConvention,
}

impl TfgState {
    pub fn new(
        theta: f64,
        scale: f64,
        x: Vector2<f64>,
        lever: Vector2<f64>,
        convention: LeverConvention,
    ) -> Result<Self> {
        let finite = theta.is_finite()
            && scale.is_finite()
            && x.iter().chain(lever.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(NavError::InvalidArgument(
                "state entries must be finite".into(),
            ));
        }
        if scale <= 0.0 {
            return Err(NavError::InvalidArgument(format!(
                "scale must be positive, got {scale}"
            )));
        }
        Ok(Self {
            theta: wrap_angle(theta),
            scale,
            x,
            lever,
            convention,
        })
    }

    pub fn original(theta: f64, scale: f64, x: Vector2<f64>, lever: Vector2<f64>) -> Result<Self> {
        Self::new(theta, scale, x, lever, LeverConvention::Original)
    }

    pub fn primed(theta: f64, scale: f64, x: Vector2<f64>, lever: Vector2<f64>) -> Result<Self> {
        Self::new(theta, scale, x, lever, LeverConvention::Primed)
    }

    pub fn identity() -> Self {
        Self {
            theta: 0.0,
            scale: 1.0,
            x: Vector2::zeros(),
            lever: Vector2::zeros(),
            convention: LeverConvention::Primed,
        }
    }

    pub fn rotation(&self) -> Matrix2<f64> {
        rot_unchecked(self.theta)
    }

    /// `s·R`, the linear map of the frame action.
    pub fn frame(&self) -> Matrix2<f64> {
        self.rotation() * self.scale
    }

    /// Inverse of the frame action: `(1/s)·R⁻¹`.
    pub fn frame_inv(&self) -> Matrix2<f64> {
        rot_unchecked(-self.theta) / self.scale
    }

    pub fn to_primed(&self) -> TfgState {
        match self.convention {
            LeverConvention::Primed => *self,
            LeverConvention::Original => TfgState {
                lever: self.lever / self.scale,
                convention: LeverConvention::Primed,
                ..*self
            },
        }
    }

    pub fn to_original(&self) -> TfgState {
        match self.convention {
            LeverConvention::Original => *self,
            LeverConvention::Primed => TfgState {
                lever: self.lever * self.scale,
                convention: LeverConvention::Original,
                ..*self
            },
        }
    }

    fn require(&self, convention: LeverConvention) -> Result<()> {
        if self.convention == convention {
            Ok(())
        } else {
            Err(NavError::ConventionMismatch {
                expected: convention.name(),
                found: self.convention.name(),
            })
        }
    }

    /// Group law; both operands must be primed.
    pub fn compose(&self, other: &TfgState) -> Result<TfgState> {
        self.require(LeverConvention::Primed)?;
        other.require(LeverConvention::Primed)?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &TfgState) -> TfgState {
        TfgState {
            theta: wrap_angle(self.theta + other.theta),
            scale: self.scale * other.scale,
            x: self.x + self.frame() * other.x,
            lever: other.lever + other.frame_inv() * self.lever,
            convention: LeverConvention::Primed,
        }
    }

    /// `(g⁻¹, −g⁻¹∗x, −g∗X')`; expects a primed state.
    pub fn inverse(&self) -> Result<TfgState> {
        self.require(LeverConvention::Primed)?;
        Ok(self.inverse_unchecked())
    }

    pub(crate) fn inverse_unchecked(&self) -> TfgState {
        TfgState {
            theta: wrap_angle(-self.theta),
            scale: 1.0 / self.scale,
            x: -(self.frame_inv() * self.x),
            lever: -(self.frame() * self.lever),
            convention: LeverConvention::Primed,
        }
    }

    /// Output action `x + s·R·X' + s·R·y`; expects a primed state.
    pub fn act_y(&self, y: &Vector2<f64>) -> Result<Vector2<f64>> {
        self.require(LeverConvention::Primed)?;
        Ok(self.x + self.frame() * (self.lever + y))
    }

    /// Faithful 4×4 embedding `[[sR, x, g∗X'], [0, 1, 0], [0, 0, 1]]` of a
    /// primed state.
    pub fn to_matrix4(&self) -> Matrix4<f64> {
        let p = self.to_primed();
        let l = p.frame();
        let w = l * p.lever;
        #[rustfmt::skip]
        let m = Matrix4::new(
            l[(0, 0)], l[(0, 1)], p.x.x, w.x,
            l[(1, 0)], l[(1, 1)], p.x.y, w.y,
            0.0,       0.0,       1.0,   0.0,
            0.0,       0.0,       0.0,   1.0,
        );
        m
    }

    /// Reads a primed state back from the 4×4 embedding.
    pub fn from_matrix4(m: &Matrix4<f64>) -> Result<TfgState> {
        let (a, b) = (m[(0, 0)], m[(1, 0)]);
        let theta = b.atan2(a);
        let scale = a.hypot(b);
        let x = Vector2::new(m[(0, 2)], m[(1, 2)]);
        let w = Vector2::new(m[(0, 3)], m[(1, 3)]);
        let lever = rot_unchecked(-theta) * w / scale;
        TfgState::primed(theta, scale, x, lever)
    }
}

/// Error `(E^R, E^s, E^x, E^X)` of the scaled two-frame construction, reported
/// in original variables. Numerically it coincides with the primed
/// left-invariant error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfgError {
    pub e_theta: f64,
    pub e_s: f64,
    pub e_x: Vector2<f64>,
    pub e_lever: Vector2<f64>,
}

impl TfgError {
    pub fn identity() -> Self {
        Self {
            e_theta: 0.0,
            e_s: 1.0,
            e_x: Vector2::zeros(),
            e_lever: Vector2::zeros(),
        }
    }

    /// Views a primed group element as an error.
    pub fn from_group(state: &TfgState) -> Self {
        let p = state.to_primed();
        Self {
            e_theta: p.theta,
            e_s: p.scale,
            e_x: p.x,
            e_lever: p.lever,
        }
    }

    pub fn as_group(&self) -> TfgState {
        TfgState {
            theta: wrap_angle(self.e_theta),
            scale: self.e_s,
            x: self.e_x,
            lever: self.e_lever,
            convention: LeverConvention::Primed,
        }
    }

    /// Largest component-wise deviation, with the angle compared modulo 2π.
    pub fn max_deviation(&self, other: &TfgError) -> f64 {
        let dt = wrap_angle(self.e_theta - other.e_theta).abs();
        let ds = (self.e_s - other.e_s).abs();
        let dx = (self.e_x - other.e_x).amax();
        let dl = (self.e_lever - other.e_lever).amax();
        dt.max(ds).max(dx).max(dl)
    }
}

/// Tangent coordinates `(ξ_θ, ξ_s, ξ_x, ξ_X')` with ξ_s a log-scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent(pub Vector6<f64>);

impl Tangent {
    pub fn zero() -> Self {
        Tangent(Vector6::zeros())
    }

    pub fn new(xi_theta: f64, xi_s: f64, xi_x: Vector2<f64>, xi_lever: Vector2<f64>) -> Self {
        Tangent(Vector6::new(
            xi_theta, xi_s, xi_x.x, xi_x.y, xi_lever.x, xi_lever.y,
        ))
    }

    pub fn theta(&self) -> f64 {
        self.0[0]
    }

    pub fn log_scale(&self) -> f64 {
        self.0[1]
    }

    pub fn x(&self) -> Vector2<f64> {
        Vector2::new(self.0[2], self.0[3])
    }

    pub fn lever(&self) -> Vector2<f64> {
        Vector2::new(self.0[4], self.0[5])
    }
}

impl From<Vector6<f64>> for Tangent {
    fn from(v: Vector6<f64>) -> Self {
        Tangent(v)
    }
}

/// `est⁻¹ • truth`, both primed.
pub fn left_error(est: &TfgState, truth: &TfgState) -> Result<TfgState> {
    est.inverse()?.compose(truth)
}

/// Autonomous error between two original-convention states:
/// heading, scale and position as in the left-invariant error, and
/// `E^X = (1/s)·(X − R⁻¹·R̂·X̂)`.
pub fn scaled_error(est: &TfgState, truth: &TfgState) -> Result<TfgError> {
    est.require(LeverConvention::Original)?;
    truth.require(LeverConvention::Original)?;
    let rel = rot_unchecked(truth.theta - est.theta);
    Ok(TfgError {
        e_theta: wrap_angle(truth.theta - est.theta),
        e_s: truth.scale / est.scale,
        e_x: est.frame_inv() * (truth.x - est.x),
        e_lever: (truth.lever - rel.transpose() * est.lever) / truth.scale,
    })
}

/// Innovation `Z = χ̂⁻¹ ∗_y y`, evaluated in original variables as
/// `(1/ŝ)·R̂⁻¹·(y − x̂) − (1/ŝ)·X̂`.
pub fn innovation(est: &TfgState, y: &Vector2<f64>) -> Result<Vector2<f64>> {
    est.require(LeverConvention::Original)?;
    if !(est.scale > 0.0) {
        return Err(NavError::InvalidArgument(format!(
            "innovation needs a positive scale, got {}",
            est.scale
        )));
    }
    Ok(est.frame_inv() * (y - est.x) - est.lever / est.scale)
}

/// Exact group exponential, computed through the isomorphism
/// `(g, x, X') ↦ (g, x, g∗X')` onto `Sim(2)`-like affine matrices.
pub fn tfg_exp(xi: &Tangent) -> Result<TfgState> {
    if !xi.0.iter().all(|v| v.is_finite()) {
        return Err(NavError::InvalidArgument(
            "tangent coordinates must be finite".into(),
        ));
    }
    let v = left_jacobian(xi.theta(), xi.log_scale());
    let theta = xi.theta();
    let scale = xi.log_scale().exp();
    let w = v * xi.lever();
    Ok(TfgState {
        theta: wrap_angle(theta),
        scale,
        x: v * xi.x(),
        lever: rot_unchecked(-theta) * w / scale,
        convention: LeverConvention::Primed,
    })
}

/// Principal logarithm; fails at a heading of exactly π.
pub fn tfg_log(chi: &TfgState) -> Result<Tangent> {
    chi.require(LeverConvention::Primed)?;
    let theta = wrap_angle(chi.theta);
    if theta >= std::f64::consts::PI {
        return Err(NavError::BranchAmbiguity { theta: chi.theta });
    }
    if !(chi.scale > 0.0) {
        return Err(NavError::InvalidArgument(format!(
            "scale must be positive, got {}",
            chi.scale
        )));
    }
    let log_s = chi.scale.ln();
    let v_inv = left_jacobian_inv(theta, log_s);
    let w = chi.frame() * chi.lever;
    Ok(Tangent::new(theta, log_s, v_inv * chi.x, v_inv * w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn v(x: f64, y: f64) -> Vector2<f64> {
        Vector2::new(x, y)
    }

    fn primed(t: f64, s: f64, x: Vector2<f64>, l: Vector2<f64>) -> TfgState {
        TfgState::primed(t, s, x, l).unwrap()
    }

    fn close(a: &TfgState, b: &TfgState, tol: f64) -> bool {
        TfgError::from_group(a).max_deviation(&TfgError::from_group(b)) <= tol
            && a.convention == b.convention
    }

    fn arb_primed() -> impl Strategy<Value = TfgState> {
        (
            -3.1..3.1f64,
            0.1..10.0f64,
            prop::array::uniform4(-10.0..10.0f64),
        )
            .prop_map(|(t, s, a)| primed(t, s, v(a[0], a[1]), v(a[2], a[3])))
    }

    #[test]
    fn compose_examples() {
        let a = primed(FRAC_PI_2, 1.0, v(1.0, 0.0), v(0.0, 1.0));
        let b = primed(0.0, 1.0, v(2.0, 0.0), v(1.0, 1.0));
        let c = a.compose(&b).unwrap();
        assert_abs_diff_eq!(c.theta, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(c.x, v(1.0, 2.0), epsilon = 1e-15);
        assert_abs_diff_eq!(c.lever, v(1.0, 2.0), epsilon = 1e-15);

        let a = primed(0.0, 2.0, v(0.0, 0.0), v(0.0, 0.0));
        let b = primed(0.0, 1.0, v(1.0, 0.0), v(1.0, 0.0));
        let c = a.compose(&b).unwrap();
        assert_eq!(c.scale, 2.0);
        assert_eq!(c.x, v(2.0, 0.0));
        assert_eq!(c.lever, v(1.0, 0.0));

        let id = TfgState::identity();
        assert!(close(&a.compose(&id).unwrap(), &a, 0.0));
        assert!(close(&id.compose(&a).unwrap(), &a, 0.0));
    }

    #[test]
    fn compose_rejects_original_convention() {
        let a = TfgState::original(0.0, 1.0, v(0.0, 0.0), v(1.0, 0.0)).unwrap();
        let err = a.compose(&TfgState::identity()).unwrap_err();
        assert!(matches!(err, NavError::ConventionMismatch { .. }));
        assert!(TfgState::identity().compose(&a).is_err());
    }

    #[test]
    fn inverse_example() {
        let a = primed(0.0, 2.0, v(4.0, 0.0), v(1.0, 0.0));
        let i = a.inverse().unwrap();
        assert_eq!(i.scale, 0.5);
        assert_eq!(i.x, v(-2.0, 0.0));
        assert_eq!(i.lever, v(-2.0, 0.0));
        assert!(close(
            &TfgState::identity().inverse().unwrap(),
            &TfgState::identity(),
            0.0
        ));
    }

    #[test]
    fn act_y_examples() {
        assert_eq!(
            TfgState::identity().act_y(&v(3.0, 4.0)).unwrap(),
            v(3.0, 4.0)
        );
        let chi = primed(0.0, 2.0, v(1.0, 1.0), v(0.5, 0.0));
        assert_eq!(chi.act_y(&Vector2::zeros()).unwrap(), v(2.0, 1.0));
    }

    #[test]
    fn conventions_round_trip() {
        let s = TfgState::original(0.4, 1.7, v(3.0, -1.0), v(0.3, 0.9)).unwrap();
        let back = s.to_primed().to_original();
        assert_abs_diff_eq!(back.lever, s.lever, epsilon = 1e-12);
        assert_eq!(back.convention, LeverConvention::Original);
        assert_abs_diff_eq!(s.to_primed().lever, s.lever / 1.7, epsilon = 1e-15);
    }

    #[test]
    fn scaled_error_example() {
        let truth = TfgState::original(0.0, 2.0, Vector2::zeros(), v(2.0, 0.0)).unwrap();
        let est = TfgState::original(0.0, 2.0, Vector2::zeros(), Vector2::zeros()).unwrap();
        let e = scaled_error(&est, &truth).unwrap();
        assert_eq!(e.e_lever, v(1.0, 0.0));
        assert_eq!(e.e_s, 1.0);
        assert_eq!(
            scaled_error(&truth, &truth)
                .unwrap()
                .max_deviation(&TfgError::identity()),
            0.0
        );
    }

    #[test]
    fn innovation_examples() {
        let est = TfgState::original(0.0, 1.0, Vector2::zeros(), Vector2::zeros()).unwrap();
        assert_eq!(innovation(&est, &v(2.0, 3.0)).unwrap(), v(2.0, 3.0));
        let truth = TfgState::original(1.0, 1.3, v(5.0, 1.0), v(0.4, -0.2)).unwrap();
        let y = truth.x + truth.rotation() * truth.lever;
        assert!(innovation(&truth, &y).unwrap().norm() < 1e-14);
    }

    #[test]
    fn exp_log_special_cases() {
        assert!(close(
            &tfg_exp(&Tangent::zero()).unwrap(),
            &TfgState::identity(),
            0.0
        ));
        let e = tfg_exp(&Tangent::new(0.0, 0.0, v(1.0, 2.0), v(-3.0, 0.5))).unwrap();
        assert!(close(&e, &primed(0.0, 1.0, v(1.0, 2.0), v(-3.0, 0.5)), 0.0));
        assert_eq!(tfg_log(&TfgState::identity()).unwrap(), Tangent::zero());
        let lever_only = primed(0.0, 1.0, Vector2::zeros(), v(0.7, -1.2));
        let xi = tfg_log(&lever_only).unwrap();
        assert_eq!(xi, Tangent::new(0.0, 0.0, Vector2::zeros(), v(0.7, -1.2)));
        let at_pi = primed(
            std::f64::consts::PI,
            1.0,
            Vector2::zeros(),
            Vector2::zeros(),
        );
        assert!(matches!(
            tfg_log(&at_pi),
            Err(NavError::BranchAmbiguity { .. })
        ));
    }

    #[test]
    fn exp_has_unit_derivative() {
        let xi = Tangent::new(0.4, -0.3, v(1.0, 2.0), v(-0.5, 0.8));
        let h = 1e-6;
        let plus = tfg_exp(&Tangent(xi.0 * h)).unwrap();
        let minus = tfg_exp(&Tangent(xi.0 * -h)).unwrap();
        let d = Tangent::new(
            (plus.theta - minus.theta) / (2.0 * h),
            (plus.scale.ln() - minus.scale.ln()) / (2.0 * h),
            (plus.x - minus.x) / (2.0 * h),
            (plus.lever - minus.lever) / (2.0 * h),
        );
        assert!((d.0 - xi.0).amax() < 1e-8);
    }

    #[test]
    fn embedding_is_homomorphism() {
        let a = primed(0.8, 1.5, v(1.0, -2.0), v(0.3, 0.1));
        let b = primed(-2.0, 0.4, v(-3.0, 4.0), v(1.0, -1.0));
        let prod = a.compose(&b).unwrap().to_matrix4();
        let mats = a.to_matrix4() * b.to_matrix4();
        assert!((prod - mats).norm() < 1e-12);
        assert!(close(
            &TfgState::from_matrix4(&mats).unwrap(),
            &a.compose(&b).unwrap(),
            1e-12
        ));
    }

    proptest! {
        #[test]
        fn group_axioms(a in arb_primed(), b in arb_primed(), c in arb_primed()) {
            let lhs = a.compose(&b).unwrap().compose(&c).unwrap();
            let rhs = a.compose(&b.compose(&c).unwrap()).unwrap();
            prop_assert!(close(&lhs, &rhs, 1e-11 * (1.0 + lhs.x.norm() + lhs.lever.norm())));
            let id = TfgState::identity();
            prop_assert!(close(&a.compose(&a.inverse().unwrap()).unwrap(), &id, 1e-12 * (1.0 + a.x.norm() + a.lever.norm()) * a.scale.max(1.0 / a.scale)));
            prop_assert!(close(&a.inverse().unwrap().compose(&a).unwrap(), &id, 1e-12 * (1.0 + a.x.norm() + a.lever.norm()) * a.scale.max(1.0 / a.scale)));
        }

        #[test]
        fn output_compatibility(a in arb_primed(), b in arb_primed()) {
            let lhs = a.compose(&b).unwrap().act_y(&Vector2::zeros()).unwrap();
            let rhs = a.act_y(&b.act_y(&Vector2::zeros()).unwrap()).unwrap();
            prop_assert!((lhs - rhs).amax() <= 1e-11 * lhs.amax().max(1.0));
        }

        #[test]
        fn left_error_is_left_invariant(g in arb_primed(), est in arb_primed(), truth in arb_primed()) {
            let e1 = left_error(&est, &truth).unwrap();
            let e2 = left_error(&g.compose(&est).unwrap(), &g.compose(&truth).unwrap()).unwrap();
            let tol = 1e-9 * (1.0 + e1.x.norm() + e1.lever.norm());
            prop_assert!(close(&e1, &e2, tol));
        }

        #[test]
        fn scaled_error_matches_primed_left_error(est in arb_primed(), truth in arb_primed()) {
            let direct = scaled_error(&est.to_original(), &truth.to_original()).unwrap();
            let via_group = TfgError::from_group(&left_error(&est, &truth).unwrap());
            prop_assert!(direct.max_deviation(&via_group) <= 1e-10 * (1.0 + direct.e_x.norm() + direct.e_lever.norm()));
        }

        #[test]
        fn exp_log_round_trip(chi in arb_primed()) {
            let back = tfg_exp(&tfg_log(&chi).unwrap()).unwrap();
            prop_assert!(close(&back, &chi, 1e-10 * (1.0 + chi.x.norm() + chi.lever.norm())));
        }
    }
}
