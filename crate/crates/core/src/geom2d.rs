//! Planar rotation and similarity-group primitives.
//!
//! Angles are stored as scalars wrapped into (−π, π]; rotation matrices are
//! built on demand. The similarity group Sim(2) is stored as
//! `(theta, scale, trans)` with the scale kept directly (not its logarithm),
//! while tangent vectors carry the log-scale.
//!
//! The exponential uses the complex-number form of the 2×2 generator
//! `A = ξ_s·I + ξ_θ·J`: with `a = ξ_s + iξ_θ`, `e^A` acts as `e^a` and the
//! left Jacobian `V = A⁻¹(e^A − I)` acts as `(e^a − 1)/a`.

use std::f64::consts::PI;

use nalgebra::{Complex, Matrix2, Matrix3, Vector2};

use crate::error::{NavError, Result};

/// Below this ∞-norm of `(ξ_θ, ξ_s)` the Taylor series is used for `V`.
pub const SMALL_ANGLE_THRESHOLD: f64 = 1e-6;

/// Infinitesimal rotation generator `[[0, −1], [1, 0]]`.
pub fn skew_unit() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Rotation matrix of angle `theta`, without the finiteness check.
#[inline]
pub(crate) fn rot_unchecked(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Rotation matrix `[[cos θ, −sin θ], [sin θ, cos θ]]`.
pub fn rot(theta: f64) -> Result<Matrix2<f64>> {
    if !theta.is_finite() {
        return Err(NavError::InvalidArgument(format!(
            "rotation angle must be finite, got {theta}"
        )));
    }
    Ok(rot_unchecked(theta))
}

/// A planar rotation stored by its angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot2 {
    theta: f64,
}

impl Rot2 {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(NavError::InvalidArgument(format!(
                "rotation angle must be finite, got {theta}"
            )));
        }
        Ok(Self {
            theta: wrap_angle(theta),
        })
    }

    pub fn identity() -> Self {
        Self { theta: 0.0 }
    }

    pub fn angle(&self) -> f64 {
        self.theta
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        rot_unchecked(self.theta)
    }

    pub fn compose(&self, other: &Rot2) -> Rot2 {
        Rot2 {
            theta: wrap_angle(self.theta + other.theta),
        }
    }

    pub fn inverse(&self) -> Rot2 {
        Rot2 {
            theta: wrap_angle(-self.theta),
        }
    }

    pub fn act(&self, v: &Vector2<f64>) -> Vector2<f64> {
        self.matrix() * v
    }
}

/// Element of Sim(2): `p ↦ scale·R(theta)·p + trans`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sim2Element {
    pub theta: f64,
    pub scale: f64,
    pub trans: Vector2<f64>,
}

impl Sim2Element {
    pub fn new(theta: f64, scale: f64, trans: Vector2<f64>) -> Result<Self> {
        if !(theta.is_finite() && scale.is_finite() && trans.iter().all(|v| v.is_finite())) {
            return Err(NavError::InvalidArgument(
                "Sim(2) element must have finite entries".into(),
            ));
        }
        if scale <= 0.0 {
            return Err(NavError::InvalidArgument(format!(
                "Sim(2) scale must be positive, got {scale}"
            )));
        }
        Ok(Self {
            theta: wrap_angle(theta),
            scale,
            trans,
        })
    }

    pub fn identity() -> Self {
        Self {
            theta: 0.0,
            scale: 1.0,
            trans: Vector2::zeros(),
        }
    }

    /// The linear part `s·R`.
    pub fn linear(&self) -> Matrix2<f64> {
        rot_unchecked(self.theta) * self.scale
    }

    pub fn compose(&self, other: &Sim2Element) -> Sim2Element {
        Sim2Element {
            theta: wrap_angle(self.theta + other.theta),
            scale: self.scale * other.scale,
            trans: self.trans + self.linear() * other.trans,
        }
    }

    pub fn inverse(&self) -> Sim2Element {
        let inv_lin = rot_unchecked(-self.theta) / self.scale;
        Sim2Element {
            theta: wrap_angle(-self.theta),
            scale: 1.0 / self.scale,
            trans: -(inv_lin * self.trans),
        }
    }

    pub fn act(&self, p: &Vector2<f64>) -> Vector2<f64> {
        self.linear() * p + self.trans
    }

    /// Homogeneous 3×3 matrix `[[sR, t], [0, 1]]`.
    pub fn to_matrix(&self) -> Matrix3<f64> {
        let l = self.linear();
        Matrix3::new(
            l[(0, 0)],
            l[(0, 1)],
            self.trans.x,
            l[(1, 0)],
            l[(1, 1)],
            self.trans.y,
            0.0,
            0.0,
            1.0,
        )
    }

    /// Inverse of [`Sim2Element::to_matrix`]. The top-left block must be a
    /// positive multiple of a rotation.
    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self> {
        let a = m[(0, 0)];
        let b = m[(1, 0)];
        let scale = a.hypot(b);
        Sim2Element::new(b.atan2(a), scale, Vector2::new(m[(0, 2)], m[(1, 2)]))
    }
}

/// Accurate `e^a − 1` for complex `a`, free of cancellation near zero.
fn complex_expm1(a: Complex<f64>) -> Complex<f64> {
    let em1 = a.re.exp_m1();
    let half = (0.5 * a.im).sin();
    let re = em1 * a.im.cos() - 2.0 * half * half;
    let im = a.re.exp() * a.im.sin();
    Complex::new(re, im)
}

fn as_matrix(c: Complex<f64>) -> Matrix2<f64> {
    Matrix2::new(c.re, -c.im, c.im, c.re)
}

/// `V = A⁻¹(e^A − I)` for `A = ξ_s·I + ξ_θ·J`, with a four-term Taylor
/// series near `A = 0`.
pub fn left_jacobian(xi_theta: f64, xi_s: f64) -> Matrix2<f64> {
    let a = Complex::new(xi_s, xi_theta);
    if xi_theta.abs().max(xi_s.abs()) < SMALL_ANGLE_THRESHOLD {
        as_matrix(left_jacobian_series(a))
    } else {
        as_matrix(complex_expm1(a) / a)
    }
}

/// `V⁻¹ = A(e^A − I)⁻¹`.
pub fn left_jacobian_inv(xi_theta: f64, xi_s: f64) -> Matrix2<f64> {
    let a = Complex::new(xi_s, xi_theta);
    if xi_theta.abs().max(xi_s.abs()) < SMALL_ANGLE_THRESHOLD {
        // a/(e^a − 1) = 1 − a/2 + a²/12 − a⁴/720
        let a2 = a * a;
        as_matrix(Complex::new(1.0, 0.0) - a * 0.5 + a2 / 12.0 - a2 * a2 / 720.0)
    } else {
        as_matrix(a / complex_expm1(a))
    }
}

pub(crate) fn left_jacobian_series(a: Complex<f64>) -> Complex<f64> {
    let a2 = a * a;
    Complex::new(1.0, 0.0) + a * 0.5 + a2 / 6.0 + a2 * a / 24.0
}

fn check_finite(vals: &[f64]) -> Result<()> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NavError::InvalidArgument(
            "tangent coordinates must be finite".into(),
        ))
    }
}

/// Closed-form exponential of Sim(2).
pub fn sim2_exp(xi_theta: f64, xi_s: f64, xi_x: Vector2<f64>) -> Result<Sim2Element> {
    check_finite(&[xi_theta, xi_s, xi_x.x, xi_x.y])?;
    Ok(Sim2Element {
        theta: wrap_angle(xi_theta),
        scale: xi_s.exp(),
        trans: left_jacobian(xi_theta, xi_s) * xi_x,
    })
}

/// Principal logarithm of Sim(2), returning `(ξ_θ, ξ_s, ξ_x)`.
pub fn sim2_log(e: &Sim2Element) -> Result<(f64, f64, Vector2<f64>)> {
    let theta = wrap_angle(e.theta);
    if theta >= PI {
        return Err(NavError::BranchAmbiguity { theta: e.theta });
    }
    if !(e.scale > 0.0) {
        return Err(NavError::InvalidArgument(format!(
            "Sim(2) scale must be positive, got {}",
            e.scale
        )));
    }
    let xi_s = e.scale.ln();
    Ok((theta, xi_s, left_jacobian_inv(theta, xi_s) * e.trans))
}
