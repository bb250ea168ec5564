//! Reference implementations that share no code with the closed forms they
//! check.

use nalgebra::{Matrix3, Matrix4, SMatrix, Vector6};

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm<const N: usize>(a: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let mut scaled = *a;
    let mut squarings = 0;
    while scaled.norm() > 0.25 {
        scaled /= 2.0;
        squarings += 1;
    }
    let id = SMatrix::<f64, N, N>::identity();
    let mut term = id;
    let mut sum = id;
    for k in 1..=24 {
        term = term * scaled / k as f64;
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// Lie-algebra element of the two-frame group in the 4×4 embedding, for
/// tangent `(ξ_θ, ξ_s, ξ_x, ξ_X')`.
pub fn algebra4(xi: &Vector6<f64>) -> Matrix4<f64> {
    #[rustfmt::skip]
    let m = Matrix4::new(
        xi[1], -xi[0], xi[2], xi[4],
        xi[0],  xi[1], xi[3], xi[5],
        0.0,    0.0,   0.0,   0.0,
        0.0,    0.0,   0.0,   0.0,
    );
    m
}

/// Lie-algebra element of Sim(2) in the 3×3 homogeneous embedding.
pub fn algebra3(xi_theta: f64, xi_s: f64, xi_x: [f64; 2]) -> Matrix3<f64> {
    #[rustfmt::skip]
    let m = Matrix3::new(
        xi_s,     -xi_theta, xi_x[0],
        xi_theta,  xi_s,     xi_x[1],
        0.0,       0.0,      0.0,
    );
    m
}

/// Central finite-difference Jacobian of `f` at zero.
pub fn central_jacobian<const M: usize>(
    f: impl Fn(&Vector6<f64>) -> SMatrix<f64, M, 1>,
    step: f64,
) -> SMatrix<f64, M, 6> {
    let mut jac = SMatrix::<f64, M, 6>::zeros();
    for i in 0..6 {
        let mut d = Vector6::zeros();
        d[i] = step;
        let col = (f(&d) - f(&(-d))) / (2.0 * step);
        jac.set_column(i, &col);
    }
    jac
}
