//! Fixtures shared by the criterion benchmarks in `benches/`.

use nalgebra::{Vector2, Vector6};
use tfgnav::filters::InitialUncertainty;
use tfgnav::{
    FilterBelief, FilterKind, NoiseConfig, OdometryInput, PositionMeasurement, Tangent, TfgState,
};

pub fn state() -> TfgState {
    TfgState::original(0.7, 1.1, Vector2::new(3.0, -2.0), Vector2::new(1.0, 0.5))
        .expect("valid state")
}

pub fn tangent() -> Tangent {
    Tangent(Vector6::new(0.4, -0.2, 1.5, -0.7, 0.3, 0.9))
}

pub fn belief(kind: FilterKind) -> FilterBelief {
    let cov = InitialUncertainty::with_attitude(0.5).covariance();
    FilterBelief::new(kind, state(), cov).expect("valid belief")
}

pub fn input() -> OdometryInput {
    OdometryInput::new(0.0122, Vector2::new(0.45, 0.0)).expect("valid input")
}

pub fn fix() -> PositionMeasurement {
    PositionMeasurement {
        y: Vector2::new(3.4, -0.9),
        time_index: 10,
    }
}

pub fn noise() -> NoiseConfig {
    NoiseConfig {
        sigma_omega: 0.5f64.to_radians(),
        sigma_u: 0.1,
        sigma_y: 1.0,
        ..NoiseConfig::zero(0.1)
    }
}
