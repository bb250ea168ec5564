use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::filters::NoiseConfig;
use crate::models::{OdometryInput, PositionMeasurement};
use crate::sim::scenario::Truth;

/// Independent random streams of one Monte-Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Sensors,
    InitialBelief,
}

/// Identifies the randomness of one run: every stream is a pure function of
/// `(master, run_id, stream)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSeed {
    pub master: u64,
    pub run_id: u64,
}

impl RunSeed {
    pub fn new(master: u64, run_id: u64) -> Self {
        Self { master, run_id }
    }

    pub fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        let tag = match stream {
            Stream::Sensors => 0,
            Stream::InitialBelief => 1,
        };
        rng.set_stream(self.run_id.wrapping_mul(2).wrapping_add(tag));
        rng
    }
}

pub(crate) fn gaussian<R: Rng>(rng: &mut R, std: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    std * z
}

/// Noisy odometry and GNSS streams as the filters see them.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorStreams {
    pub inputs: Vec<OdometryInput>,
    pub fixes: Vec<PositionMeasurement>,
}

/// Adds white Gaussian noise: `σ_ω·dt` on each heading increment, `σ_u·dt`
/// per axis on each displacement and `σ_y` per axis on each fix.
pub fn corrupt(truth: &Truth, noise: &NoiseConfig, seed: RunSeed) -> SensorStreams {
    let mut rng = seed.rng(Stream::Sensors);
    let angle_std = noise.sigma_omega * noise.dt;
    let disp_std = noise.sigma_u * noise.dt;
    let inputs = truth
        .inputs
        .iter()
        .map(|i| OdometryInput {
            omega: i.omega + gaussian(&mut rng, angle_std),
            u: i.u + Vector2::new(gaussian(&mut rng, disp_std), gaussian(&mut rng, disp_std)),
        })
        .collect();
    let fixes = truth
        .fixes
        .iter()
        .map(|m| PositionMeasurement {
            y: m.y
                + Vector2::new(
                    gaussian(&mut rng, noise.sigma_y),
                    gaussian(&mut rng, noise.sigma_y),
                ),
            time_index: m.time_index,
        })
        .collect();
    SensorStreams { inputs, fixes }
}
