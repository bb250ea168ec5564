//! Randomized property suites for the group, model and filter layers.
//!
//! Each suite draws its samples from a seeded ChaCha stream and reports the
//! worst deviation it saw against a fixed tolerance. The suites back both the
//! `check` command and the acceptance tests.

pub mod oracle;

use nalgebra::{Matrix6, SymmetricEigen, Vector2, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::filters::{
    apply_tfg_correction, jacobian_f, jacobian_h, local, predict, residual, retract, update,
    FilterBelief, FilterKind, InitialUncertainty, NoiseConfig,
};
use crate::geom2d::{sim2_exp, Sim2Element};
use crate::models::{
    error_propagate_closed_form, error_update_closed_form, measure, propagate, propagate_unchecked,
    OdometryInput, PositionMeasurement, Problem,
};
use crate::tfg::{innovation, scaled_error, tfg_exp, tfg_log, Tangent, TfgError, TfgState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    fn new(name: impl Into<String>, samples: usize, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            samples,
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        }
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {} (n={}, max dev {:.3e}, tol {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.samples,
            self.max_deviation,
            self.tolerance
        )
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn vec2<R: Rng>(rng: &mut R, bound: f64) -> Vector2<f64> {
    Vector2::new(
        rng.random_range(-bound..bound),
        rng.random_range(-bound..bound),
    )
}

/// Random original-convention state for `problem`, heading in (−3, 3),
/// scale in [0.1, 10], positions in [−10, 10]².
pub fn random_state<R: Rng>(rng: &mut R, problem: Problem) -> TfgState {
    let theta = rng.random_range(-3.0..3.0);
    let scale = rng.random_range(0.1..10.0);
    let x = vec2(rng, 10.0);
    let lever = vec2(rng, 10.0);
    let (scale, lever) = match problem {
        Problem::Pose => (1.0, Vector2::zeros()),
        Problem::PoseLever => (1.0, lever),
        Problem::PoseLeverScale => (scale, lever),
    };
    TfgState::original(theta, scale, x, lever).expect("valid random state")
}

pub fn random_input<R: Rng>(rng: &mut R) -> OdometryInput {
    OdometryInput {
        omega: rng.random_range(-1.0..1.0),
        u: vec2(rng, 2.0),
    }
}

/// Tangent with a uniformly random direction and norm in `[0, radius]`.
pub fn random_tangent<R: Rng>(rng: &mut R, radius: f64) -> Vector6<f64> {
    let dir: Vector6<f64> = Vector6::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let norm = dir.norm().max(1e-12);
    dir * (rng.random_range(0.0..radius) / norm)
}

fn problem_tangent(mut xi: Vector6<f64>, problem: Problem) -> Vector6<f64> {
    if problem != Problem::PoseLeverScale {
        xi[1] = 0.0;
    }
    if problem == Problem::Pose {
        xi[4] = 0.0;
        xi[5] = 0.0;
    }
    xi
}

fn state_deviation(a: &TfgState, b: &TfgState) -> f64 {
    TfgError::from_group(&a.to_primed()).max_deviation(&TfgError::from_group(&b.to_primed()))
}

/// `tfg_exp` against the series matrix exponential on tangents with
/// `‖ξ‖ ≤ 5`, as relative Frobenius error of the 4×4 embedding. Also checks
/// `sim2_exp` against its 3×3 embedding.
pub fn exp_oracle(samples: usize, seed: u64) -> CheckReport {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let xi = random_tangent(&mut rng, 5.0);
        let reference = oracle::expm(&oracle::algebra4(&xi));
        let ours = tfg_exp(&Tangent(xi)).expect("finite tangent").to_matrix4();
        worst = worst.max((ours - reference).norm() / reference.norm());

        let reference3 = oracle::expm(&oracle::algebra3(xi[0], xi[1], [xi[2], xi[3]]));
        let sim = sim2_exp(xi[0], xi[1], Vector2::new(xi[2], xi[3])).expect("finite tangent");
        worst = worst.max((sim.to_matrix() - reference3).norm() / reference3.norm());
    }
    CheckReport::new("tfg_exp vs matrix-exponential oracle", samples, worst, 1e-9)
}

/// `tfg_exp(tfg_log(χ)) = χ` on the principal branch, and the same for
/// Sim(2).
pub fn exp_log_roundtrip(samples: usize, seed: u64) -> CheckReport {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let chi = random_state(&mut rng, Problem::PoseLeverScale).to_primed();
        let back = tfg_exp(&tfg_log(&chi).expect("principal branch")).expect("finite");
        worst = worst.max(state_deviation(&back, &chi));

        let e = Sim2Element::new(chi.theta, chi.scale, chi.x).expect("valid");
        let (t, s, v) = crate::geom2d::sim2_log(&e).expect("principal branch");
        let back = sim2_exp(t, s, v).expect("finite");
        worst = worst.max((back.to_matrix() - e.to_matrix()).amax());
    }
    CheckReport::new("exp/log roundtrip", samples, worst, 1e-10)
}

/// Associativity (1e−11), identity and inverses (1e−12), measured on
/// coordinates relative to `max(1, |entry|)`.
pub fn group_axioms(samples: usize, seed: u64) -> Vec<CheckReport> {
    let mut rng = rng(seed);
    let (mut assoc, mut inv, mut ident) = (0.0f64, 0.0f64, 0.0f64);
    let rel = |a: &TfgState, b: &TfgState| {
        let scale = 1.0 + a.x.amax().max(a.lever.amax());
        state_deviation(a, b) / scale
    };
    let id = TfgState::identity();
    for _ in 0..samples {
        let a = random_state(&mut rng, Problem::PoseLeverScale).to_primed();
        let b = random_state(&mut rng, Problem::PoseLeverScale).to_primed();
        let c = random_state(&mut rng, Problem::PoseLeverScale).to_primed();
        let lhs = a.compose(&b).unwrap().compose(&c).unwrap();
        let rhs = a.compose(&b.compose(&c).unwrap()).unwrap();
        assoc = assoc.max(rel(&lhs, &rhs));
        let ai = a.inverse().unwrap();
        inv = inv
            .max(state_deviation(&a.compose(&ai).unwrap(), &id))
            .max(state_deviation(&ai.compose(&a).unwrap(), &id));
        ident = ident
            .max(state_deviation(&a.compose(&id).unwrap(), &a))
            .max(state_deviation(&id.compose(&a).unwrap(), &a));
    }
    vec![
        CheckReport::new("group associativity", samples, assoc, 1e-11),
        CheckReport::new("group inverse", samples, inv, 1e-12),
        CheckReport::new("group identity", samples, ident, 1e-12),
    ]
}

/// `g₁∗(g₂∗v) = (g₁g₂)∗v` for the frame action and `χ₁∗_y(χ₂∗_y y) =
/// (χ₁•χ₂)∗_y y` for the output action, relative to the result magnitude.
pub fn action_axioms(samples: usize, seed: u64) -> CheckReport {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = random_state(&mut rng, Problem::PoseLeverScale).to_primed();
        let b = random_state(&mut rng, Problem::PoseLeverScale).to_primed();
        let v = vec2(&mut rng, 10.0);
        let ab = a.compose(&b).unwrap();
        let lhs = a.frame() * (b.frame() * v);
        let rhs = ab.frame() * v;
        worst = worst.max((lhs - rhs).amax() / lhs.amax().max(1.0));
        let lhs = a.act_y(&b.act_y(&v).unwrap()).unwrap();
        let rhs = ab.act_y(&v).unwrap();
        worst = worst.max((lhs - rhs).amax() / lhs.amax().max(1.0));
    }
    CheckReport::new("group action axioms", samples, worst, 1e-12)
}

/// `h(χ₁•χ₂) = χ₁ ∗_y h(χ₂)` for the problem-2 (unit scale) and problem-3
/// primed groups, absolute error.
pub fn compatibility(samples: usize, seed: u64) -> Vec<CheckReport> {
    [Problem::PoseLever, Problem::PoseLeverScale]
        .into_iter()
        .map(|problem| {
            let mut rng = rng(seed ^ u64::from(problem.number()));
            let mut worst = 0.0f64;
            for _ in 0..samples {
                let a = random_state(&mut rng, problem).to_primed();
                let b = random_state(&mut rng, problem).to_primed();
                let lhs = measure(&a.compose(&b).unwrap());
                let rhs = a.act_y(&measure(&b)).unwrap();
                worst = worst.max((lhs - rhs).amax());
            }
            CheckReport::new(
                format!("output compatibility, problem {}", problem.number()),
                samples,
                worst,
                1e-11,
            )
        })
        .collect()
}

/// Closed-form error propagation commutes with the dynamics, per problem.
pub fn propagation_autonomy(samples: usize, seed: u64) -> Vec<CheckReport> {
    Problem::ALL
        .into_iter()
        .map(|problem| {
            let mut rng = rng(seed.wrapping_add(u64::from(problem.number())));
            let mut worst = 0.0f64;
            for _ in 0..samples {
                let est = random_state(&mut rng, problem);
                let truth = random_state(&mut rng, problem);
                let input = random_input(&mut rng);
                let lhs = scaled_error(
                    &propagate(&est, &input, problem).unwrap(),
                    &propagate(&truth, &input, problem).unwrap(),
                )
                .unwrap();
                let rhs = error_propagate_closed_form(&scaled_error(&est, &truth).unwrap(), &input);
                worst = worst.max(lhs.max_deviation(&rhs));
            }
            CheckReport::new(
                format!("propagation autonomy, problem {}", problem.number()),
                samples,
                worst,
                1e-10,
            )
        })
        .collect()
}

/// Closed-form error update commutes with the TFG-IEKF state correction,
/// per problem (corrections restricted to the problem's free coordinates).
pub fn update_autonomy(samples: usize, seed: u64) -> Vec<CheckReport> {
    Problem::ALL
        .into_iter()
        .map(|problem| {
            let mut rng = rng(seed.wrapping_add(100 + u64::from(problem.number())));
            let mut worst = 0.0f64;
            for _ in 0..samples {
                let est = random_state(&mut rng, problem);
                let truth = random_state(&mut rng, problem);
                let xi = problem_tangent(random_tangent(&mut rng, 3.0), problem);
                let correction = tfg_exp(&Tangent(xi)).unwrap();
                let updated = apply_tfg_correction(&est, &correction).unwrap();
                let lhs = scaled_error(&updated, &truth).unwrap();
                let rhs =
                    error_update_closed_form(&scaled_error(&est, &truth).unwrap(), &correction)
                        .unwrap();
                worst = worst.max(lhs.max_deviation(&rhs));
            }
            CheckReport::new(
                format!("update autonomy, problem {}", problem.number()),
                samples,
                worst,
                1e-10,
            )
        })
        .collect()
}

/// The original-variable correction equals the group product `χ̂' • L`.
pub fn update_matches_group_law(samples: usize, seed: u64) -> CheckReport {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let est = random_state(&mut rng, Problem::PoseLeverScale);
        let l = tfg_exp(&Tangent(random_tangent(&mut rng, 3.0))).unwrap();
        let direct = apply_tfg_correction(&est, &l).unwrap();
        let group = est.to_primed().compose(&l).unwrap().to_original();
        let scale = 1.0 + est.x.amax().max(est.lever.amax());
        worst = worst.max(state_deviation(&direct, &group) / scale);
    }
    CheckReport::new(
        "TFG-IEKF correction equals group update",
        samples,
        worst,
        1e-12,
    )
}

/// Pairs with equal errors give equal innovations (noiseless fixes).
pub fn innovation_autonomy(samples: usize, seed: u64) -> CheckReport {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let est1 = random_state(&mut rng, Problem::PoseLeverScale);
        let truth1 = random_state(&mut rng, Problem::PoseLeverScale);
        let err = scaled_error(&est1, &truth1).unwrap();
        let est2 = random_state(&mut rng, Problem::PoseLeverScale);
        let truth2 = est2
            .to_primed()
            .compose(&err.as_group())
            .unwrap()
            .to_original();
        let z1 = innovation(&est1, &measure(&truth1)).unwrap();
        let z2 = innovation(&est2, &measure(&truth2)).unwrap();
        worst = worst.max((z1 - z2).amax());
        let from_error = err.as_group().act_y(&Vector2::zeros()).unwrap();
        worst = worst.max((z1 - from_error).amax());
    }
    CheckReport::new(
        "innovation depends on the error only",
        samples,
        worst,
        1e-10,
    )
}

/// TFG-IEKF `F` and `H` are bit-identical across random means for a fixed
/// input. Deviation is the number of mismatching draws.
pub fn jacobians_state_independent(samples: usize, seed: u64) -> CheckReport {
    let mut rng = rng(seed);
    let noise = NoiseConfig {
        sigma_y: 1.0,
        ..NoiseConfig::zero(0.1)
    };
    let input = random_input(&mut rng);
    let base = random_state(&mut rng, Problem::PoseLeverScale);
    let f0 = jacobian_f(FilterKind::TfgIekf, &base, &input);
    let (h0, _) = jacobian_h(FilterKind::TfgIekf, &base, &noise).unwrap();
    let mut mismatches = 0usize;
    for _ in 0..samples {
        let mean = random_state(&mut rng, Problem::PoseLeverScale);
        let f = jacobian_f(FilterKind::TfgIekf, &mean, &input);
        let (h, _) = jacobian_h(FilterKind::TfgIekf, &mean, &noise).unwrap();
        let same_f = f
            .iter()
            .zip(f0.iter())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        let same_h = h
            .iter()
            .zip(h0.iter())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        if !(same_f && same_h) {
            mismatches += 1;
        }
    }
    CheckReport::new(
        "TFG-IEKF Jacobians state-independent",
        samples,
        mismatches as f64,
        0.0,
    )
}

/// Analytic `F` and `H` against central differences (step 1e−6) of the
/// error-propagation and residual maps, relative to `max(1, max|J|)`.
pub fn jacobian_finite_differences(kind: FilterKind, samples: usize, seed: u64) -> CheckReport {
    let mut rng = rng(seed);
    let noise = NoiseConfig {
        sigma_y: 1.0,
        ..NoiseConfig::zero(0.1)
    };
    let step = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let mut mean = random_state(&mut rng, Problem::PoseLeverScale);
        mean.scale = rng.random_range(0.5..2.0);
        mean.x = vec2(&mut rng, 5.0);
        mean.lever = vec2(&mut rng, 3.0);
        let input = random_input(&mut rng);
        let next = propagate_unchecked(&mean, &input);

        let f = jacobian_f(kind, &mean, &input);
        let f_fd = oracle::central_jacobian(
            |d| {
                let truth = retract(kind, &mean, d).unwrap();
                local(kind, &next, &propagate_unchecked(&truth, &input)).unwrap()
            },
            step,
        );
        worst = worst.max((f - f_fd).amax() / f.amax().max(1.0));

        let (h, _) = jacobian_h(kind, &mean, &noise).unwrap();
        let h_fd = oracle::central_jacobian(
            |d| {
                let truth = retract(kind, &mean, d).unwrap();
                residual(kind, &mean, &measure(&truth)).unwrap()
            },
            step,
        );
        worst = worst.max((h - h_fd).amax() / h.amax().max(1.0));
    }
    CheckReport::new(
        format!("{kind} Jacobians vs finite differences"),
        samples,
        worst,
        1e-5,
    )
}

/// Random TFG-IEKF corrections with `‖Kz‖ ≤ 10` never produce `s ≤ 0`.
/// Returns the report and the number of EKF draws that did.
pub fn scale_positivity(samples: usize, seed: u64) -> (CheckReport, usize) {
    let mut rng = rng(seed);
    let mut violations = 0usize;
    let mut ekf_violations = 0usize;
    for _ in 0..samples {
        let mean = random_state(&mut rng, Problem::PoseLeverScale);
        let delta = random_tangent(&mut rng, 10.0);
        if !(retract(FilterKind::TfgIekf, &mean, &delta).unwrap().scale > 0.0) {
            violations += 1;
        }
        if retract(FilterKind::Ekf, &mean, &delta).unwrap().scale <= 0.0 {
            ekf_violations += 1;
        }
    }
    (
        CheckReport::new("TFG-IEKF scale positivity", samples, violations as f64, 0.0),
        ekf_violations,
    )
}

/// Symmetry (1e−10) and positive semi-definiteness (eigenvalues ≥ −1e−10)
/// over chains of predict/update cycles.
pub fn covariance_invariants(kind: FilterKind, cycles: usize, seed: u64) -> CheckReport {
    let mut rng = rng(seed);
    let noise = NoiseConfig {
        sigma_omega: 0.5f64.to_radians(),
        sigma_u: 0.1,
        sigma_y: 1.0,
        dt: 0.1,
        pseudo_noise_s: 1e-6,
        pseudo_noise_lever: 1e-6,
    };
    let chain = 500;
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < cycles {
        let mut truth = random_state(&mut rng, Problem::PoseLeverScale);
        truth.scale = rng.random_range(0.8..1.2);
        let start = TfgState {
            theta: truth.theta + rng.random_range(-1.0..1.0),
            scale: 1.0,
            x: truth.x + vec2(&mut rng, 2.0),
            lever: Vector2::zeros(),
            ..truth
        };
        let cov = InitialUncertainty::with_attitude(1.0).covariance();
        let mut belief = FilterBelief::new(kind, start, cov).unwrap();
        for k in 0..chain.min(cycles - done) {
            let input = OdometryInput {
                omega: rng.random_range(-0.05..0.05),
                u: Vector2::new(0.5, 0.0),
            };
            truth = propagate_unchecked(&truth, &input);
            belief = match predict(&belief, &input, &noise) {
                Ok(b) => b,
                Err(_) => {
                    worst = f64::INFINITY;
                    break;
                }
            };
            let meas = PositionMeasurement {
                y: measure(&truth) + vec2(&mut rng, 1.0),
                time_index: k,
            };
            belief = match update(&belief, &meas, &noise) {
                Ok((b, _)) => b,
                Err(_) => {
                    worst = f64::INFINITY;
                    break;
                }
            };
            worst = worst.max(covariance_defect(&belief.cov));
            done += 1;
        }
        if worst.is_infinite() {
            break;
        }
    }
    CheckReport::new(
        format!("{kind} covariance symmetric PSD"),
        cycles,
        worst,
        1e-10,
    )
}

fn covariance_defect(p: &Matrix6<f64>) -> f64 {
    let asym = (p - p.transpose()).amax();
    let min_eig = SymmetricEigen::new(*p).eigenvalues.min();
    asym.max(-min_eig)
}

/// Runs every suite with `samples` draws each (the Jacobian state-independence
/// check always uses 100 means).
pub fn run_all(samples: usize, seed: u64) -> Vec<CheckReport> {
    let mut out = vec![
        exp_oracle(samples, seed),
        exp_log_roundtrip(samples, seed + 1),
    ];
    out.extend(group_axioms(samples, seed + 2));
    out.push(action_axioms(samples, seed + 3));
    out.extend(compatibility(samples, seed + 4));
    out.extend(propagation_autonomy(samples, seed + 5));
    out.extend(update_autonomy(samples, seed + 6));
    out.push(update_matches_group_law(samples, seed + 7));
    out.push(innovation_autonomy(samples, seed + 8));
    out.push(jacobians_state_independent(100, seed + 9));
    for kind in FilterKind::ALL {
        out.push(jacobian_finite_differences(
            kind,
            samples.min(1000),
            seed + 10,
        ));
    }
    out.push(scale_positivity(samples * 10, seed + 11).0);
    for kind in FilterKind::ALL {
        out.push(covariance_invariants(kind, samples, seed + 12));
    }
    out
}
