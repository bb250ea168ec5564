use serde::{Deserialize, Serialize};

use crate::geom2d::wrap_angle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convergent,
    Divergent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Convergent => "convergent",
            Verdict::Divergent => "divergent",
        }
    }
}

/// Convergent iff the wrapped yaw error stays within the 3σ envelope at every
/// sample with `time >= cutoff`.
pub fn classify_convergence(
    times: &[f64],
    yaw_error: &[f64],
    envelope: &[f64],
    cutoff: f64,
) -> Verdict {
    debug_assert_eq!(times.len(), yaw_error.len());
    debug_assert_eq!(times.len(), envelope.len());
    let ok = times
        .iter()
        .zip(yaw_error.iter().zip(envelope))
        .filter(|(t, _)| **t >= cutoff)
        .all(|(_, (e, env))| wrap_angle(*e).abs() <= *env);
    if ok {
        Verdict::Convergent
    } else {
        Verdict::Divergent
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Vec<f64> {
        (0..=400).map(|k| k as f64 * 0.1).collect()
    }

    #[test]
    fn zero_error_converges() {
        let t = grid();
        let zeros = vec![0.0; t.len()];
        assert_eq!(
            classify_convergence(&t, &zeros, &zeros, 20.0),
            Verdict::Convergent
        );
    }

    #[test]
    fn early_excursion_is_ignored() {
        let t = grid();
        let env: Vec<f64> = t.iter().map(|_| 0.1).collect();
        let err: Vec<f64> = t
            .iter()
            .map(|&s| if s < 19.95 { 2.0 } else { 0.05 })
            .collect();
        assert_eq!(
            classify_convergence(&t, &err, &env, 20.0),
            Verdict::Convergent
        );
        let late: Vec<f64> = t
            .iter()
            .map(|&s| if s < 20.05 { 2.0 } else { 0.05 })
            .collect();
        assert_eq!(
            classify_convergence(&t, &late, &env, 20.0),
            Verdict::Divergent
        );
    }

    #[test]
    fn stuck_at_pi_diverges() {
        let t = grid();
        let err = vec![PI; t.len()];
        let env: Vec<f64> = t.iter().map(|&s| 4.0 * (-s / 10.0).exp()).collect();
        assert_eq!(
            classify_convergence(&t, &err, &env, 20.0),
            Verdict::Divergent
        );
    }

    #[test]
    fn errors_are_wrapped() {
        let t = grid();
        let err = vec![2.0 * PI + 0.01; t.len()];
        let env = vec![0.02; t.len()];
        assert_eq!(
            classify_convergence(&t, &err, &env, 20.0),
            Verdict::Convergent
        );
    }
}
