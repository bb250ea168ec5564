use tfgnav::filters::CovarianceUpdate;
use tfgnav::sim::{InitMode, SensorNoise};
use tfgnav::{run_monte_carlo, FilterKind, ScenarioConfig, Verdict};

#[test]
fn tfg_scale_stays_positive_under_large_heading_errors() {
    let cfg = ScenarioConfig {
        n_runs: 12,
        ..ScenarioConfig::table1()
    };
    let (records, summary) = run_monte_carlo(&cfg, &FilterKind::ALL, 4).unwrap();
    for r in &records {
        assert!(r.track(FilterKind::TfgIekf).unwrap().min_scale() > 0.0);
    }
    assert_eq!(
        summary
            .filter(FilterKind::TfgIekf)
            .unwrap()
            .nonpositive_scale_runs,
        0
    );
}

#[test]
fn joseph_form_agrees_with_standard_form() {
    let base = ScenarioConfig {
        n_runs: 3,
        sigma_att0_deg: 30.0,
        ..ScenarioConfig::default()
    };
    let joseph = ScenarioConfig {
        covariance_update: CovarianceUpdate::Joseph,
        ..base.clone()
    };
    let (a, _) = run_monte_carlo(&base, &FilterKind::ALL, 2).unwrap();
    let (b, _) = run_monte_carlo(&joseph, &FilterKind::ALL, 2).unwrap();
    for (ra, rb) in a.iter().zip(&b) {
        for (ta, tb) in ra.tracks.iter().zip(&rb.tracks) {
            assert_eq!(ta.verdict, tb.verdict);
            let last = ta.estimates.len() - 1;
            assert!((ta.estimates[last].x - tb.estimates[last].x).norm() < 1e-6);
            assert!((ta.envelope[last] - tb.envelope[last]).abs() < 1e-8);
        }
    }
}

#[test]
fn exact_start_without_sensor_noise_is_convergent_for_all_filters() {
    let cfg = ScenarioConfig {
        noise: SensorNoise::noiseless(),
        sigma_att0_deg: 0.0,
        init: InitMode::Truth,
        n_runs: 1,
        ..ScenarioConfig::default()
    };
    let (records, summary) = run_monte_carlo(&cfg, &FilterKind::ALL, 1).unwrap();
    for f in &summary.filters {
        assert_eq!(f.convergent, 1, "{}", f.kind);
    }
    for t in &records[0].tracks {
        assert_eq!(t.verdict, Verdict::Convergent);
        assert!(t.errors.position.iter().all(|e| *e < 1e-6));
    }
}

#[test]
fn rmse_restricted_to_convergent_runs() {
    let cfg = ScenarioConfig {
        n_runs: 10,
        rmse_convergent_only: true,
        ..ScenarioConfig::table1()
    };
    let (_, summary) = run_monte_carlo(&cfg, &[FilterKind::Ekf], 4).unwrap();
    let ekf = summary.filter(FilterKind::Ekf).unwrap();
    assert_eq!(ekf.rmse_runs, ekf.convergent);
}
