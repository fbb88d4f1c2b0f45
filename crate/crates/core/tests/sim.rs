use std::io::Write;
use std::path::Path;

use tailtilt::distributions::DistSpec;
use tailtilt::estimators::EstimatorKind;
use tailtilt::evt::ThresholdRule;
use tailtilt::sim::{
    resample_experiment, run_scenario, threshold_sweep, with_threads, MethodSpec, ScenarioConfig,
    Source,
};

fn config(reps: usize) -> ScenarioConfig {
    ScenarioConfig {
        x: Source::Dist(DistSpec::LogGamma { shape: 4.0, scale: 0.45 }),
        background: Source::Dist(DistSpec::LogGamma { shape: 3.0, scale: 0.45 }),
        n: 500,
        n_background: 10_000,
        reps,
        methods: vec![
            MethodSpec::new(EstimatorKind::Semiparametric).with_threshold(ThresholdRule::Fixed(12.0)),
            MethodSpec::new(EstimatorKind::WinsorizedThreshold)
                .with_threshold(ThresholdRule::Oracle(vec![50.0, 200.0, 400.0])),
            MethodSpec::new(EstimatorKind::SampleMean),
        ],
        master_seed: 77,
        redraw_background: true,
        true_mean: None,
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let sc = config(16).load(Path::new(".")).unwrap();
    let a = with_threads(Some(1), || run_scenario(&sc).unwrap());
    let b = with_threads(Some(3), || run_scenario(&sc).unwrap());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn one_point_sweep_equals_scenario_row() {
    let sc = config(12).load(Path::new(".")).unwrap();
    let row = run_scenario(&sc).unwrap().rows[0].stats.clone();
    let sweep = threshold_sweep(&sc, &[12.0]).unwrap();
    let p = &sweep.curves[0].points[0];
    assert_eq!(p.mse, row.mse);
    assert_eq!(p.variance, row.variance);
    assert_eq!(p.bias2, row.bias2);
}

#[test]
fn mse_decomposes() {
    let res = run_scenario(&config(20).load(Path::new(".")).unwrap()).unwrap();
    for r in &res.rows {
        let s = &r.stats;
        assert!((s.variance + s.bias2 - s.mse).abs() <= 1e-12 * s.mse, "{}", r.method);
    }
}

fn population(dir: &Path, name: &str, values: impl Iterator<Item = f64>) -> std::path::PathBuf {
    let p = dir.join(name);
    let mut f = std::fs::File::create(&p).unwrap();
    writeln!(f, "value").unwrap();
    for v in values {
        writeln!(f, "{v}").unwrap();
    }
    p
}

#[test]
fn resample_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let xp = population(dir.path(), "x.txt", (1..=400).map(|i| (i as f64).powf(0.8)));
    let res = resample_experiment(
        &xp,
        &xp,
        100,
        300,
        2,
        vec![MethodSpec::new(EstimatorKind::SampleMean)],
        1,
    )
    .unwrap();
    assert_eq!(res.rows[0].stats.reps_ok, 2);
}

#[test]
fn same_population_gives_no_detectable_bias() {
    let dir = tempfile::tempdir().unwrap();
    // deterministic heavy-ish population: quantiles of a Pareto(0.3)
    let m = 20_000;
    let xp = population(
        dir.path(),
        "pop.txt",
        (0..m).map(|i| (1.0 - (i as f64 + 0.5) / m as f64).powf(-0.3)),
    );
    let res = resample_experiment(
        &xp,
        &xp,
        400,
        4000,
        200,
        vec![MethodSpec::new(EstimatorKind::Semiparametric).with_threshold(ThresholdRule::Fixed(3.0))],
        5,
    )
    .unwrap();
    let s = &res.rows[0].stats;
    assert!(s.mean_error.abs() < 3.0 * s.se_mean_error, "{s:?}");
}
