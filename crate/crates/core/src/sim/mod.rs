//! Monte Carlo harness: scenarios, threshold sweeps, oracle thresholds and
//! the resample-from-population protocol.

pub mod config;
pub mod engine;
pub mod report;

pub use config::{Drawer, MethodSpec, Scenario, ScenarioConfig, Source};
pub use engine::{
    aggregate, evaluate_method, oracle_threshold, resample_experiment, run_scenario,
    threshold_sweep, Outcome, RowStats, ScenarioResult, ScenarioRow, SweepCurve, SweepResult,
};
pub use report::{scenario_csv_string, sweep_csv_string, write_scenario_csv, write_sweep_csv};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "TAILTILT_THREADS";

/// Runs `f` on a dedicated pool of `threads` workers (or rayon's default
/// when `None`). Results never depend on the thread count.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

/// Parses `TAILTILT_THREADS`; unset, empty or unparsable means no cap.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok()
}
