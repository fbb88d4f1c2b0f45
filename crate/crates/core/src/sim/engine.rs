//! Replication loop and aggregation.
//!
//! Every replication draws its data once; all methods, and every grid point
//! of a sweep or oracle search, are evaluated on that same draw. Replications
//! run in parallel into pre-assigned slots and are folded sequentially, so the
//! output does not depend on the number of worker threads.

use std::cell::OnceCell;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{MethodSpec, Scenario, ScenarioConfig, Source};
use crate::distributions::SeedSpec;
use crate::error::{Error, Result};
use crate::estimators::{
    pareto_tail_mean, sample_mean, semiparametric_estimate, winsorized_mean_k,
    winsorized_mean_threshold, EstimatorKind, MeanEstimate,
};
use crate::evt::{
    background_tail_index, resolve_kappa, resolve_threshold, sigma_over_gamma, KappaRule,
    ThresholdRule,
};
use crate::sample::Sample;
use crate::tilt::FitMethod;

const ROLE_X: u64 = 0;
const ROLE_BG: u64 = 1;
/// Stream used for the single background draw when it is not redrawn.
const FIXED_BG_STREAM: u64 = u64::MAX;

/// What one method produced on one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub mu_hat: f64,
    pub threshold: Option<f64>,
    pub kappa: Option<f64>,
    pub eta_hat: Option<f64>,
    pub var_hat: Option<f64>,
}

impl From<MeanEstimate> for Outcome {
    fn from(e: MeanEstimate) -> Self {
        Self {
            mu_hat: e.mu_hat,
            threshold: e.threshold,
            kappa: e.kappa,
            eta_hat: None,
            var_hat: e.var_hat,
        }
    }
}

/// Replicate summary for one method at one threshold policy.
///
/// `variance` uses the `1/R` denominator so that `mse = variance + bias2`
/// holds as an identity over the successful replicates. Statistics are NaN
/// when every replication failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowStats {
    pub reps_ok: usize,
    pub failures: usize,
    pub mean_error: f64,
    pub se_mean_error: f64,
    pub bias2: f64,
    pub se_bias2: f64,
    pub variance: f64,
    pub se_variance: f64,
    pub mse: f64,
    pub se_mse: f64,
    /// Mean threshold actually used.
    pub threshold: Option<f64>,
    pub mean_kappa: Option<f64>,
    /// Mean of the plug-in variance estimate.
    pub mean_var_hat: Option<f64>,
    pub mean_eta: Option<f64>,
    pub se_eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `sd / sqrt(R)` with the unbiased sample variance.
fn se_of_mean(v: &[f64]) -> f64 {
    let r = v.len() as f64;
    if v.len() < 2 {
        return f64::NAN;
    }
    let m = mean(v);
    let ss: f64 = v.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (r - 1.0) / r).sqrt()
}

/// Jackknife standard error of `stat(mean of v)` using the leave-one-out
/// means, which are computable in O(R).
pub fn jackknife_se_of_mean_fn(v: &[f64], stat: impl Fn(f64) -> f64) -> f64 {
    let r = v.len();
    if r < 2 {
        return f64::NAN;
    }
    let total: f64 = v.iter().sum();
    let loo: Vec<f64> = v
        .iter()
        .map(|x| stat((total - x) / (r - 1) as f64))
        .collect();
    let m = mean(&loo);
    let ss: f64 = loo.iter().map(|x| (x - m).powi(2)).sum();
    ((r - 1) as f64 / r as f64 * ss).sqrt()
}

fn mean_opt(it: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = it.flatten().collect();
    (!v.is_empty()).then(|| mean(&v))
}

/// Folds one method's replicates into a row.
pub fn aggregate<'a>(
    outcomes: impl Iterator<Item = &'a std::result::Result<Outcome, Error>>,
    true_mean: f64,
) -> RowStats {
    let mut ok: Vec<&Outcome> = Vec::new();
    let mut failures = 0;
    let mut first_failure = None;
    for o in outcomes {
        match o {
            Ok(o) => ok.push(o),
            Err(e) => {
                failures += 1;
                first_failure.get_or_insert_with(|| e.to_string());
            }
        }
    }
    let errors: Vec<f64> = ok.iter().map(|o| o.mu_hat - true_mean).collect();
    let r = errors.len();
    let (mean_error, variance, se_variance, mse, sq) = if r == 0 {
        let nan = f64::NAN;
        (nan, nan, nan, nan, Vec::new())
    } else {
        let me = mean(&errors);
        let dev2: Vec<f64> = errors.iter().map(|e| (e - me).powi(2)).collect();
        let var = mean(&dev2);
        let m4 = mean(&dev2.iter().map(|d| d * d).collect::<Vec<_>>());
        let se_var = ((m4 - var * var).max(0.0) / r as f64).sqrt();
        let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
        (me, var, se_var, mean(&sq), sq)
    };
    let etas: Vec<f64> = ok.iter().filter_map(|o| o.eta_hat).collect();
    RowStats {
        reps_ok: r,
        failures,
        mean_error,
        se_mean_error: se_of_mean(&errors),
        bias2: mean_error * mean_error,
        se_bias2: jackknife_se_of_mean_fn(&errors, |m| m * m),
        variance,
        se_variance,
        mse,
        se_mse: jackknife_se_of_mean_fn(&sq, |m| m),
        threshold: mean_opt(ok.iter().map(|o| o.threshold)),
        mean_kappa: mean_opt(ok.iter().map(|o| o.kappa)),
        mean_var_hat: mean_opt(ok.iter().map(|o| o.var_hat)),
        mean_eta: (!etas.is_empty()).then(|| mean(&etas)),
        se_eta: (etas.len() >= 2).then(|| se_of_mean(&etas)),
        first_failure,
    }
}

/// Per-replication memo of the background tail index used by the
/// `sigma_over_gamma` bandwidth rule.
struct RepCache<'a> {
    bg: &'a Sample,
    bg_gamma: OnceCell<Result<f64>>,
}

impl<'a> RepCache<'a> {
    fn new(bg: &'a Sample) -> Self {
        Self {
            bg,
            bg_gamma: OnceCell::new(),
        }
    }

    fn kappa(&self, rule: &KappaRule, t: f64) -> Result<f64> {
        match rule {
            KappaRule::SigmaOverGamma => {
                let gamma = self
                    .bg_gamma
                    .get_or_init(|| background_tail_index(self.bg))
                    .clone()?;
                sigma_over_gamma(self.bg, t, gamma)
            }
            other => resolve_kappa(other, self.bg, t),
        }
    }
}

/// Runs one method on one data set. Oracle rules must already have been
/// replaced by a concrete threshold.
pub fn evaluate_method(m: &MethodSpec, x: &Sample, bg: &Sample) -> Result<Outcome> {
    evaluate_cached(m, x, &RepCache::new(bg))
}

fn evaluate_cached(m: &MethodSpec, x: &Sample, cache: &RepCache<'_>) -> Result<Outcome> {
    let bg = cache.bg;
    let threshold = || -> Result<f64> {
        let rule = m
            .threshold
            .as_ref()
            .ok_or_else(|| Error::Argument("method needs a threshold rule".into()))?;
        resolve_threshold(rule, x, bg)
    };
    let out = match m.estimator {
        EstimatorKind::SampleMean => sample_mean(x)?.into(),
        EstimatorKind::WinsorizedK => winsorized_mean_k(x, m.k.unwrap_or(1))?.into(),
        EstimatorKind::WinsorizedThreshold => winsorized_mean_threshold(x, threshold()?)?.into(),
        EstimatorKind::ParetoTail => pareto_tail_mean(x, threshold()?)?.into(),
        EstimatorKind::Semiparametric => {
            let t = threshold()?;
            let kappa = cache.kappa(m.kappa.as_ref().unwrap_or(&KappaRule::SigmaOverGamma), t)?;
            let (est, model) =
                semiparametric_estimate(x, bg, t, kappa, m.fit.unwrap_or(FitMethod::Direct))?;
            Outcome {
                eta_hat: Some(model.eta_hat()),
                ..est.into()
            }
        }
    };
    if !out.mu_hat.is_finite() {
        return Err(Error::Estimation(format!("non-finite estimate {}", out.mu_hat)));
    }
    Ok(out)
}

/// A method with a concrete threshold policy, tagged with the configured
/// method it came from.
#[derive(Debug, Clone)]
struct Unit {
    method: usize,
    spec: MethodSpec,
    grid_t: Option<f64>,
}

fn with_fixed(m: &MethodSpec, t: f64) -> MethodSpec {
    MethodSpec {
        threshold: Some(ThresholdRule::Fixed(t)),
        ..m.clone()
    }
}

/// Draws every replication once and evaluates all units on it. Returns
/// `[unit][rep]`.
fn run_units(sc: &Scenario, units: &[Unit]) -> Result<Vec<Vec<std::result::Result<Outcome, Error>>>> {
    let cfg = &sc.config;
    let fixed_bg = if cfg.redraw_background {
        None
    } else {
        let seed = SeedSpec::new(cfg.master_seed, FIXED_BG_STREAM).with_role(ROLE_BG);
        Some(sc.background.draw(cfg.n_background, seed)?)
    };
    let per_rep: Vec<Result<Vec<std::result::Result<Outcome, Error>>>> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let seed = SeedSpec::new(cfg.master_seed, r as u64);
            let x = sc.x.draw(cfg.n, seed.with_role(ROLE_X))?;
            let bg = match &fixed_bg {
                Some(b) => b.clone(),
                None => sc.background.draw(cfg.n_background, seed.with_role(ROLE_BG))?,
            };
            let cache = RepCache::new(&bg);
            Ok(units
                .iter()
                .map(|u| evaluate_cached(&u.spec, &x, &cache))
                .collect())
        })
        .collect();
    let mut table: Vec<Vec<_>> = vec![Vec::with_capacity(cfg.reps); units.len()];
    for rep in per_rep {
        for (slot, o) in table.iter_mut().zip(rep?) {
            slot.push(o);
        }
    }
    Ok(table)
}

/// One method's curve over a threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub method: String,
    pub points: Vec<RowStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub true_mean: f64,
    pub curves: Vec<SweepCurve>,
}

impl SweepResult {
    pub fn curve(&self, method: &str) -> Option<&SweepCurve> {
        self.curves.iter().find(|c| c.method == method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub method: String,
    pub estimator: EstimatorKind,
    pub threshold_rule: Option<String>,
    #[serde(flatten)]
    pub stats: RowStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub true_mean: f64,
    pub n: usize,
    pub n_background: usize,
    pub reps: usize,
    pub master_seed: u64,
    pub rows: Vec<ScenarioRow>,
    /// Full MSE curves behind each oracle row.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oracle_curves: Vec<(String, SweepResult)>,
}

impl ScenarioResult {
    pub fn row(&self, method: &str) -> Option<&ScenarioRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

fn rule_tag(rule: &Option<ThresholdRule>) -> Option<String> {
    rule.as_ref().map(|r| match r {
        ThresholdRule::Oracle(_) => "oracle".to_string(),
        other => other.to_string(),
    })
}

fn argmin_mse(points: &[RowStats], grid: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        if p.mse.is_nan() {
            continue;
        }
        // strict comparison keeps the smallest t on ties
        if best.map_or(true, |(j, _)| p.mse < points[j].mse) {
            best = Some((i, grid[i]));
        }
    }
    best
}

/// Runs every configured method over `reps` replications.
///
/// Oracle rules are evaluated at every grid point on the same replicates and
/// the row reports the point with the smallest measured MSE.
pub fn run_scenario(sc: &Scenario) -> Result<ScenarioResult> {
    let cfg = &sc.config;
    let mut units = Vec::new();
    for (i, m) in cfg.methods.iter().enumerate() {
        match &m.threshold {
            Some(ThresholdRule::Oracle(grid)) => units.extend(grid.iter().map(|&t| Unit {
                method: i,
                spec: with_fixed(m, t),
                grid_t: Some(t),
            })),
            _ => units.push(Unit {
                method: i,
                spec: m.clone(),
                grid_t: None,
            }),
        }
    }
    let table = run_units(sc, &units)?;
    let mut rows = Vec::new();
    let mut oracle_curves = Vec::new();
    for (i, m) in cfg.methods.iter().enumerate() {
        let label = m.display_label();
        let idx: Vec<usize> = (0..units.len()).filter(|&u| units[u].method == i).collect();
        let stats = if let Some(ThresholdRule::Oracle(grid)) = &m.threshold {
            let points: Vec<RowStats> = idx
                .iter()
                .map(|&u| aggregate(table[u].iter(), sc.true_mean))
                .collect();
            debug_assert!(idx.iter().zip(grid).all(|(&u, &t)| units[u].grid_t == Some(t)));
            let chosen = match argmin_mse(&points, grid) {
                Some((j, _)) => points[j].clone(),
                None => points[0].clone(),
            };
            oracle_curves.push((
                label.clone(),
                SweepResult {
                    grid: grid.clone(),
                    true_mean: sc.true_mean,
                    curves: vec![SweepCurve {
                        method: label.clone(),
                        points,
                    }],
                },
            ));
            chosen
        } else {
            aggregate(table[idx[0]].iter(), sc.true_mean)
        };
        rows.push(ScenarioRow {
            method: label,
            estimator: m.estimator,
            threshold_rule: rule_tag(&m.threshold),
            stats,
        });
    }
    Ok(ScenarioResult {
        true_mean: sc.true_mean,
        n: cfg.n,
        n_background: cfg.n_background,
        reps: cfg.reps,
        master_seed: cfg.master_seed,
        rows,
        oracle_curves,
    })
}

/// Evaluates each threshold-based method at every grid point with common
/// random numbers. Methods without a threshold give flat curves.
pub fn threshold_sweep(sc: &Scenario, grid: &[f64]) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::Argument("empty threshold grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Argument("threshold grid must be finite and sorted".into()));
    }
    let mut units = Vec::new();
    for (i, m) in sc.config.methods.iter().enumerate() {
        if m.uses_threshold() {
            units.extend(grid.iter().map(|&t| Unit {
                method: i,
                spec: with_fixed(m, t),
                grid_t: Some(t),
            }));
        } else {
            units.push(Unit {
                method: i,
                spec: m.clone(),
                grid_t: None,
            });
        }
    }
    let table = run_units(sc, &units)?;
    let curves = sc
        .config
        .methods
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let idx: Vec<usize> = (0..units.len()).filter(|&u| units[u].method == i).collect();
            let points = if m.uses_threshold() {
                idx.iter()
                    .map(|&u| aggregate(table[u].iter(), sc.true_mean))
                    .collect()
            } else {
                vec![aggregate(table[idx[0]].iter(), sc.true_mean); grid.len()]
            };
            SweepCurve {
                method: sweep_label(m),
                points,
            }
        })
        .collect();
    Ok(SweepResult {
        grid: grid.to_vec(),
        true_mean: sc.true_mean,
        curves,
    })
}

/// Curve label: the method label without its threshold tag, since the
/// threshold varies along the curve.
fn sweep_label(m: &MethodSpec) -> String {
    if m.label.is_some() {
        return m.display_label();
    }
    MethodSpec {
        threshold: None,
        ..m.clone()
    }
    .display_label()
}

/// Grid point with the smallest measured MSE for `method`; ties go to the
/// smallest threshold.
pub fn oracle_threshold(sweep: &SweepResult, method: &str) -> Result<f64> {
    let curve = sweep
        .curve(method)
        .ok_or_else(|| Error::Argument(format!("method {method:?} not in sweep")))?;
    argmin_mse(&curve.points, &sweep.grid)
        .map(|(_, t)| t)
        .ok_or_else(|| Error::Estimation(format!("every grid point failed for {method:?}")))
}

/// Resampling protocol for finite populations: each replication draws `n`
/// values from `x_pop` and `n_background` from `bg_pop`, with replacement,
/// and the target is the mean of `x_pop`.
pub fn resample_experiment(
    x_pop: &Path,
    bg_pop: &Path,
    n: usize,
    n_background: usize,
    reps: usize,
    methods: Vec<MethodSpec>,
    master_seed: u64,
) -> Result<ScenarioResult> {
    let cfg = ScenarioConfig {
        x: Source::Population(x_pop.to_path_buf()),
        background: Source::Population(bg_pop.to_path_buf()),
        n,
        n_background,
        reps,
        methods,
        master_seed,
        redraw_background: true,
        true_mean: None,
    };
    let sc = cfg.load(Path::new("."))?;
    run_scenario(&sc)
}
