//! Mean estimators: the tilted-tail estimator with its plug-in asymptotic
//! variance, and the baselines it is compared against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evt::gpd_fit_ml;
use crate::sample::Sample;
use crate::tilt::{build_tail_model, FitDiagnostics, FitMethod, TiltedTailModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Semiparametric,
    WinsorizedThreshold,
    WinsorizedK,
    ParetoTail,
    SampleMean,
}

/// A point estimate of the mean, plus an asymptotic variance for the
/// semiparametric estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mu_hat: f64,
    /// Estimated asymptotic variance of `mu_hat` (already divided by `n`).
    pub var_hat: Option<f64>,
    pub method: EstimatorKind,
    pub threshold: Option<f64>,
    pub kappa: Option<f64>,
    pub diagnostics: Option<FitDiagnostics>,
}

impl MeanEstimate {
    fn point(mu_hat: f64, method: EstimatorKind, threshold: Option<f64>) -> Self {
        Self {
            mu_hat,
            var_hat: None,
            method,
            threshold,
            kappa: None,
            diagnostics: None,
        }
    }

    /// `mu_hat -/+ z sqrt(var_hat)`. Relies on asymptotic normality; there is
    /// no finite-sample correction.
    pub fn asymptotic_interval(&self, z: f64) -> Option<(f64, f64)> {
        self.var_hat.map(|v| {
            let h = z * v.sqrt();
            (self.mu_hat - h, self.mu_hat + h)
        })
    }
}

fn require_nonempty(x: &Sample) -> Result<()> {
    if x.is_empty() {
        Err(Error::Argument("empty sample".into()))
    } else {
        Ok(())
    }
}

pub fn sample_mean(x: &Sample) -> Result<MeanEstimate> {
    require_nonempty(x)?;
    Ok(MeanEstimate::point(
        x.mean().expect("nonempty"),
        EstimatorKind::SampleMean,
        None,
    ))
}

/// `(1/n) sum min(t, X_i)`.
pub fn winsorized_mean_threshold(x: &Sample, t: f64) -> Result<MeanEstimate> {
    require_nonempty(x)?;
    let body: f64 = x.body(t).iter().sum();
    let capped = x.count_above(t) as f64 * t;
    Ok(MeanEstimate::point(
        (body + capped) / x.len() as f64,
        EstimatorKind::WinsorizedThreshold,
        Some(t),
    ))
}

/// Caps the `k` largest observations at the `(k+1)`-th largest value.
pub fn winsorized_mean_k(x: &Sample, k: usize) -> Result<MeanEstimate> {
    let n = x.len();
    if k == 0 || k >= n {
        return Err(Error::Argument(format!(
            "winsorizing k = {k} needs 1 <= k <= n - 1 = {}",
            n.saturating_sub(1)
        )));
    }
    let v = x.values();
    let cap = v[n - k - 1];
    let sum: f64 = v[..n - k].iter().sum::<f64>() + k as f64 * cap;
    Ok(MeanEstimate::point(
        sum / n as f64,
        EstimatorKind::WinsorizedK,
        Some(cap),
    ))
}

/// Empirical body plus a generalized Pareto tail fitted by maximum likelihood
/// to the excesses above `t`.
pub fn pareto_tail_mean(x: &Sample, t: f64) -> Result<MeanEstimate> {
    require_nonempty(x)?;
    let fit = gpd_fit_ml(&x.excesses(t))?;
    if fit.gamma_hat >= 1.0 {
        return Err(Error::InfiniteMean(fit.gamma_hat));
    }
    let n = x.len() as f64;
    let body: f64 = x.body(t).iter().sum();
    let p2 = x.count_above(t) as f64 / n;
    let tail_mean = t + fit.sigma_hat / (1.0 - fit.gamma_hat);
    Ok(MeanEstimate::point(
        body / n + p2 * tail_mean,
        EstimatorKind::ParetoTail,
        Some(t),
    ))
}

/// Plug-in moments entering the asymptotic variance of the semiparametric
/// estimator. Body moments are empirical over `X_i <= t`; tail moments are
/// taken under the fitted tail law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PluginMoments {
    pub n: usize,
    /// `F_hat(t)`, the share of the sample at or below the threshold.
    pub f_t: f64,
    pub body_mean: f64,
    pub body_var: f64,
    pub tail_mean: f64,
    pub tail_var: f64,
    pub tail_var_t: f64,
    pub tail_cov_tx: f64,
}

impl PluginMoments {
    /// Moments from a body sample and a weighted tail with an arbitrary
    /// per-point statistic. `tail_values`, `tail_stats` and `weights` align.
    pub fn from_parts(
        n: usize,
        body: &[f64],
        tail_values: &[f64],
        tail_stats: &[f64],
        weights: &[f64],
    ) -> Result<Self> {
        if n == 0 || body.len() > n {
            return Err(Error::Argument(format!("inconsistent sample size {n}")));
        }
        if body.len() == 1 {
            return Err(Error::Degeneracy("body variance needs at least 2 observations".into()));
        }
        if tail_values.len() != weights.len() || tail_stats.len() != weights.len() {
            return Err(Error::Argument("tail arrays differ in length".into()));
        }
        let (body_mean, body_var) = if body.is_empty() {
            (0.0, 0.0)
        } else {
            let m = body.iter().sum::<f64>() / body.len() as f64;
            let v = body.iter().map(|b| (b - m) * (b - m)).sum::<f64>() / body.len() as f64;
            (m, v)
        };
        let wsum: f64 = weights.iter().sum();
        let wmean = |f: &dyn Fn(usize) -> f64| {
            (0..weights.len()).map(|i| weights[i] * f(i)).sum::<f64>() / wsum
        };
        let (tail_mean, tail_var, tail_var_t, tail_cov_tx) = if weights.is_empty() {
            (0.0, 0.0, 0.0, 0.0)
        } else {
            let mx = wmean(&|i| tail_values[i]);
            let mt = wmean(&|i| tail_stats[i]);
            (
                mx,
                wmean(&|i| (tail_values[i] - mx).powi(2)),
                wmean(&|i| (tail_stats[i] - mt).powi(2)),
                wmean(&|i| (tail_values[i] - mx) * (tail_stats[i] - mt)),
            )
        };
        Ok(Self {
            n,
            f_t: body.len() as f64 / n as f64,
            body_mean,
            body_var,
            tail_mean,
            tail_var,
            tail_var_t,
            tail_cov_tx,
        })
    }

    pub fn from_model(x: &Sample, model: &TiltedTailModel) -> Result<Self> {
        let t = model.threshold();
        let tail_values: Vec<f64> = model.bg_excesses().values().iter().map(|e| t + e).collect();
        let tail_stats = model.stat().map(model.bg_excesses())?;
        Self::from_parts(x.len(), x.body(t), &tail_values, &tail_stats, model.weights())
    }

    /// `n` times the asymptotic variance of the semiparametric estimator.
    pub fn scaled_asymptotic_variance(&self) -> Result<f64> {
        let p2 = 1.0 - self.f_t;
        let tail_term = if p2 > 0.0 {
            if !(self.tail_var_t > 0.0) {
                return Err(Error::Degeneracy("Var(T | X > t) is zero".into()));
            }
            p2 * self.tail_cov_tx.powi(2) / self.tail_var_t
        } else {
            0.0
        };
        let gap = self.tail_mean - self.body_mean;
        Ok(self.f_t * self.body_var + tail_term + self.f_t * p2 * gap * gap)
    }

    /// `n` times the variance of the sample mean under the same plug-in law.
    pub fn scaled_sample_mean_variance(&self) -> f64 {
        let p2 = 1.0 - self.f_t;
        let gap = self.tail_mean - self.body_mean;
        self.f_t * self.body_var + p2 * self.tail_var + self.f_t * p2 * gap * gap
    }

    /// `corr^2(T, X | X > t)` under the tail law.
    pub fn tail_corr2(&self) -> f64 {
        self.tail_cov_tx.powi(2) / (self.tail_var_t * self.tail_var)
    }
}

/// Plug-in asymptotic variance of the semiparametric mean estimator.
pub fn semiparametric_variance(x: &Sample, model: &TiltedTailModel) -> Result<f64> {
    require_nonempty(x)?;
    let m = PluginMoments::from_model(x, model)?;
    Ok(m.scaled_asymptotic_variance()?.max(0.0) / x.len() as f64)
}

/// Semiparametric estimate together with the fitted tail model.
pub fn semiparametric_estimate(
    x: &Sample,
    bg: &Sample,
    t: f64,
    kappa: f64,
    method: FitMethod,
) -> Result<(MeanEstimate, TiltedTailModel)> {
    let model = build_tail_model(x, bg, t, kappa, method)?;
    let n = x.len() as f64;
    let body: f64 = x.body(t).iter().sum();
    let mu_hat = body / n + model.p2_hat() * model.tail_mean();
    let var_hat = semiparametric_variance(x, &model)?;
    let est = MeanEstimate {
        mu_hat,
        var_hat: Some(var_hat),
        method: EstimatorKind::Semiparametric,
        threshold: Some(t),
        kappa: Some(kappa),
        diagnostics: Some(model.diagnostics()),
    };
    Ok((est, model))
}

/// `(1/n) sum_{X_i <= t} X_i + p2_hat * sum_i w_i Y_i` over the background
/// tail values `Y_i > t` with tilt weights `w_i`.
pub fn semiparametric_mean(
    x: &Sample,
    bg: &Sample,
    t: f64,
    kappa: f64,
    method: FitMethod,
) -> Result<MeanEstimate> {
    semiparametric_estimate(x, bg, t, kappa, method).map(|(e, _)| e)
}
