//! Exponential tilts of an empirical background tail.
//!
//! The tail law of the sample of interest above a threshold `t` is modelled as
//! `dG(x) = exp(eta T(x) - psi(eta)) dG0(x)`, where `G0` is the empirical law
//! of the background excesses and `T(x) = x / (kappa + x)`. Because `T` is
//! bounded in `[0, 1)`, the log-partition `psi` is finite for every real `eta`
//! and a handful of very large observations cannot dominate the fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evt::K_MIN;
use crate::roots::{newton_bisect, RootOptions};
use crate::sample::Sample;

/// Moment-matching tolerance of the direct fitter.
pub const MOMENT_TOL: f64 = 1e-10;
/// Log-likelihood change at which the logistic fitter stops.
pub const LOGISTIC_TOL: f64 = 1e-10;

/// `T(x) = x / (kappa + x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientStatistic {
    kappa: f64,
}

impl SufficientStatistic {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa > 0.0 && kappa.is_finite() {
            Ok(Self { kappa })
        } else {
            Err(Error::Domain(format!("bandwidth kappa = {kappa} must be positive")))
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if x >= 0.0 {
            Ok(self.apply(x))
        } else {
            Err(Error::Domain(format!("sufficient statistic needs x >= 0 (got {x})")))
        }
    }

    #[inline]
    fn apply(&self, x: f64) -> f64 {
        x / (self.kappa + x)
    }

    /// `T` applied to every (nonnegative) excess.
    pub fn map(&self, excesses: &Sample) -> Result<Vec<f64>> {
        match excesses.min() {
            Some(m) if m < 0.0 => Err(Error::Domain(format!("negative excess {m}"))),
            _ => Ok(excesses.values().iter().map(|&x| self.apply(x)).collect()),
        }
    }
}

pub fn suff_stat(x: f64, kappa: f64) -> Result<f64> {
    SufficientStatistic::new(kappa)?.eval(x)
}

/// Empirical carrier: statistic values with equal base weight.
#[derive(Debug, Clone)]
pub struct Carrier {
    t_values: Vec<f64>,
}

/// Mean and variance of `T` under a tilt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltMoments {
    pub mean: f64,
    pub var: f64,
}

impl Carrier {
    pub fn new(t_values: Vec<f64>) -> Result<Self> {
        if t_values.is_empty() {
            return Err(Error::Argument("empty carrier".into()));
        }
        Ok(Self { t_values })
    }

    pub fn t_values(&self) -> &[f64] {
        &self.t_values
    }

    fn max_exponent(&self, eta: f64) -> f64 {
        self.t_values
            .iter()
            .map(|&t| eta * t)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `psi(eta) = log mean exp(eta T_i)`, by log-sum-exp.
    pub fn log_partition(&self, eta: f64) -> f64 {
        let a = self.max_exponent(eta);
        let s: f64 = self.t_values.iter().map(|&t| (eta * t - a).exp()).sum();
        a + (s / self.t_values.len() as f64).ln()
    }

    /// Normalized tilt weights `exp(eta T_i) / sum_j exp(eta T_j)`.
    pub fn weights(&self, eta: f64) -> Vec<f64> {
        let a = self.max_exponent(eta);
        let mut w: Vec<f64> = self.t_values.iter().map(|&t| (eta * t - a).exp()).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        w
    }

    /// `E_eta[T]` and `Var_eta[T]`; the variance is `psi''(eta)`.
    pub fn moments(&self, eta: f64) -> TiltMoments {
        let a = self.max_exponent(eta);
        let (mut s, mut s1) = (0.0, 0.0);
        for &t in &self.t_values {
            let e = (eta * t - a).exp();
            s += e;
            s1 += e * t;
        }
        let mean = s1 / s;
        let mut s2 = 0.0;
        for &t in &self.t_values {
            let d = t - mean;
            s2 += (eta * t - a).exp() * d * d;
        }
        TiltMoments { mean, var: s2 / s }
    }

    /// Smallest and largest carrier value.
    pub fn range(&self) -> (f64, f64) {
        self.t_values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)))
    }
}

/// Log-partition of the tilt over `excesses` with bandwidth `kappa`.
pub fn log_partition(eta: f64, excesses: &Sample, kappa: f64) -> Result<f64> {
    let stat = SufficientStatistic::new(kappa)?;
    Ok(Carrier::new(stat.map(excesses)?)?.log_partition(eta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    Direct,
    Logistic,
    Fixed,
}

/// How the tilt parameter is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FitMethod {
    /// Solve the moment condition against the empirical carrier.
    #[default]
    Direct,
    /// Slope of an intercept + `T` logistic regression of label on sample.
    Logistic,
    /// Use the given tilt without fitting.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// `mean_x T - E_eta[T]` at the returned tilt.
    pub moment_residual: f64,
    pub iterations: usize,
    pub method: FitKind,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Solves `mean_x T = E_eta[T]` over the background carrier.
pub fn fit_tilt_direct(
    x_excesses: &Sample,
    bg_excesses: &Sample,
    kappa: f64,
) -> Result<(f64, FitDiagnostics)> {
    let stat = SufficientStatistic::new(kappa)?;
    if x_excesses.is_empty() {
        return Err(Error::Estimation("no excesses in the sample of interest".into()));
    }
    let carrier = Carrier::new(stat.map(bg_excesses)?)?;
    let target = mean(&stat.map(x_excesses)?);
    solve_moment_condition(&carrier, target)
}

/// Moment matching against an arbitrary carrier.
pub fn solve_moment_condition(carrier: &Carrier, target: f64) -> Result<(f64, FitDiagnostics)> {
    let (t_min, t_max) = carrier.range();
    if t_min == t_max {
        return Err(Error::DegenerateCarrier(t_min));
    }
    if !(target > t_min && target < t_max) {
        return Err(Error::NoSolution {
            target,
            min: t_min,
            max: t_max,
        });
    }
    let f = |eta: f64| {
        let m = carrier.moments(eta);
        (m.mean - target, m.var)
    };
    // E_eta[T] increases in eta; grow a bracket around zero.
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut grow = 0;
    while f(lo).0 > 0.0 || f(hi).0 < 0.0 {
        if f(lo).0 > 0.0 {
            lo *= 2.0;
        }
        if f(hi).0 < 0.0 {
            hi *= 2.0;
        }
        grow += 1;
        if grow > 80 {
            return Err(Error::Solver {
                message: "could not bracket the tilt".into(),
                lo,
                hi,
                iterations: grow,
            });
        }
    }
    let root = newton_bisect(
        f,
        lo,
        hi,
        RootOptions {
            ftol: 1e-14,
            xtol: 1e-15,
            max_iter: 400,
        },
    )?;
    let residual = target - carrier.moments(root.x).mean;
    if residual.abs() >= MOMENT_TOL {
        return Err(Error::Solver {
            message: format!("moment residual {residual:e} above tolerance"),
            lo,
            hi,
            iterations: root.iterations,
        });
    }
    Ok((
        root.x,
        FitDiagnostics {
            moment_residual: residual,
            iterations: root.iterations + grow,
            method: FitKind::Direct,
        },
    ))
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Two-class logistic regression on one feature, fitted by IRLS.
/// Returns `(intercept, slope, iterations)`.
pub fn logistic_irls(ones: &[f64], zeros: &[f64]) -> Result<(f64, f64, usize)> {
    if ones.is_empty() || zeros.is_empty() {
        return Err(Error::Argument("logistic fit needs both classes".into()));
    }
    let range = |v: &[f64]| {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)))
    };
    let (min1, max1) = range(ones);
    let (min0, max0) = range(zeros);
    if max0 <= min1 || max1 <= min0 {
        return Err(Error::Separation(format!(
            "labels separate at T in [{min0}, {max0}] vs [{min1}, {max1}]"
        )));
    }

    let loglik = |b0: f64, b1: f64| {
        let l1: f64 = ones.iter().map(|&t| -softplus(-(b0 + b1 * t))).sum();
        let l0: f64 = zeros.iter().map(|&t| -softplus(b0 + b1 * t)).sum();
        l1 + l0
    };
    let n1 = ones.len() as f64;
    let n0 = zeros.len() as f64;
    let (mut b0, mut b1) = ((n1 / n0).ln(), 0.0);
    let mut ll = loglik(b0, b1);
    for it in 1..=200 {
        // gradient and (negative) Hessian
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut acc = |t: f64, y: f64| {
            let p = sigmoid(b0 + b1 * t);
            let w = p * (1.0 - p);
            g0 += y - p;
            g1 += (y - p) * t;
            h00 += w;
            h01 += w * t;
            h11 += w * t * t;
        };
        ones.iter().for_each(|&t| acc(t, 1.0));
        zeros.iter().for_each(|&t| acc(t, 0.0));
        let det = h00 * h11 - h01 * h01;
        if !(det > 0.0) {
            return Err(Error::Separation(format!("singular information matrix (det {det:e})")));
        }
        let d0 = (h11 * g0 - h01 * g1) / det;
        let d1 = (h00 * g1 - h01 * g0) / det;
        let mut step = 1.0;
        let (mut nb0, mut nb1, mut nll);
        loop {
            nb0 = b0 + step * d0;
            nb1 = b1 + step * d1;
            nll = loglik(nb0, nb1);
            if nll >= ll - 1e-12 || step < 1e-8 {
                break;
            }
            step *= 0.5;
        }
        let change = (nll - ll).abs();
        b0 = nb0;
        b1 = nb1;
        ll = nll;
        if change < LOGISTIC_TOL {
            return Ok((b0, b1, it));
        }
    }
    Err(Error::Solver {
        message: "logistic IRLS did not converge".into(),
        lo: b1,
        hi: b1,
        iterations: 200,
    })
}

/// Tilt estimated as the slope of a logistic regression that separates the
/// pooled excesses by origin (1 = sample of interest, 0 = background).
pub fn fit_tilt_logistic(
    x_excesses: &Sample,
    bg_excesses: &Sample,
    kappa: f64,
) -> Result<(f64, FitDiagnostics)> {
    let stat = SufficientStatistic::new(kappa)?;
    let tx = stat.map(x_excesses)?;
    let tb = stat.map(bg_excesses)?;
    if tx.is_empty() || tb.is_empty() {
        return Err(Error::Estimation("logistic tilt needs excesses in both samples".into()));
    }
    if tx.iter().chain(&tb).all(|&t| t == tx[0]) {
        return Err(Error::DegenerateCarrier(tx[0]));
    }
    let (_, slope, iterations) = logistic_irls(&tx, &tb)?;
    let carrier = Carrier::new(tb)?;
    Ok((
        slope,
        FitDiagnostics {
            moment_residual: mean(&tx) - carrier.moments(slope).mean,
            iterations,
            method: FitKind::Logistic,
        },
    ))
}

/// Fitted tilted tail law.
#[derive(Debug, Clone)]
pub struct TiltedTailModel {
    threshold: f64,
    stat: SufficientStatistic,
    eta_hat: f64,
    log_partition: f64,
    bg_excesses: Sample,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    n_x: usize,
    n_tail_x: usize,
    p2_hat: f64,
    diagnostics: FitDiagnostics,
}

impl TiltedTailModel {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }
    pub fn stat(&self) -> SufficientStatistic {
        self.stat
    }
    pub fn kappa(&self) -> f64 {
        self.stat.kappa
    }
    pub fn eta_hat(&self) -> f64 {
        self.eta_hat
    }
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }
    pub fn bg_excesses(&self) -> &Sample {
        &self.bg_excesses
    }
    /// Normalized weights aligned with `bg_excesses().values()`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn n_x(&self) -> usize {
        self.n_x
    }
    pub fn n_tail_x(&self) -> usize {
        self.n_tail_x
    }
    pub fn n_tail_bg(&self) -> usize {
        self.bg_excesses.len()
    }
    /// Fraction of the sample of interest above the threshold.
    pub fn p2_hat(&self) -> f64 {
        self.p2_hat
    }
    pub fn diagnostics(&self) -> FitDiagnostics {
        self.diagnostics
    }

    /// Tilted mean of the tail values `t + excess`.
    pub fn tail_mean(&self) -> f64 {
        self.threshold
            + self
                .weights
                .iter()
                .zip(self.bg_excesses.values())
                .map(|(w, e)| w * e)
                .sum::<f64>()
    }

    /// `G_hat(x)`: weighted empirical CDF of the background excesses.
    pub fn tail_cdf(&self, x: f64) -> f64 {
        let idx = self.bg_excesses.values().partition_point(|&e| e <= x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }
}

/// Fits the tilted tail model above threshold `t`.
pub fn build_tail_model(
    x: &Sample,
    bg: &Sample,
    t: f64,
    kappa: f64,
    method: FitMethod,
) -> Result<TiltedTailModel> {
    let stat = SufficientStatistic::new(kappa)?;
    if x.is_empty() {
        return Err(Error::Estimation("empty sample of interest".into()));
    }
    let x_ex = x.excesses(t);
    if x_ex.is_empty() {
        return Err(Error::Estimation(format!(
            "threshold {t} is at or above the sample maximum"
        )));
    }
    let bg_ex = bg.excesses(t);
    if bg_ex.len() < K_MIN {
        return Err(Error::Estimation(format!(
            "only {} background exceedances above {t} (need {K_MIN})",
            bg_ex.len()
        )));
    }
    let carrier = Carrier::new(stat.map(&bg_ex)?)?;
    let (eta_hat, diagnostics) = match method {
        FitMethod::Direct => {
            solve_moment_condition(&carrier, mean(&stat.map(&x_ex)?))?
        }
        FitMethod::Logistic => fit_tilt_logistic(&x_ex, &bg_ex, kappa)?,
        FitMethod::Fixed(eta) => {
            if !eta.is_finite() {
                return Err(Error::Argument(format!("fixed tilt {eta} is not finite")));
            }
            let resid = mean(&stat.map(&x_ex)?) - carrier.moments(eta).mean;
            (
                eta,
                FitDiagnostics {
                    moment_residual: resid,
                    iterations: 0,
                    method: FitKind::Fixed,
                },
            )
        }
    };
    let weights = carrier.weights(eta_hat);
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    if let Some(last) = cumulative.last_mut() {
        *last = 1.0;
    }
    Ok(TiltedTailModel {
        threshold: t,
        stat,
        eta_hat,
        log_partition: carrier.log_partition(eta_hat),
        bg_excesses: bg_ex,
        weights,
        cumulative,
        n_x: x.len(),
        n_tail_x: x_ex.len(),
        p2_hat: x_ex.len() as f64 / x.len() as f64,
        diagnostics,
    })
}

/// `G_hat(x)` for a fitted model.
pub fn tail_cdf(model: &TiltedTailModel, x: f64) -> f64 {
    model.tail_cdf(x)
}

/// First-order accuracy of the tilt family between two generalized Pareto
/// tails that share a tail index.
pub mod first_order {
    use crate::roots::golden_max;

    /// `log dG/dG0` at `x >= 0` for `G = GPD(gamma, sigma)`, `G0 = GPD(gamma, sigma0)`.
    pub fn gpd_log_density_ratio(x: f64, gamma: f64, sigma: f64, sigma0: f64) -> f64 {
        let c = (1.0 + gamma) / gamma;
        sigma0.ln() - sigma.ln() - c * (gamma * x / sigma).ln_1p() + c * (gamma * x / sigma0).ln_1p()
    }

    /// Best uniform approximation `eta T - psi` of a log density ratio.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct LinearTilt {
        pub eta: f64,
        pub psi: f64,
        /// `sup_{x >= 0} |log lambda(x) - (eta T(x) - psi)|`.
        pub sup_error: f64,
    }

    /// Minimax line through `f` on `[0, 1]`, assuming `f''` has one sign.
    ///
    /// The optimal slope is the chord slope; the intercept is the chord
    /// shifted halfway toward the point of maximal deviation.
    pub fn minimax_line<F: Fn(f64) -> f64>(f: F) -> (f64, f64, f64) {
        let f0 = f(0.0);
        let slope = f(1.0) - f0;
        let gap = |u: f64| (f(u) - f0 - slope * u).abs();
        let (_, dev) = golden_max(gap, 0.0, 1.0, 1e-14, 400);
        let sign = {
            let mid = f(0.5) - f0 - slope * 0.5;
            if mid >= 0.0 {
                1.0
            } else {
                -1.0
            }
        };
        let intercept = f0 + sign * dev / 2.0;
        (slope, intercept, dev / 2.0)
    }

    /// Best linear tilt in `T(x) = x / (kappa + x)` with `kappa = sigma0 / gamma`.
    ///
    /// With `u = T(x)` and `r = sigma0 / sigma` the log ratio is exactly
    /// `log r - (1 + 1/gamma) log(1 + (r - 1) u)`, smooth on the closed
    /// interval `[0, 1]` (`u = 1` is the limit `x -> infinity`).
    pub fn best_linear_tilt(gamma: f64, sigma: f64, sigma0: f64) -> LinearTilt {
        let r = sigma0 / sigma;
        let c = (1.0 + gamma) / gamma;
        let f = |u: f64| r.ln() - c * ((r - 1.0) * u).ln_1p();
        let (eta, intercept, sup_error) = minimax_line(f);
        LinearTilt {
            eta,
            psi: -intercept,
            sup_error,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn s(v: &[f64]) -> Sample {
        Sample::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn statistic_values() {
        assert_eq!(suff_stat(0.0, 2.0).unwrap(), 0.0);
        assert_eq!(suff_stat(2.0, 2.0).unwrap(), 0.5);
        assert_abs_diff_eq!(suff_stat(6.0, 2.0).unwrap(), 0.75, epsilon = 1e-15);
        assert!(suff_stat(-1.0, 2.0).is_err());
        assert!(suff_stat(1.0, 0.0).is_err());
    }

    #[test]
    fn log_partition_values() {
        let c = Carrier::new(vec![0.2, 0.8]).unwrap();
        assert_eq!(c.log_partition(0.0), 0.0);
        let expected = ((0.2f64.exp() + 0.8f64.exp()) / 2.0).ln();
        assert_abs_diff_eq!(c.log_partition(1.0), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.544341, epsilon = 1e-6);
        // extreme tilts stay finite: psi(eta) = eta*T_max - log 2 + log(1 + e^{-0.6 eta})
        assert_abs_diff_eq!(c.log_partition(700.0), 700.0 * 0.8 - 2f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(c.log_partition(-700.0), -700.0 * 0.2 - 2f64.ln(), epsilon = 1e-9);
        let ex = s(&[0.25, 4.0]);
        assert_eq!(log_partition(0.0, &ex, 1.0).unwrap(), 0.0);
        assert!(log_partition(0.0, &s(&[]), 1.0).is_err());
    }

    #[test]
    fn two_point_tilt_closed_form() {
        // T = 0.2 at x = 0.25, T = 0.8 at x = 4 with kappa = 1
        let bg = s(&[0.25, 4.0]);
        let carrier = Carrier::new(vec![0.2, 0.8]).unwrap();
        let (eta, d) = solve_moment_condition(&carrier, 0.6).unwrap();
        assert_abs_diff_eq!(eta, 2f64.ln() / 0.6, epsilon = 1e-10);
        assert!(d.moment_residual.abs() < MOMENT_TOL);
        // x excesses with mean T exactly 0.6: T = 0.5 (x=1) and T = 0.7 (x=7/3)
        let x = s(&[1.0, 7.0 / 3.0]);
        let (eta2, _) = fit_tilt_direct(&x, &bg, 1.0).unwrap();
        assert_abs_diff_eq!(eta2, 1.155245300933242, epsilon = 1e-9);
    }

    #[test]
    fn equal_means_give_zero_tilt() {
        let bg = s(&[0.5, 1.0, 2.0, 3.0]);
        let (eta, _) = fit_tilt_direct(&bg, &bg, 1.5).unwrap();
        assert!(eta.abs() < 1e-12);
    }

    #[test]
    fn direct_fit_errors() {
        let bg = s(&[0.5, 1.0, 2.0]);
        assert!(matches!(
            fit_tilt_direct(&s(&[5.0, 9.0]), &bg, 1.0),
            Err(Error::NoSolution { .. })
        ));
        assert!(matches!(
            fit_tilt_direct(&s(&[1.0]), &s(&[2.0, 2.0]), 1.0),
            Err(Error::DegenerateCarrier(_))
        ));
    }

    #[test]
    fn logistic_identical_classes_gives_zero_slope() {
        let bg = s(&[0.1, 0.4, 0.9, 1.5, 2.2, 3.0, 7.5]);
        let (eta, d) = fit_tilt_logistic(&bg, &bg, 1.0).unwrap();
        assert!(eta.abs() < 1e-8);
        assert_eq!(d.method, FitKind::Logistic);
    }

    #[test]
    fn logistic_errors() {
        assert!(matches!(
            fit_tilt_logistic(&s(&[5.0, 6.0]), &s(&[0.1, 0.2]), 1.0),
            Err(Error::Separation(_))
        ));
        assert!(matches!(
            fit_tilt_logistic(&s(&[1.0, 1.0]), &s(&[1.0, 1.0]), 1.0),
            Err(Error::DegenerateCarrier(_))
        ));
    }

    #[test]
    fn model_with_zero_tilt_is_uniform() {
        let x = s(&[1.0, 2.0, 12.0, 15.0]);
        let bg: Vec<f64> = (0..60).map(|i| 10.0 + i as f64 * 0.5).collect();
        let bg = s(&bg);
        let m = build_tail_model(&x, &bg, 10.0, 10.0, FitMethod::Fixed(0.0)).unwrap();
        let w0 = 1.0 / m.n_tail_bg() as f64;
        assert!(m.weights().iter().all(|w| (w - w0).abs() < 1e-15));
        assert_eq!(m.log_partition(), 0.0);
        assert_eq!(m.p2_hat(), 0.5);
        // G_hat equals the empirical CDF of the excesses
        for x in [-1.0, 0.0, 0.5, 3.3, 29.5, 100.0] {
            let ecdf = m.bg_excesses().values().iter().filter(|&&e| e <= x).count() as f64
                / m.n_tail_bg() as f64;
            assert_abs_diff_eq!(tail_cdf(&m, x), ecdf, epsilon = 1e-12);
        }
        assert_eq!(tail_cdf(&m, -1e-9), 0.0);
        assert_eq!(tail_cdf(&m, 1e9), 1.0);
    }

    #[test]
    fn threshold_above_max_is_error() {
        let x = s(&[1.0, 2.0]);
        let bg = s(&(0..100).map(f64::from).collect::<Vec<_>>());
        assert!(matches!(
            build_tail_model(&x, &bg, 2.0, 1.0, FitMethod::Direct),
            Err(Error::Estimation(_))
        ));
        // too few background exceedances
        assert!(matches!(
            build_tail_model(&s(&[1.0, 200.0]), &bg, 90.0, 1.0, FitMethod::Direct),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn density_ratio_matches_gpd_densities() {
        use crate::distributions::gpd_log_density;
        for x in [0.0, 0.3, 5.0, 80.0] {
            let direct = gpd_log_density(0.45, 1.3, x).unwrap() - gpd_log_density(0.45, 1.0, x).unwrap();
            assert_abs_diff_eq!(
                first_order::gpd_log_density_ratio(x, 0.45, 1.3, 1.0),
                direct,
                epsilon = 1e-12
            );
        }
    }
}
