//! Extreme-value tooling: Hill tail-index estimation, generalized Pareto
//! fitting, Guillou–Hall selection of the number of tail order statistics,
//! and the threshold / bandwidth policies built on them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::gpd_log_density;
use crate::error::{Error, Result};
use crate::roots::{golden_max, newton_bisect, RootOptions};
use crate::sample::Sample;

/// Smallest sample (or exceedance count) the tail fitters accept.
pub const K_MIN: usize = 20;
/// Critical value for the Guillou–Hall moving-window statistic.
pub const GH_CRITICAL: f64 = 1.25;
/// Minimum number of excesses for the two-parameter GPD fit.
pub const GPD_ML_MIN: usize = 5;
/// Tail-index search range of the joint GPD fit.
pub const GPD_GAMMA_BRACKET: (f64, f64) = (-0.5, 2.0);

/// Tail-index and scale estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvtFit {
    pub gamma_hat: f64,
    pub sigma_hat: f64,
    pub k_used: usize,
    /// Threshold the excesses were measured from (0 when fitting raw excesses).
    pub threshold: f64,
}

/// How the tail threshold `t` is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ThresholdRule {
    Fixed(f64),
    /// Empirical quantile of the background sample.
    BackgroundQuantile(f64),
    GuillouHall,
    /// Measured-MSE minimizer over a grid; only meaningful inside a simulation.
    Oracle(Vec<f64>),
}

impl ThresholdRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            ThresholdRule::Fixed(t) if !t.is_finite() => {
                Err(Error::Argument(format!("fixed threshold {t} is not finite")))
            }
            ThresholdRule::BackgroundQuantile(q) if !(*q > 0.0 && *q < 1.0) => Err(
                Error::Argument(format!("quantile level {q} must lie strictly inside (0, 1)")),
            ),
            ThresholdRule::Oracle(grid) => {
                if grid.is_empty() {
                    return Err(Error::Argument("oracle grid is empty".into()));
                }
                if grid.iter().any(|t| !t.is_finite()) {
                    return Err(Error::Argument("oracle grid has a non-finite point".into()));
                }
                if grid.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::Argument("oracle grid must be sorted".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdRule::Fixed(t) => write!(f, "fixed:{t}"),
            ThresholdRule::BackgroundQuantile(q) => write!(f, "quantile:{q}"),
            ThresholdRule::GuillouHall => write!(f, "gh"),
            ThresholdRule::Oracle(grid) => {
                let pts: Vec<String> = grid.iter().map(|t| t.to_string()).collect();
                write!(f, "oracle:{}", pts.join(","))
            }
        }
    }
}

impl FromStr for ThresholdRule {
    type Err = Error;

    /// Accepts `fixed:<v>`, `quantile:<q>`, `gh` and `oracle:<grid>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let rule = match s.split_once(':') {
            None if s.eq_ignore_ascii_case("gh") => ThresholdRule::GuillouHall,
            Some(("fixed", v)) => ThresholdRule::Fixed(parse_number(v)?),
            Some(("quantile", v)) => ThresholdRule::BackgroundQuantile(parse_number(v)?),
            Some(("oracle", g)) => ThresholdRule::Oracle(crate::io::parse_grid(g)?),
            _ => {
                return Err(Error::Argument(format!(
                    "threshold rule {s:?}: expected fixed:<v>, quantile:<q>, gh or oracle:<grid>"
                )))
            }
        };
        rule.validate()?;
        Ok(rule)
    }
}

/// How the bandwidth `kappa` of the sufficient statistic is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaRule {
    /// `sigma0_hat / gamma_hat` fitted on the background tail.
    SigmaOverGamma,
    EqualsThreshold,
    Fixed(f64),
}

impl KappaRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            KappaRule::Fixed(k) if !(*k > 0.0 && k.is_finite()) => {
                Err(Error::Argument(format!("fixed kappa {k} must be positive")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for KappaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KappaRule::SigmaOverGamma => write!(f, "sg"),
            KappaRule::EqualsThreshold => write!(f, "t"),
            KappaRule::Fixed(k) => write!(f, "fixed:{k}"),
        }
    }
}

impl FromStr for KappaRule {
    type Err = Error;

    /// Accepts `sg`, `t` and `fixed:<v>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let rule = match s.split_once(':') {
            None if s == "sg" => KappaRule::SigmaOverGamma,
            None if s == "t" => KappaRule::EqualsThreshold,
            Some(("fixed", v)) => KappaRule::Fixed(parse_number(v)?),
            _ => {
                return Err(Error::Argument(format!(
                    "kappa rule {s:?}: expected sg, t or fixed:<v>"
                )))
            }
        };
        rule.validate()?;
        Ok(rule)
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Argument(format!("{s:?} is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Argument(format!("{s:?} is not finite")))
    }
}

/// Hill estimator from the `k` largest observations:
/// `(1/k) sum_{i=1..k} [log X_(n-i+1) - log X_(n-k)]`.
pub fn hill_estimate(x: &Sample, k: usize) -> Result<f64> {
    let n = x.len();
    if k == 0 || k >= n {
        return Err(Error::Argument(format!("Hill k = {k} outside [1, {}]", n.saturating_sub(1))));
    }
    let v = x.values();
    let anchor = v[n - k - 1];
    if !(anchor > 0.0) {
        return Err(Error::Domain(format!(
            "Hill estimator needs the top {} order statistics positive (found {anchor})",
            k + 1
        )));
    }
    let la = anchor.ln();
    Ok(v[n - k..].iter().map(|y| y.ln() - la).sum::<f64>() / k as f64)
}

/// GPD log-likelihood of `excesses`; `-inf` when some excess is outside the support.
pub fn gpd_log_likelihood(excesses: &[f64], gamma: f64, sigma: f64) -> f64 {
    let mut acc = 0.0;
    for &e in excesses {
        match gpd_log_density(gamma, sigma, e) {
            Ok(l) => acc += l,
            Err(_) => return f64::NEG_INFINITY,
        }
    }
    acc
}

/// Scale score divided by the sample size, times `sigma`:
/// `(1 + gamma)/m * sum e/(sigma + gamma e) - 1`. Zero at the conditional MLE.
pub fn gpd_sigma_score(excesses: &[f64], gamma: f64, sigma: f64) -> f64 {
    score_and_slope(excesses, gamma, sigma).0
}

/// Score (as above) and its derivative with respect to `log sigma`.
fn score_and_slope(excesses: &[f64], gamma: f64, sigma: f64) -> (f64, f64) {
    let m = excesses.len() as f64;
    let (mut s, mut d) = (0.0, 0.0);
    for &e in excesses {
        let inv = 1.0 / (sigma + gamma * e);
        s += e * inv;
        d += e * inv * inv;
    }
    let c = (1.0 + gamma) / m;
    (c * s - 1.0, -c * d * sigma)
}

/// Maximum-likelihood GPD scale with the tail index held at `gamma`.
///
/// Solved on `log sigma` by bracketed Newton; at the returned value the
/// normalized score is below `1e-8` in magnitude.
pub fn gpd_fit_sigma(excesses: &Sample, gamma: f64) -> Result<f64> {
    let e = excesses.values();
    if e.is_empty() {
        return Err(Error::Argument("no excesses to fit".into()));
    }
    if e[0] < 0.0 {
        return Err(Error::Domain(format!("negative excess {}", e[0])));
    }
    if !(gamma > -1.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("GPD scale fit needs tail index > -1 (got {gamma})")));
    }
    let max_e = e[e.len() - 1];
    if max_e == 0.0 {
        return Err(Error::Fit("all excesses are zero".into()));
    }
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    let f = |u: f64| score_and_slope(e, gamma, u.exp());

    // Lower end: for gamma < 0 the support constraint sigma > -gamma * max(e)
    // makes the score blow up; otherwise walk down until it turns positive.
    let mut lo = if gamma < 0.0 {
        (-gamma * max_e).ln() + 1e-12
    } else {
        mean.ln()
    };
    let mut steps = 0;
    while f(lo).0 <= 0.0 {
        lo -= 2.0;
        steps += 1;
        if steps > 400 {
            return Err(Error::Solver {
                message: format!(
                    "GPD scale likelihood has no interior maximum at tail index {gamma}"
                ),
                lo: lo.exp(),
                hi: mean,
                iterations: steps,
            });
        }
    }
    let mut hi = mean.max(max_e).ln() + 1.0;
    while f(hi).0 >= 0.0 {
        hi += 2.0;
        steps += 1;
        if steps > 400 {
            return Err(Error::Solver {
                message: "could not bracket the GPD scale from above".into(),
                lo: lo.exp(),
                hi: hi.exp(),
                iterations: steps,
            });
        }
    }
    let root = newton_bisect(
        f,
        lo,
        hi,
        RootOptions {
            ftol: 1e-12,
            xtol: 1e-15,
            max_iter: 300,
        },
    )?;
    let sigma = root.x.exp();
    let resid = gpd_sigma_score(e, gamma, sigma);
    if resid.abs() >= 1e-8 {
        return Err(Error::Solver {
            message: format!("GPD scale score residual {resid:e} above 1e-8"),
            lo: lo.exp(),
            hi: hi.exp(),
            iterations: root.iterations,
        });
    }
    Ok(sigma)
}

/// Joint maximum-likelihood GPD fit by profiling the tail index over
/// [`GPD_GAMMA_BRACKET`] with the scale solved exactly at each point.
pub fn gpd_fit_ml(excesses: &Sample) -> Result<EvtFit> {
    let e = excesses.values();
    if e.len() < GPD_ML_MIN {
        return Err(Error::Fit(format!(
            "GPD fit needs at least {GPD_ML_MIN} excesses (got {})",
            e.len()
        )));
    }
    if e[0] == e[e.len() - 1] {
        return Err(Error::Fit("all excesses are equal".into()));
    }
    let profile = |g: f64| match gpd_fit_sigma(excesses, g) {
        Ok(s) => gpd_log_likelihood(e, g, s),
        Err(_) => f64::NEG_INFINITY,
    };

    let (g_lo, g_hi) = GPD_GAMMA_BRACKET;
    let steps = 40;
    let h = (g_hi - g_lo) / steps as f64;
    let grid: Vec<(f64, f64)> = (0..=steps)
        .map(|i| {
            let g = g_lo + i as f64 * h;
            (g, profile(g))
        })
        .collect();
    let (best_i, &(_, best_ll)) = grid
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("nonempty grid");
    if !best_ll.is_finite() {
        return Err(Error::Fit("profile likelihood is not finite anywhere".into()));
    }
    let a = g_lo + best_i.saturating_sub(1) as f64 * h;
    let b = (g_lo + (best_i + 1) as f64 * h).min(g_hi);
    let (g_ref, ll_ref) = golden_max(profile, a, b, 1e-10, 200);
    let gamma_hat = if ll_ref >= best_ll { g_ref } else { grid[best_i].0 };
    let sigma_hat = gpd_fit_sigma(excesses, gamma_hat)?;
    Ok(EvtFit {
        gamma_hat,
        sigma_hat,
        k_used: e.len(),
        threshold: 0.0,
    })
}

/// Guillou–Hall statistics for every admissible `k`.
#[derive(Debug, Clone)]
pub struct GhDiagnostic {
    /// `T_n(k)` for `k = 1..=t_stat.len()` (index `k - 1`).
    pub t_stat: Vec<f64>,
    /// `Q_n(k)` for `k = 1..=q_stat.len()`.
    pub q_stat: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GhSelection {
    pub k: usize,
    /// Set when `Q_n` never exceeded the critical value and `floor(n/10)` was used.
    pub fallback: bool,
}

fn log_top_order_stats(x: &Sample) -> Result<Vec<f64>> {
    let n = x.len();
    if n < K_MIN {
        return Err(Error::Argument(format!(
            "Guillou-Hall needs at least {K_MIN} observations (got {n})"
        )));
    }
    let positive = x.count_above(0.0);
    if positive < K_MIN {
        return Err(Error::Domain(format!(
            "Guillou-Hall needs at least {K_MIN} positive observations (got {positive})"
        )));
    }
    // descending logs of the positive values
    Ok(x.values()[n - positive..].iter().rev().map(|v| v.ln()).collect())
}

/// Computes `T_n(k)` and the windowed RMS `Q_n(k)` in linear time.
pub fn guillou_hall_diagnostic(x: &Sample) -> Result<GhDiagnostic> {
    let logs = log_top_order_stats(x)?;
    let m = logs.len() - 1; // number of log-spacings
    let mut t_stat = Vec::with_capacity(m);
    let (mut s0, mut s1) = (0.0, 0.0);
    for i in 1..=m {
        let u = i as f64 * (logs[i - 1] - logs[i]);
        s0 += u;
        s1 += i as f64 * u;
        let k = i as f64;
        let hill = s0 / k;
        let t = if hill > 0.0 {
            (3.0 / (k * k * k)).sqrt() * ((k + 1.0) * s0 - 2.0 * s1) / hill
        } else {
            0.0
        };
        t_stat.push(t);
    }
    let mut sq = vec![0.0; m + 1];
    for (j, t) in t_stat.iter().enumerate() {
        sq[j + 1] = sq[j] + t * t;
    }
    let mut q_stat = Vec::new();
    for k in 1..=m {
        let w = k / 2;
        if k + w > m {
            break;
        }
        let sum = sq[k + w] - sq[k - w - 1];
        q_stat.push((sum / (2 * w + 1) as f64).sqrt());
    }
    Ok(GhDiagnostic { t_stat, q_stat })
}

/// Number of top order statistics selected by the Guillou–Hall rule: the
/// smallest `k` with `Q_n(j) > 1.25` for every admissible `j >= k`.
pub fn guillou_hall_k(x: &Sample) -> Result<GhSelection> {
    let diag = guillou_hall_diagnostic(x)?;
    let mut k_hat = None;
    for (idx, &q) in diag.q_stat.iter().enumerate().rev() {
        if q > GH_CRITICAL {
            k_hat = Some(idx + 1);
        } else {
            break;
        }
    }
    Ok(match k_hat {
        Some(k) => GhSelection { k, fallback: false },
        None => GhSelection {
            k: (x.len() / 10).clamp(1, x.len() - 1),
            fallback: true,
        },
    })
}

/// Resolves a threshold rule to a concrete `t`.
pub fn resolve_threshold(rule: &ThresholdRule, x: &Sample, bg: &Sample) -> Result<f64> {
    rule.validate()?;
    match rule {
        ThresholdRule::Fixed(t) => Ok(*t),
        ThresholdRule::BackgroundQuantile(q) => bg.quantile(*q),
        ThresholdRule::GuillouHall => {
            let sel = guillou_hall_k(x)?;
            Ok(x.order_desc(sel.k).expect("k within sample"))
        }
        ThresholdRule::Oracle(_) => Err(Error::Argument(
            "oracle thresholds are chosen by the simulation harness".into(),
        )),
    }
}

/// Tail index of the background by Hill at the Guillou–Hall `k`, falling
/// back to the top 1% when the diagnostic never fires.
pub fn background_tail_index(bg: &Sample) -> Result<f64> {
    let k = match guillou_hall_k(bg) {
        Ok(GhSelection { k, fallback: false }) => k,
        _ => (bg.len() / 100).clamp(1, bg.len().saturating_sub(1).max(1)),
    };
    hill_estimate(bg, k)
}

/// `sigma0_hat / gamma_hat` for the background excesses above `t`, given a
/// background tail index.
pub fn sigma_over_gamma(bg: &Sample, t: f64, gamma_hat: f64) -> Result<f64> {
    if !(gamma_hat > 0.0) {
        return Err(Error::Fit(format!(
            "background tail index {gamma_hat} is not positive; kappa = sigma/gamma undefined"
        )));
    }
    let excesses = bg.excesses(t);
    if excesses.len() < K_MIN {
        return Err(Error::Estimation(format!(
            "only {} background exceedances above {t} (need {K_MIN})",
            excesses.len()
        )));
    }
    let sigma = gpd_fit_sigma(&excesses, gamma_hat)?;
    Ok(sigma / gamma_hat)
}

/// Resolves a bandwidth rule to a concrete `kappa > 0`.
pub fn resolve_kappa(rule: &KappaRule, bg: &Sample, t: f64) -> Result<f64> {
    rule.validate()?;
    match *rule {
        KappaRule::SigmaOverGamma => sigma_over_gamma(bg, t, background_tail_index(bg)?),
        KappaRule::EqualsThreshold => {
            if t > 0.0 {
                Ok(t)
            } else {
                Err(Error::Argument(format!("kappa = t needs a positive threshold (t = {t})")))
            }
        }
        KappaRule::Fixed(k) => Ok(k),
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
    fn hill_hand_computed() {
        let h = hill_estimate(&s(&[1.0, 2.0, 4.0, 8.0]), 3).unwrap();
        assert_abs_diff_eq!(h, 2.0 * 2f64.ln(), epsilon = 1e-14);
        assert_eq!(hill_estimate(&s(&[1.0, 5.0, 5.0, 5.0]), 2).unwrap(), 0.0);
    }

    #[test]
    fn hill_errors() {
        let x = s(&[1.0, 2.0, 4.0, 8.0]);
        assert!(matches!(hill_estimate(&x, 0), Err(Error::Argument(_))));
        assert!(matches!(hill_estimate(&x, 4), Err(Error::Argument(_))));
        assert!(matches!(
            hill_estimate(&s(&[-1.0, 0.0, 2.0, 3.0]), 3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn exponential_scale_is_mean() {
        let ex = s(&[0.5, 1.0, 2.5, 4.0]);
        assert_abs_diff_eq!(gpd_fit_sigma(&ex, 0.0).unwrap(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn single_excess_matches_grid_search() {
        let e = 3.7;
        let ex = s(&[e]);
        let sig = gpd_fit_sigma(&ex, 1.0).unwrap();
        assert!(gpd_sigma_score(&[e], 1.0, sig).abs() < 1e-8);
        // dense grid over sigma
        let (mut best_s, mut best_ll) = (0.0, f64::NEG_INFINITY);
        for i in 1..200_000 {
            let sg = i as f64 * 1e-4;
            let ll = gpd_log_likelihood(&[e], 1.0, sg);
            if ll > best_ll {
                best_ll = ll;
                best_s = sg;
            }
        }
        assert!((best_s - sig).abs() < 2e-4, "grid {best_s} vs solver {sig}");
        assert_abs_diff_eq!(sig, e, epsilon = 1e-9);
    }

    #[test]
    fn negative_tail_index_respects_support() {
        let ex = s(&[0.1, 0.4, 0.5, 0.9, 1.0]);
        let sig = gpd_fit_sigma(&ex, -0.3).unwrap();
        assert!(sig > 0.3 * 1.0);
        assert!(gpd_sigma_score(ex.values(), -0.3, sig).abs() < 1e-8);
    }

    #[test]
    fn sigma_fit_errors() {
        assert!(gpd_fit_sigma(&s(&[]), 0.5).is_err());
        assert!(gpd_fit_sigma(&s(&[-0.1, 1.0]), 0.5).is_err());
        // mostly zeros: likelihood runs off to sigma -> 0
        let mut v = vec![0.0; 50];
        v.push(1.0);
        assert!(matches!(gpd_fit_sigma(&s(&v), 0.5), Err(Error::Solver { .. })));
    }

    #[test]
    fn joint_fit_rejects_degenerate() {
        assert!(matches!(gpd_fit_ml(&s(&[2.0; 10])), Err(Error::Fit(_))));
        assert!(matches!(gpd_fit_ml(&s(&[1.0, 2.0, 3.0])), Err(Error::Fit(_))));
    }

    #[test]
    fn gh_requires_kmin() {
        let x = s(&(1..=10).map(f64::from).collect::<Vec<_>>());
        assert!(matches!(guillou_hall_k(&x), Err(Error::Argument(_))));
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("fixed:5".parse::<ThresholdRule>().unwrap(), ThresholdRule::Fixed(5.0));
        assert_eq!(
            "quantile:0.75".parse::<ThresholdRule>().unwrap(),
            ThresholdRule::BackgroundQuantile(0.75)
        );
        assert_eq!("gh".parse::<ThresholdRule>().unwrap(), ThresholdRule::GuillouHall);
        assert_eq!(
            "oracle:1,2,3".parse::<ThresholdRule>().unwrap(),
            ThresholdRule::Oracle(vec![1.0, 2.0, 3.0])
        );
        assert!("quantile:1".parse::<ThresholdRule>().is_err());
        assert!("fixed:nan".parse::<ThresholdRule>().is_err());
        assert!("median".parse::<ThresholdRule>().is_err());
        assert_eq!("sg".parse::<KappaRule>().unwrap(), KappaRule::SigmaOverGamma);
        assert_eq!("t".parse::<KappaRule>().unwrap(), KappaRule::EqualsThreshold);
        assert_eq!("fixed:2".parse::<KappaRule>().unwrap(), KappaRule::Fixed(2.0));
        assert!("fixed:0".parse::<KappaRule>().is_err());
        for r in ["fixed:5", "quantile:0.9", "gh", "oracle:1,2"] {
            let parsed: ThresholdRule = r.parse().unwrap();
            assert_eq!(parsed.to_string().parse::<ThresholdRule>().unwrap(), parsed);
        }
    }

    #[test]
    fn simple_resolutions() {
        let x = s(&[1.0, 2.0]);
        let bg = s(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(resolve_threshold(&ThresholdRule::Fixed(5.0), &x, &bg).unwrap(), 5.0);
        assert_abs_diff_eq!(
            resolve_threshold(&ThresholdRule::BackgroundQuantile(0.75), &x, &bg).unwrap(),
            3.25,
            epsilon = 1e-15
        );
        assert!(resolve_threshold(&ThresholdRule::Oracle(vec![1.0]), &x, &bg).is_err());
        assert_eq!(resolve_kappa(&KappaRule::EqualsThreshold, &bg, 7.3).unwrap(), 7.3);
        assert_eq!(resolve_kappa(&KappaRule::Fixed(2.0), &bg, 7.3).unwrap(), 2.0);
    }
}
