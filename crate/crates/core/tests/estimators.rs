use tailtilt::distributions::{sample, DistSpec, SeedSpec};
use tailtilt::estimators::{
    pareto_tail_mean, sample_mean, semiparametric_estimate, winsorized_mean_k,
    winsorized_mean_threshold,
};
use tailtilt::tilt::FitMethod;
use tailtilt::Sample;

fn pair(seed: u64) -> (Sample, Sample) {
    let x = sample(&DistSpec::LogGamma { shape: 4.0, scale: 0.45 }, 1000, SeedSpec::new(seed, 0)).unwrap();
    let bg = sample(&DistSpec::LogGamma { shape: 3.0, scale: 0.45 }, 50_000, SeedSpec::new(seed, 1)).unwrap();
    (x, bg)
}

/// `n Var = F Var_body + (1-F) Cov(T,X)^2 / Var(T) + F (1-F) (tail mean - body mean)^2`,
/// recomputed from the raw weights.
#[test]
fn plug_in_variance_matches_direct_formula() {
    let (x, bg) = pair(1);
    let (t, kappa) = (12.0, 10.0);
    let (est, model) = semiparametric_estimate(&x, &bg, t, kappa, FitMethod::Direct).unwrap();
    let n = x.len() as f64;
    let body = x.body(t);
    let f = body.len() as f64 / n;
    let bm = body.iter().sum::<f64>() / body.len() as f64;
    let bv = body.iter().map(|b| (b - bm).powi(2)).sum::<f64>() / body.len() as f64;
    let w = model.weights();
    let ys: Vec<f64> = model.bg_excesses().values().iter().map(|e| t + e).collect();
    let ts: Vec<f64> = model.bg_excesses().values().iter().map(|e| e / (kappa + e)).collect();
    let e = |g: &dyn Fn(usize) -> f64| (0..w.len()).map(|i| w[i] * g(i)).sum::<f64>();
    let (my, mt) = (e(&|i| ys[i]), e(&|i| ts[i]));
    let cov = e(&|i| (ys[i] - my) * (ts[i] - mt));
    let vt = e(&|i| (ts[i] - mt).powi(2));
    let expect = f * bv + (1.0 - f) * cov * cov / vt + f * (1.0 - f) * (my - bm).powi(2);
    let got = est.var_hat.unwrap() * n;
    assert!((got / expect - 1.0).abs() < 1e-10, "{got} vs {expect}");
    // point estimate: body sum / n plus p2 times tilted tail mean
    let mu = body.iter().sum::<f64>() / n + (1.0 - f) * my;
    assert!((est.mu_hat - mu).abs() < 1e-10 * mu);
}

#[test]
fn winsorized_mean_is_monotone_in_t() {
    let (x, _) = pair(2);
    let mut prev = f64::NEG_INFINITY;
    for t in [1.0, 2.0, 5.0, 10.0, 50.0, 500.0, 1e6] {
        let m = winsorized_mean_threshold(&x, t).unwrap().mu_hat;
        assert!(m >= prev);
        prev = m;
    }
    let full = sample_mean(&x).unwrap().mu_hat;
    assert!((winsorized_mean_threshold(&x, x.max().unwrap()).unwrap().mu_hat - full).abs() < 1e-12);
}

#[test]
fn winsorized_k_caps_the_top_values() {
    let x = Sample::from_values(vec![1.0, 2.0, 3.0, 10.0, 100.0]).unwrap();
    assert_eq!(winsorized_mean_k(&x, 2).unwrap().mu_hat, (1.0 + 2.0 + 3.0 * 3.0) / 5.0);
    assert!(winsorized_mean_k(&x, 0).is_err());
    assert!(winsorized_mean_k(&x, 5).is_err());
}

#[test]
fn estimators_are_scale_equivariant() {
    let (x, bg) = pair(3);
    let c = 2.5;
    let (xs, bs) = (x.scaled(c).unwrap(), bg.scaled(c).unwrap());
    let close = |a: f64, b: f64| (a - b).abs() < 1e-10 * a.abs().max(1.0);
    assert!(close(winsorized_mean_threshold(&xs, 40.0 * c).unwrap().mu_hat, c * winsorized_mean_threshold(&x, 40.0).unwrap().mu_hat));
    assert!(close(winsorized_mean_k(&xs, 3).unwrap().mu_hat, c * winsorized_mean_k(&x, 3).unwrap().mu_hat));
    let (a, _) = semiparametric_estimate(&x, &bg, 12.0, 9.0, FitMethod::Direct).unwrap();
    let (b, _) = semiparametric_estimate(&xs, &bs, 12.0 * c, 9.0 * c, FitMethod::Direct).unwrap();
    assert!(close(b.mu_hat, c * a.mu_hat));
    assert!(close(b.var_hat.unwrap(), c * c * a.var_hat.unwrap()));
    let p = pareto_tail_mean(&x, 10.0).unwrap().mu_hat;
    let ps = pareto_tail_mean(&xs, 10.0 * c).unwrap().mu_hat;
    assert!((ps / (c * p) - 1.0).abs() < 1e-6);
}

#[test]
fn negation_flips_the_sample_mean() {
    let (x, _) = pair(4);
    let a = sample_mean(&x).unwrap().mu_hat;
    let b = sample_mean(&x.negated()).unwrap().mu_hat;
    assert_eq!(b, -a);
}
