//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use tailtilt::Sample;

/// Guillou–Hall selection by direct evaluation of every statistic, O(n^2).
/// Returns `(k, fallback)`.
pub fn gh_brute_force(x: &Sample) -> (usize, bool) {
    let mut desc: Vec<f64> = x.values().iter().copied().filter(|v| *v > 0.0).collect();
    desc.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let m = desc.len() - 1;
    let t_of = |k: usize| -> f64 {
        let u: Vec<f64> = (1..=k)
            .map(|i| i as f64 * (desc[i - 1].ln() - desc[i].ln()))
            .collect();
        let hill: f64 = u.iter().sum::<f64>() / k as f64;
        if hill <= 0.0 {
            return 0.0;
        }
        let kf = k as f64;
        let num: f64 = u
            .iter()
            .enumerate()
            .map(|(idx, ui)| (kf - 2.0 * (idx + 1) as f64 + 1.0) * ui)
            .sum();
        (3.0 / kf.powi(3)).sqrt() * num / hill
    };
    let t: Vec<f64> = (1..=m).map(t_of).collect();
    let mut q = Vec::new();
    for k in 1..=m {
        let w = k / 2;
        if k + w > m {
            break;
        }
        let s: f64 = (k - w..=k + w).map(|j| t[j - 1] * t[j - 1]).sum();
        q.push((s / (2 * w + 1) as f64).sqrt());
    }
    // smallest k such that every admissible j >= k exceeds the critical value
    let mut best = None;
    for k in 1..=q.len() {
        if q[k - 1..].iter().all(|&v| v > 1.25) {
            best = Some(k);
            break;
        }
    }
    match best {
        Some(k) => (k, false),
        None => ((x.len() / 10).clamp(1, x.len() - 1), true),
    }
}

/// Uniform-error minimax line fit on a dense grid by nested search: for a
/// given slope the best intercept is the mid-range of the residuals, and the
/// resulting error is convex in the slope.
pub fn minimax_line_brute(us: &[f64], f: &[f64]) -> f64 {
    let err = |eta: f64| {
        let (lo, hi) = us.iter().zip(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (u, v)| {
            let r = v - eta * u;
            (a.min(r), b.max(r))
        });
        (hi - lo) / 2.0
    };
    let (mut a, mut b) = (-50.0, 50.0);
    for _ in 0..300 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if err(m1) < err(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    err(0.5 * (a + b))
}
