//! One-dimensional solvers: bracketed Newton with bisection fallback, and a
//! golden-section maximizer.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop once `|f(x)| <= ftol`.
    pub ftol: f64,
    /// Stop once the bracket is narrower than `xtol * (1 + |x|)`.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            ftol: 1e-13,
            xtol: 1e-15,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Finds a root of `f` in `[lo, hi]`. `f` returns `(value, derivative)`.
///
/// The bracket must straddle a sign change. Newton steps that leave the
/// current bracket (or are not finite) are replaced by bisection, so the
/// iteration can never escape.
pub fn newton_bisect<F>(mut f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<Root>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if f_lo == 0.0 {
        return Ok(Root { x: lo, fx: 0.0, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, fx: 0.0, iterations: 0 });
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() && !f_hi.is_finite() {
        return Err(Error::Solver {
            message: format!("no sign change (f(lo) = {f_lo}, f(hi) = {f_hi})"),
            lo,
            hi,
            iterations: 0,
        });
    }
    let lo_sign = f_lo.signum();

    let mut x = 0.5 * (lo + hi);
    let mut best = Root { x, fx: f64::INFINITY, iterations: 0 };
    for it in 1..=opts.max_iter {
        let (fx, dfx) = f(x);
        if fx.abs() < best.fx.abs() {
            best = Root { x, fx, iterations: it };
        }
        if fx.abs() <= opts.ftol {
            return Ok(Root { x, fx, iterations: it });
        }
        if fx.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= opts.xtol * (1.0 + x.abs()) {
            best.iterations = it;
            return Ok(best);
        }
        let step = x - fx / dfx;
        x = if step.is_finite() && step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::Solver {
        message: format!("did not converge (best |f| = {:e})", best.fx.abs()),
        lo,
        hi,
        iterations: opts.max_iter,
    })
}

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search.
/// Returns `(argmax, max)`.
pub fn golden_max<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol * (1.0 + c.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_cubic() {
        let r = newton_bisect(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 3.0, RootOptions::default())
            .unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn falls_back_to_bisection_on_bad_derivative() {
        // derivative deliberately wrong; bisection still converges
        let r = newton_bisect(|x| (x - 0.3, -1e-9), 0.0, 1.0, RootOptions::default()).unwrap();
        assert!((r.x - 0.3).abs() < 1e-12);
    }

    #[test]
    fn rejects_bracket_without_sign_change() {
        let e = newton_bisect(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, RootOptions::default());
        assert!(matches!(e, Err(Error::Solver { .. })));
    }

    #[test]
    fn iteration_cap_reports_bracket() {
        let opts = RootOptions { ftol: 0.0, xtol: 0.0, max_iter: 3 };
        match newton_bisect(|x| (x - 0.3, 0.0), 0.0, 1.0, opts) {
            Err(Error::Solver { iterations, lo, hi, .. }) => {
                assert_eq!(iterations, 3);
                assert!(lo <= 0.3 && 0.3 <= hi);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_max(|x| -(x - 1.25) * (x - 1.25), -3.0, 4.0, 1e-12, 500);
        assert!((x - 1.25).abs() < 1e-6);
        assert!(fx <= 0.0);
    }
}
