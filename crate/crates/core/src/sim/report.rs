//! CSV and JSON output for scenario tables and sweep curves.

use std::io::Write;

use super::engine::{ScenarioResult, SweepResult};
use crate::error::{Error, Result};

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per method.
pub fn write_scenario_csv<W: Write>(res: &ScenarioResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "method",
        "threshold_rule",
        "threshold",
        "variance",
        "se_variance",
        "bias2",
        "se_bias2",
        "mse",
        "se_mse",
        "mean_error",
        "se_mean_error",
        "reps_ok",
        "failures",
        "mean_var_hat",
        "mean_eta",
        "se_eta",
    ])
    .map_err(io_err)?;
    for r in &res.rows {
        let s = &r.stats;
        w.write_record([
            r.method.clone(),
            r.threshold_rule.clone().unwrap_or_default(),
            opt(s.threshold),
            s.variance.to_string(),
            s.se_variance.to_string(),
            s.bias2.to_string(),
            s.se_bias2.to_string(),
            s.mse.to_string(),
            s.se_mse.to_string(),
            s.mean_error.to_string(),
            s.se_mean_error.to_string(),
            s.reps_ok.to_string(),
            s.failures.to_string(),
            opt(s.mean_var_hat),
            opt(s.mean_eta),
            opt(s.se_eta),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Long format, one line per (grid point, method): `t,method,bias2,var,mse,se_mse`.
pub fn write_sweep_csv<W: Write>(sweep: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "method", "bias2", "var", "mse", "se_mse"])
        .map_err(io_err)?;
    for (i, t) in sweep.grid.iter().enumerate() {
        for c in &sweep.curves {
            let p = &c.points[i];
            w.write_record([
                t.to_string(),
                c.method.clone(),
                p.bias2.to_string(),
                p.variance.to_string(),
                p.mse.to_string(),
                p.se_mse.to_string(),
            ])
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

pub fn scenario_csv_string(res: &ScenarioResult) -> Result<String> {
    let mut buf = Vec::new();
    write_scenario_csv(res, &mut buf)?;
    String::from_utf8(buf).map_err(io_err)
}

pub fn sweep_csv_string(sweep: &SweepResult) -> Result<String> {
    let mut buf = Vec::new();
    write_sweep_csv(sweep, &mut buf)?;
    String::from_utf8(buf).map_err(io_err)
}
