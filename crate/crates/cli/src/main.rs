//! `tailtilt` command-line front end.
//!
//! Reports are JSON on stdout, curves are CSV. Failures print
//! `{"error": {"kind", "message"}}` on stderr and exit with 2 for usage or
//! configuration problems and 3 for estimation or model problems.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tailtilt::estimators::{
    pareto_tail_mean, sample_mean, semiparametric_estimate, winsorized_mean_k,
    winsorized_mean_threshold, MeanEstimate,
};
use tailtilt::evt::{resolve_kappa, resolve_threshold, KappaRule, ThresholdRule};
use tailtilt::io::{parse_grid, read_sample};
use tailtilt::sim::{
    run_scenario, scenario_csv_string, sweep_csv_string, threads_from_env, threshold_sweep,
    with_threads, ScenarioConfig,
};
use tailtilt::tilt::{build_tail_model, FitMethod};
use tailtilt::{Error, Result, Sample};

#[derive(Parser)]
#[command(name = "tailtilt", version, about = "Heavy-tail mean estimation by exponential tilting of a background sample")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit the tilted tail model and report the tilt.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Estimate the mean of the sample of interest.
    Mean {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long, value_enum, default_value = "semiparametric")]
        method: Method,
        /// Number of top values to cap (winsorized-k).
        #[arg(long)]
        k: Option<usize>,
    },
    /// Run a Monte Carlo scenario from a JSON config.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        overrides: RunOverrides,
        /// Also write the per-method table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sweep the threshold over a grid; CSV `t,method,bias2,var,mse,se_mse`.
    Sweep {
        config: PathBuf,
        /// `a,b,c` or `lo:hi:steps`.
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        overrides: RunOverrides,
    },
}

#[derive(clap::Args)]
struct DataArgs {
    /// Sample of interest: one value per line.
    #[arg(long)]
    x: PathBuf,
    /// Background sample.
    #[arg(long)]
    bg: Option<PathBuf>,
    /// Negate every value, turning a left tail into a right tail.
    #[arg(long)]
    negate: bool,
}

#[derive(clap::Args)]
struct PolicyArgs {
    /// fixed:<v>, quantile:<q> or gh.
    #[arg(long, default_value = "gh")]
    threshold: String,
    /// sg, t or fixed:<v>.
    #[arg(long, default_value = "sg")]
    kappa: String,
    #[arg(long, value_enum, default_value = "direct")]
    fit: Fit,
}

#[derive(clap::Args)]
struct RunOverrides {
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Replications; overrides the config.
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Semiparametric,
    WinsorizedT,
    WinsorizedK,
    Pareto,
    Sample,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fit {
    Direct,
    Logistic,
}

impl From<Fit> for FitMethod {
    fn from(f: Fit) -> Self {
        match f {
            Fit::Direct => FitMethod::Direct,
            Fit::Logistic => FitMethod::Logistic,
        }
    }
}

fn load_data(d: &DataArgs, need_bg: bool) -> Result<(Sample, Option<Sample>)> {
    let x = read_sample(&d.x, d.negate)?;
    let bg = match &d.bg {
        Some(p) => Some(read_sample(p, d.negate)?),
        None if need_bg => return Err(Error::Argument("--bg is required here".into())),
        None => None,
    };
    Ok((x, bg))
}

struct Policy {
    threshold: ThresholdRule,
    kappa: KappaRule,
    fit: FitMethod,
}

impl PolicyArgs {
    fn parse(&self) -> Result<Policy> {
        let threshold: ThresholdRule = self.threshold.parse()?;
        if matches!(threshold, ThresholdRule::Oracle(_)) {
            return Err(Error::Argument(
                "oracle thresholds only exist inside simulations".into(),
            ));
        }
        Ok(Policy {
            threshold,
            kappa: self.kappa.parse()?,
            fit: self.fit.into(),
        })
    }
}

fn cmd_fit(data: &DataArgs, policy: &PolicyArgs) -> Result<Value> {
    let p = policy.parse()?;
    let (x, bg) = load_data(data, true)?;
    let bg = bg.expect("required");
    let t = resolve_threshold(&p.threshold, &x, &bg)?;
    let kappa = resolve_kappa(&p.kappa, &bg, t)?;
    let m = build_tail_model(&x, &bg, t, kappa, p.fit)?;
    Ok(json!({
        "t": t,
        "kappa": kappa,
        "etaHat": m.eta_hat(),
        "psi": m.log_partition(),
        "p2Hat": m.p2_hat(),
        "tailMean": m.tail_mean(),
        "counts": {
            "n": m.n_x(),
            "nTail": m.n_tail_x(),
            "nBackground": bg.len(),
            "nBackgroundTail": m.n_tail_bg(),
        },
        "diagnostics": m.diagnostics(),
    }))
}

fn cmd_mean(data: &DataArgs, policy: &PolicyArgs, method: Method, k: Option<usize>) -> Result<Value> {
    let p = policy.parse()?;
    let needs_bg = matches!(method, Method::Semiparametric)
        || (matches!(method, Method::WinsorizedT | Method::Pareto)
            && matches!(p.threshold, ThresholdRule::BackgroundQuantile(_)));
    let (x, bg) = load_data(data, needs_bg)?;
    // rules that never look at the background still need a sample to pass
    let bg_ref = bg.as_ref().unwrap_or(&x);
    let threshold = || resolve_threshold(&p.threshold, &x, bg_ref);
    let mut eta = None;
    let est: MeanEstimate = match method {
        Method::Sample => sample_mean(&x)?,
        Method::WinsorizedK => {
            let k = k.ok_or_else(|| Error::Argument("--k is required for winsorized-k".into()))?;
            winsorized_mean_k(&x, k)?
        }
        Method::WinsorizedT => winsorized_mean_threshold(&x, threshold()?)?,
        Method::Pareto => pareto_tail_mean(&x, threshold()?)?,
        Method::Semiparametric => {
            let t = threshold()?;
            let kappa = resolve_kappa(&p.kappa, bg_ref, t)?;
            let (est, model) = semiparametric_estimate(&x, bg_ref, t, kappa, p.fit)?;
            eta = Some(model.eta_hat());
            est
        }
    };
    Ok(json!({
        "muHat": est.mu_hat,
        "varHat": est.var_hat,
        "method": est.method,
        "t": est.threshold,
        "kappa": est.kappa,
        "etaHat": eta,
    }))
}

fn load_config(path: &Path, o: &RunOverrides) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Io(format!("file not found: {}", path.display())),
        _ => Error::Io(format!("{}: {e}", path.display())),
    })?;
    let mut cfg = ScenarioConfig::from_json(&text)?;
    if let Some(s) = o.seed {
        cfg.master_seed = s;
    }
    if let Some(r) = o.reps {
        cfg.reps = r;
    }
    cfg.validate()?;
    Ok(cfg.resolved())
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

fn cmd_simulate(path: &Path, o: &RunOverrides, csv: Option<&Path>) -> Result<Value> {
    let cfg = load_config(path, o)?;
    let sc = cfg.load(base_dir(path))?;
    let res = run_scenario(&sc)?;
    if let Some(p) = csv {
        std::fs::write(p, scenario_csv_string(&res)?)
            .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(json!({ "config": cfg, "result": res }))
}

fn cmd_sweep(path: &Path, grid: &str, o: &RunOverrides) -> Result<String> {
    let grid = parse_grid(grid)?;
    let cfg = load_config(path, o)?;
    let sc = cfg.load(base_dir(path))?;
    sweep_csv_string(&threshold_sweep(&sc, &grid)?)
}

fn run(cli: Cli) -> Result<String> {
    let pretty = |v: Value| serde_json::to_string_pretty(&v).expect("JSON values serialize");
    match cli.cmd {
        Cmd::Fit { data, policy } => cmd_fit(&data, &policy).map(pretty),
        Cmd::Mean { data, policy, method, k } => cmd_mean(&data, &policy, method, k).map(pretty),
        Cmd::Simulate { config, overrides, csv } => {
            with_threads(threads_from_env(), || cmd_simulate(&config, &overrides, csv.as_deref()))
                .map(pretty)
        }
        Cmd::Sweep { config, grid, overrides } => {
            with_threads(threads_from_env(), || cmd_sweep(&config, &grid, &overrides))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let nl = if out.ends_with('\n') { "" } else { "\n" };
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            let _ = write!(stdout, "{out}{nl}").and_then(|_| stdout.flush());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{body}");
            ExitCode::from(if e.is_usage() { 2 } else { 3 })
        }
    }
}
