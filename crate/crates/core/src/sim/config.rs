//! Scenario configuration documents.
//!
//! A scenario is a JSON object:
//!
//! ```json
//! {
//!   "x":          {"dist": {"log_gamma": {"shape": 4.0, "scale": 0.45}}},
//!   "background": {"population": "bg.csv"},
//!   "n": 1000,
//!   "n_background": 100000,
//!   "reps": 500,
//!   "master_seed": 20140601,
//!   "redraw_background": true,
//!   "true_mean": null,
//!   "methods": [
//!     {"estimator": "semiparametric", "fit": "direct",
//!      "threshold": {"oracle": [10, 20, 40]}, "kappa": "sigma_over_gamma"},
//!     {"estimator": "winsorized_k", "k": 1}
//!   ]
//! }
//! ```
//!
//! Population paths are resolved relative to the directory of the config
//! file. Missing optional fields are filled in by [`ScenarioConfig::resolved`]
//! so that a resolved config can be echoed back for provenance.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distributions::{analytic_mean, sample, DistSpec, SeedSpec};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::evt::{KappaRule, ThresholdRule};
use crate::io::read_sample;
use crate::sample::{Provenance, Sample};
use crate::tilt::FitMethod;

/// Where a sample is drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    Dist(DistSpec),
    /// Finite population resampled with replacement.
    Population(PathBuf),
}

/// One estimator with its threshold and bandwidth policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub estimator: EstimatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<KappaRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl MethodSpec {
    pub fn new(estimator: EstimatorKind) -> Self {
        Self {
            label: None,
            estimator,
            fit: None,
            threshold: None,
            kappa: None,
            k: None,
        }
    }

    pub fn with_threshold(mut self, rule: ThresholdRule) -> Self {
        self.threshold = Some(rule);
        self
    }

    pub fn with_kappa(mut self, rule: KappaRule) -> Self {
        self.kappa = Some(rule);
        self
    }

    pub fn with_fit(mut self, fit: FitMethod) -> Self {
        self.fit = Some(fit);
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn uses_threshold(&self) -> bool {
        matches!(
            self.estimator,
            EstimatorKind::Semiparametric
                | EstimatorKind::WinsorizedThreshold
                | EstimatorKind::ParetoTail
        )
    }

    /// Label used in reports: the explicit label, or one built from the
    /// estimator and its policies.
    pub fn display_label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let base = match self.estimator {
            EstimatorKind::Semiparametric => "semiparametric",
            EstimatorKind::WinsorizedThreshold => "winsorized",
            EstimatorKind::WinsorizedK => "winsorized_k",
            EstimatorKind::ParetoTail => "pareto",
            EstimatorKind::SampleMean => "sample_mean",
        };
        let mut s = base.to_string();
        if self.estimator == EstimatorKind::WinsorizedK {
            s.push_str(&format!("[k={}]", self.k.unwrap_or(1)));
        }
        if let Some(rule) = &self.threshold {
            let tag = match rule {
                ThresholdRule::Oracle(_) => "oracle".to_string(),
                other => other.to_string(),
            };
            s.push_str(&format!("[{tag}]"));
        }
        if self.estimator == EstimatorKind::Semiparametric {
            if let Some(FitMethod::Logistic) = self.fit {
                s.push_str("[logistic]");
            }
        }
        s
    }

    fn validate(&self, path: &str) -> Result<()> {
        let cfg_err = |field: &str, message: String| Error::Config {
            path: format!("{path}.{field}"),
            message,
        };
        if self.uses_threshold() && self.threshold.is_none() {
            return Err(cfg_err("threshold", "required for this estimator".into()));
        }
        if let Some(rule) = &self.threshold {
            rule.validate().map_err(|e| cfg_err("threshold", e.to_string()))?;
        }
        if let Some(rule) = &self.kappa {
            rule.validate().map_err(|e| cfg_err("kappa", e.to_string()))?;
        }
        if let Some(0) = self.k {
            return Err(cfg_err("k", "must be at least 1".into()));
        }
        if let Some(FitMethod::Fixed(eta)) = self.fit {
            if !eta.is_finite() {
                return Err(cfg_err("fit", "fixed tilt must be finite".into()));
            }
        }
        Ok(())
    }

    fn resolved(&self) -> Self {
        let mut m = self.clone();
        match m.estimator {
            EstimatorKind::Semiparametric => {
                m.fit.get_or_insert(FitMethod::Direct);
                m.kappa.get_or_insert(KappaRule::SigmaOverGamma);
            }
            EstimatorKind::WinsorizedK => {
                m.k.get_or_insert(1);
            }
            _ => {}
        }
        m
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub x: Source,
    pub background: Source,
    pub n: usize,
    pub n_background: usize,
    pub reps: usize,
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_true")]
    pub redraw_background: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_mean: Option<f64>,
}

impl ScenarioConfig {
    /// Parses and validates a JSON document; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config {
                path: if path.is_empty() { "$".into() } else { path },
                message: e.into_inner().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |path: &str, message: &str| {
            Err(Error::Config {
                path: path.into(),
                message: message.into(),
            })
        };
        if self.n == 0 {
            return err("n", "must be at least 1");
        }
        if self.n_background == 0 {
            return err("n_background", "must be at least 1");
        }
        if self.reps < 2 {
            return err("reps", "must be at least 2");
        }
        if self.methods.is_empty() {
            return err("methods", "at least one method is required");
        }
        for (src, name) in [(&self.x, "x"), (&self.background, "background")] {
            if let Source::Dist(d) = src {
                d.validate().map_err(|e| Error::Config {
                    path: format!("{name}.dist"),
                    message: e.to_string(),
                })?;
            }
        }
        if let Some(m) = self.true_mean {
            if !m.is_finite() {
                return err("true_mean", "must be finite");
            }
        }
        for (i, m) in self.methods.iter().enumerate() {
            m.validate(&format!("methods[{i}]"))?;
        }
        Ok(())
    }

    /// Copy with every defaultable field filled in.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.methods = self.methods.iter().map(MethodSpec::resolved).collect();
        c
    }

    /// Loads populations (relative to `base_dir`) and fixes the true mean.
    pub fn load(&self, base_dir: &Path) -> Result<Scenario> {
        self.validate()?;
        let load_source = |src: &Source, name: &str| -> Result<Drawer> {
            match src {
                Source::Dist(d) => Ok(Drawer::Dist(*d)),
                Source::Population(p) => {
                    let path = if p.is_absolute() { p.clone() } else { base_dir.join(p) };
                    let s = read_sample(&path, false).map_err(|e| Error::Config {
                        path: format!("{name}.population"),
                        message: e.to_string(),
                    })?;
                    Ok(Drawer::Population(Arc::new(s)))
                }
            }
        };
        let x = load_source(&self.x, "x")?;
        let background = load_source(&self.background, "background")?;
        let true_mean = match self.true_mean {
            Some(m) => m,
            None => x.mean().map_err(|e| Error::Config {
                path: "true_mean".into(),
                message: format!("not given and cannot be derived: {e}"),
            })?,
        };
        Ok(Scenario {
            config: self.resolved(),
            x,
            background,
            true_mean,
        })
    }
}

/// A population or distribution ready to draw from.
#[derive(Debug, Clone)]
pub enum Drawer {
    Dist(DistSpec),
    Population(Arc<Sample>),
}

impl Drawer {
    pub fn mean(&self) -> Result<f64> {
        match self {
            Drawer::Dist(d) => analytic_mean(d),
            Drawer::Population(p) => p
                .mean()
                .ok_or_else(|| Error::Argument("empty population".into())),
        }
    }

    /// `n` draws: i.i.d. from the distribution, or uniformly with
    /// replacement from the population.
    pub fn draw(&self, n: usize, seed: SeedSpec) -> Result<Sample> {
        match self {
            Drawer::Dist(d) => sample(d, n, seed),
            Drawer::Population(pop) => {
                use rand::Rng;
                if n == 0 {
                    return Err(Error::Argument("sample size must be at least 1".into()));
                }
                let mut rng = seed.rng();
                let v = pop.values();
                let draws: Vec<f64> = (0..n).map(|_| v[rng.gen_range(0..v.len())]).collect();
                Sample::new(
                    draws,
                    Provenance::Drawn {
                        dist: "population resample".into(),
                        master_seed: seed.master_seed,
                        stream_id: seed.stream_id,
                    },
                )
            }
        }
    }
}

/// A validated config with its data sources loaded.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub x: Drawer,
    pub background: Drawer,
    pub true_mean: f64,
}

impl Scenario {
    /// Builds a scenario directly from in-memory drawers.
    pub fn new(config: ScenarioConfig, x: Drawer, background: Drawer) -> Result<Self> {
        config.validate()?;
        let true_mean = match config.true_mean {
            Some(m) => m,
            None => x.mean()?,
        };
        Ok(Self {
            config: config.resolved(),
            x,
            background,
            true_mean,
        })
    }
}
