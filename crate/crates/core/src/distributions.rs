//! Log-gamma, generalized Pareto and Pareto families: samplers, CDFs and
//! analytic moments, plus the seeding contract used by the simulation harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{Provenance, Sample};

/// Below this magnitude of the tail index the GPD formulas switch to their
/// exponential-limit series.
const GAMMA_SERIES_CUTOFF: f64 = 1e-8;

/// A distribution family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    /// `log X ~ Gamma(shape, scale)`; regularly varying with tail index `scale`.
    LogGamma { shape: f64, scale: f64 },
    /// Generalized Pareto with tail index `gamma`, scale `sigma`, shifted to start at `location`.
    Gpd {
        gamma: f64,
        sigma: f64,
        #[serde(default)]
        location: f64,
    },
    /// Exact Pareto with tail index `gamma` (survival `(x / scale)^(-1/gamma)`).
    Pareto { gamma: f64, scale: f64 },
}

impl DistSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = |cond: bool, what: &str| {
            if cond {
                Ok(())
            } else {
                Err(Error::Domain(format!("{self:?}: {what}")))
            }
        };
        match *self {
            DistSpec::LogGamma { shape, scale } => {
                ok(shape > 0.0 && shape.is_finite(), "shape must be positive")?;
                ok(scale > 0.0 && scale.is_finite(), "scale must be positive")
            }
            DistSpec::Gpd {
                gamma,
                sigma,
                location,
            } => {
                ok(gamma.is_finite(), "tail index must be finite")?;
                ok(location.is_finite(), "location must be finite")?;
                ok(sigma > 0.0 && sigma.is_finite(), "sigma must be positive")
            }
            DistSpec::Pareto { gamma, scale } => {
                ok(gamma > 0.0 && gamma.is_finite(), "tail index must be positive")?;
                ok(scale > 0.0 && scale.is_finite(), "scale must be positive")
            }
        }
    }

    /// Short label used in provenance strings.
    pub fn label(&self) -> String {
        match *self {
            DistSpec::LogGamma { shape, scale } => format!("LogGamma({shape}, {scale})"),
            DistSpec::Gpd {
                gamma,
                sigma,
                location,
            } => format!("GPD({gamma}, {sigma}, {location})"),
            DistSpec::Pareto { gamma, scale } => format!("Pareto({gamma}, {scale})"),
        }
    }

    /// Inverse CDF for the families that have one in closed form.
    /// Log-gamma has none and returns `None`.
    pub fn quantile(&self, u: f64) -> Option<f64> {
        match *self {
            DistSpec::LogGamma { .. } => None,
            DistSpec::Gpd {
                gamma,
                sigma,
                location,
            } => Some(location + gpd_quantile(gamma, sigma, u)),
            DistSpec::Pareto { gamma, scale } => Some(scale * (-gamma * (-u).ln_1p()).exp()),
        }
    }
}

/// Seed pair for one reproducible random stream.
///
/// The stream is a ChaCha8 generator keyed by `master_seed` with its stream
/// selector set to `stream_id`, so draws for stream `r` never depend on how
/// many other streams were consumed first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Derives an independent seed family for a named role (x sample,
    /// background sample, ...) sharing the same stream index.
    pub fn with_role(self, role: u64) -> Self {
        Self {
            master_seed: splitmix64(self.master_seed ^ splitmix64(role.wrapping_add(1))),
            stream_id: self.stream_id,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draws `n` i.i.d. observations. Deterministic in `seed`.
pub fn sample(spec: &DistSpec, n: usize, seed: SeedSpec) -> Result<Sample> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Argument("sample size must be at least 1".into()));
    }
    let mut rng = seed.rng();
    let values = draw(spec, n, &mut rng)?;
    Sample::new(
        values,
        Provenance::Drawn {
            dist: spec.label(),
            master_seed: seed.master_seed,
            stream_id: seed.stream_id,
        },
    )
}

fn draw<R: Rng>(spec: &DistSpec, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    match *spec {
        DistSpec::LogGamma { shape, scale } => {
            let g = Gamma::new(shape, scale).map_err(|e| Error::Domain(e.to_string()))?;
            Ok((0..n).map(|_| g.sample(rng).exp()).collect())
        }
        _ => Ok((0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                spec.quantile(u).expect("closed-form quantile")
            })
            .collect()),
    }
}

/// Population mean, when it exists.
pub fn analytic_mean(spec: &DistSpec) -> Result<f64> {
    spec.validate()?;
    match *spec {
        DistSpec::LogGamma { shape, scale } => {
            if scale >= 1.0 {
                return Err(Error::Domain(format!(
                    "log-gamma mean requires scale < 1 (got {scale})"
                )));
            }
            Ok((1.0 - scale).powf(-shape))
        }
        DistSpec::Gpd {
            gamma,
            sigma,
            location,
        } => {
            if gamma >= 1.0 {
                return Err(Error::Domain(format!(
                    "GPD mean requires tail index < 1 (got {gamma})"
                )));
            }
            Ok(location + sigma / (1.0 - gamma))
        }
        DistSpec::Pareto { gamma, scale } => {
            if gamma >= 1.0 {
                return Err(Error::Domain(format!(
                    "Pareto mean requires tail index < 1 (got {gamma})"
                )));
            }
            Ok(scale / (1.0 - gamma))
        }
    }
}

/// Population variance, when it exists.
pub fn analytic_variance(spec: &DistSpec) -> Result<f64> {
    spec.validate()?;
    match *spec {
        DistSpec::LogGamma { shape, scale } => {
            if scale >= 0.5 {
                return Err(Error::Domain(format!(
                    "log-gamma variance requires scale < 1/2 (got {scale})"
                )));
            }
            Ok((1.0 - 2.0 * scale).powf(-shape) - (1.0 - scale).powf(-2.0 * shape))
        }
        DistSpec::Gpd { gamma, sigma, .. } => {
            if gamma >= 0.5 {
                return Err(Error::Domain(format!(
                    "GPD variance requires tail index < 1/2 (got {gamma})"
                )));
            }
            Ok(sigma * sigma / ((1.0 - gamma).powi(2) * (1.0 - 2.0 * gamma)))
        }
        DistSpec::Pareto { gamma, scale } => {
            if gamma >= 0.5 {
                return Err(Error::Domain(format!(
                    "Pareto variance requires tail index < 1/2 (got {gamma})"
                )));
            }
            Ok(scale * scale * gamma * gamma / ((1.0 - gamma).powi(2) * (1.0 - 2.0 * gamma)))
        }
    }
}

/// `log1p(gamma * z) / gamma`, continuous through `gamma = 0`.
fn log1p_over_gamma(gamma: f64, z: f64) -> f64 {
    if gamma.abs() < GAMMA_SERIES_CUTOFF {
        z - 0.5 * gamma * z * z
    } else {
        (gamma * z).ln_1p() / gamma
    }
}

fn check_gpd_support(gamma: f64, sigma: f64, x: f64) -> Result<()> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("GPD scale must be positive (got {sigma})")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("GPD argument {x} below support")));
    }
    if gamma < 0.0 && x > -sigma / gamma {
        return Err(Error::Domain(format!(
            "GPD argument {x} above upper endpoint {}",
            -sigma / gamma
        )));
    }
    Ok(())
}

/// `H(x) = 1 - (1 + gamma x / sigma)^(-1/gamma)`, with the exponential limit at `gamma = 0`.
pub fn gpd_cdf(gamma: f64, sigma: f64, x: f64) -> Result<f64> {
    check_gpd_support(gamma, sigma, x)?;
    Ok(-(-log1p_over_gamma(gamma, x / sigma)).exp_m1())
}

/// Log density of the GPD at `x >= 0`.
pub fn gpd_log_density(gamma: f64, sigma: f64, x: f64) -> Result<f64> {
    check_gpd_support(gamma, sigma, x)?;
    if gamma < 0.0 && x >= -sigma / gamma {
        return Ok(f64::NEG_INFINITY);
    }
    let z = x / sigma;
    let l = if gamma.abs() < GAMMA_SERIES_CUTOFF {
        z
    } else {
        (1.0 + 1.0 / gamma) * (gamma * z).ln_1p()
    };
    Ok(-sigma.ln() - l)
}

/// Inverse CDF: `sigma ((1 - u)^(-gamma) - 1) / gamma`.
pub fn gpd_quantile(gamma: f64, sigma: f64, u: f64) -> f64 {
    let l = -(-u).ln_1p();
    if gamma.abs() < GAMMA_SERIES_CUTOFF {
        sigma * l * (1.0 + 0.5 * gamma * l)
    } else {
        sigma * (gamma * l).exp_m1() / gamma
    }
}
