//! Semiparametric estimation of heavy tails by exponential tilting of a
//! large background sample.
//!
//! The sample of interest `x` and a much larger background sample `bg` are
//! split at a threshold `t`. Below `t` the empirical law of `x` is used as is.
//! Above `t`, the excesses of `x` are modelled as an exponential tilt of the
//! empirical background excesses with sufficient statistic
//! `T(e) = e / (kappa + e)`; see [`tilt`]. The induced mean estimator and its
//! plug-in variance live in [`estimators`], and [`sim`] runs Monte Carlo
//! comparisons against Winsorization and parametric Pareto-tail baselines.

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod evt;
pub mod io;
pub mod roots;
pub mod sample;
pub mod sim;
pub mod tilt;

pub use error::{Error, Result};
pub use sample::{Provenance, Sample};
