use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the library.
///
/// The variants split into two families that the CLI maps onto distinct exit
/// codes: input problems (`Argument`, `Io`, `Parse`, `Config`) and
/// estimation/model problems (everything else).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain of a distribution or statistic.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-supplied argument is out of range (e.g. `k >= n`).
    #[error("argument error: {0}")]
    Argument(String),

    /// A numerical solver failed to converge.
    #[error("solver error: {message} (bracket [{lo}, {hi}], {iterations} iterations)")]
    Solver {
        message: String,
        lo: f64,
        hi: f64,
        iterations: usize,
    },

    /// The moment-matching target lies outside the open range of the carrier.
    #[error("no tilt solves the moment condition: target mean {target} outside ({min}, {max})")]
    NoSolution { target: f64, min: f64, max: f64 },

    /// Every carrier point has the same sufficient statistic.
    #[error("degenerate carrier: all background T values equal {0}")]
    DegenerateCarrier(f64),

    /// The two classes are perfectly separated by T in the logistic fit.
    #[error("perfect separation in T ({0}); raise the threshold or use the direct fitter")]
    Separation(String),

    /// The tail model could not be built from the supplied samples.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// A fitted tail index implies the mean does not exist.
    #[error("infinite mean: fitted tail index {0} >= 1")]
    InfiniteMean(f64),

    /// A parametric fit failed (degenerate data, nonpositive tail index, ...).
    #[error("fit error: {0}")]
    Fit(String),

    /// A variance could not be formed because a conditional variance vanished.
    #[error("degeneracy error: {0}")]
    Degeneracy(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A configuration document failed validation; `path` names the field.
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
}

impl Error {
    /// True for errors caused by malformed input rather than by the data
    /// failing to support an estimate.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Argument(_) | Error::Io(_) | Error::Parse { .. } | Error::Config { .. }
        )
    }

    /// Short machine-readable kind tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Argument(_) => "argument",
            Error::Solver { .. } => "solver",
            Error::NoSolution { .. } => "no_solution",
            Error::DegenerateCarrier(_) => "degenerate_carrier",
            Error::Separation(_) => "separation",
            Error::Estimation(_) => "estimation",
            Error::InfiniteMean(_) => "infinite_mean",
            Error::Fit(_) => "fit",
            Error::Degeneracy(_) => "degeneracy",
            Error::Io(_) => "io",
            Error::Parse { .. } => "parse",
            Error::Config { .. } => "config",
        }
    }
}
