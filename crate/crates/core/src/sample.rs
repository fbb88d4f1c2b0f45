//! Immutable sorted samples.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Where a sample came from. Carried along for reports; never affects results.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Provenance {
    #[default]
    Inline,
    /// Drawn from a distribution with the given seed pair.
    Drawn {
        dist: String,
        master_seed: u64,
        stream_id: u64,
    },
    /// Read from a data file.
    File(String),
    /// Computed from another sample (e.g. threshold excesses).
    Derived(String),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Inline => write!(f, "inline"),
            Provenance::Drawn {
                dist,
                master_seed,
                stream_id,
            } => write!(f, "{dist} (seed {master_seed}/{stream_id})"),
            Provenance::File(p) => write!(f, "file {p}"),
            Provenance::Derived(d) => write!(f, "derived: {d}"),
        }
    }
}

/// A sorted (ascending) vector of finite observations.
///
/// Cloning is cheap: the values live behind an `Arc`.
#[derive(Debug, Clone)]
pub struct Sample {
    values: Arc<[f64]>,
    provenance: Provenance,
}

impl PartialEq for Sample {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Sample {
    /// Sorts and validates `values`. Rejects NaN and infinities.
    pub fn new(mut values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "observation {i} is not finite ({})",
                values[i]
            )));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self {
            values: values.into(),
            provenance,
        })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Provenance::Inline)
    }

    /// Wraps values the caller guarantees are finite and sorted.
    pub(crate) fn from_sorted_unchecked(values: Vec<f64>, provenance: Provenance) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self {
            values: values.into(),
            provenance,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Sums the sorted values in outer pairs `v[i] + v[n-1-i]`. Negation
    /// reverses the sorted order and maps every pair onto its negative, so
    /// `negated().mean()` is exactly `-mean()`.
    pub fn mean(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let v = &self.values;
        let n = v.len();
        let mut s: f64 = (0..n / 2).map(|i| v[i] + v[n - 1 - i]).sum();
        if n % 2 == 1 {
            s += v[n / 2];
        }
        Some(s / n as f64)
    }

    /// The `i`-th largest value, 1-based (`order_desc(1)` is the maximum).
    pub fn order_desc(&self, i: usize) -> Option<f64> {
        if i == 0 || i > self.len() {
            None
        } else {
            Some(self.values[self.len() - i])
        }
    }

    /// Index of the first value strictly greater than `t`.
    pub fn upper_index(&self, t: f64) -> usize {
        self.values.partition_point(|&v| v <= t)
    }

    /// Number of observations strictly above `t`.
    pub fn count_above(&self, t: f64) -> usize {
        self.len() - self.upper_index(t)
    }

    /// Values `<= t`.
    pub fn body(&self, t: f64) -> &[f64] {
        &self.values[..self.upper_index(t)]
    }

    /// Values `> t`.
    pub fn tail(&self, t: f64) -> &[f64] {
        &self.values[self.upper_index(t)..]
    }

    /// Excesses `v - t` for every `v > t`, as a new sample.
    pub fn excesses(&self, t: f64) -> Sample {
        let ex: Vec<f64> = self.tail(t).iter().map(|&v| v - t).collect();
        Sample::from_sorted_unchecked(ex, Provenance::Derived(format!("excesses above {t}")))
    }

    /// Empirical `q`-quantile by linear interpolation between order
    /// statistics at position `(len - 1) * q` (the "type 7" convention).
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::Argument("quantile of an empty sample".into()));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Argument(format!("quantile level {q} outside [0, 1]")));
        }
        let h = (self.len() - 1) as f64 * q;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(self.len() - 1);
        let frac = h - lo as f64;
        Ok(self.values[lo] + frac * (self.values[hi] - self.values[lo]))
    }

    /// Multiplies every value by `c`. Order is preserved for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Sample> {
        if !(c > 0.0) {
            return Err(Error::Argument(format!("scale factor {c} must be positive")));
        }
        Sample::new(
            self.values.iter().map(|v| v * c).collect(),
            Provenance::Derived(format!("scaled by {c}")),
        )
    }

    /// Negates every value (left-tail mode).
    pub fn negated(&self) -> Sample {
        let v: Vec<f64> = self.values.iter().rev().map(|v| -v).collect();
        Sample::from_sorted_unchecked(v, Provenance::Derived("negated".into()))
    }
}
