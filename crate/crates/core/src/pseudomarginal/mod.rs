//! Pseudo-marginal estimation of the reconstruction normaliser `μ_λ(z)`:
//! a tensorized histogram of reconstruction iterates serves as the
//! importance density.

mod estimator;
mod histogram;

use std::fmt;

use thiserror::Error;

use crate::model::GeometryError;

pub use estimator::{
    default_bin_width, estimate_log_mu_lambda, estimate_log_mu_lambda_reuse, log_mu_ext,
};
pub use histogram::TensorHistogram;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("no samples to build a histogram from")]
    EmptySamples,
    #[error("bin width must be positive and finite, got {0}")]
    InvalidBinWidth(f64),
    #[error("sample of dimension {got} among samples of dimension {expected}")]
    RaggedSamples { expected: usize, got: usize },
    #[error("histogram has dimension {histogram}, system has {system}")]
    DimensionMismatch { histogram: usize, system: usize },
    #[error("K_eval must be at least 1")]
    NoDraws,
    #[error("every importance weight vanished")]
    Degenerate,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Natural-log weight. Finite or `−∞`, never NaN.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogWeight(f64);

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight(f64::NEG_INFINITY);
    pub const ONE: LogWeight = LogWeight(0.0);

    /// Panics on NaN or `+∞`.
    pub fn new(v: f64) -> Self {
        Self::try_new(v).unwrap_or_else(|| panic!("invalid log weight {v}"))
    }

    pub fn try_new(v: f64) -> Option<Self> {
        (v < f64::INFINITY || v == f64::NEG_INFINITY).then_some(Self(v))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl fmt::Display for LogWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `log((1/n) Σ exp(w_k))` with the maximum factored out. `−∞` entries
/// contribute nothing; an all-`−∞` (or empty) input gives `−∞`.
pub fn log_mean_exp(log_weights: &[f64]) -> LogWeight {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogWeight::ZERO;
    }
    let sum: f64 = log_weights.iter().map(|w| (w - max).exp()).sum();
    LogWeight::new(max + sum.ln() - (log_weights.len() as f64).ln())
}
