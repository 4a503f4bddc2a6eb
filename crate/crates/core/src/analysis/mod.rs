//! Quadrature oracles and post-processing statistics.

mod kernel;
mod quadrature;

pub use self::kernel::{kernel_mean_variance, KernelNormalization, KernelParams, KernelPoint};
pub use self::quadrature::{
    bin_probabilities, integrate, quadrature_expectation, quadrature_mu_lambda, reconstruction_marginal,
    wrapped_gaussian, QuadratureError, REL_TOL,
};

/// `(1/R) Σ (est_i − truth)²`. NaN for no estimates.
pub fn mse(estimates: &[f64], truth: f64) -> f64 {
    estimates.iter().map(|e| (e - truth).powi(2)).sum::<f64>() / estimates.len() as f64
}

/// `(mse_base/mse_new)·(time_base/time_new)`; `+∞` when `mse_new` is zero.
pub fn efficiency_gain(mse_base: f64, mse_new: f64, time_base: f64, time_new: f64) -> f64 {
    if mse_new == 0.0 {
        log::warn!("candidate MSE is exactly zero; efficiency gain is infinite");
        return f64::INFINITY;
    }
    (mse_base / mse_new) * (time_base / time_new)
}

/// Sample mean, unbiased variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

impl Summary {
    /// Variance and stderr are NaN below two values.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let variance = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            f64::NAN
        };
        Self { n, mean, variance, stderr: (variance / n as f64).sqrt() }
    }
}

/// `½ Σ |p_i − q_i|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions over different bins");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Fraction of `samples` in each bin `[edges[i], edges[i+1])`; samples
/// outside the edges are counted in the denominator only.
pub fn empirical_bin_probabilities(samples: &[f64], edges: &[f64]) -> Vec<f64> {
    let mut counts = vec![0u64; edges.len() - 1];
    for &s in samples {
        let j = edges.partition_point(|&e| e <= s);
        if j >= 1 && j < edges.len() {
            counts[j - 1] += 1;
        }
    }
    counts.iter().map(|&c| c as f64 / samples.len() as f64).collect()
}

/// `n + 1` equispaced edges from `lo` to `hi`.
pub fn uniform_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}
