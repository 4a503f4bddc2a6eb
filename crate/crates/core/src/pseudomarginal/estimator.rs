//! Importance-sampling estimate of `Z_V·μ_λ(z)` with a tensorized histogram
//! as proposal. `Z_V` never appears; it cancels in every acceptance ratio.

use std::f64::consts::PI;

use rand::Rng;

use super::{log_mean_exp, EstimatorError, LogWeight, TensorHistogram};
use crate::model::{Configuration, MolecularSystem, RcValue};

/// `sqrt(1/(2λ))`, the width of the reconstruction constraint.
pub fn default_bin_width(lambda: f64) -> f64 {
    (1.0 / (2.0 * lambda)).sqrt()
}

/// `log μ̂_ext(z, x) = ½ log(λβ/2π) − βλ·wrap(ξ(x) − z)²/2 − βV(x)`.
///
/// Points where `V` or `ξ` is undefined carry zero weight.
pub fn log_mu_ext<S: MolecularSystem + ?Sized>(sys: &S, x: &[f64], z: RcValue, lambda: f64, beta: f64) -> f64 {
    let (v, xi) = match (sys.potential(x), sys.rc_value(x)) {
        (Ok(v), Ok(xi)) => (v, xi),
        _ => return f64::NEG_INFINITY,
    };
    let d = xi.diff(z);
    let w = 0.5 * (lambda * beta / (2.0 * PI)).ln() - 0.5 * beta * lambda * d * d - beta * v;
    if w.is_nan() {
        f64::NEG_INFINITY
    } else {
        w
    }
}

fn check_dim<S: MolecularSystem + ?Sized>(hist: &TensorHistogram, sys: &S) -> Result<(), EstimatorError> {
    if hist.dim() != sys.dim() {
        return Err(EstimatorError::DimensionMismatch { histogram: hist.dim(), system: sys.dim() });
    }
    Ok(())
}

fn finish(log_weights: &[f64]) -> Result<LogWeight, EstimatorError> {
    let est = log_mean_exp(log_weights);
    if est.is_zero() {
        Err(EstimatorError::Degenerate)
    } else {
        Ok(est)
    }
}

/// Draws `k_eval` fresh points from `hist` and averages
/// `μ̂_ext(z, y) / H(y)` in log space.
pub fn estimate_log_mu_lambda<S, R>(
    z: RcValue,
    hist: &TensorHistogram,
    k_eval: usize,
    sys: &S,
    lambda: f64,
    beta: f64,
    rng: &mut R,
) -> Result<LogWeight, EstimatorError>
where
    S: MolecularSystem + ?Sized,
    R: Rng + ?Sized,
{
    if k_eval == 0 {
        return Err(EstimatorError::NoDraws);
    }
    check_dim(hist, sys)?;
    let mut y = vec![0.0; hist.dim()];
    let weights: Vec<f64> = (0..k_eval)
        .map(|_| {
            hist.sample_into(rng, &mut y);
            log_mu_ext(sys, &y, z, lambda, beta) - hist.log_density(&y).value()
        })
        .collect();
    finish(&weights)
}

/// Same average over the construction samples themselves. Cheaper, and
/// biased because the proposal depends on the points it is evaluated at.
pub fn estimate_log_mu_lambda_reuse<S>(
    z: RcValue,
    samples: &[Configuration],
    hist: &TensorHistogram,
    sys: &S,
    lambda: f64,
    beta: f64,
) -> Result<LogWeight, EstimatorError>
where
    S: MolecularSystem + ?Sized,
{
    if samples.is_empty() {
        return Err(EstimatorError::EmptySamples);
    }
    check_dim(hist, sys)?;
    let weights: Vec<f64> = samples
        .iter()
        .map(|y| log_mu_ext(sys, y, z, lambda, beta) - hist.log_density(y).value())
        .collect();
    finish(&weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{QuadraticToy, Shifted};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// `∫ μ̂_ext(z, x) dx` for `V = ½κx²`, `ξ = x`.
    fn toy_closed_form(kappa: f64, lambda: f64, beta: f64, z: f64) -> f64 {
        (lambda / (lambda + kappa)).sqrt() * (-beta * kappa * lambda * z * z / (2.0 * (kappa + lambda))).exp()
    }

    /// Exact draws from `ν_λ(·|z)`: Gaussian with precision `β(κ+λ)` and mean `λz/(κ+λ)`.
    fn exact_reconstruction(kappa: f64, lambda: f64, beta: f64, z: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Configuration> {
        let mean = lambda * z / (kappa + lambda);
        let sd = (1.0 / (beta * (kappa + lambda))).sqrt();
        (0..n)
            .map(|_| Configuration::from_flat(vec![mean + sd * rng.sample::<f64, _>(StandardNormal)]).unwrap())
            .collect()
    }

    /// `∫ μ̂_ext(z, x) dx` over the occupied bins of `hist` (composite Simpson).
    fn covered_mass(sys: &QuadraticToy, hist: &TensorHistogram, z: f64, lambda: f64, beta: f64) -> f64 {
        let h = hist.bin_width();
        let n = 2000;
        let dx = h / n as f64;
        hist.axis_bins(0)
            .map(|(l, _)| {
                let f = |i: usize| log_mu_ext(sys, &[l as f64 * h + i as f64 * dx], RcValue::new(z), lambda, beta).exp();
                let inner: f64 = (1..n).map(|i| if i % 2 == 1 { 4.0 * f(i) } else { 2.0 * f(i) }).sum();
                (f(0) + inner + f(n)) * dx / 3.0
            })
            .sum()
    }

    fn mean_and_se(vals: &[f64]) -> (f64, f64) {
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn conditionally_unbiased_for_the_covered_mass() {
        let (kappa, lambda, beta, z) = (1.0, 4.0, 1.0, 0.7);
        let sys = QuadraticToy::one_dim(kappa);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples = exact_reconstruction(kappa, lambda, beta, z, 50, &mut rng);
        let hist = TensorHistogram::build(&samples, default_bin_width(lambda)).unwrap();
        let target = covered_mass(&sys, &hist, z, lambda, beta);
        assert!(target < toy_closed_form(kappa, lambda, beta, z));
        let vals: Vec<f64> = (0..10_000)
            .map(|_| {
                estimate_log_mu_lambda(RcValue::new(z), &hist, 50, &sys, lambda, beta, &mut rng)
                    .unwrap()
                    .value()
                    .exp()
            })
            .collect();
        let (mean, se) = mean_and_se(&vals);
        assert!((mean - target).abs() < 3.0 * se, "mean {mean} covered {target} se {se}");
    }

    #[test]
    fn unbiased_when_bins_cover_the_target() {
        // Bins much wider than the spread of ν_λ: no mass escapes the support.
        let (kappa, lambda, beta, z) = (1.0, 4.0, 400.0, 0.05);
        let sys = QuadraticToy::one_dim(kappa);
        let truth = toy_closed_form(kappa, lambda, beta, z);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = default_bin_width(lambda);
        let vals: Vec<f64> = (0..10_000)
            .map(|_| {
                let samples = exact_reconstruction(kappa, lambda, beta, z, 50, &mut rng);
                let hist = TensorHistogram::build(&samples, h).unwrap();
                estimate_log_mu_lambda(RcValue::new(z), &hist, 50, &sys, lambda, beta, &mut rng)
                    .unwrap()
                    .value()
                    .exp()
            })
            .collect();
        let (mean, se) = mean_and_se(&vals);
        assert!((mean - truth).abs() < 3.0 * se, "mean {mean} truth {truth} se {se}");
    }

    #[test]
    fn constant_shift_moves_estimate_by_beta_c() {
        let sys = QuadraticToy::two_dim(2.0, 0.5);
        let c = 1.0e4;
        let shifted = Shifted { inner: sys.clone(), offset: c };
        let beta = 0.5;
        let lambda = 10.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples: Vec<_> = (0..30)
            .map(|_| Configuration::from_flat(vec![rng.random::<f64>() - 0.5, rng.random::<f64>()]).unwrap())
            .collect();
        let hist = TensorHistogram::build(&samples, default_bin_width(lambda)).unwrap();
        let z = RcValue::new(0.1);
        let a = estimate_log_mu_lambda(z, &hist, 40, &sys, lambda, beta, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = estimate_log_mu_lambda(z, &hist, 40, &shifted, lambda, beta, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert!((b.value() - a.value() + beta * c).abs() < 1e-9);
        let a = estimate_log_mu_lambda_reuse(z, &samples, &hist, &sys, lambda, beta).unwrap();
        let b = estimate_log_mu_lambda_reuse(z, &samples, &hist, &shifted, lambda, beta).unwrap();
        assert!((b.value() - a.value() + beta * c).abs() < 1e-9);
    }

    #[test]
    fn reuse_with_identical_samples_is_a_single_term() {
        let sys = QuadraticToy::one_dim(3.0);
        let (lambda, beta) = (8.0, 2.0);
        let x = Configuration::from_flat(vec![0.3]).unwrap();
        let samples = vec![x.clone(); 7];
        let h = default_bin_width(lambda);
        let hist = TensorHistogram::build(&samples, h).unwrap();
        let z = RcValue::new(-0.2);
        let est = estimate_log_mu_lambda_reuse(z, &samples, &hist, &sys, lambda, beta).unwrap();
        let expected = log_mu_ext(&sys, &x, z, lambda, beta) - (1.0 / h).ln();
        assert!((est.value() - expected).abs() < 1e-13);
        let again = estimate_log_mu_lambda_reuse(z, &samples, &hist, &sys, lambda, beta).unwrap();
        assert_eq!(est, again);
    }

    #[test]
    fn log_mu_ext_matches_direct_formula() {
        let sys = QuadraticToy::one_dim(2.0);
        let (lambda, beta) = (5.0, 0.8);
        let v = log_mu_ext(&sys, &[0.4], RcValue::new(0.1), lambda, beta);
        let direct = ((lambda * beta / (2.0 * PI)).sqrt()
            * (-beta * lambda * 0.09 / 2.0).exp()
            * (-beta * 0.5 * 2.0 * 0.16f64).exp())
        .ln();
        assert!((v - direct).abs() < 1e-14);
    }

    #[test]
    fn argument_errors() {
        let sys = QuadraticToy::one_dim(1.0);
        let hist = TensorHistogram::build(&[Configuration::from_flat(vec![0.0]).unwrap()], 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let z = RcValue::new(0.0);
        assert_eq!(
            estimate_log_mu_lambda(z, &hist, 0, &sys, 1.0, 1.0, &mut rng),
            Err(EstimatorError::NoDraws)
        );
        let sys2 = QuadraticToy::two_dim(1.0, 0.0);
        assert!(matches!(
            estimate_log_mu_lambda(z, &hist, 1, &sys2, 1.0, 1.0, &mut rng),
            Err(EstimatorError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn vanishing_weights_are_degenerate() {
        // βV so large every weight underflows to exp(−∞).
        let sys = Shifted { inner: QuadraticToy::one_dim(1.0), offset: f64::INFINITY };
        let hist = TensorHistogram::build(&[Configuration::from_flat(vec![0.0]).unwrap()], 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            estimate_log_mu_lambda(RcValue::new(0.0), &hist, 5, &sys, 1.0, 1.0, &mut rng),
            Err(EstimatorError::Degenerate)
        );
    }
}
