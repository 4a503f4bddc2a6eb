//! Oracles for the acceptance suite, written independently of the
//! library's code paths: brute-force joint histogram, closed-form toy
//! marginals and the importance-sampling average.

use mmmcmc_core::model::{wrap_angle, MolecularSystem};
use rand::Rng;

/// `log((1/n) Σ exp(w_i))`, shifted by the maximum.
pub fn log_mean_exp(w: &[f64]) -> f64 {
    let m = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + (w.iter().map(|v| (v - m).exp()).sum::<f64>() / w.len() as f64).ln()
}

/// `log μ̂_ext(z, x) = ½ log(λβ/2π) − βλ·wrap(ξ(x) − z)²/2 − βV(x)`.
pub fn log_mu_ext<S: MolecularSystem>(sys: &S, x: &[f64], z: f64, lambda: f64, beta: f64) -> f64 {
    let (Ok(v), Ok(xi)) = (sys.potential(x), sys.rc_value(x)) else {
        return f64::NEG_INFINITY;
    };
    let d = wrap_angle(xi.value() - z);
    0.5 * (lambda * beta / std::f64::consts::TAU).ln() - 0.5 * beta * lambda * d * d - beta * v
}

/// Joint histogram on the full grid of `d`-dimensional cells of side `h`,
/// evaluated by brute force: `O(K)` per density, `O(K²)` per estimate.
pub struct FullHistogram {
    h: f64,
    cells: Vec<Vec<i64>>,
}

impl FullHistogram {
    pub fn build(samples: &[Vec<f64>], h: f64) -> Self {
        Self { h, cells: samples.iter().map(|s| Self::cell(s, h)).collect() }
    }

    fn cell(x: &[f64], h: f64) -> Vec<i64> {
        x.iter().map(|v| (v / h).floor() as i64).collect()
    }

    /// `count(cell(y)) / (K h^d)`, in logs.
    pub fn log_density(&self, y: &[f64]) -> f64 {
        let c = Self::cell(y, self.h);
        let count = self.cells.iter().filter(|s| **s == c).count();
        if count == 0 {
            return f64::NEG_INFINITY;
        }
        (count as f64).ln() - (self.cells.len() as f64).ln() - y.len() as f64 * self.h.ln()
    }

    /// Picks a sample uniformly, then a uniform point of its cell.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let c = &self.cells[rng.random_range(0..self.cells.len())];
        c.iter().map(|&l| (l as f64 + rng.random::<f64>()) * self.h).collect()
    }
}

/// Importance-sampling estimate of `log μ_λ(z)` from given draws and their
/// proposal log-densities.
pub fn estimate_from_draws<S: MolecularSystem>(
    sys: &S,
    draws: &[Vec<f64>],
    log_q: impl Fn(&[f64]) -> f64,
    z: f64,
    lambda: f64,
    beta: f64,
) -> f64 {
    let w: Vec<f64> = draws.iter().map(|y| log_mu_ext(sys, y, z, lambda, beta) - log_q(y)).collect();
    log_mean_exp(&w)
}

/// `μ_λ(z)` for `V = ½κx²`, `ξ = x`: `sqrt(λ/(λ+κ))·exp(−βκλz²/(2(κ+λ)))`.
pub fn toy_mu_lambda(kappa: f64, lambda: f64, beta: f64, z: f64) -> f64 {
    (lambda / (lambda + kappa)).sqrt() * (-beta * kappa * lambda * z * z / (2.0 * (kappa + lambda))).exp()
}

/// Same for the two-dimensional toy with coupling `c`: integrating out `x₁`
/// leaves `κ' = κ − c²/κ` and a factor `sqrt(2π/(βκ))`.
pub fn toy2_mu_lambda(kappa: f64, c: f64, lambda: f64, beta: f64, z: f64) -> f64 {
    let k_eff = kappa - c * c / kappa;
    (std::f64::consts::TAU / (beta * kappa)).sqrt() * toy_mu_lambda(k_eff, lambda, beta, z)
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_mean_exp_small_cases() {
        assert!((log_mean_exp(&[0.0, 3f64.ln()]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_mean_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        assert!((log_mean_exp(&[-1000.0, -1000.0]) + 1000.0).abs() < 1e-12);
    }

    #[test]
    fn full_histogram_is_a_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let samples: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.random::<f64>(), 2.0 * rng.random::<f64>()]).collect();
        let h = 0.3;
        let hist = FullHistogram::build(&samples, h);
        let mut cells: Vec<Vec<i64>> = samples.iter().map(|s| FullHistogram::cell(s, h)).collect();
        cells.sort();
        cells.dedup();
        let mass: f64 = cells
            .iter()
            .map(|c| {
                let centre: Vec<f64> = c.iter().map(|&l| (l as f64 + 0.5) * h).collect();
                hist.log_density(&centre).exp() * h * h
            })
            .sum();
        assert!((mass - 1.0).abs() < 1e-12);
        for _ in 0..100 {
            assert!(hist.log_density(&hist.sample(&mut rng)).is_finite());
        }
    }

    /// Midpoint rule over a wide box.
    fn grid_integral(f: impl Fn(f64, f64) -> f64, dims: usize) -> f64 {
        let (lo, n) = (-8.0, 1600);
        let dx = -2.0 * lo / n as f64;
        let mid = |i: usize| lo + (i as f64 + 0.5) * dx;
        if dims == 1 {
            (0..n).map(|i| f(mid(i), 0.0)).sum::<f64>() * dx
        } else {
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| f(mid(i), mid(j))).sum::<f64>() * dx * dx
        }
    }

    #[test]
    fn toy_marginals_match_direct_integration() {
        let (kappa, c, lambda, beta, z) = (4.0, 2.0, 4.0, 1.0, 0.5);
        let g = |x0: f64| (lambda * beta / std::f64::consts::TAU).sqrt() * (-0.5 * beta * lambda * (x0 - z).powi(2)).exp();
        let one = grid_integral(|x, _| g(x) * (-0.5 * beta * kappa * x * x).exp(), 1);
        assert!((one - toy_mu_lambda(kappa, lambda, beta, z)).abs() < 1e-9);
        let two = grid_integral(
            |x0, x1| g(x0) * (-beta * (0.5 * kappa * (x0 * x0 + x1 * x1) + c * x0 * x1)).exp(),
            2,
        );
        assert!((two - toy2_mu_lambda(kappa, c, lambda, beta, z)).abs() < 1e-8);
    }
}
