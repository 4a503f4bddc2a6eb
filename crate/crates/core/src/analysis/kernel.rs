//! Gaussian-kernel smoothing of scattered `(z, Q̃)` pairs on the circle.

use crate::model::wrap_angle;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    /// Bandwidth ε (rad).
    pub epsilon: f64,
    pub grid: Vec<f64>,
    pub normalization: KernelNormalization,
}

impl KernelParams {
    /// ε = 0.02 on `n` equispaced points of `(−π, π]`.
    pub fn uniform_grid(n: usize) -> Self {
        let step = std::f64::consts::TAU / n as f64;
        Self {
            epsilon: 0.02,
            grid: (1..=n).map(|i| -std::f64::consts::PI + i as f64 * step).collect(),
            normalization: KernelNormalization::NadarayaWatson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelNormalization {
    /// Divide by the kernel mass `Σ w_n`.
    #[default]
    NadarayaWatson,
    /// Divide by the number of pairs and weight by the normalised Gaussian
    /// `1/sqrt(2πε²)`.
    PerSample,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub z: f64,
    pub m: f64,
    pub sigma2: f64,
    /// False when every kernel weight underflowed; `m` and `sigma2` are NaN.
    pub defined: bool,
}

/// `m(z) = Σ w Q̃ / D` and `σ²(z) = Σ w (Q̃ − m)² / D` with
/// `w_n = exp(−wrap(z_n − z)²/2ε²)` and `D` set by the normalisation.
pub fn kernel_mean_variance(pairs: &[(f64, f64)], kp: &KernelParams) -> Vec<KernelPoint> {
    let inv = 0.5 / (kp.epsilon * kp.epsilon);
    let mut w = vec![0.0; pairs.len()];
    kp.grid
        .iter()
        .map(|&z| {
            for (wn, &(zn, _)) in w.iter_mut().zip(pairs) {
                let d = wrap_angle(zn - z);
                *wn = (-inv * d * d).exp();
            }
            let mass: f64 = w.iter().sum();
            if !(mass > 0.0) {
                return KernelPoint { z, m: f64::NAN, sigma2: f64::NAN, defined: false };
            }
            let denom = match kp.normalization {
                KernelNormalization::NadarayaWatson => mass,
                KernelNormalization::PerSample => pairs.len() as f64 * (std::f64::consts::TAU * kp.epsilon * kp.epsilon).sqrt(),
            };
            let m = w.iter().zip(pairs).map(|(wn, &(_, q))| wn * q).sum::<f64>() / denom;
            let sigma2 = w.iter().zip(pairs).map(|(wn, &(_, q))| wn * (q - m).powi(2)).sum::<f64>() / denom;
            KernelPoint { z, m, sigma2, defined: true }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AlkaneParams;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn constant_values() {
        let pairs: Vec<_> = (0..50).map(|i| (-3.0 + 0.12 * i as f64, 7.5)).collect();
        for p in kernel_mean_variance(&pairs, &KernelParams::uniform_grid(200)) {
            if p.defined {
                assert!((p.m - 7.5).abs() < 1e-12);
                assert!(p.sigma2.abs() < 1e-20);
            }
        }
    }

    #[test]
    fn single_pair() {
        let out = kernel_mean_variance(&[(0.5, -2.0)], &KernelParams::uniform_grid(100));
        assert!(out.iter().any(|p| p.defined));
        assert!(out.iter().any(|p| !p.defined && p.m.is_nan()));
        for p in out.iter().filter(|p| p.defined) {
            assert_eq!(p.m, -2.0);
        }
    }

    #[test]
    fn wraps_across_the_cut() {
        let kp = KernelParams { grid: vec![std::f64::consts::PI], ..KernelParams::uniform_grid(1) };
        let out = kernel_mean_variance(&[(-std::f64::consts::PI + 0.01, 4.0)], &kp);
        assert!(out[0].defined);
        assert_eq!(out[0].m, 4.0);
    }

    #[test]
    fn permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut pairs: Vec<(f64, f64)> = (0..300).map(|_| (rng.random_range(-1.0..1.0), rng.random())).collect();
        let kp = KernelParams::uniform_grid(64);
        let a = kernel_mean_variance(&pairs, &kp);
        pairs.shuffle(&mut rng);
        let b = kernel_mean_variance(&pairs, &kp);
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.defined, q.defined);
            if p.defined {
                assert!((p.m - q.m).abs() < 1e-12 && (p.sigma2 - q.sigma2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tracks_noisy_free_energy() {
        let params = AlkaneParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pairs: Vec<(f64, f64)> = (0..10_000)
            .map(|_| {
                let z: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                (z, params.free_energy(z) + 10.0 * rng.sample::<f64, _>(StandardNormal))
            })
            .collect();
        let kp = KernelParams::uniform_grid(200);
        for p in kernel_mean_variance(&pairs, &kp) {
            if p.z.abs() <= 2.5 {
                assert!(p.defined);
                assert!((p.m - params.free_energy(p.z)).abs() < 50.0, "z {}: {}", p.z, p.m);
            }
        }
    }

    #[test]
    fn per_sample_normalization_constant() {
        let pairs = [(0.0, 2.0), (0.0, 2.0)];
        let kp = KernelParams {
            grid: vec![0.0],
            normalization: KernelNormalization::PerSample,
            ..KernelParams::uniform_grid(1)
        };
        let g0 = 1.0 / (std::f64::consts::TAU * 0.02f64 * 0.02).sqrt();
        let out = kernel_mean_variance(&pairs, &kp);
        assert!((out[0].m - 2.0 * g0).abs() < 1e-12);
        let kp = KernelParams { grid: vec![0.02], ..kp };
        let out = kernel_mean_variance(&pairs, &kp);
        assert!((out[0].m - 2.0 * g0 * (-0.5f64).exp()).abs() < 1e-10);
    }
}
