//! Quadrature oracles on the circle `(−π, π]`.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::model::wrap_angle;

/// Default relative tolerance of every oracle.
pub const REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge: integral {integral}, error estimate {error}")]
    NonConvergence { integral: f64, error: f64 },
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("integrand produced a non-finite value")]
    NonFinite,
}

/// `∫_a^b f` by double-exponential quadrature on each piece between sorted
/// `breakpoints` (those outside `(a, b)` are ignored). Fails unless the
/// summed error estimate is below `rel_tol·|∫f|`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, breakpoints: &[f64], rel_tol: f64) -> Result<f64, QuadratureError> {
    let mut knots: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|&p| p > a && p < b))
        .chain(std::iter::once(b))
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let (mut total, mut error) = (0.0, 0.0);
    for w in knots.windows(2) {
        // Absolute target per piece; checked relative to the total below.
        let out = quadrature::integrate(&f, w[0], w[1], 1e-14);
        total += out.integral;
        error += out.error_estimate;
    }
    if !total.is_finite() || !error.is_finite() {
        return Err(QuadratureError::NonFinite);
    }
    if error > rel_tol * total.abs() {
        return Err(QuadratureError::NonConvergence { integral: total, error });
    }
    Ok(total)
}

/// Normalised Gaussian of precision `p` wrapped onto the circle, at circular
/// offset `d`. Images `±2πk` are added until they fall below `1e−16` of the
/// running sum.
pub fn wrapped_gaussian(d: f64, precision: f64) -> f64 {
    let d = wrap_angle(d);
    let norm = (precision / TAU).sqrt();
    let mut sum = (-0.5 * precision * d * d).exp();
    for k in 1.. {
        let plus = d + TAU * k as f64;
        let minus = d - TAU * k as f64;
        let term = (-0.5 * precision * plus * plus).exp() + (-0.5 * precision * minus * minus).exp();
        sum += term;
        if term <= 1e-16 * sum {
            break;
        }
    }
    norm * sum
}

/// Knots that isolate a narrow peak of width `sigma` at `z` and its wrap
/// point at `z + π`.
fn peak_knots(z: f64, sigma: f64) -> Vec<f64> {
    let mut k: Vec<f64> = [-12.0, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, 12.0]
        .iter()
        .map(|m| wrap_angle(z + m * sigma))
        .collect();
    k.push(wrap_angle(z + PI));
    k
}

fn check_positive(name: &'static str, value: f64) -> Result<(), QuadratureError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(QuadratureError::InvalidParameter { name, value })
    }
}

/// `μ_λ(z) = ∫ (λβ/2π)^½ exp(−βλ·wrap(u − z)²/2) exp(−βA(u)) du` over the
/// circle, with the Gaussian wrapped. Equals `Z_V·μ_λ(z)` when `A` is the
/// exact free energy with the normalisation used by the estimator.
pub fn quadrature_mu_lambda(z: f64, a: impl Fn(f64) -> f64, lambda: f64, beta: f64) -> Result<f64, QuadratureError> {
    check_positive("lambda", lambda)?;
    check_positive("beta", beta)?;
    let p = lambda * beta;
    integrate(
        |u| wrapped_gaussian(u - z, p) * (-beta * a(u)).exp(),
        -PI,
        PI,
        &peak_knots(z, p.sqrt().recip()),
        REL_TOL,
    )
}

/// `∫F e^{−βA} / ∫e^{−βA}` over the circle.
pub fn quadrature_expectation(f: impl Fn(f64) -> f64, a: impl Fn(f64) -> f64, beta: f64) -> Result<f64, QuadratureError> {
    check_positive("beta", beta)?;
    let knots = [-PI / 2.0, 0.0, PI / 2.0];
    let z = integrate(|u| (-beta * a(u)).exp(), -PI, PI, &knots, REL_TOL)?;
    let num = integrate(|u| f(u) * (-beta * a(u)).exp(), -PI, PI, &knots, REL_TOL);
    match num {
        Ok(n) => Ok(n / z),
        // A numerator that integrates to ~0 cannot meet a relative tolerance;
        // accept it when its error is small against the denominator.
        Err(QuadratureError::NonConvergence { integral, error }) if error <= REL_TOL * z => Ok(integral / z),
        Err(e) => Err(e),
    }
}

/// Probability of each bin `[edges[i], edges[i+1])` under the density
/// proportional to `density`, normalised over `[edges[0], edges[last]]`.
/// `knots` mark features (peaks, kinks) of the density.
pub fn bin_probabilities(density: impl Fn(f64) -> f64, edges: &[f64], knots: &[f64]) -> Result<Vec<f64>, QuadratureError> {
    let masses = edges
        .windows(2)
        .map(|w| {
            let inner: Vec<f64> = knots.iter().copied().filter(|&k| k > w[0] && k < w[1]).collect();
            // Per-bin values may be tiny; only their sum needs the tolerance.
            match integrate(&density, w[0], w[1], &inner, REL_TOL) {
                Ok(v) => Ok(v),
                Err(QuadratureError::NonConvergence { integral, .. }) => Ok(integral),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) {
        return Err(QuadratureError::NonFinite);
    }
    Ok(masses.into_iter().map(|m| m / total).collect())
}

/// Torsion marginal of the reconstruction distribution at fixed `z`,
/// unnormalised: `exp(−βA(u) − βλ·wrap(u − z)²/2)`.
pub fn reconstruction_marginal(u: f64, z: f64, a: impl Fn(f64) -> f64, lambda: f64, beta: f64) -> f64 {
    let d = wrap_angle(u - z);
    (-beta * a(u) - 0.5 * beta * lambda * d * d).exp()
}
