//! Quadratic toy systems with closed-form marginals, used to check the
//! samplers and estimators against exact answers.

use super::{Configuration, GeometryError, MolecularSystem, RcValue};

/// `V(x) = ½κ(x₀² + x₁²) + c·x₀x₁` in one or two dimensions, with `ξ(x) = x₀`.
///
/// The coordinate is treated as an angle by the rest of the crate, so `κ`
/// should keep the mass well inside `(−π, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticToy {
    pub kappa: f64,
    pub coupling: f64,
    dim: usize,
}

impl QuadraticToy {
    pub fn one_dim(kappa: f64) -> Self {
        Self { kappa, coupling: 0.0, dim: 1 }
    }

    /// Two-dimensional toy; requires `|coupling| < kappa`.
    pub fn two_dim(kappa: f64, coupling: f64) -> Self {
        assert!(coupling.abs() < kappa, "toy potential must be positive definite");
        Self { kappa, coupling, dim: 2 }
    }

    fn check_len(&self, x: &[f64]) -> Result<(), GeometryError> {
        if x.len() != self.dim {
            return Err(GeometryError::WrongLength { got: x.len(), expected: self.dim });
        }
        Ok(())
    }
}

impl MolecularSystem for QuadraticToy {
    fn dim(&self) -> usize {
        self.dim
    }

    fn potential(&self, x: &[f64]) -> Result<f64, GeometryError> {
        self.check_len(x)?;
        let sq: f64 = x.iter().map(|v| v * v).sum();
        let cross = if self.dim == 2 { self.coupling * x[0] * x[1] } else { 0.0 };
        Ok(0.5 * self.kappa * sq + cross)
    }

    fn potential_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<f64, GeometryError> {
        let v = self.potential(x)?;
        grad[0] = self.kappa * x[0];
        if self.dim == 2 {
            grad[0] += self.coupling * x[1];
            grad[1] = self.kappa * x[1] + self.coupling * x[0];
        }
        Ok(v)
    }

    fn rc_value(&self, x: &[f64]) -> Result<RcValue, GeometryError> {
        self.check_len(x)?;
        Ok(RcValue::new(x[0]))
    }

    fn rc_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<RcValue, GeometryError> {
        self.check_len(x)?;
        grad.fill(0.0);
        grad[0] = 1.0;
        Ok(RcValue::new(x[0]))
    }

    /// Exact up to an additive constant: `½(κ − c²/κ)z²`.
    fn free_energy(&self, z: f64) -> f64 {
        0.5 * (self.kappa - self.coupling * self.coupling / self.kappa) * z * z
    }

    fn initial_configuration(&self) -> Configuration {
        Configuration::from_vec_unchecked(vec![0.0; self.dim])
    }
}
