//! United-atom N-alkane: harmonic bonds and angles plus a cosine-polynomial
//! torsion term on every interior quadruple. Butane is `n_carbons = 4`.

use thiserror::Error;

use super::geometry::{add_to, bond, bond_angle_with_gradient, dihedral_angle, dihedral_with_gradient};
use super::{Configuration, GeometryError, MolecularSystem, RcValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("alkane needs at least 4 carbons, got {0}")]
    TooFewCarbons(usize),
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
}

/// Force-field constants, all divided by `k_B` (Kelvin units).
#[derive(Debug, Clone, PartialEq)]
pub struct AlkaneParams {
    pub n_carbons: usize,
    /// Bond stiffness (K/Å²).
    pub k_b: f64,
    /// Angle stiffness (K/rad²).
    pub k_a: f64,
    /// Equilibrium C–C bond length (Å).
    pub r0: f64,
    /// Equilibrium C–C–C angle (rad).
    pub theta0: f64,
    /// Torsion polynomial coefficients `c0..c3` (K).
    pub c: [f64; 4],
    /// Temperature (K).
    pub temperature: f64,
}

impl Default for AlkaneParams {
    fn default() -> Self {
        Self {
            n_carbons: 4,
            k_b: 319_225.0,
            k_a: 62_500.0,
            r0: 1.540,
            theta0: 114f64.to_radians(),
            c: [1031.36, 2037.82, 158.52, -3227.70],
            temperature: 300.0,
        }
    }
}

impl AlkaneParams {
    pub fn with_carbons(n_carbons: usize) -> Self {
        Self { n_carbons, ..Self::default() }
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    /// Torsion free energy `A(z) = Σ c_i cos(z)^i`.
    pub fn free_energy(&self, z: f64) -> f64 {
        let c = z.cos();
        self.c[0] + c * (self.c[1] + c * (self.c[2] + c * self.c[3]))
    }

    /// `dA/dz`.
    pub fn free_energy_derivative(&self, z: f64) -> f64 {
        let (s, c) = z.sin_cos();
        -s * (self.c[1] + c * (2.0 * self.c[2] + 3.0 * c * self.c[3]))
    }

    fn validate(&self) -> Result<(), ParamError> {
        if self.n_carbons < 4 {
            return Err(ParamError::TooFewCarbons(self.n_carbons));
        }
        for (name, value) in [
            ("k_b", self.k_b),
            ("k_a", self.k_a),
            ("r0", self.r0),
            ("theta0", self.theta0),
            ("temperature", self.temperature),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::NotPositive { name, value });
            }
        }
        Ok(())
    }
}

/// Validated united-atom alkane chain.
#[derive(Debug, Clone)]
pub struct Alkane {
    params: AlkaneParams,
}

impl Alkane {
    pub fn new(params: AlkaneParams) -> Result<Self, ParamError> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn butane() -> Self {
        Self { params: AlkaneParams::default() }
    }

    pub fn params(&self) -> &AlkaneParams {
        &self.params
    }

    pub fn n_carbons(&self) -> usize {
        self.params.n_carbons
    }

    pub fn beta(&self) -> f64 {
        self.params.beta()
    }

    fn check_len(&self, x: &[f64]) -> Result<(), GeometryError> {
        let expected = 3 * self.params.n_carbons;
        if x.len() != expected {
            return Err(GeometryError::WrongLength { got: x.len(), expected });
        }
        Ok(())
    }

    /// Bond and angle energy only (the stiff part of the surface).
    pub fn covalent_energy(&self, x: &[f64]) -> Result<f64, GeometryError> {
        self.check_len(x)?;
        let p = &self.params;
        let n = p.n_carbons;
        let mut v = 0.0;
        for i in 0..n - 1 {
            let (r, _) = bond(x, i, i + 1);
            v += 0.5 * p.k_b * (r - p.r0).powi(2);
        }
        for i in 0..n - 2 {
            let theta = super::bond_angle(x, i, i + 1, i + 2)?;
            v += 0.5 * p.k_a * (theta - p.theta0).powi(2);
        }
        Ok(v)
    }

    /// Planar all-trans chain with every bond and angle at equilibrium.
    pub fn ideal_configuration(&self) -> Configuration {
        let p = &self.params;
        let half = 0.5 * p.theta0;
        let (dx, dy) = (p.r0 * half.sin(), p.r0 * half.cos());
        let coords = (0..p.n_carbons)
            .flat_map(|k| [k as f64 * dx, if k % 2 == 1 { dy } else { 0.0 }, 0.0])
            .collect();
        Configuration::from_vec_unchecked(coords)
    }
}

impl MolecularSystem for Alkane {
    fn dim(&self) -> usize {
        3 * self.params.n_carbons
    }

    fn potential(&self, x: &[f64]) -> Result<f64, GeometryError> {
        let mut v = self.covalent_energy(x)?;
        for i in 0..self.params.n_carbons - 3 {
            let tau = dihedral_angle(x, [i, i + 1, i + 2, i + 3])?;
            v += self.params.free_energy(tau);
        }
        Ok(v)
    }

    fn potential_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<f64, GeometryError> {
        self.check_len(x)?;
        let p = &self.params;
        let n = p.n_carbons;
        grad.fill(0.0);
        let mut v = 0.0;
        for i in 0..n - 1 {
            let (r, e) = bond(x, i, i + 1);
            let dr = r - p.r0;
            v += 0.5 * p.k_b * dr * dr;
            let f = e * (p.k_b * dr);
            add_to(grad, i + 1, &f);
            add_to(grad, i, &(-f));
        }
        for i in 0..n - 2 {
            let (theta, g) = bond_angle_with_gradient(x, i, i + 1, i + 2)?;
            let dtheta = theta - p.theta0;
            v += 0.5 * p.k_a * dtheta * dtheta;
            let s = p.k_a * dtheta;
            for (k, gk) in g.iter().enumerate() {
                add_to(grad, i + k, &(gk * s));
            }
        }
        for i in 0..n - 3 {
            let (tau, g) = dihedral_with_gradient(x, [i, i + 1, i + 2, i + 3])?;
            v += p.free_energy(tau);
            let s = p.free_energy_derivative(tau);
            for (k, gk) in g.iter().enumerate() {
                add_to(grad, i + k, &(gk * s));
            }
        }
        Ok(v)
    }

    fn rc_value(&self, x: &[f64]) -> Result<RcValue, GeometryError> {
        self.check_len(x)?;
        dihedral_angle(x, [0, 1, 2, 3]).map(RcValue::new)
    }

    fn rc_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<RcValue, GeometryError> {
        self.check_len(x)?;
        grad.fill(0.0);
        let (tau, g) = dihedral_with_gradient(x, [0, 1, 2, 3])?;
        for (k, gk) in g.iter().enumerate() {
            add_to(grad, k, gk);
        }
        Ok(RcValue::new(tau))
    }

    fn free_energy(&self, z: f64) -> f64 {
        self.params.free_energy(z)
    }

    fn initial_configuration(&self) -> Configuration {
        self.ideal_configuration()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn butane_minimum_is_zero() {
        let b = Alkane::butane();
        let x = b.ideal_configuration();
        assert_eq!(x.len(), 12);
        assert!(b.potential(&x).unwrap().abs() < 1e-9);
        assert!(b.rc_value(&x).unwrap().value().abs() < 1e-12);
    }

    #[test]
    fn stretched_bond_energy() {
        let b = Alkane::butane();
        let mut x = b.ideal_configuration().into_vec();
        // Move atoms 1..3 along bond 0-1 so only that bond changes.
        let (r, e) = bond(&x, 0, 1);
        assert!((r - 1.54).abs() < 1e-12);
        for a in 1..4 {
            for d in 0..3 {
                x[3 * a + d] += 0.1 * e[d];
            }
        }
        let v = b.potential(&x).unwrap();
        assert!((v - 1596.125).abs() < 1e-6, "V = {v}");
    }

    #[test]
    fn free_energy_values() {
        let p = AlkaneParams::default();
        assert!(p.free_energy(0.0).abs() < 1e-12);
        assert!((p.free_energy(PI) - 2379.76).abs() < 1e-9);
        for z in [-2.0, 0.3, 1.1, 3.0] {
            assert_eq!(p.free_energy(z), p.free_energy(-z));
            assert!((p.free_energy(z) - p.free_energy(z + 2.0 * PI)).abs() < 1e-9);
        }
    }

    #[test]
    fn ideal_geometry_of_long_chain() {
        let a = Alkane::new(AlkaneParams::with_carbons(10)).unwrap();
        let x = a.ideal_configuration();
        assert_eq!(x.n_atoms(), 10);
        assert!(a.potential(&x).unwrap().abs() < 1e-8);
        for i in 0..7 {
            assert!(dihedral_angle(&x, [i, i + 1, i + 2, i + 3]).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_short_chain_and_bad_constants() {
        assert_eq!(
            Alkane::new(AlkaneParams::with_carbons(3)).unwrap_err(),
            ParamError::TooFewCarbons(3)
        );
        let p = AlkaneParams { temperature: 0.0, ..Default::default() };
        assert!(matches!(Alkane::new(p), Err(ParamError::NotPositive { name: "temperature", .. })));
    }

    #[test]
    fn wrong_length_is_an_error() {
        let b = Alkane::butane();
        assert_eq!(
            b.potential(&[0.0; 9]),
            Err(GeometryError::WrongLength { got: 9, expected: 12 })
        );
    }
}
