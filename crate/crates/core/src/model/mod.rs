//! Molecular systems: configurations, potentials, the torsion reaction
//! coordinate and the analytic free energy used by the oracles.

mod alkane;
pub mod geometry;
mod toy;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::ops::Deref;

use thiserror::Error;

pub use alkane::{Alkane, AlkaneParams, ParamError};
pub use geometry::{bond_angle, dihedral_angle};
pub use toy::QuadraticToy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("atoms {0:?} are collinear")]
    Collinear([usize; 3]),
    #[error("atom index {index} out of range for {n_atoms} atoms")]
    IndexOutOfRange { index: usize, n_atoms: usize },
    #[error("atom index {0} repeated")]
    RepeatedIndex(usize),
    #[error("configuration has {got} coordinates, expected {expected}")]
    WrongLength { got: usize, expected: usize },
}

#[derive(Debug, Error)]
pub enum ConfigurationError {
    #[error("coordinate count {0} is not a multiple of 3")]
    NotCartesian(usize),
    #[error("coordinate {0} is not finite")]
    NonFinite(usize),
    #[error("configuration CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Wraps an angle into `(−π, π]`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// A value of the (one-dimensional, periodic) reaction coordinate.
///
/// Always held wrapped into `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RcValue(f64);

impl RcValue {
    pub fn new(z: f64) -> Self {
        Self(wrap_angle(z))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Circular difference `self − other`, in `(−π, π]`.
    #[inline]
    pub fn diff(self, other: RcValue) -> f64 {
        wrap_angle(self.0 - other.0)
    }

    pub fn shifted(self, delta: f64) -> Self {
        Self::new(self.0 + delta)
    }
}

impl fmt::Display for RcValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Flat Cartesian coordinates `x0, y0, z0, x1, ...` (Å).
///
/// Toy systems reuse the type for coordinates that are not triples.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration(Vec<f64>);

impl Configuration {
    /// Configuration of `coords.len() / 3` atoms; rejects ragged or
    /// non-finite input.
    pub fn from_atoms(coords: Vec<f64>) -> Result<Self, ConfigurationError> {
        if coords.len() % 3 != 0 {
            return Err(ConfigurationError::NotCartesian(coords.len()));
        }
        Self::from_flat(coords)
    }

    /// Configuration with arbitrary dimension (toy systems).
    pub fn from_flat(coords: Vec<f64>) -> Result<Self, ConfigurationError> {
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(ConfigurationError::NonFinite(i));
        }
        Ok(Self(coords))
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn n_atoms(&self) -> usize {
        self.0.len() / 3
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Writes the header `x0,y0,z0,...` and one data row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header: Vec<String> = (0..self.0.len())
            .map(|i| format!("{}{}", ["x", "y", "z"][i % 3], i / 3))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        let row: Vec<String> = self.0.iter().map(|c| format!("{c:e}")).collect();
        writeln!(w, "{}", row.join(","))
    }

    /// Reads the format produced by [`Configuration::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, ConfigurationError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| ConfigurationError::Csv("missing header".into()))??;
        let row = lines
            .next()
            .ok_or_else(|| ConfigurationError::Csv("missing data row".into()))??;
        let n_cols = header.split(',').count();
        let coords = row
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| ConfigurationError::Csv(format!("{s:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if coords.len() != n_cols {
            return Err(ConfigurationError::Csv(format!(
                "{} values for {n_cols} columns",
                coords.len()
            )));
        }
        Self::from_atoms(coords)
    }
}

impl Deref for Configuration {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A potential energy surface together with its reaction coordinate.
///
/// Energies are in Kelvin (`V / k_B`), so `β = 1/T`.
pub trait MolecularSystem: Send + Sync {
    /// Number of Cartesian degrees of freedom.
    fn dim(&self) -> usize;

    fn potential(&self, x: &[f64]) -> Result<f64, GeometryError>;

    /// Overwrites `grad` with `∇V(x)` and returns `V(x)`.
    fn potential_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<f64, GeometryError>;

    /// Reaction coordinate `ξ(x)`, wrapped into `(−π, π]`.
    fn rc_value(&self, x: &[f64]) -> Result<RcValue, GeometryError>;

    /// Overwrites `grad` with `∇ξ(x)` and returns `ξ(x)`.
    fn rc_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<RcValue, GeometryError>;

    /// Analytic free energy `A(z)` of the reaction coordinate.
    fn free_energy(&self, z: f64) -> f64;

    /// Deterministic starting configuration.
    fn initial_configuration(&self) -> Configuration;
}

impl<S: MolecularSystem + ?Sized> MolecularSystem for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn potential(&self, x: &[f64]) -> Result<f64, GeometryError> {
        (**self).potential(x)
    }
    fn potential_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<f64, GeometryError> {
        (**self).potential_gradient(x, grad)
    }
    fn rc_value(&self, x: &[f64]) -> Result<RcValue, GeometryError> {
        (**self).rc_value(x)
    }
    fn rc_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<RcValue, GeometryError> {
        (**self).rc_gradient(x, grad)
    }
    fn free_energy(&self, z: f64) -> f64 {
        (**self).free_energy(z)
    }
    fn initial_configuration(&self) -> Configuration {
        (**self).initial_configuration()
    }
}

/// `V + offset` with everything else delegated. The offset never enters a
/// gradient, so dynamics are unchanged and only absolute log-densities move.
#[derive(Debug, Clone)]
pub struct Shifted<S> {
    pub inner: S,
    pub offset: f64,
}

impl<S: MolecularSystem> MolecularSystem for Shifted<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn potential(&self, x: &[f64]) -> Result<f64, GeometryError> {
        Ok(self.inner.potential(x)? + self.offset)
    }
    fn potential_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<f64, GeometryError> {
        Ok(self.inner.potential_gradient(x, grad)? + self.offset)
    }
    fn rc_value(&self, x: &[f64]) -> Result<RcValue, GeometryError> {
        self.inner.rc_value(x)
    }
    fn rc_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<RcValue, GeometryError> {
        self.inner.rc_gradient(x, grad)
    }
    fn free_energy(&self, z: f64) -> f64 {
        self.inner.free_energy(z)
    }
    fn initial_configuration(&self) -> Configuration {
        self.inner.initial_configuration()
    }
}
