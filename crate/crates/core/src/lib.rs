//! Micro-macro Markov chain Monte Carlo for molecular systems with a
//! pseudo-marginal estimate of the filtered free energy.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: united-atom alkanes, toy systems, the torsion reaction
//!   coordinate and the analytic free energy.
//! * [`dynamics`]: macroscopic Brownian proposal, biased reconstruction
//!   dynamics and the MALA baseline kernel.
//! * [`pseudomarginal`]: tensorized histograms and the importance-sampling
//!   estimator of the reconstruction normalisation `μ_λ`.
//! * [`mcmc`]: the chain itself, with grouped-independence caching of the
//!   incumbent estimate.
//! * [`analysis`]: quadrature oracles and post-processing statistics.

pub mod analysis;
pub mod dynamics;
pub mod mcmc;
pub mod model;
pub mod pseudomarginal;
