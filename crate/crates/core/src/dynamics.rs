//! Time-stepping kernels: the Brownian macroscopic proposal, the biased
//! (indirect) reconstruction dynamics and the MALA baseline.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::model::{Configuration, GeometryError, MolecularSystem, RcValue};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DynamicsError {
    #[error("reconstruction diverged at step {step}")]
    Diverged { step: usize },
    #[error("degenerate geometry at reconstruction step {step}: {source}")]
    Geometry { step: usize, source: GeometryError },
    #[error("invalid dynamics parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Brownian increments on the reaction coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroProposalParams {
    pub dt_macro: f64,
}

impl Default for MacroProposalParams {
    fn default() -> Self {
        Self { dt_macro: 0.001 }
    }
}

/// Bias strength `λ`, step `δt` and length `K` of the reconstruction run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionParams {
    pub lambda: f64,
    pub dt_micro: f64,
    pub n_steps: usize,
}

impl ReconstructionParams {
    /// `λ = 2 k_b`, `δt = 0.01 / λ`, `K = 15`.
    pub fn for_bond_stiffness(k_b: f64) -> Self {
        let lambda = 2.0 * k_b;
        Self { lambda, dt_micro: 0.01 / lambda, n_steps: 15 }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(DynamicsError::InvalidParameter { name: "lambda", value: self.lambda });
        }
        if !(self.dt_micro > 0.0 && self.dt_micro.is_finite()) {
            return Err(DynamicsError::InvalidParameter { name: "dt_micro", value: self.dt_micro });
        }
        if self.n_steps == 0 {
            return Err(DynamicsError::InvalidParameter { name: "n_steps", value: 0.0 });
        }
        Ok(())
    }
}

/// `z' = wrap(z + sqrt(2Δt/β) η)`. Symmetric on the circle.
pub fn propose_rc<R: Rng + ?Sized>(
    z: RcValue,
    params: &MacroProposalParams,
    beta: f64,
    rng: &mut R,
) -> RcValue {
    propose_rc_with(z, params, beta, rng.sample(StandardNormal))
}

/// The proposal for a given standard-normal increment `eta`.
pub fn propose_rc_with(z: RcValue, params: &MacroProposalParams, beta: f64, eta: f64) -> RcValue {
    z.shifted((2.0 * params.dt_macro / beta).sqrt() * eta)
}

/// Outcome of a Metropolis test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub accepted: bool,
    pub alpha: f64,
    /// The acceptance ratio was NaN; the move was rejected.
    pub non_finite: bool,
}

impl Decision {
    /// Accept with probability `min(1, exp(log_ratio))`. Always consumes one
    /// uniform so that the stream does not depend on the outcome.
    pub fn metropolis<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> Self {
        Self::with_uniform(log_ratio, rng.random())
    }

    /// Accept iff `u < min(1, exp(log_ratio))`.
    pub fn with_uniform(log_ratio: f64, u: f64) -> Self {
        if log_ratio.is_nan() {
            return Self { accepted: false, alpha: 0.0, non_finite: true };
        }
        let alpha = log_ratio.min(0.0).exp();
        Self { accepted: u < alpha, alpha, non_finite: false }
    }
}

/// Macroscopic Metropolis test for the symmetric Brownian proposal, with
/// `log_mubar` the log of the approximate macroscopic density `μ̄₀`.
pub fn macro_accept<R: Rng + ?Sized>(
    z_current: RcValue,
    z_proposed: RcValue,
    log_mubar: impl Fn(RcValue) -> f64,
    rng: &mut R,
) -> Decision {
    let (new, old) = (log_mubar(z_proposed), log_mubar(z_current));
    let log_ratio = if new == f64::NEG_INFINITY { f64::NEG_INFINITY } else { new - old };
    Decision::metropolis(log_ratio, rng)
}

/// Runs `K` steps of
///
/// `x ← x − δt ∇V(x) − δt λ wrap(ξ(x) − z') ∇ξ(x) + sqrt(2δt/β) η`
///
/// from `start` and returns every iterate `x¹..x^K`; the last one is the
/// reconstructed proposal.
pub fn reconstruct<S, R>(
    sys: &S,
    start: &[f64],
    target: RcValue,
    params: &ReconstructionParams,
    beta: f64,
    rng: &mut R,
) -> Result<Vec<Configuration>, DynamicsError>
where
    S: MolecularSystem + ?Sized,
    R: Rng + ?Sized,
{
    let mut traj = Vec::with_capacity(params.n_steps);
    let mut x = start.to_vec();
    let mut work = Workspace::new(x.len());
    for step in 0..params.n_steps {
        biased_step(sys, &mut x, target, params, beta, &mut work, rng)
            .map_err(|source| DynamicsError::Geometry { step, source })?;
        if !x.iter().all(|c| c.is_finite()) {
            return Err(DynamicsError::Diverged { step });
        }
        traj.push(Configuration::from_vec_unchecked(x.clone()));
    }
    Ok(traj)
}

/// Scratch buffers for one biased Euler–Maruyama step.
pub struct Workspace {
    grad_v: Vec<f64>,
    grad_xi: Vec<f64>,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        Self { grad_v: vec![0.0; dim], grad_xi: vec![0.0; dim] }
    }
}

/// One step of the biased dynamics, in place. With `λ = 0` this is plain
/// overdamped Langevin on `V`.
pub fn biased_step<S, R>(
    sys: &S,
    x: &mut [f64],
    target: RcValue,
    params: &ReconstructionParams,
    beta: f64,
    work: &mut Workspace,
    rng: &mut R,
) -> Result<(), GeometryError>
where
    S: MolecularSystem + ?Sized,
    R: Rng + ?Sized,
{
    let dt = params.dt_micro;
    sys.potential_gradient(x, &mut work.grad_v)?;
    let spring = if params.lambda != 0.0 {
        let xi = sys.rc_gradient(x, &mut work.grad_xi)?;
        dt * params.lambda * xi.diff(target)
    } else {
        work.grad_xi.fill(0.0);
        0.0
    };
    let noise = (2.0 * dt / beta).sqrt();
    for ((xi, gv), gx) in x.iter_mut().zip(&work.grad_v).zip(&work.grad_xi) {
        let eta: f64 = rng.sample(StandardNormal);
        *xi += -dt * gv - spring * gx + noise * eta;
    }
    Ok(())
}

/// Accept/reject record of one MALA transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MalaOutcome {
    pub accepted: bool,
    pub alpha: f64,
    /// The proposal was non-finite or geometrically degenerate; rejected.
    pub flagged: bool,
}

/// One MALA transition together with the resulting state.
#[derive(Debug, Clone, PartialEq)]
pub struct MalaStep {
    pub x: Configuration,
    pub outcome: MalaOutcome,
}

/// One Metropolis-adjusted Langevin step from `x`:
/// `y = x − dt ∇V(x) + sqrt(2 dt/β) η`, corrected with the Gaussian
/// transition densities in both directions.
pub fn mala_step<S, R>(
    sys: &S,
    x: &Configuration,
    dt: f64,
    beta: f64,
    rng: &mut R,
) -> Result<MalaStep, GeometryError>
where
    S: MolecularSystem + ?Sized,
    R: Rng + ?Sized,
{
    let mut chain = MalaChain::new(sys, x.clone(), dt, beta)?;
    let outcome = chain.step(rng);
    Ok(MalaStep { x: chain.into_position(), outcome })
}

/// MALA chain that caches `V` and `∇V` at the current point, so each step
/// costs one energy-and-gradient evaluation.
pub struct MalaChain<'a, S: ?Sized> {
    sys: &'a S,
    dt: f64,
    beta: f64,
    x: Vec<f64>,
    v: f64,
    grad: Vec<f64>,
    y: Vec<f64>,
    grad_y: Vec<f64>,
}

impl<'a, S: MolecularSystem + ?Sized> MalaChain<'a, S> {
    pub fn new(sys: &'a S, x: Configuration, dt: f64, beta: f64) -> Result<Self, GeometryError> {
        let x = x.into_vec();
        let mut grad = vec![0.0; x.len()];
        let v = sys.potential_gradient(&x, &mut grad)?;
        let dim = x.len();
        Ok(Self { sys, dt, beta, x, v, grad, y: vec![0.0; dim], grad_y: vec![0.0; dim] })
    }

    pub fn position(&self) -> &[f64] {
        &self.x
    }

    pub fn into_position(self) -> Configuration {
        Configuration::from_vec_unchecked(self.x)
    }

    /// `−β |to − from + dt ∇V(from)|² / (4 dt)`, up to a constant shared by
    /// both directions.
    fn log_transition(&self, from: &[f64], grad_from: &[f64], to: &[f64]) -> f64 {
        let sq: f64 = from
            .iter()
            .zip(grad_from)
            .zip(to)
            .map(|((f, g), t)| {
                let d = t - f + self.dt * g;
                d * d
            })
            .sum();
        -self.beta * sq / (4.0 * self.dt)
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> MalaOutcome {
        let noise = (2.0 * self.dt / self.beta).sqrt();
        for ((y, x), g) in self.y.iter_mut().zip(&self.x).zip(&self.grad) {
            let eta: f64 = rng.sample(StandardNormal);
            *y = x - self.dt * g + noise * eta;
        }
        let u: f64 = rng.random();
        self.finish_step(u)
    }

    /// The step with given standard-normal increments and uniform.
    #[cfg(test)]
    pub(crate) fn step_with(&mut self, eta: &[f64], u: f64) -> MalaOutcome {
        let noise = (2.0 * self.dt / self.beta).sqrt();
        for (((y, x), g), e) in self.y.iter_mut().zip(&self.x).zip(&self.grad).zip(eta) {
            *y = x - self.dt * g + noise * e;
        }
        self.finish_step(u)
    }

    fn finish_step(&mut self, u: f64) -> MalaOutcome {
        let v_y = if self.y.iter().all(|c| c.is_finite()) {
            self.sys.potential_gradient(&self.y, &mut self.grad_y).ok()
        } else {
            None
        };
        let Some(v_y) = v_y.filter(|v| v.is_finite()) else {
            return MalaOutcome { accepted: false, alpha: 0.0, flagged: true };
        };
        let log_ratio = -self.beta * (v_y - self.v)
            + self.log_transition(&self.y, &self.grad_y, &self.x)
            - self.log_transition(&self.x, &self.grad, &self.y);
        let d = Decision::with_uniform(log_ratio, u);
        if d.accepted {
            std::mem::swap(&mut self.x, &mut self.y);
            std::mem::swap(&mut self.grad, &mut self.grad_y);
            self.v = v_y;
        }
        MalaOutcome { accepted: d.accepted, alpha: d.alpha, flagged: d.non_finite }
    }
}
