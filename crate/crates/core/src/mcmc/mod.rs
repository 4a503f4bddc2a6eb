//! The micro-macro chain: Brownian proposal on the reaction coordinate,
//! macroscopic Metropolis test, biased reconstruction, pseudo-marginal
//! estimate of `μ_λ` and the microscopic test.

mod record;

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use thiserror::Error;

use crate::dynamics::{
    macro_accept, propose_rc, reconstruct, Decision, DynamicsError, MacroProposalParams,
    ReconstructionParams,
};
use crate::model::{Configuration, MolecularSystem, RcValue};
use crate::pseudomarginal::{
    default_bin_width, estimate_log_mu_lambda, estimate_log_mu_lambda_reuse, EstimatorError,
    LogWeight, TensorHistogram,
};

pub use record::{CsvSink, FnSink, NullSink, RecordSink, StepRecord, RECORD_HEADER};

/// Approximate macroscopic density `μ̄₀` used by the macroscopic test.
#[derive(Clone)]
pub enum MacroDensity {
    /// `exp(−βA(z))` from the system's analytic free energy.
    Exact,
    /// Flat on the circle.
    Uniform,
    /// Log-density supplied by the caller.
    Custom(Arc<dyn Fn(RcValue) -> f64 + Send + Sync>),
}

impl MacroDensity {
    pub fn log_density<S: MolecularSystem + ?Sized>(&self, sys: &S, beta: f64, z: RcValue) -> f64 {
        match self {
            Self::Exact => -beta * sys.free_energy(z.value()),
            Self::Uniform => 0.0,
            Self::Custom(f) => f(z),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Uniform => "uniform",
            Self::Custom(_) => "custom",
        }
    }
}

impl fmt::Debug for MacroDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which importance draws feed the estimate of `μ_λ(z')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorMode {
    /// Fresh draws from the histogram.
    #[default]
    Exact,
    /// The reconstruction iterates themselves (biased).
    Reuse,
}

#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub macro_params: MacroProposalParams,
    pub recon: ReconstructionParams,
    pub k_eval: usize,
    pub bin_width: f64,
    pub beta: f64,
    pub mubar: MacroDensity,
    pub mode: EstimatorMode,
}

impl ChainConfig {
    /// λ = 2k_b, δt = 0.01/λ, K_recon = K_eval = 15, h = sqrt(1/(2λ)),
    /// Δt = 0.001 and the exact `μ̄₀`.
    pub fn defaults(beta: f64, k_b: f64) -> Self {
        let recon = ReconstructionParams::for_bond_stiffness(k_b);
        Self {
            macro_params: MacroProposalParams::default(),
            k_eval: recon.n_steps,
            bin_width: default_bin_width(recon.lambda),
            recon,
            beta,
            mubar: MacroDensity::Exact,
            mode: EstimatorMode::Exact,
        }
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        self.recon.validate()?;
        let positive = [
            ("dt_macro", self.macro_params.dt_macro),
            ("bin_width", self.bin_width),
            ("beta", self.beta),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ChainError::InvalidConfig { name, value });
            }
        }
        if self.k_eval == 0 {
            return Err(ChainError::InvalidConfig { name: "K_eval", value: 0.0 });
        }
        Ok(())
    }

    fn log_mubar<S: MolecularSystem + ?Sized>(&self, sys: &S, z: RcValue) -> f64 {
        self.mubar.log_density(sys, self.beta, z)
    }
}

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("invalid chain parameter {name} = {value}")]
    InvalidConfig { name: &'static str, value: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("initial estimate: {0}")]
    Estimator(#[from] EstimatorError),
    #[error("recording chain output: {0}")]
    Sink(#[from] std::io::Error),
}

/// Why a step that passed the macroscopic test was rejected without a
/// microscopic test.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

/// Extended-space state. `ξ(x) = z` is not required.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub x: Configuration,
    pub z: RcValue,
    /// Estimate of `Z_V·μ_λ(z)` from the step that accepted `z`; reused,
    /// never recomputed, while the state persists.
    pub log_mu_tilde: LogWeight,
}

impl ChainState {
    /// `z₀ = ξ(x₀)`, with the cache filled by one reconstruction towards
    /// `z₀` and one estimate.
    pub fn initialize<S, R>(sys: &S, x0: Configuration, cfg: &ChainConfig, rng: &mut R) -> Result<Self, ChainError>
    where
        S: MolecularSystem + ?Sized,
        R: Rng + ?Sized,
    {
        cfg.validate()?;
        let z = sys
            .rc_value(&x0)
            .map_err(|source| DynamicsError::Geometry { step: 0, source })?;
        let log_mu_tilde = match estimate(sys, &x0, z, cfg, rng) {
            Ok((_, w)) => w,
            Err(StepError::Dynamics(e)) => return Err(e.into()),
            Err(StepError::Estimator(e)) => return Err(e.into()),
        };
        Ok(Self { x: x0, z, log_mu_tilde })
    }
}

/// Reconstructs from `x` towards `target` and estimates `log μ_λ(target)`.
/// Returns the final iterate and the estimate.
fn estimate<S, R>(
    sys: &S,
    x: &[f64],
    target: RcValue,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Result<(Configuration, LogWeight), StepError>
where
    S: MolecularSystem + ?Sized,
    R: Rng + ?Sized,
{
    let lambda = cfg.recon.lambda;
    let mut traj = reconstruct(sys, x, target, &cfg.recon, cfg.beta, rng)?;
    let hist = TensorHistogram::build(&traj, cfg.bin_width)?;
    let w = match cfg.mode {
        EstimatorMode::Exact => estimate_log_mu_lambda(target, &hist, cfg.k_eval, sys, lambda, cfg.beta, rng)?,
        EstimatorMode::Reuse => estimate_log_mu_lambda_reuse(target, &traj, &hist, sys, lambda, cfg.beta)?,
    };
    let last = traj.pop().expect("reconstruction has at least one step");
    Ok((last, w))
}

/// Pseudo-marginal microscopic test:
/// `α_f = min{1, exp(log μ̃' − log μ̃)·μ̄₀(z)/μ̄₀(z')}`.
pub fn micro_accept<S, R>(
    sys: &S,
    state: &ChainState,
    z_proposed: RcValue,
    log_mu_tilde_proposed: LogWeight,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Decision
where
    S: MolecularSystem + ?Sized,
    R: Rng + ?Sized,
{
    let log_ratio = if log_mu_tilde_proposed.is_zero() {
        f64::NEG_INFINITY
    } else {
        (log_mu_tilde_proposed.value() - state.log_mu_tilde.value())
            + (cfg.log_mubar(sys, state.z) - cfg.log_mubar(sys, z_proposed))
    };
    Decision::metropolis(log_ratio, rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub z_proposed: RcValue,
    pub macro_accepted: bool,
    pub alpha_cg: f64,
    /// `None` unless the microscopic test ran.
    pub alpha_f: Option<f64>,
    pub micro_accepted: bool,
    pub log_mu_tilde_new: Option<LogWeight>,
    /// Gradient evaluations spent in reconstruction.
    pub gradient_evals: usize,
    /// Potential evaluations spent in the estimator.
    pub potential_evals: usize,
    pub error: Option<StepError>,
    /// A Metropolis ratio came out NaN.
    pub non_finite: bool,
}

/// One step of the chain, updating `state` in place.
pub fn mm_mcmc_step<S, R>(sys: &S, state: &mut ChainState, cfg: &ChainConfig, rng: &mut R) -> StepDiagnostics
where
    S: MolecularSystem + ?Sized,
    R: Rng + ?Sized,
{
    let z_proposed = propose_rc(state.z, &cfg.macro_params, cfg.beta, rng);
    let macro_decision = macro_accept(state.z, z_proposed, |z| cfg.log_mubar(sys, z), rng);
    let mut diag = StepDiagnostics {
        z_proposed,
        macro_accepted: macro_decision.accepted,
        alpha_cg: macro_decision.alpha,
        alpha_f: None,
        micro_accepted: false,
        log_mu_tilde_new: None,
        gradient_evals: 0,
        potential_evals: 0,
        error: None,
        non_finite: macro_decision.non_finite,
    };
    if !macro_decision.accepted {
        return diag;
    }

    diag.gradient_evals = cfg.recon.n_steps;
    diag.potential_evals = match cfg.mode {
        EstimatorMode::Exact => cfg.k_eval,
        EstimatorMode::Reuse => cfg.recon.n_steps,
    };
    let (x_new, log_mu_new) = match estimate(sys, &state.x, z_proposed, cfg, rng) {
        Ok(v) => v,
        Err(e) => {
            diag.error = Some(e);
            return diag;
        }
    };
    diag.log_mu_tilde_new = Some(log_mu_new);
    let micro = micro_accept(sys, state, z_proposed, log_mu_new, cfg, rng);
    diag.alpha_f = Some(micro.alpha);
    diag.micro_accepted = micro.accepted;
    diag.non_finite |= micro.non_finite;
    if micro.accepted {
        *state = ChainState { x: x_new, z: z_proposed, log_mu_tilde: log_mu_new };
    }
    diag
}

/// Aggregate counts over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSummary {
    pub n_steps: u64,
    pub macro_accepted: u64,
    pub micro_attempted: u64,
    pub micro_accepted: u64,
    pub step_errors: u64,
    pub gradient_evals: u64,
    pub potential_evals: u64,
    /// Time inside `mm_mcmc_step` only; recording is excluded.
    pub elapsed: Duration,
}

impl ChainSummary {
    pub fn macro_rate(&self) -> f64 {
        ratio(self.macro_accepted, self.n_steps)
    }

    /// Accepted over attempted microscopic tests.
    pub fn micro_rate(&self) -> f64 {
        ratio(self.micro_accepted, self.micro_attempted)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        f64::NAN
    } else {
        a as f64 / b as f64
    }
}

/// Runs `n_steps` steps from `state`, passing one record per step to `sink`.
pub fn run_chain<S, R, K>(
    sys: &S,
    state: &mut ChainState,
    cfg: &ChainConfig,
    n_steps: u64,
    rng: &mut R,
    sink: &mut K,
) -> Result<ChainSummary, ChainError>
where
    S: MolecularSystem + ?Sized,
    R: Rng + ?Sized,
    K: RecordSink + ?Sized,
{
    cfg.validate()?;
    let mut summary = ChainSummary {
        n_steps,
        macro_accepted: 0,
        micro_attempted: 0,
        micro_accepted: 0,
        step_errors: 0,
        gradient_evals: 0,
        potential_evals: 0,
        elapsed: Duration::ZERO,
    };
    for step in 0..n_steps {
        let t0 = Instant::now();
        let d = mm_mcmc_step(sys, state, cfg, rng);
        summary.elapsed += t0.elapsed();

        summary.macro_accepted += d.macro_accepted as u64;
        summary.micro_attempted += d.alpha_f.is_some() as u64;
        summary.micro_accepted += d.micro_accepted as u64;
        summary.step_errors += d.error.is_some() as u64;
        summary.gradient_evals += d.gradient_evals as u64;
        summary.potential_evals += d.potential_evals as u64;
        if let Some(e) = &d.error {
            log::debug!("step {step}: {e}");
        }

        let xi_x = sys.rc_value(&state.x).map(|z| z.value()).unwrap_or(f64::NAN);
        sink.record(&StepRecord {
            step,
            z: state.z.value(),
            xi_x,
            log_mu_tilde: state.log_mu_tilde.value(),
            macro_acc: d.macro_accepted,
            micro_acc: d.micro_accepted,
            alpha_cg: d.alpha_cg,
            alpha_f: d.alpha_f,
            z_proposed: d.z_proposed.value(),
            log_mu_tilde_proposed: d.log_mu_tilde_new.map(LogWeight::value),
        })?;
    }
    sink.finish()?;
    Ok(summary)
}

#[cfg(test)]
mod tests;
