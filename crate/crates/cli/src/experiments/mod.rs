//! The experiment pipelines. Each writes its CSVs into a directory and
//! returns its numbers, so tests can drive them without the binary.

mod acceptance;
mod butane;
mod efficiency;
mod variance;

use std::f64::consts::PI;
use std::path::Path;

use mmmcmc_core::mcmc::{run_chain, ChainConfig, ChainState, ChainSummary, MacroDensity, RecordSink};
use mmmcmc_core::model::{Alkane, AlkaneParams, MolecularSystem};
use mmmcmc_core::pseudomarginal::default_bin_width;
use rand::Rng;

pub use acceptance::{acceptance_grid, AccRow};
pub use butane::{butane_hist, qlambda_scatter, ButaneHist, QlambdaScatter};
pub use efficiency::{eff_gain, mala_baseline, EffGainRow, MalaRun};
pub use variance::{estimate_spread_at, var_vs_k, VarVsK};

use crate::config::{ExperimentConfig, MubarChoice, SystemKind};
use crate::{Experiment, RunError};

/// Grid knots of the torsion free energy (its minima and maxima).
pub(crate) const TORSION_KNOTS: [f64; 3] = [-PI / 2.0, 0.0, PI / 2.0];

pub(crate) fn run(experiment: Experiment, cfg: &ExperimentConfig, dir: &Path) -> Result<(), RunError> {
    match experiment {
        Experiment::ButaneHist => butane_hist(cfg, dir).map(drop),
        Experiment::QlambdaScatter => qlambda_scatter(cfg, dir).map(drop),
        Experiment::AccVsN => acceptance_grid(cfg, &[cfg.k_recon], dir, "acc_vs_n.csv").map(drop),
        Experiment::AccVsK => acceptance_grid(cfg, &cfg.k_values, dir, "acc_vs_k.csv").map(drop),
        Experiment::VarVsK => var_vs_k(cfg, dir).map(drop),
        Experiment::EffGain => eff_gain(cfg, dir).map(drop),
        Experiment::MalaBaseline => mala_baseline(cfg, dir).map(drop),
    }
}

/// Carbon count of the configured system.
pub(crate) fn carbons(cfg: &ExperimentConfig) -> usize {
    match cfg.system {
        SystemKind::Butane => 4,
        SystemKind::Alkane => cfg.n_carbons,
    }
}

pub(crate) fn alkane_params(cfg: &ExperimentConfig, n_carbons: usize) -> AlkaneParams {
    AlkaneParams { n_carbons, temperature: cfg.temperature, ..AlkaneParams::default() }
}

pub fn build_system(cfg: &ExperimentConfig, n_carbons: usize) -> Result<Alkane, RunError> {
    Ok(Alkane::new(alkane_params(cfg, n_carbons))?)
}

/// λ = lambda_factor·k_b.
pub(crate) fn lambda(cfg: &ExperimentConfig) -> f64 {
    cfg.lambda_factor * AlkaneParams::default().k_b
}

/// Sampler parameters with `K_recon = k`; `K_eval` follows `k` unless set.
pub fn chain_config(cfg: &ExperimentConfig, k: usize) -> ChainConfig {
    let lambda = lambda(cfg);
    let beta = 1.0 / cfg.temperature;
    let mut c = ChainConfig::defaults(beta, AlkaneParams::default().k_b);
    c.macro_params.dt_macro = cfg.dt_macro;
    c.recon.lambda = lambda;
    c.recon.dt_micro = cfg.dt_micro_factor / lambda;
    c.recon.n_steps = k;
    c.k_eval = cfg.k_eval.unwrap_or(k);
    c.bin_width = cfg.bin_width.unwrap_or_else(|| default_bin_width(lambda));
    c.mubar = match cfg.mubar {
        MubarChoice::Exact => MacroDensity::Exact,
        MubarChoice::Uniform => MacroDensity::Uniform,
    };
    c.mode = cfg.estimator;
    c
}

/// One chain from the system's starting configuration.
pub(crate) fn run_from_start<R: Rng, K: RecordSink>(
    sys: &Alkane,
    chain: &ChainConfig,
    n_steps: u64,
    rng: &mut R,
    sink: &mut K,
) -> Result<ChainSummary, RunError> {
    let mut state = ChainState::initialize(sys, sys.initial_configuration(), chain, rng)?;
    Ok(run_chain(sys, &mut state, chain, n_steps, rng, sink)?)
}

/// Formats a float for CSV; shortest round-trip, `NaN` and `inf` spelled
/// the Rust way.
pub(crate) fn f(v: f64) -> String {
    v.to_string()
}
