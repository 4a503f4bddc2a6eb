//! Experiment runner for the micro-macro sampler: configuration, seeding,
//! artifact writing and the seven experiment pipelines.

pub mod config;
pub mod experiments;
pub mod output;
pub mod seeding;

use std::path::PathBuf;

use mmmcmc_core::analysis::QuadratureError;
use mmmcmc_core::dynamics::DynamicsError;
use mmmcmc_core::mcmc::ChainError;
use mmmcmc_core::model::{GeometryError, ParamError};
use mmmcmc_core::pseudomarginal::EstimatorError;
use thiserror::Error;

pub use config::{ConfigError, ExperimentConfig};

/// Exit status for a configuration problem.
pub const EXIT_CONFIG: i32 = 3;
/// Exit status for a failure while running.
pub const EXIT_RUNTIME: i32 = 1;
/// Exit status for a malformed command line (clap's default).
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    ButaneHist,
    QlambdaScatter,
    AccVsN,
    AccVsK,
    VarVsK,
    EffGain,
    MalaBaseline,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Self::ButaneHist,
        Self::QlambdaScatter,
        Self::AccVsN,
        Self::AccVsK,
        Self::VarVsK,
        Self::EffGain,
        Self::MalaBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ButaneHist => "butane-hist",
            Self::QlambdaScatter => "qlambda-scatter",
            Self::AccVsN => "acc-vs-n",
            Self::AccVsK => "acc-vs-k",
            Self::VarVsK => "var-vs-k",
            Self::EffGain => "eff-gain",
            Self::MalaBaseline => "mala-baseline",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("system parameters: {0}")]
    System(#[from] ParamError),
    #[error("chain: {0}")]
    Chain(#[from] ChainError),
    #[error("reconstruction: {0}")]
    Dynamics(#[from] DynamicsError),
    #[error("estimate: {0}")]
    Estimator(#[from] EstimatorError),
    #[error("initial geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("reference quadrature: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::System(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        }
    }
}

/// Runs `experiment` and writes its artifacts and `manifest.txt` into
/// `cfg.output_dir`. Nothing is left behind on failure.
pub fn run_experiment(experiment: Experiment, cfg: &ExperimentConfig, scale: f64) -> Result<Vec<PathBuf>, RunError> {
    let staging = output::Staging::create(&cfg.output_dir, experiment.name())?;
    let result = experiments::run(experiment, cfg, staging.path());
    match result {
        Ok(()) => {
            output::write_manifest(staging.path(), experiment, cfg, scale)?;
            staging.commit()
        }
        Err(e) => {
            staging.discard();
            Err(e)
        }
    }
}
