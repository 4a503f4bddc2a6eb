use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mmmcmc::config::{parse_overrides, ConfigError, ExperimentConfig};
use mmmcmc::{run_experiment, Experiment, EXIT_CONFIG};

/// Micro-macro MCMC experiments on united-atom alkanes.
///
/// Any configuration key can be overridden after the experiment name as
/// `--key value`, for example `--temperature 400 --K_values 10,20`.
#[derive(Debug, Parser)]
#[command(name = "mmmcmc", version)]
struct Cli {
    experiment: Experiment,
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Divide n_steps and n_runs by this factor.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// `--key value` overrides.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

fn resolve(cli: &Cli) -> Result<(ExperimentConfig, f64), ConfigError> {
    let mut config = cli.config.clone();
    let mut scale = cli.scale;
    let mut overrides = Vec::new();
    for (k, v) in parse_overrides(&cli.overrides)? {
        match k.as_str() {
            "config" => config = Some(PathBuf::from(v)),
            "scale" => {
                scale = v.parse().map_err(|e: std::num::ParseFloatError| ConfigError::InvalidValue {
                    key: k.clone(),
                    value: v.clone(),
                    reason: e.to_string(),
                })?
            }
            _ => overrides.push((k, v)),
        }
    }
    let cfg = ExperimentConfig::resolve(cli.experiment, config.as_deref(), &overrides)?.scaled(scale)?;
    Ok((cfg, scale))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (cfg, scale) = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    log::info!(
        "{}: n_steps={} n_runs={} seed={} -> {}",
        cli.experiment.name(),
        cfg.n_steps,
        cfg.n_runs,
        cfg.seed,
        cfg.output_dir.display()
    );
    match run_experiment(cli.experiment, &cfg, scale) {
        Ok(files) => {
            for p in files {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
