//! Spread of the estimates `Q̃_λ = −β⁻¹ log μ̃_λ` as a function of `K`:
//! kernel-smoothed along chains, and directly at a fixed `z`.

use std::path::Path;

use mmmcmc_core::analysis::{kernel_mean_variance, KernelParams, KernelPoint, Summary};
use mmmcmc_core::dynamics::reconstruct;
use mmmcmc_core::mcmc::{EstimatorMode, FnSink, StepRecord};
use mmmcmc_core::model::{MolecularSystem, RcValue};
use mmmcmc_core::pseudomarginal::{estimate_log_mu_lambda, estimate_log_mu_lambda_reuse, TensorHistogram};

use super::{build_system, carbons, chain_config, f, run_from_start};
use crate::config::ExperimentConfig;
use crate::output::write_csv;
use crate::seeding::{par_map, run_rng};
use crate::RunError;

#[derive(Debug, Clone)]
pub struct VarVsK {
    pub grid: Vec<f64>,
    /// `(K, σ²(z) on the grid averaged over runs)` for each of `cfg.k_values`.
    pub variance: Vec<(usize, Vec<f64>)>,
    /// Run-averaged kernel mean and variance at `K = K_recon`.
    pub kernel: Vec<KernelPoint>,
}

pub(crate) fn write_kernel_csv(path: &Path, points: &[KernelPoint]) -> Result<(), RunError> {
    write_csv(
        path,
        "z,m,sigma2,defined",
        points.iter().map(|p| format!("{},{},{},{}", f(p.z), f(p.m), f(p.sigma2), p.defined as u8)),
    )
}

/// Averages `m` and `σ²` over the runs where the point is defined.
fn average_runs(grid: &[f64], runs: &[Vec<KernelPoint>]) -> Vec<KernelPoint> {
    grid.iter()
        .enumerate()
        .map(|(j, &z)| {
            let defined: Vec<&KernelPoint> = runs.iter().map(|r| &r[j]).filter(|p| p.defined).collect();
            if defined.is_empty() {
                return KernelPoint { z, m: f64::NAN, sigma2: f64::NAN, defined: false };
            }
            let n = defined.len() as f64;
            KernelPoint {
                z,
                m: defined.iter().map(|p| p.m).sum::<f64>() / n,
                sigma2: defined.iter().map(|p| p.sigma2).sum::<f64>() / n,
                defined: true,
            }
        })
        .collect()
}

/// `var_vs_k.csv` (`K,z,variance`) and `kernel.csv` at `K = K_recon`. The
/// kernel runs over every estimate computed during a chain, accepted or not.
pub fn var_vs_k(cfg: &ExperimentConfig, dir: &Path) -> Result<VarVsK, RunError> {
    let sys = build_system(cfg, carbons(cfg))?;
    let mut ks = cfg.k_values.clone();
    if !ks.contains(&cfg.k_recon) {
        ks.push(cfg.k_recon);
    }
    let kp = KernelParams {
        epsilon: cfg.kernel_epsilon,
        normalization: cfg.kernel_normalization,
        ..KernelParams::uniform_grid(cfg.kernel_grid)
    };
    let runs = cfg.n_runs;
    let per_run = par_map(ks.len() * runs, |i| -> Result<Vec<KernelPoint>, RunError> {
        let (task, run) = (i / runs, i % runs);
        let chain = chain_config(cfg, ks[task]);
        let beta = chain.beta;
        let mut pairs = Vec::new();
        let mut sink = FnSink(|rec: &StepRecord| {
            if let Some(w) = rec.log_mu_tilde_proposed.filter(|w| w.is_finite()) {
                pairs.push((rec.z_proposed, -w / beta));
            }
        });
        let mut rng = run_rng(cfg.seed, task as u32, run as u32);
        run_from_start(&sys, &chain, cfg.n_steps, &mut rng, &mut sink)?;
        Ok(kernel_mean_variance(&pairs, &kp))
    })?;

    let averaged: Vec<Vec<KernelPoint>> = per_run.chunks(runs).map(|c| average_runs(&kp.grid, c)).collect();
    let variance: Vec<(usize, Vec<f64>)> = cfg
        .k_values
        .iter()
        .map(|&k| {
            let t = ks.iter().position(|&v| v == k).expect("k from k_values");
            (k, averaged[t].iter().map(|p| p.sigma2).collect())
        })
        .collect();
    let kernel = averaged[ks.iter().position(|&v| v == cfg.k_recon).expect("k_recon added")].clone();

    write_csv(
        &dir.join("var_vs_k.csv"),
        "K,z,variance",
        variance
            .iter()
            .flat_map(|(k, v)| kp.grid.iter().zip(v).map(move |(z, s)| format!("{k},{},{}", f(*z), f(*s)))),
    )?;
    write_kernel_csv(&dir.join("kernel.csv"), &kernel)?;
    Ok(VarVsK { grid: kp.grid, variance, kernel })
}

/// `n` independent estimates of `Q̃_λ(z)` with `K = k`, each from a fresh
/// reconstruction started at the system's initial configuration.
/// Estimate `i` uses stream `(task, i)`.
pub fn estimate_spread_at(cfg: &ExperimentConfig, z: f64, k: usize, n: usize, task: u32) -> Result<Summary, RunError> {
    let sys = build_system(cfg, carbons(cfg))?;
    let chain = chain_config(cfg, k);
    let x0 = sys.initial_configuration();
    let target = RcValue::new(z);
    let lambda = chain.recon.lambda;
    let values = par_map(n, |i| -> Result<f64, RunError> {
        let mut rng = run_rng(cfg.seed, task, i as u32);
        let traj = reconstruct(&sys, &x0, target, &chain.recon, chain.beta, &mut rng)?;
        let hist = TensorHistogram::build(&traj, chain.bin_width)?;
        let w = match chain.mode {
            EstimatorMode::Exact => estimate_log_mu_lambda(target, &hist, chain.k_eval, &sys, lambda, chain.beta, &mut rng)?,
            EstimatorMode::Reuse => estimate_log_mu_lambda_reuse(target, &traj, &hist, &sys, lambda, chain.beta)?,
        };
        Ok(-w.value() / chain.beta)
    })?;
    Ok(Summary::of(&values))
}
