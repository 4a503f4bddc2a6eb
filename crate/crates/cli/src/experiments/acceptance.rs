//! Mean microscopic acceptance rate over a grid of chain lengths `N` and
//! reconstruction lengths `K`.

use std::path::Path;

use mmmcmc_core::analysis::Summary;
use mmmcmc_core::mcmc::NullSink;

use super::{build_system, chain_config, f, run_from_start};
use crate::config::ExperimentConfig;
use crate::output::write_csv;
use crate::seeding::{par_map, run_rng};
use crate::RunError;

#[derive(Debug, Clone, PartialEq)]
pub struct AccRow {
    pub n_carbons: usize,
    pub k: usize,
    /// Mean over runs that made at least one microscopic test.
    pub mean_micro_acc: f64,
    pub stderr: f64,
    pub runs_used: usize,
}

/// One row per `(N, K)` in `cfg.n_values × ks`, `N` outer. Task index of a
/// pair is its row number.
pub fn acceptance_grid(cfg: &ExperimentConfig, ks: &[usize], dir: &Path, file: &str) -> Result<Vec<AccRow>, RunError> {
    let grid: Vec<(usize, usize)> = cfg.n_values.iter().flat_map(|&n| ks.iter().map(move |&k| (n, k))).collect();
    let systems = cfg
        .n_values
        .iter()
        .map(|&n| build_system(cfg, n))
        .collect::<Result<Vec<_>, _>>()?;
    let runs = cfg.n_runs;
    let rates = par_map(grid.len() * runs, |i| -> Result<f64, RunError> {
        let (task, run) = (i / runs, i % runs);
        let (n, k) = grid[task];
        let sys = &systems[cfg.n_values.iter().position(|&v| v == n).expect("n from n_values")];
        let mut rng = run_rng(cfg.seed, task as u32, run as u32);
        let s = run_from_start(sys, &chain_config(cfg, k), cfg.n_steps, &mut rng, &mut NullSink)?;
        log::debug!("N={n} K={k} run {run}: micro {:.4} macro {:.4}", s.micro_rate(), s.macro_rate());
        Ok(s.micro_rate())
    })?;

    let rows: Vec<AccRow> = grid
        .iter()
        .enumerate()
        .map(|(task, &(n, k))| {
            let used: Vec<f64> = rates[task * runs..(task + 1) * runs].iter().copied().filter(|r| r.is_finite()).collect();
            let s = Summary::of(&used);
            AccRow { n_carbons: n, k, mean_micro_acc: s.mean, stderr: s.stderr, runs_used: used.len() }
        })
        .collect();
    write_csv(
        &dir.join(file),
        "N,K,mean_micro_acc,stderr",
        rows.iter().map(|r| format!("{},{},{},{}", r.n_carbons, r.k, f(r.mean_micro_acc), f(r.stderr))),
    )?;
    Ok(rows)
}
