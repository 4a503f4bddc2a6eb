//! MALA baseline and the efficiency gain of the micro-macro sampler over it
//! for `F(z) = z` ("mean") and `F(z) = z²` ("variance").

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use mmmcmc_core::analysis::{
    bin_probabilities, efficiency_gain, empirical_bin_probabilities, mse, quadrature_expectation, uniform_edges,
};
use mmmcmc_core::dynamics::MalaChain;
use mmmcmc_core::mcmc::{FnSink, StepRecord};
use mmmcmc_core::model::{Alkane, MolecularSystem};
use rand::Rng;

use super::{alkane_params, build_system, carbons, chain_config, f, lambda, run_from_start, TORSION_KNOTS};
use crate::config::ExperimentConfig;
use crate::output::write_csv;
use crate::seeding::{par_map, run_rng};
use crate::RunError;

pub const FUNCTIONALS: [&str; 2] = ["mean", "variance"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MalaRun {
    pub acc_rate: f64,
    /// Chain averages of `ξ` and `ξ²`.
    pub f: [f64; 2],
    /// Time spent in MALA steps only.
    pub elapsed: Duration,
}

/// Running sums of `ξ` and `ξ²` over visited configurations.
#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    n: u64,
    s1: f64,
    s2: f64,
}

impl Moments {
    fn push(&mut self, z: f64) {
        self.n += 1;
        self.s1 += z;
        self.s2 += z * z;
    }

    fn averages(&self) -> [f64; 2] {
        let n = self.n as f64;
        [self.s1 / n, self.s2 / n]
    }
}

fn mala_run<R: Rng>(
    sys: &Alkane,
    dt: f64,
    n_steps: u64,
    rng: &mut R,
    mut visit: impl FnMut(f64),
) -> Result<MalaRun, RunError> {
    let mut chain = MalaChain::new(sys, sys.initial_configuration(), dt, sys.beta())?;
    let mut moments = Moments::default();
    let mut accepted = 0u64;
    let mut elapsed = Duration::ZERO;
    for _ in 0..n_steps {
        let t0 = Instant::now();
        let out = chain.step(rng);
        elapsed += t0.elapsed();
        accepted += out.accepted as u64;
        let z = sys.rc_value(chain.position())?.value();
        moments.push(z);
        visit(z);
    }
    Ok(MalaRun { acc_rate: accepted as f64 / n_steps as f64, f: moments.averages(), elapsed })
}

/// MALA step `mala_dt_factor/λ`.
fn mala_dt(cfg: &ExperimentConfig) -> f64 {
    cfg.mala_dt_factor / lambda(cfg)
}

/// Exact `E[z]` and `E[z²]` under `exp(−βA)`.
pub fn torsion_truth(cfg: &ExperimentConfig) -> Result<[f64; 2], RunError> {
    let p = alkane_params(cfg, 4);
    let beta = p.beta();
    Ok([
        quadrature_expectation(|z| z, |z| p.free_energy(z), beta)?,
        quadrature_expectation(|z| z * z, |z| p.free_energy(z), beta)?,
    ])
}

/// `mala.csv` (`run,acc_rate,f_mean,f_variance`) and `mala_hist.csv`
/// (`lo,hi,freq,ref`) for the configured system.
pub fn mala_baseline(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<MalaRun>, RunError> {
    let sys = build_system(cfg, carbons(cfg))?;
    let dt = mala_dt(cfg);
    let edges = uniform_edges(-PI, PI, cfg.hist_bins);
    let runs = par_map(cfg.n_runs, |r| -> Result<_, RunError> {
        let mut rng = run_rng(cfg.seed, 0, r as u32);
        let mut zs = Vec::with_capacity(cfg.n_steps as usize);
        let run = mala_run(&sys, dt, cfg.n_steps, &mut rng, |z| zs.push(z))?;
        log::info!("MALA run {r}: acceptance {:.4}, {:.3} s", run.acc_rate, run.elapsed.as_secs_f64());
        Ok((run, empirical_bin_probabilities(&zs, &edges)))
    })?;
    let beta = sys.beta();
    let reference = bin_probabilities(|u| (-beta * sys.free_energy(u)).exp(), &edges, &TORSION_KNOTS)?;
    let n = runs.len() as f64;
    let freq: Vec<f64> = (0..cfg.hist_bins).map(|j| runs.iter().map(|r| r.1[j]).sum::<f64>() / n).collect();

    write_csv(
        &dir.join("mala.csv"),
        "run,acc_rate,f_mean,f_variance",
        runs.iter()
            .enumerate()
            .map(|(r, (m, _))| format!("{r},{},{},{}", f(m.acc_rate), f(m.f[0]), f(m.f[1]))),
    )?;
    write_csv(
        &dir.join("mala_hist.csv"),
        "lo,hi,freq,ref",
        (0..cfg.hist_bins).map(|j| format!("{},{},{},{}", f(edges[j]), f(edges[j + 1]), f(freq[j]), f(reference[j]))),
    )?;
    Ok(runs.into_iter().map(|r| r.0).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffGainRow {
    pub n_carbons: usize,
    pub k: usize,
    pub functional: &'static str,
    pub mse_mala: f64,
    pub mse_mm: f64,
    /// Mean sampling time per run (s).
    pub t_mala: f64,
    pub t_mm: f64,
    pub gain: f64,
}

/// `eff_gain.csv` over `cfg.n_values × cfg.k_values`. MALA runs once per
/// `N` (task = index of `N`); micro-macro tasks follow after them.
pub fn eff_gain(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<EffGainRow>, RunError> {
    let truth = torsion_truth(cfg)?;
    let systems = cfg
        .n_values
        .iter()
        .map(|&n| build_system(cfg, n))
        .collect::<Result<Vec<_>, _>>()?;
    let (n_n, n_k, runs) = (cfg.n_values.len(), cfg.k_values.len(), cfg.n_runs);
    let dt = mala_dt(cfg);

    let mala = par_map(n_n * runs, |i| {
        let (task, run) = (i / runs, i % runs);
        let mut rng = run_rng(cfg.seed, task as u32, run as u32);
        mala_run(&systems[task], dt, cfg.n_steps, &mut rng, |_| ())
    })?;

    let mm = par_map(n_n * n_k * runs, |i| -> Result<([f64; 2], Duration), RunError> {
        let (pair, run) = (i / runs, i % runs);
        let (ni, ki) = (pair / n_k, pair % n_k);
        let chain = chain_config(cfg, cfg.k_values[ki]);
        let mut moments = Moments::default();
        let mut sink = FnSink(|r: &StepRecord| moments.push(r.xi_x));
        let mut rng = run_rng(cfg.seed, (n_n + pair) as u32, run as u32);
        let s = run_from_start(&systems[ni], &chain, cfg.n_steps, &mut rng, &mut sink)?;
        Ok((moments.averages(), s.elapsed))
    })?;

    let mut rows = Vec::new();
    for (ni, &n) in cfg.n_values.iter().enumerate() {
        let base = &mala[ni * runs..(ni + 1) * runs];
        let t_mala = base.iter().map(|r| r.elapsed.as_secs_f64()).sum::<f64>() / runs as f64;
        for (ki, &k) in cfg.k_values.iter().enumerate() {
            let pair = ni * n_k + ki;
            let cand = &mm[pair * runs..(pair + 1) * runs];
            let t_mm = cand.iter().map(|r| r.1.as_secs_f64()).sum::<f64>() / runs as f64;
            for (fi, name) in FUNCTIONALS.iter().enumerate() {
                let mse_mala = mse(&base.iter().map(|r| r.f[fi]).collect::<Vec<_>>(), truth[fi]);
                let mse_mm = mse(&cand.iter().map(|r| r.0[fi]).collect::<Vec<_>>(), truth[fi]);
                rows.push(EffGainRow {
                    n_carbons: n,
                    k,
                    functional: name,
                    mse_mala,
                    mse_mm,
                    t_mala,
                    t_mm,
                    gain: efficiency_gain(mse_mala, mse_mm, t_mala, t_mm),
                });
            }
        }
    }
    write_csv(
        &dir.join("eff_gain.csv"),
        "N,K,functional,mse_mala,mse_mm,t_mala,t_mm,gain",
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{},{}",
                r.n_carbons,
                r.k,
                r.functional,
                f(r.mse_mala),
                f(r.mse_mm),
                f(r.t_mala),
                f(r.t_mm),
                f(r.gain)
            )
        }),
    )?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Experiment;

    #[test]
    fn truth_matches_frozen_second_moment() {
        let t = torsion_truth(&ExperimentConfig::defaults(Experiment::EffGain)).unwrap();
        assert!(t[0].abs() < 1e-12);
        assert!((t[1] - 1.350_466_296_426).abs() < 1e-9);
    }
}
