//! Torsion histograms against the analytic densities, and the scatter of
//! every estimate `Q̃_λ` seen during a run.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use mmmcmc_core::analysis::{
    bin_probabilities, empirical_bin_probabilities, kernel_mean_variance, quadrature_mu_lambda, tv_distance,
    uniform_edges, KernelParams,
};
use mmmcmc_core::mcmc::{ChainSummary, CsvSink, FnSink, RecordSink, StepRecord};
use mmmcmc_core::model::MolecularSystem;

use super::{build_system, carbons, chain_config, f, lambda, run_from_start, TORSION_KNOTS};
use crate::config::ExperimentConfig;
use crate::output::{io_err, write_csv};
use crate::seeding::{par_map, run_rng};
use crate::RunError;

#[derive(Debug, Clone)]
pub struct ButaneHist {
    pub edges: Vec<f64>,
    /// Pooled over runs.
    pub micro: Vec<f64>,
    pub macro_: Vec<f64>,
    /// `exp(−βA)` and `μ_λ`, binned by quadrature.
    pub micro_ref: Vec<f64>,
    pub macro_ref: Vec<f64>,
    pub tv_micro: f64,
    pub tv_macro: f64,
    pub summaries: Vec<ChainSummary>,
}

/// Writes a chain CSV and keeps the two torsion streams.
struct HistSink {
    csv: CsvSink<BufWriter<File>>,
    micro: Vec<f64>,
    macro_: Vec<f64>,
}

impl RecordSink for HistSink {
    fn record(&mut self, r: &StepRecord) -> std::io::Result<()> {
        self.micro.push(r.xi_x);
        self.macro_.push(r.z);
        self.csv.record(r)
    }

    fn finish(&mut self) -> std::io::Result<()> {
        self.csv.finish()
    }
}

/// `chain_{r}.csv` per run, `torsion_hist.csv` and `rates.csv`.
pub fn butane_hist(cfg: &ExperimentConfig, dir: &Path) -> Result<ButaneHist, RunError> {
    let sys = build_system(cfg, carbons(cfg))?;
    let chain = chain_config(cfg, cfg.k_recon);
    let edges = uniform_edges(-PI, PI, cfg.hist_bins);

    let runs = par_map(cfg.n_runs, |r| -> Result<_, RunError> {
        let path = dir.join(format!("chain_{r}.csv"));
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut sink = HistSink {
            csv: CsvSink::new(BufWriter::new(file)),
            micro: Vec::with_capacity(cfg.n_steps as usize),
            macro_: Vec::with_capacity(cfg.n_steps as usize),
        };
        let mut rng = run_rng(cfg.seed, 0, r as u32);
        let summary = run_from_start(&sys, &chain, cfg.n_steps, &mut rng, &mut sink)?;
        let micro = empirical_bin_probabilities(&sink.micro, &edges);
        let macro_ = empirical_bin_probabilities(&sink.macro_, &edges);
        Ok((summary, micro, macro_))
    })?;

    let beta = chain.beta;
    let micro_ref = bin_probabilities(|u| (-beta * sys.free_energy(u)).exp(), &edges, &TORSION_KNOTS)?;
    let lam = lambda(cfg);
    let macro_ref = bin_probabilities(
        |z| quadrature_mu_lambda(z, |u| sys.free_energy(u), lam, beta).unwrap_or(f64::NAN),
        &edges,
        &TORSION_KNOTS,
    )?;

    let n = runs.len() as f64;
    let pool = |pick: fn(&(ChainSummary, Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> Vec<f64> {
        (0..cfg.hist_bins).map(|j| runs.iter().map(|r| pick(r)[j]).sum::<f64>() / n).collect()
    };
    let micro = pool(|r| &r.1);
    let macro_ = pool(|r| &r.2);

    write_csv(
        &dir.join("torsion_hist.csv"),
        "lo,hi,micro,macro,micro_ref,macro_ref",
        (0..cfg.hist_bins).map(|j| {
            format!(
                "{},{},{},{},{},{}",
                f(edges[j]),
                f(edges[j + 1]),
                f(micro[j]),
                f(macro_[j]),
                f(micro_ref[j]),
                f(macro_ref[j])
            )
        }),
    )?;
    write_csv(
        &dir.join("rates.csv"),
        "run,n_steps,macro_rate,micro_rate,step_errors,tv_micro,tv_macro",
        runs.iter().enumerate().map(|(r, (s, mi, ma))| {
            format!(
                "{r},{},{},{},{},{},{}",
                s.n_steps,
                f(s.macro_rate()),
                f(s.micro_rate()),
                s.step_errors,
                f(tv_distance(mi, &micro_ref)),
                f(tv_distance(ma, &macro_ref))
            )
        }),
    )?;

    Ok(ButaneHist {
        tv_micro: tv_distance(&micro, &micro_ref),
        tv_macro: tv_distance(&macro_, &macro_ref),
        edges,
        micro,
        macro_,
        micro_ref,
        macro_ref,
        summaries: runs.into_iter().map(|r| r.0).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct QlambdaScatter {
    /// `(z', Q̃_λ(z'))` for every estimate computed, in run then step order.
    pub pairs: Vec<(f64, f64)>,
    pub summaries: Vec<ChainSummary>,
}

/// `qlambda.csv` (`z,q_tilde`), `qlambda_ref.csv` (`z,q_lambda,free_energy`)
/// and `kernel.csv` smoothing the scatter.
pub fn qlambda_scatter(cfg: &ExperimentConfig, dir: &Path) -> Result<QlambdaScatter, RunError> {
    let sys = build_system(cfg, carbons(cfg))?;
    let chain = chain_config(cfg, cfg.k_recon);
    let beta = chain.beta;

    let runs = par_map(cfg.n_runs, |r| -> Result<_, RunError> {
        let mut pairs = Vec::new();
        let mut sink = FnSink(|rec: &StepRecord| {
            if let Some(w) = rec.log_mu_tilde_proposed.filter(|w| w.is_finite()) {
                pairs.push((rec.z_proposed, -w / beta));
            }
        });
        let mut rng = run_rng(cfg.seed, 0, r as u32);
        let summary = run_from_start(&sys, &chain, cfg.n_steps, &mut rng, &mut sink)?;
        Ok((summary, pairs))
    })?;
    let mut pairs = Vec::new();
    let mut summaries = Vec::new();
    for (s, p) in runs {
        summaries.push(s);
        pairs.extend(p);
    }

    write_csv(&dir.join("qlambda.csv"), "z,q_tilde", pairs.iter().map(|&(z, q)| format!("{},{}", f(z), f(q))))?;

    let kp = KernelParams {
        epsilon: cfg.kernel_epsilon,
        normalization: cfg.kernel_normalization,
        ..KernelParams::uniform_grid(cfg.kernel_grid)
    };
    let lam = lambda(cfg);
    let reference = kp
        .grid
        .iter()
        .map(|&z| {
            let mu = quadrature_mu_lambda(z, |u| sys.free_energy(u), lam, beta)?;
            Ok(format!("{},{},{}", f(z), f(-mu.ln() / beta), f(sys.free_energy(z))))
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    write_csv(&dir.join("qlambda_ref.csv"), "z,q_lambda,free_energy", reference)?;
    super::variance::write_kernel_csv(&dir.join("kernel.csv"), &kernel_mean_variance(&pairs, &kp))?;

    Ok(QlambdaScatter { pairs, summaries })
}
