//! Samplers on Gaussian toys, checked against closed forms.

use mmmcmc_core::analysis::{
    bin_probabilities, empirical_bin_probabilities, quadrature_mu_lambda, tv_distance, uniform_edges,
};
use mmmcmc_core::dynamics::MalaChain;
use mmmcmc_core::mcmc::{run_chain, ChainConfig, ChainState, FnSink, StepRecord};
use mmmcmc_core::model::{MolecularSystem, QuadraticToy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn toy_chain_z_marginal_matches_mu_lambda() {
    let (kappa, lambda, beta) = (10.0, 40.0, 1.0);
    let sys = QuadraticToy::one_dim(kappa);
    let mut cfg = ChainConfig::defaults(beta, lambda / 2.0);
    cfg.recon.dt_micro = 0.002;
    cfg.recon.n_steps = 50;
    cfg.k_eval = 50;
    cfg.macro_params.dt_macro = 0.02;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut state = ChainState::initialize(&sys, sys.initial_configuration(), &cfg, &mut rng).unwrap();
    let mut zs = Vec::with_capacity(1_000_000);
    run_chain(&sys, &mut state, &cfg, 1_000_000, &mut rng, &mut FnSink(|r: &StepRecord| zs.push(r.z))).unwrap();

    let edges = uniform_edges(-1.5, 1.5, 30);
    let truth = bin_probabilities(
        |z| quadrature_mu_lambda(z, |u| sys.free_energy(u), lambda, beta).unwrap(),
        &edges,
        &[0.0],
    )
    .unwrap();
    let tv = tv_distance(&empirical_bin_probabilities(&zs, &edges), &truth);
    assert!(tv < 0.03, "TV {tv}");
}

#[test]
fn mala_toy_matches_gibbs() {
    let (kappa, beta) = (4.0, 1.0);
    let sys = QuadraticToy::one_dim(kappa);
    let mut chain = MalaChain::new(&sys, sys.initial_configuration(), 0.1, beta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let xs: Vec<f64> = (0..1_000_000)
        .map(|_| {
            chain.step(&mut rng);
            chain.position()[0]
        })
        .collect();
    let edges = uniform_edges(-2.0, 2.0, 40);
    let truth = bin_probabilities(|x| (-0.5 * beta * kappa * x * x).exp(), &edges, &[0.0]).unwrap();
    let tv = tv_distance(&empirical_bin_probabilities(&xs, &edges), &truth);
    assert!(tv < 0.02, "TV {tv}");
}
