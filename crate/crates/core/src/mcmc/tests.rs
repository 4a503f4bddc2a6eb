use super::*;
use crate::model::{Alkane, QuadraticToy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn toy_config() -> ChainConfig {
    let mut cfg = ChainConfig::defaults(1.0, 2.0);
    cfg.recon.dt_micro = 0.05;
    cfg.recon.n_steps = 20;
    cfg.k_eval = 20;
    cfg.macro_params.dt_macro = 0.05;
    cfg
}

fn custom(f: impl Fn(RcValue) -> f64 + Send + Sync + 'static) -> MacroDensity {
    MacroDensity::Custom(Arc::new(f))
}

fn state(z: f64, log_mu: f64) -> ChainState {
    ChainState {
        x: Configuration::from_flat(vec![z]).unwrap(),
        z: RcValue::new(z),
        log_mu_tilde: LogWeight::new(log_mu),
    }
}

#[test]
fn micro_acceptance_arithmetic() {
    let sys = QuadraticToy::one_dim(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut cfg = toy_config();
    let (zn, zp) = (RcValue::new(0.0), RcValue::new(0.5));

    cfg.mubar = MacroDensity::Uniform;
    let s = state(zn.value(), -3.0);
    let d = micro_accept(&sys, &s, zp, LogWeight::new(-3.0), &cfg, &mut rng);
    assert_eq!(d.alpha, 1.0);

    // μ̄₀(z_n)/μ̄₀(z') = 0.5 and a log-estimate gain of ln 2.
    cfg.mubar = custom(move |z| if z == zn { 0.5f64.ln() } else { 0.0 });
    let d = micro_accept(&sys, &s, zp, LogWeight::new(-3.0 + 2.0f64.ln()), &cfg, &mut rng);
    assert!((d.alpha - 1.0).abs() < 1e-15);

    cfg.mubar = MacroDensity::Uniform;
    let d = micro_accept(&sys, &s, zp, LogWeight::new(-3.0 - 4.0f64.ln()), &cfg, &mut rng);
    assert!((d.alpha - 0.25).abs() < 1e-15);

    let d = micro_accept(&sys, &s, zp, LogWeight::ZERO, &cfg, &mut rng);
    assert_eq!((d.accepted, d.alpha), (false, 0.0));
}

#[test]
fn forced_macro_rejection_leaves_state_untouched() {
    let sys = QuadraticToy::one_dim(1.0);
    let mut cfg = toy_config();
    cfg.mubar = custom(|_| f64::NEG_INFINITY);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut s = state(0.1, -2.0);
    let before = s.clone();
    for _ in 0..50 {
        let d = mm_mcmc_step(&sys, &mut s, &cfg, &mut rng);
        assert!(!d.macro_accepted);
        assert_eq!(d.alpha_cg, 0.0);
        assert_eq!((d.gradient_evals, d.potential_evals), (0, 0));
        assert!(d.alpha_f.is_none() && d.log_mu_tilde_new.is_none());
    }
    assert_eq!(s, before);
}

#[test]
fn accepted_estimate_is_cached_bitwise() {
    let sys = QuadraticToy::one_dim(1.0);
    let cfg = toy_config();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut s = ChainState::initialize(&sys, sys.initial_configuration(), &cfg, &mut rng).unwrap();
    let mut accepted = 0;
    for _ in 0..500 {
        let cached = s.log_mu_tilde;
        let d = mm_mcmc_step(&sys, &mut s, &cfg, &mut rng);
        if d.micro_accepted {
            accepted += 1;
            assert_eq!(s.log_mu_tilde.value().to_bits(), d.log_mu_tilde_new.unwrap().value().to_bits());
            assert_eq!(s.z, d.z_proposed);
        } else {
            assert_eq!(s.log_mu_tilde.value().to_bits(), cached.value().to_bits());
        }
    }
    assert!(accepted > 0);
}

#[test]
fn same_seed_same_chain() {
    let sys = Alkane::butane();
    let cfg = ChainConfig::defaults(sys.beta(), sys.params().k_b);
    let run = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = ChainState::initialize(&sys, sys.ideal_configuration(), &cfg, &mut rng).unwrap();
        let mut out = Vec::new();
        run_chain(&sys, &mut s, &cfg, 200, &mut rng, &mut out).unwrap();
        (s, out)
    };
    let (a, ra) = run(5);
    let (b, rb) = run(5);
    assert_eq!(a, b);
    assert_eq!(ra, rb);
}

#[test]
fn one_step_run_matches_single_step() {
    let sys = QuadraticToy::one_dim(1.0);
    let cfg = toy_config();
    let init = ChainState::initialize(&sys, sys.initial_configuration(), &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();

    let mut a = init.clone();
    let d = mm_mcmc_step(&sys, &mut a, &cfg, &mut ChaCha8Rng::seed_from_u64(4));
    let mut b = init;
    let mut out = Vec::new();
    let summary = run_chain(&sys, &mut b, &cfg, 1, &mut ChaCha8Rng::seed_from_u64(4), &mut out).unwrap();
    assert_eq!(a, b);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].macro_acc, d.macro_accepted);
    assert_eq!(out[0].alpha_f, d.alpha_f);
    assert_eq!(summary.n_steps, 1);
}

#[test]
fn butane_chain_stays_finite() {
    let sys = Alkane::butane();
    let cfg = ChainConfig::defaults(sys.beta(), sys.params().k_b);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut s = ChainState::initialize(&sys, sys.ideal_configuration(), &cfg, &mut rng).unwrap();
    let mut out = Vec::new();
    let summary = run_chain(&sys, &mut s, &cfg, 2000, &mut rng, &mut out).unwrap();
    for r in &out {
        assert!((0.0..=1.0).contains(&r.alpha_cg));
        assert!(r.alpha_f.is_none_or(|a| (0.0..=1.0).contains(&a)));
        assert!(r.z.is_finite() && r.xi_x.is_finite() && r.log_mu_tilde.is_finite());
    }
    assert!(s.x.is_finite());
    assert_eq!(summary.gradient_evals, summary.macro_accepted * cfg.recon.n_steps as u64);
    assert!(summary.macro_rate() > 0.0);
}

#[test]
fn config_validation() {
    let mut cfg = toy_config();
    cfg.k_eval = 0;
    assert!(matches!(cfg.validate(), Err(ChainError::InvalidConfig { name: "K_eval", .. })));
    let mut cfg = toy_config();
    cfg.bin_width = -1.0;
    assert!(matches!(cfg.validate(), Err(ChainError::InvalidConfig { name: "bin_width", .. })));
    let mut cfg = toy_config();
    cfg.recon.n_steps = 0;
    assert!(matches!(cfg.validate(), Err(ChainError::Dynamics(_))));
}
