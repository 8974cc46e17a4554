mod common;

use bellkey::filtering::{optimal_filters, FilterPair};
use bellkey::metrics::{chsh_value, correlation_spectrum, optimal_chsh_settings};
use bellkey::sim::{born_joint_distribution, filter_outcome_probabilities, run_protocol, FilterSampling, SimConfig, SimReport};
use bellkey::states::{gisin, werner};

fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn chsh_sigma(r: &SimReport) -> f64 {
    let per_pair = r.rounds_chsh as f64 / 4.0;
    r.correlators.iter().map(|e| (1.0 - e.unwrap().powi(2)) / per_pair).sum::<f64>().sqrt()
}

#[test]
fn identical_seeds_reproduce_reports() {
    let state = gisin(0.9, 0.85).unwrap();
    let cfg = SimConfig::new(150_000, 42).with_filtering(true);
    let a = run_protocol(&state, &cfg).unwrap();
    let b = run_protocol(&state, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = run_protocol(&state, &SimConfig::new(150_000, 43).with_filtering(true)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn qber_band_over_seeds() {
    let state = werner(0.8).unwrap();
    for seed in 0..20 {
        let r = run_protocol(&state, &SimConfig::new(100_000, seed)).unwrap();
        assert!((r.q_analytic - 0.1).abs() < 1e-12);
        let sigma = binomial_sigma(r.q_analytic, r.rounds_sifted);
        assert!((r.q_emp - r.q_analytic).abs() <= 3.0 * sigma, "seed {seed}: {}", r.q_emp);
        assert!(r.rounds_sifted <= r.rounds_filter_accepted && r.rounds_filter_accepted <= r.rounds_total);
    }
}

#[test]
fn acceptance_rate_and_filtered_qber_converge() {
    let state = gisin(0.9, 0.85).unwrap();
    let r = run_protocol(&state, &SimConfig::new(400_000, 5).with_filtering(true)).unwrap();
    let p = r.p_succ_analytic;
    assert!((r.accept_rate - p).abs() <= 3.0 * binomial_sigma(p, r.rounds_total));
    let q = r.q_analytic;
    assert!((q - (2.0 - 1.632763) / 4.0).abs() < 1e-5);
    assert!((r.q_emp - q).abs() <= 3.0 * binomial_sigma(q, r.rounds_sifted));
}

#[test]
fn chsh_estimate_converges() {
    for (state, filtering) in [(werner(0.9).unwrap(), false), (gisin(0.9, 0.85).unwrap(), true)] {
        let mut cfg = SimConfig::new(400_000, 9).with_filtering(filtering);
        cfg.chsh_test_fraction = 0.5;
        let r = run_protocol(&state, &cfg).unwrap();
        let s = r.s_emp.unwrap();
        assert!((s - r.s_analytic).abs() <= 3.0 * chsh_sigma(&r), "{s} vs {}", r.s_analytic);
    }
}

#[test]
fn povm_and_post_selected_paths_agree() {
    let state = gisin(0.8, 0.9).unwrap();
    let mut cfg = SimConfig::new(300_000, 21).with_filtering(true);
    let a = run_protocol(&state, &cfg).unwrap();
    cfg.sampling = FilterSampling::PostSelected;
    let b = run_protocol(&state, &cfg).unwrap();
    let p = a.p_succ_analytic;
    let band = 3.0 * (2.0 * p * (1.0 - p) / cfg.rounds as f64).sqrt();
    assert!((a.accept_rate - b.accept_rate).abs() <= band);
    let q = a.q_analytic;
    let qband = 3.0 * (binomial_sigma(q, a.rounds_sifted).powi(2) + binomial_sigma(q, b.rounds_sifted).powi(2)).sqrt();
    assert!((a.q_emp - b.q_emp).abs() <= qband);
}

#[test]
fn filter_povm_is_normalised() {
    let mut rng = common::rng(30);
    for _ in 0..300 {
        let state = common::random_state(&mut rng);
        let pair = FilterPair::new(common::random_filter(&mut rng), common::random_filter(&mut rng)).unwrap();
        let p = filter_outcome_probabilities(&state, &pair).unwrap();
        assert!(p.iter().all(|&x| x >= -1e-12));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let opt = optimal_filters(&state).unwrap();
        let q = filter_outcome_probabilities(&state, &opt).unwrap();
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn born_tables_reproduce_correlations() {
    let mut rng = common::rng(31);
    for _ in 0..500 {
        let state = common::random_state(&mut rng);
        let t = state.to_mueller().correlations();
        let (a, b) = (common::unit_vector(&mut rng), common::unit_vector(&mut rng));
        let p = born_joint_distribution(&state, &a, &b).unwrap();
        assert!(p.iter().all(|&x| x >= -1e-12));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let corr = p[0] - p[1] - p[2] + p[3];
        assert!((corr - a.dot(&(t * b))).abs() < 1e-12);
    }
}

#[test]
fn analytic_chsh_matches_settings() {
    let state = werner(0.85).unwrap();
    let r = run_protocol(&state, &SimConfig::new(10_000, 1)).unwrap();
    let settings = optimal_chsh_settings(&correlation_spectrum(&state)).unwrap();
    assert!((r.s_analytic - chsh_value(&state, &settings).unwrap()).abs() < 1e-9);
}
