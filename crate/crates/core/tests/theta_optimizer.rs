use proptest::prelude::*;
use rand::Rng as _;
use topic_privacy::corpus::Document;
use topic_privacy::lda::{
    estimate_theta, estimate_theta_traced, log_likelihood, sample_dirichlet, synthetic_vocabulary, ThetaOptions,
    TopicMixture, TopicModel,
};
use topic_privacy::rng::rng_from_seed;

fn random_instance(k: usize, v: usize, max_len: usize, seed: u64) -> (TopicModel, Document) {
    let mut rng = rng_from_seed(seed);
    let rows: Vec<Vec<f64>> = (0..k).map(|_| sample_dirichlet(1.0, v, &mut rng)).collect();
    let n = rng.random_range(1..=max_len);
    let doc = Document::new(0, None, (0..n).map(|_| (rng.random_range(0..v), 1)));
    (TopicModel::from_rows(rows, synthetic_vocabulary(v)).unwrap(), doc)
}

/// Σ_w c_w log Σ_z θ_z Φ_{z,w}, token by token in reverse word order.
fn brute_force_ll(model: &TopicModel, doc: &Document, theta: &[f64]) -> f64 {
    let mut ll = 0.0;
    for &(w, c) in doc.counts().iter().rev() {
        for _ in 0..c {
            let mut p = 0.0;
            for z in (0..theta.len()).rev() {
                p += theta[z] * model.prob(z, w);
            }
            ll += p.ln();
        }
    }
    ll
}

#[test]
fn em_matches_grid_search_on_two_topics() {
    for seed in 0..25 {
        let (model, doc) = random_instance(2, 6, 10, 1000 + seed);
        let (_, zeta) = estimate_theta(&model, &doc, ThetaOptions::default()).unwrap();
        let grid = (0..=1000)
            .map(|i| {
                let t = i as f64 / 1000.0;
                brute_force_ll(&model, &doc, &[t, 1.0 - t])
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(zeta >= grid - 1e-6, "seed {seed}: EM {zeta} below grid {grid}");
        assert!((zeta - grid).abs() <= 1e-3, "seed {seed}: EM {zeta} vs grid {grid}");
    }
}

#[test]
fn log_likelihood_matches_term_by_term_sum() {
    for seed in 0..20 {
        let (model, doc) = random_instance(3, 6, 12, 50 + seed);
        let mut rng = rng_from_seed(seed);
        let theta = sample_dirichlet(1.0, 3, &mut rng);
        let fast = log_likelihood(&model, &doc, &TopicMixture::new(theta.clone()).unwrap()).unwrap();
        assert!((fast - brute_force_ll(&model, &doc, &theta)).abs() < 1e-12);
    }
}

#[test]
fn representation_does_not_change_zeta() {
    for seed in 0..20 {
        let (model, doc) = random_instance(4, 20, 30, 300 + seed);
        let (_, zeta) = estimate_theta(&model, &doc, ThetaOptions::default()).unwrap();
        let reversed = Document::new(1, None, doc.counts().iter().rev().copied());
        let split = Document::new(
            2,
            None,
            doc.counts().iter().flat_map(|&(w, c)| [(w, c / 2), (w, c - c / 2)]),
        );
        for other in [reversed, split] {
            let (_, z) = estimate_theta(&model, &other, ThetaOptions::default()).unwrap();
            assert!((z - zeta).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn em_never_decreases_log_likelihood(k in 1usize..=10, v in 2usize..=100, len in 1usize..=200, seed in any::<u64>()) {
        let (model, doc) = random_instance(k, v, len, seed);
        let (theta, zeta, trace) = estimate_theta_traced(&model, &doc, ThetaOptions::default()).unwrap();
        for pair in trace.windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-12, "{} -> {}", pair[0], pair[1]);
        }
        prop_assert!((theta.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(theta.weights().iter().all(|&t| t >= 0.0));
        prop_assert_eq!(zeta, *trace.last().unwrap());
    }
}
