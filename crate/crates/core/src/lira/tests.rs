use super::*;
use crate::corpus::Vocabulary;
use crate::lda::{generate_synthetic_corpus, planted_topic_model, synthetic_vocabulary, TopicModel};

fn fit(mean: f64, variance: f64) -> NormalFit {
    NormalFit { mean, variance, n: 10 }
}

fn uniform_model(v: &Vocabulary) -> TopicModel {
    let n = v.len();
    TopicModel::from_rows(vec![vec![1.0 / n as f64; n]; 2], v.clone()).unwrap()
}

/// A learner that ignores its data; for membership bookkeeping tests.
fn cheap(corpus: &Corpus, _seed: u64) -> Result<TopicModel> {
    Ok(uniform_model(corpus.vocabulary()))
}

fn small_pool(m: usize) -> Corpus {
    let phi = planted_topic_model(2, 12, 0.3, 1);
    generate_synthetic_corpus(&phi, 0.5, m, 8, 2).unwrap()
}

#[test]
fn identical_fits_give_unit_ratio() {
    let f = fit(-3.0, 2.0);
    for x in [-100.0, -3.0, 0.0, 7.5] {
        let (lambda, log_lambda, saturated) = online_lambda(x, &f, &f);
        assert_eq!(lambda, 1.0);
        assert_eq!(log_lambda, 0.0);
        assert!(!saturated);
    }
}

#[test]
fn ten_sigma_gap_gives_huge_ratio() {
    let x = 4.0;
    let (lambda, log_lambda, _) = online_lambda(x, &fit(x, 1.0), &fit(x - 10.0, 1.0));
    assert!(lambda > 1e10);
    assert!((log_lambda - 50.0).abs() < 1e-9);
}

#[test]
fn offline_reference_points() {
    let out = fit(2.0, 4.0);
    assert_eq!(offline_lambda(2.0, &out).0, 0.5);
    assert!((offline_lambda(2.0 + 3.0 * 2.0, &out).0 - 0.998650101968370).abs() < 1e-12);
}

#[test]
fn online_ratio_monotone_for_equal_variances() {
    let (fin, fout) = (fit(1.0, 0.5), fit(-1.0, 0.5));
    let mut prev = f64::NEG_INFINITY;
    for i in 0..200 {
        let x = -10.0 + 0.1 * i as f64;
        let (_, log_lambda, _) = online_lambda(x, &fin, &fout);
        assert!(log_lambda > prev);
        prev = log_lambda;
    }
}

#[test]
fn extreme_ratios_saturate_but_stay_positive() {
    let (lambda, _, saturated) = online_lambda(0.0, &fit(0.0, 1.0), &fit(1.0, 1e-12));
    assert_eq!(lambda, SATURATION);
    assert!(saturated);
    let (lambda, _, saturated) = online_lambda(1.0, &fit(0.0, 1e-12), &fit(1.0, 1.0));
    assert!(lambda > 0.0 && saturated);
}

#[test]
fn ensemble_membership_sizes() {
    let pool = small_pool(40);
    let cfg = LdaConfig::new(2).with_iterations(5);
    let e = train_half_sample_ensemble(&pool, 8, 3, &cfg, &cfg).unwrap();
    assert_eq!(e.len(), 8);
    assert_eq!(e.seeds.len(), 8);
    assert!(e.memberships.iter().all(|m| m.len() == 20 && m.windows(2).all(|w| w[0] < w[1])));
    let again = train_half_sample_ensemble(&pool, 8, 3, &cfg, &cfg).unwrap();
    assert_eq!(e.memberships, again.memberships);
    assert!(e.models.iter().zip(&again.models).all(|(a, b)| a.phi() == b.phi()));
}

#[test]
fn ensemble_membership_counts_are_binomial() {
    // Count of 64 half-samples containing a document is Binomial(64, 1/2);
    // P(outside [16, 48]) is about 6e-5 per document.
    let pool = small_pool(200);
    let e = train_half_sample_ensemble(&pool, 64, 11, &LdaConfig::new(2), &cheap).unwrap();
    let inside = pool
        .documents()
        .iter()
        .filter(|d| {
            let c = (0..64).filter(|&i| e.contains(i, d.doc_id)).count();
            (16..=48).contains(&c)
        })
        .count();
    assert!(inside as f64 >= 0.99 * pool.len() as f64);
}

#[test]
fn literal_ensemble_alternates_membership() {
    let pool = small_pool(21);
    let e = train_literal_ensemble(&pool, 7, 6, 1, &LdaConfig::new(2), &cheap).unwrap();
    assert_eq!(e.target, Some(7));
    for i in 0..6 {
        assert_eq!(e.memberships[i].len(), 10);
        assert_eq!(e.contains(i, 7), i % 2 == 0);
    }
    assert!(train_literal_ensemble(&pool, 999, 6, 1, &LdaConfig::new(2), &cheap).is_err());
}

#[test]
fn tiny_pools_are_rejected() {
    let pool = small_pool(3);
    assert!(train_half_sample_ensemble(&pool, 8, 0, &LdaConfig::new(2), &cheap).is_err());
}

#[test]
fn insufficient_shadows_names_the_side() {
    let pool = small_pool(40);
    let cfg = LdaConfig::new(2).with_iterations(3);
    let e = train_literal_ensemble(&pool, 0, 3, 5, &cfg, &cfg).unwrap();
    let d = pool.document(0).unwrap();
    // Three models: two in, one out.
    match online_lira(&e.models[0], d, &e, QueryStatisticKind::LogLikelihood) {
        Err(Error::InsufficientShadows { side: Side::Out, available: 1, .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

fn trained_setup() -> (Corpus, ShadowEnsemble, TopicModel) {
    let pool = small_pool(30);
    let cfg = LdaConfig::new(2).with_iterations(20);
    let e = train_half_sample_ensemble(&pool, 8, 9, &cfg, &cfg).unwrap();
    let target = train_lda_on_half(&pool, &cfg);
    (pool, e, target)
}

fn train_lda_on_half(pool: &Corpus, cfg: &LdaConfig) -> TopicModel {
    let (half, _) = crate::corpus::split_half(pool, 4).unwrap();
    crate::lda::train_lda(&half, cfg).unwrap()
}

#[test]
fn topic_permutation_leaves_scores_unchanged() {
    let (pool, e, target) = trained_setup();
    let mut permuted = e.clone();
    permuted.models = e.models.iter().map(|m| m.permute_topics(&[1, 0]).unwrap()).collect();
    let target_p = target.permute_topics(&[1, 0]).unwrap();
    for d in pool.documents().iter().take(6) {
        let a = online_lira(&target, d, &e, QueryStatisticKind::LogLikelihood).unwrap();
        let b = online_lira(&target_p, d, &permuted, QueryStatisticKind::LogLikelihood).unwrap();
        assert!((a.ln() - b.ln()).abs() < 1e-6, "{a} vs {b}");
        let a = offline_lira(&target, d, &e, QueryStatisticKind::NegEntropy).unwrap();
        let b = offline_lira(&target_p, d, &permuted, QueryStatisticKind::NegEntropy).unwrap();
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn table_locality_under_model_removal() {
    let (pool, e, _) = trained_setup();
    let opts = ThetaOptions::default();
    let table = StatisticTable::build(&e, &pool, opts).unwrap();
    let reduced = StatisticTable::build(&e.without_model(3), &pool, opts).unwrap();
    let dropped = table.without_model(3);
    for &id in table.doc_ids() {
        for kind in QueryStatisticKind::ALL {
            assert_eq!(dropped.samples(id, kind), reduced.samples(id, kind));
        }
    }
}

#[test]
fn offline_lambda_is_a_probability_and_online_is_positive() {
    let (pool, e, target) = trained_setup();
    let labels = vec![false; pool.len()];
    for mode in [AttackMode::OnlineEnsemble, AttackMode::OfflineEnsemble] {
        let cfg = AttackConfig::new(mode, QueryStatisticKind::LogLikelihood, 8, 0);
        let out = attack_corpus(&target, &pool, &labels, &cfg, Shadows::Shared(&e)).unwrap();
        for s in &out.scores {
            assert!(s.lambda > 0.0);
            if mode == AttackMode::OfflineEnsemble {
                assert!(s.lambda <= 1.0);
            }
        }
        assert_eq!(out.scores.len() + out.skipped_insufficient, pool.len());
    }
}

#[test]
fn attack_corpus_bookkeeping() {
    let (pool, e, target) = trained_setup();
    let empty = Corpus::new(Vec::new(), pool.vocabulary().clone()).unwrap();
    let cfg = AttackConfig::new(AttackMode::OnlineEnsemble, QueryStatisticKind::LogLikelihood, 8, 0);
    let out = attack_corpus(&target, &empty, &[], &cfg, Shadows::Shared(&e)).unwrap();
    assert!(out.scores.is_empty());

    let mut with_empty = pool.clone();
    with_empty.push(Document::empty(1000, None)).unwrap();
    let labels = vec![true; with_empty.len()];
    let out = attack_corpus(&target, &with_empty, &labels, &cfg, Shadows::Shared(&e)).unwrap();
    assert_eq!(out.skipped_empty, 1);

    let literal = AttackConfig::new(AttackMode::OnlineLiteral, QueryStatisticKind::LogLikelihood, 8, 0);
    assert!(attack_corpus(&target, &pool, &vec![true; pool.len()], &literal, Shadows::Shared(&e)).is_err());
    assert!(attack_corpus(&target, &pool, &[true], &cfg, Shadows::Shared(&e)).is_err());
    let bad_baseline = AttackConfig::new(AttackMode::BaselineGlobal, QueryStatisticKind::LogLikelihood, 0, 0);
    assert!(bad_baseline.validate().is_err());
    let too_few = AttackConfig::new(AttackMode::OfflineEnsemble, QueryStatisticKind::LogLikelihood, 4, 0);
    assert!(too_few.validate().is_err());
}

#[test]
fn literal_attack_runs_through_attack_corpus() {
    let pool = small_pool(16);
    let cfg = LdaConfig::new(2).with_iterations(10);
    let eval = pool.subset(&[0, 1, 2]);
    let per_doc: HashMap<usize, ShadowEnsemble> = eval
        .documents()
        .iter()
        .map(|d| (d.doc_id, train_literal_ensemble(&pool, d.doc_id, 4, 2, &cfg, &cfg).unwrap()))
        .collect();
    let target = crate::lda::train_lda(&pool, &cfg).unwrap();
    let attack = AttackConfig::new(AttackMode::OnlineLiteral, QueryStatisticKind::LogLikelihood, 4, 2);
    let out = attack_corpus(&target, &eval, &[true, false, true], &attack, Shadows::PerDocument(&per_doc)).unwrap();
    assert_eq!(out.scores.len(), 3);
    let direct = online_lira(&target, &eval.documents()[1], &per_doc[&eval.documents()[1].doc_id], attack.statistic).unwrap();
    assert_eq!(out.scores[1].lambda, direct);
}

#[test]
fn baseline_orders_point_mass_first() {
    let v = synthetic_vocabulary(3);
    let model = TopicModel::from_rows(vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.5, 0.5]], v).unwrap();
    let docs = vec![
        Document::new(0, None, [(0, 4)]),
        Document::new(1, None, [(1, 2), (2, 2)]),
        Document::new(2, None, [(0, 2), (1, 2)]),
        Document::empty(3, None),
    ];
    let scores = baseline_global(&model, &docs, QueryStatisticKind::NegEntropy).unwrap();
    assert_eq!(scores.len(), 3);
    assert!(scores[0].score.abs() < 1e-9);
    assert!((scores[2].score + 2f64.ln()).abs() < 1e-6);
    assert!(scores[0].score > scores[2].score);
    assert!(baseline_global(&model, &docs, QueryStatisticKind::LogLikelihood).is_err());
}

#[test]
fn projected_empty_documents_score_zero() {
    let small = Vocabulary::from_terms(["taaa"]).unwrap();
    let model = TopicModel::from_rows(vec![vec![1.0], vec![1.0]], small).unwrap();
    let full = synthetic_vocabulary(3);
    let proj = Projection::new(&full, model.vocabulary());
    let d = Document::new(0, None, [(2, 3)]);
    let v = statistics_under(&model, &proj, &d, ThetaOptions::default()).unwrap();
    assert_eq!(v.log_likelihood, 0.0);
    assert_eq!(v.std_dev, 0.0);
}

#[test]
fn score_and_manifest_files_round_trip() {
    let scores = vec![
        AttackScore { doc_id: 3, lambda: 0.25, score: -1.5, label: true, saturated: false },
        AttackScore { doc_id: 8, lambda: SATURATION, score: 1e300, label: false, saturated: true },
    ];
    let mut buf = Vec::new();
    let meta = [("seed", "7".to_string())];
    write_scores(&scores, QueryStatisticKind::LogLikelihood, AttackMode::OnlineEnsemble, 7, &meta, &mut buf).unwrap();
    let back = read_scores(buf.as_slice()).unwrap();
    assert_eq!(back.iter().map(|r| r.score).collect::<Vec<_>>(), scores);
    assert!(back.iter().all(|r| r.mode == AttackMode::OnlineEnsemble && r.seed == 7));

    let pool = small_pool(12);
    let lda = LdaConfig::new(2).with_iterations(4);
    let e = train_half_sample_ensemble(&pool, 4, 1, &lda, &lda).unwrap();
    let mut buf = Vec::new();
    write_manifest(&e, &meta, &mut buf).unwrap();
    let entries = read_manifest(buf.as_slice()).unwrap();
    let memberships: Vec<Vec<usize>> = entries.iter().map(|m| m.doc_ids.clone()).collect();
    let seeds: Vec<u64> = entries.iter().map(|m| m.seed).collect();
    let replayed = replay_ensemble(&pool, &memberships, &seeds, &lda, &lda).unwrap();
    assert!(replayed.models.iter().zip(&e.models).all(|(a, b)| a.phi() == b.phi()));
}

#[test]
fn mode_names_round_trip() {
    for m in AttackMode::ALL {
        assert_eq!(m.name().parse::<AttackMode>().unwrap(), m);
    }
}
