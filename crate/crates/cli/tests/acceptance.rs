//! Acceptance suite: every criterion at its pinned tolerance and runtime
//! bound, one PASS/FAIL line each. Exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, TestRunner};
use rand::Rng as _;
use topic_privacy::corpus::{Corpus, Document, Vocabulary};
use topic_privacy::dp::{compose_privacy, dpsu_select, DpLdaParams, DpsuParams, FdptmLearner};
use topic_privacy::eval::topic_coherence;
use topic_privacy::experiment::{
    diagnose_statistics, median, run_attack_replication, AttackPlan, AttackReplication, SyntheticFixture,
};
use topic_privacy::lda::{
    estimate_theta, estimate_theta_traced, generate_synthetic_corpus, planted_topic_model, sample_dirichlet,
    synthetic_vocabulary, train_lda, LdaConfig, ThetaOptions, TopicModel,
};
use topic_privacy::lira::AttackMode;
use topic_privacy::rng::rng_from_seed;
use topic_privacy::stats::QueryStatisticKind as Q;

/// Master seed of the suite; replication r of an experiment uses MASTER + r.
const MASTER: u64 = 2024;
const REPLICATIONS: usize = 10;
/// Gibbs sweeps for target and shadow models on the attack fixture.
const FIXTURE_SWEEPS: usize = 200;
const FIXTURE_SHADOWS: usize = 64;
const FPR: f64 = 0.01;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

struct Suite {
    failures: usize,
}

impl Suite {
    fn check(&mut self, id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Verdict) {
        let start = Instant::now();
        let v = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = v.pass && in_time;
        if !pass {
            self.failures += 1;
        }
        let time_note = if in_time { String::new() } else { format!(" (over the {:?} bound)", limit) };
        println!(
            "{} criterion {id:>2} {name}: {} [{:.1}s]{time_note}",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
}

fn random_instance(k: usize, v: usize, max_len: usize, seed: u64) -> (TopicModel, Document) {
    let mut rng = rng_from_seed(seed);
    let rows: Vec<Vec<f64>> = (0..k).map(|_| sample_dirichlet(1.0, v, &mut rng)).collect();
    let n = rng.random_range(1..=max_len);
    let doc = Document::new(0, None, (0..n).map(|_| (rng.random_range(0..v), 1)));
    (TopicModel::from_rows(rows, synthetic_vocabulary(v)).unwrap(), doc)
}

fn ll_at(model: &TopicModel, doc: &Document, theta: &[f64]) -> f64 {
    doc.counts()
        .iter()
        .map(|&(w, c)| c as f64 * theta.iter().enumerate().map(|(z, t)| t * model.prob(z, w)).sum::<f64>().ln())
        .sum()
}

fn criterion_1() -> Verdict {
    let mut worst: f64 = 0.0;
    for i in 0..25 {
        let (model, doc) = random_instance(2, 6, 10, MASTER + i);
        let (_, zeta) = estimate_theta(&model, &doc, ThetaOptions::default()).unwrap();
        let grid = (0..=1000)
            .map(|j| {
                let t = j as f64 / 1000.0;
                ll_at(&model, &doc, &[t, 1.0 - t])
            })
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((zeta - grid).abs());
    }
    Verdict::new(worst <= 1e-3, format!("max |zeta_EM - zeta_grid| = {worst:.3e} over 25 instances (<= 1e-3)"))
}

fn criterion_2() -> Verdict {
    let mut rng = rng_from_seed(MASTER);
    let mut worst_drop: f64 = 0.0;
    let mut steps = 0;
    for i in 0..100 {
        let k = rng.random_range(1..=10);
        let v = rng.random_range(2..=100);
        let (model, doc) = random_instance(k, v, 200, MASTER + 1000 + i);
        let (_, _, trace) = estimate_theta_traced(&model, &doc, ThetaOptions::default()).unwrap();
        for p in trace.windows(2) {
            worst_drop = worst_drop.max(p[0] - p[1]);
            steps += 1;
        }
    }
    Verdict::new(
        worst_drop <= 1e-12,
        format!("largest decrease {worst_drop:.3e} across {steps} EM steps in 100 instances (<= 1e-12)"),
    )
}

fn matched_tv(learned: &TopicModel, planted: &TopicModel) -> f64 {
    let k = learned.num_topics();
    let tv = |a: &[f64], b: &[f64]| 0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
    let mut pairs: Vec<(f64, usize, usize)> = (0..k)
        .flat_map(|a| (0..k).map(move |b| (a, b)))
        .map(|(a, b)| (tv(learned.row(a), planted.row(b)), a, b))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (mut ua, mut ub, mut total) = (vec![false; k], vec![false; k], 0.0);
    for (d, a, b) in pairs {
        if !ua[a] && !ub[b] {
            ua[a] = true;
            ub[b] = true;
            total += d;
        }
    }
    total / k as f64
}

fn criterion_3() -> Verdict {
    let tvs: Vec<f64> = (0..5u64)
        .map(|s| {
            let planted = planted_topic_model(3, 50, 0.1, MASTER + s);
            let corpus = generate_synthetic_corpus(&planted, 0.5, 2000, 100, MASTER + 10 + s).unwrap();
            let learned = train_lda(&corpus, &LdaConfig::new(3).with_iterations(500).with_seed(MASTER + 20 + s)).unwrap();
            matched_tv(&learned, &planted)
        })
        .collect();
    let m = median(&tvs);
    Verdict::new(m <= 0.15, format!("median matched mean-row TV {m:.4} over 5 seeds {tvs:.4?} (<= 0.15)"))
}

/// The synthetic attack fixture: k=5, V=200, M=400, 50-token documents.
fn attack_fixture() -> Corpus {
    SyntheticFixture::default().generate(MASTER).unwrap()
}

fn non_private_replications(corpus: &Corpus, k: usize) -> Vec<AttackReplication> {
    let lda = LdaConfig::new(k).with_iterations(FIXTURE_SWEEPS);
    let plan = AttackPlan::new(lda.clone(), FIXTURE_SHADOWS);
    (0..REPLICATIONS)
        .map(|r| run_attack_replication(corpus, &plan, MASTER + r as u64, &lda, &lda).unwrap())
        .collect()
}

fn online(rep: &AttackReplication) -> &topic_privacy::experiment::AttackRun {
    rep.run(AttackMode::OnlineEnsemble, Q::LogLikelihood).unwrap()
}

fn criterion_4(reps: &[AttackReplication]) -> Verdict {
    let mut wins = 0;
    let mut lines = Vec::new();
    for rep in reps {
        let on = online(rep);
        let baselines: Vec<_> = rep.runs.iter().filter(|r| r.mode == AttackMode::BaselineGlobal).collect();
        let best_tpr = baselines.iter().map(|b| b.tpr_at(FPR)).fold(0.0, f64::max);
        let ok = on.tpr_at(FPR) >= 3.0 * best_tpr && baselines.iter().all(|b| on.roc.auc > b.roc.auc);
        wins += ok as usize;
        lines.push(format!("{:.3}/{:.3}", on.tpr_at(FPR), best_tpr));
    }
    let aucs: Vec<f64> = reps.iter().map(|r| online(r).roc.auc).collect();
    Verdict::new(
        wins >= 8,
        format!(
            "{wins}/10 replications with TPR@1% >= 3x best baseline and AUC above every baseline; \
             online/best-baseline TPR@1% {}; median online AUC {:.3}",
            lines.join(" "),
            median(&aucs)
        ),
    )
}

fn median_tpr(reps: &[AttackReplication]) -> f64 {
    median(&reps.iter().map(|r| online(r).tpr_at(FPR)).collect::<Vec<_>>())
}

fn criterion_5(corpus: &Corpus, k5: &[AttackReplication]) -> Verdict {
    let mut medians = BTreeMap::new();
    for k in [2usize, 10] {
        medians.insert(k, median_tpr(&non_private_replications(corpus, k)));
    }
    medians.insert(5, median_tpr(k5));
    let series: Vec<f64> = medians.values().copied().collect();
    let inversions = series.windows(2).filter(|p| p[1] < p[0]).count();
    Verdict::new(
        inversions <= 1,
        format!("median online TPR@1% by k {medians:.3?}; {inversions} inversion(s) (<= 1 allowed)"),
    )
}

fn criterion_6(reps: &[AttackReplication]) -> Verdict {
    let on = median(&reps.iter().map(|r| online(r).roc.auc).collect::<Vec<_>>());
    let off = median(
        &reps
            .iter()
            .map(|r| r.run(AttackMode::OfflineEnsemble, Q::LogLikelihood).unwrap().roc.auc)
            .collect::<Vec<_>>(),
    );
    let gap = (on - off).abs();
    Verdict::new(gap <= 0.1, format!("median AUC online {on:.3} vs offline {off:.3}, gap {gap:.3} (<= 0.1)"))
}

fn private_median_auc(corpus: &Corpus, eps: f64) -> (f64, Vec<usize>) {
    let lda = LdaConfig::new(5).with_iterations(FIXTURE_SWEEPS);
    let learner = FdptmLearner {
        dpsu: DpsuParams::new(eps, 1e-5, 0),
        dplda: DpLdaParams::new(eps, lda.clone(), 0),
    };
    let mut plan = AttackPlan::new(lda, FIXTURE_SHADOWS);
    plan.attacks = vec![(AttackMode::OnlineEnsemble, Q::LogLikelihood)];
    let (aucs, vocab): (Vec<f64>, Vec<usize>) = (0..REPLICATIONS)
        .map(|r| {
            let rep = run_attack_replication(corpus, &plan, MASTER + r as u64, &learner, &learner).unwrap();
            (online(&rep).roc.auc, rep.target.vocabulary_size())
        })
        .unzip();
    (median(&aucs), vocab)
}

fn criterion_7(corpus: &Corpus) -> Verdict {
    let (tight, v1) = private_median_auc(corpus, 1.0);
    let (loose, v10) = private_median_auc(corpus, 10.0);
    Verdict::new(
        tight <= 0.55 && loose >= tight - 0.05,
        format!(
            "median online AUC at (1,1) {tight:.3} (<= 0.55), at (10,10) {loose:.3} (>= {:.3}); \
             private vocabulary sizes {v1:?} / {v10:?}",
            tight - 0.05
        ),
    )
}

fn random_author_corpus(seed: u64) -> Corpus {
    let mut rng = rng_from_seed(seed);
    let authors = rng.random_range(1..=60);
    let docs = (0..rng.random_range(1..=120))
        .map(|i| {
            let n = rng.random_range(0..12);
            Document::new(
                i,
                Some(rng.random_range(0..authors)),
                (0..n).map(|_| (rng.random_range(0..25), rng.random_range(1..4))).collect::<Vec<_>>(),
            )
        })
        .collect();
    Corpus::new(docs, synthetic_vocabulary(50)).unwrap()
}

fn criterion_8() -> Verdict {
    let mut violations = 0;
    let mut released = 0;
    for seed in 0..1000u64 {
        let corpus = random_author_corpus(MASTER + seed);
        let mut used = vec![false; corpus.vocabulary().len()];
        for d in corpus.documents() {
            for &(w, _) in d.counts() {
                used[w] = true;
            }
        }
        let eps = [0.5, 5.0, 50.0][(seed % 3) as usize];
        let vocab = dpsu_select(&corpus, &DpsuParams::new(eps, 1e-2, seed)).unwrap();
        released += vocab.len();
        violations += vocab
            .terms()
            .iter()
            .filter(|t| !used[corpus.vocabulary().id(t).unwrap()])
            .count();
    }
    let planted = planted_topic_model(5, 300, 0.1, MASTER);
    let corpus = generate_synthetic_corpus(&planted, 0.5, 500, 50, MASTER + 1).unwrap();
    let means: Vec<f64> = [1.0, 3.0, 5.0, 10.0]
        .iter()
        .map(|&eps| {
            (0..20u64)
                .map(|s| dpsu_select(&corpus, &DpsuParams::new(eps, 1e-5, MASTER + s)).unwrap().len() as f64)
                .sum::<f64>()
                / 20.0
        })
        .collect();
    let monotone = means.windows(2).all(|p| p[1] >= p[0]);
    Verdict::new(
        violations == 0 && monotone,
        format!(
            "{violations} foreign words in 1000 releases ({released} words released); \
             mean size at eps1 1/3/5/10 = {means:.1?}"
        ),
    )
}

fn criterion_9() -> Verdict {
    let mut runner = TestRunner::new(ProptestConfig {
        cases: 10_000,
        failure_persistence: None,
        ..ProptestConfig::default()
    });
    let strategy = (0.0f64..1e3, 0.0f64..0.5, 0.0f64..1e3, 0.0f64..0.5);
    let result = runner.run(&strategy, |(e1, d1, e2, d2)| {
        let b = compose_privacy(e1, d1, e2, d2).unwrap();
        prop_assert_eq!(b.epsilon, e1 + e2);
        prop_assert_eq!(b.delta, d1 + d2);
        Ok(())
    });
    let examples = [(0.0, 0.0, 0.0, 0.0, 0.0, 0.0), (3.0, 1e-5, 3.0, 0.0, 6.0, 1e-5), (5.0, 1e-5, 5.0, 1e-5, 10.0, 2e-5)];
    let examples_ok = examples.iter().all(|&(e1, d1, e2, d2, e, d)| {
        let b = compose_privacy(e1, d1, e2, d2).unwrap();
        b.epsilon == e && b.delta == d
    });
    match result {
        Ok(()) if examples_ok => Verdict::new(true, "10000 property cases and 3 fixed examples exact"),
        Ok(()) => Verdict::new(false, "fixed examples disagree"),
        Err(e) => Verdict::new(false, format!("property failed: {e}")),
    }
}

fn criterion_10() -> Verdict {
    let vocab = Vocabulary::from_terms(["apple", "bread", "cheese"]).unwrap();
    let reference = Corpus::new(
        vec![
            Document::new(0, None, [(0, 1), (1, 2)]),
            Document::new(1, None, [(0, 3)]),
            Document::new(2, None, [(2, 1)]),
        ],
        vocab.clone(),
    )
    .unwrap();
    let model = TopicModel::from_rows(vec![vec![0.3, 0.5, 0.2], vec![0.2, 0.3, 0.5]], vocab).unwrap();
    // Topic 0: top words bread, apple; D(bread) = 1, D(apple, bread) = 1 -> ln 2.
    // Topic 1: top words cheese, bread; D(cheese) = 1, D(bread, cheese) = 0 -> ln 1.
    let report = topic_coherence(&model, &reference, 2).unwrap();
    let ln2 = std::f64::consts::LN_2;
    let exact = (report.per_topic[0] - ln2).abs() <= 1e-12
        && report.per_topic[1].abs() <= 1e-12
        && (report.mean - ln2 / 2.0).abs() <= 1e-12;

    let mut worst: f64 = 0.0;
    for s in 0..50u64 {
        let planted = planted_topic_model(6, 40, 0.3, MASTER + s);
        let corpus = generate_synthetic_corpus(&planted, 0.5, 60, 20, MASTER + 100 + s).unwrap();
        let mut rng = rng_from_seed(s);
        let mut perm: Vec<usize> = (0..6).collect();
        for i in (1..6).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let a = topic_coherence(&planted, &corpus, 10).unwrap().mean;
        let b = topic_coherence(&planted.permute_topics(&perm).unwrap(), &corpus, 10).unwrap().mean;
        worst = worst.max((a - b).abs());
    }
    Verdict::new(
        exact && worst <= 1e-12,
        format!(
            "fixture per-topic {:?} (expected [ln 2, 0]), mean {:.15}; max permutation gap {worst:.1e} over 50 models",
            report.per_topic, report.mean
        ),
    )
}

fn criterion_11(reps: &[AttackReplication]) -> Verdict {
    let table = &reps[0].table;
    let diag = diagnose_statistics(table, &[Q::LogLikelihood, Q::LogitMaxPosterior], 8, 0.05).unwrap();
    let (ll, logit) = (&diag[0], &diag[1]);
    let all_kl: Vec<f64> = diag.iter().flat_map(|d| d.rows.iter().map(|r| r.kl_divergence)).collect();
    let min_kl = all_kl.iter().copied().fold(f64::INFINITY, f64::min);
    Verdict::new(
        ll.rejection_rate() < logit.rejection_rate() && min_kl >= 0.0,
        format!(
            "BH-rejection rate log_likelihood {:.4} ({}/{}) vs logit_max_posterior {:.4} ({}/{}); \
             min KL {min_kl:.3e} over {} documents",
            ll.rejection_rate(),
            ll.rejections(),
            2 * ll.rows.len(),
            logit.rejection_rate(),
            logit.rejections(),
            2 * logit.rows.len(),
            ll.rows.len()
        ),
    )
}

fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                files.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn criterion_12() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_topic-privacy");
    let work = tempfile::tempdir().unwrap();
    let dir = work.path();
    let docs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/preprocess_docs.txt");
    fs::write(
        dir.join("c.toml"),
        "seed = 11\nreplications = 2\n[data.synthetic]\ntopics = 3\nvocabulary = 60\ndocuments = 80\ndoc_len = 30\n\
         [lda]\nk = 3\niterations = 30\n[attack]\nn_shadow = 16\nmodes = [\"online_ensemble\", \"offline_ensemble\", \
         \"baseline_global\", \"online_literal\"]\nliteral_documents = 4\n[dp]\ngrid = [[20.0, 5.0], [20.0, 20.0]]\n\
         delta1 = 0.001\n[diagnose]\nmin_samples_per_side = 4\n",
    )
    .unwrap();
    let commands: Vec<Vec<String>> = vec![
        vec!["preprocess".into(), "--input".into(), docs.display().to_string()],
        vec!["synthesize".into()],
        vec!["profile".into()],
        vec!["train".into()],
        vec!["attack".into()],
        vec!["defend".into()],
        vec!["diagnose-statistics".into()],
    ];
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for (i, cmd) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out_dir = dir.join(format!("c{i}_r{run}"));
            let status = Command::new(bin)
                .current_dir(dir)
                .args(["--config", "c.toml", "--out-dir"])
                .arg(&out_dir)
                .args(cmd)
                .output()
                .unwrap();
            if !status.status.success() {
                return Verdict::new(
                    false,
                    format!("`{}` failed: {}", cmd.join(" "), String::from_utf8_lossy(&status.stderr)),
                );
            }
            outputs.push(snapshot(&out_dir));
        }
        if outputs[0] != outputs[1] {
            mismatches.push(cmd[0].clone());
        }
        compared += outputs[0].len();
    }
    // Evaluation commands read outputs of the runs above.
    for (i, cmd) in [
        vec!["eval-roc", "--scores", "c4_r0/rep_00/scores_online_ensemble_log_likelihood.csv"],
        vec!["eval-coherence", "--model", "c3_r0/model.txt", "--vocabulary", "c3_r0/model_vocabulary.txt"],
    ]
    .iter()
    .enumerate()
    {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out_dir = dir.join(format!("e{i}_r{run}"));
            let status = Command::new(bin)
                .current_dir(dir)
                .args(["--config", "c.toml", "--out-dir"])
                .arg(&out_dir)
                .args(cmd)
                .output()
                .unwrap();
            if !status.status.success() {
                return Verdict::new(false, format!("`{}` failed", cmd.join(" ")));
            }
            outputs.push(snapshot(&out_dir));
        }
        if outputs[0] != outputs[1] {
            mismatches.push(cmd[0].to_string());
        }
        compared += outputs[0].len();
    }
    Verdict::new(
        mismatches.is_empty(),
        format!("9 commands run twice, {compared} output files compared byte-for-byte; mismatches: {mismatches:?}"),
    )
}

fn main() {
    // `cargo test -- <filter>` passes arguments; this suite always runs whole.
    let mut suite = Suite { failures: 0 };
    let min = |m: u64| Duration::from_secs(60 * m);
    suite.check(1, "theta optimizer vs grid oracle", Duration::from_secs(5), criterion_1);
    suite.check(2, "EM monotonicity", Duration::from_secs(10), criterion_2);
    suite.check(3, "sampler recovery", min(2), criterion_3);

    let corpus = attack_fixture();
    let mut k5 = Vec::new();
    suite.check(4, "attack separation", min(10), || {
        k5 = non_private_replications(&corpus, 5);
        criterion_4(&k5)
    });
    suite.check(5, "k-monotonicity", min(15), || criterion_5(&corpus, &k5));
    suite.check(6, "online/offline agreement", min(1), || criterion_6(&k5));
    suite.check(7, "DP defense effectiveness", min(15), || criterion_7(&corpus));
    suite.check(8, "DPSU properties", min(1), criterion_8);
    suite.check(9, "composition accountant", Duration::from_secs(1), criterion_9);
    suite.check(10, "coherence oracle", Duration::from_secs(5), criterion_10);
    suite.check(11, "statistic diagnostics", min(10), || criterion_11(&k5));
    suite.check(12, "CLI determinism", min(10), criterion_12);

    println!("acceptance: {} of 12 criteria passed", 12 - suite.failures);
    if suite.failures > 0 {
        std::process::exit(1);
    }
}
