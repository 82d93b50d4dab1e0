//! End-to-end experiment pipelines shared by the CLI and the acceptance
//! suite: one attack replication (target on a random half, shared shadow
//! ensemble, every requested attack scored), and the normality/separation
//! diagnostics of candidate statistics.

use crate::corpus::{split_half, Corpus};
use crate::error::{Error, Result};
use crate::eval::{roc_curve, tpr_at_fpr, RocCurve};
use crate::lda::{generate_synthetic_corpus, planted_topic_model, LdaConfig, ThetaOptions, TopicModel};
use crate::lira::{
    evaluate_documents, score_with_table, train_half_sample_ensemble, AttackMode, AttackOutcome, Learner,
    ShadowEnsemble, StatisticTable,
};
use crate::rng::derive_seed;
use crate::stats::{bh_fdr, fit_normal, kl_normal, shapiro_wilk, QueryStatisticKind};

/// Planted-topic corpus used as the desk-scale stand-in for real data.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticFixture {
    pub topics: usize,
    pub vocabulary: usize,
    pub documents: usize,
    pub doc_len: usize,
    /// Dirichlet concentration of the planted topic rows.
    pub topic_concentration: f64,
    /// Dirichlet concentration of document mixtures.
    pub doc_alpha: f64,
}

impl Default for SyntheticFixture {
    fn default() -> Self {
        SyntheticFixture {
            topics: 5,
            vocabulary: 200,
            documents: 400,
            doc_len: 50,
            topic_concentration: 0.1,
            doc_alpha: 0.5,
        }
    }
}

impl SyntheticFixture {
    pub fn generate(&self, seed: u64) -> Result<Corpus> {
        let phi = planted_topic_model(self.topics, self.vocabulary, self.topic_concentration, derive_seed(seed, 0));
        generate_synthetic_corpus(&phi, self.doc_alpha, self.documents, self.doc_len, derive_seed(seed, 1))
    }
}

/// An attack to score: mode plus statistic.
pub type AttackSpec = (AttackMode, QueryStatisticKind);

/// The attacks compared in the main table: online and offline LiRA on ζ and
/// the three global-threshold baselines.
pub fn default_attacks() -> Vec<AttackSpec> {
    vec![
        (AttackMode::OnlineEnsemble, QueryStatisticKind::LogLikelihood),
        (AttackMode::OfflineEnsemble, QueryStatisticKind::LogLikelihood),
        (AttackMode::BaselineGlobal, QueryStatisticKind::NegEntropy),
        (AttackMode::BaselineGlobal, QueryStatisticKind::LogitMaxPosterior),
        (AttackMode::BaselineGlobal, QueryStatisticKind::StdDev),
    ]
}

#[derive(Clone, Debug)]
pub struct AttackRun {
    pub mode: AttackMode,
    pub statistic: QueryStatisticKind,
    pub outcome: AttackOutcome,
    pub roc: RocCurve,
}

impl AttackRun {
    pub fn tpr_at(&self, fpr: f64) -> f64 {
        tpr_at_fpr(&self.roc, fpr)
    }

    pub fn label(&self) -> String {
        format!("{}:{}", self.mode, self.statistic)
    }
}

/// Everything one replication produced.
#[derive(Clone, Debug)]
pub struct AttackReplication {
    pub seed: u64,
    pub target: TopicModel,
    /// Doc ids of the target's training half, sorted.
    pub members: Vec<usize>,
    pub labels: Vec<bool>,
    pub ensemble: ShadowEnsemble,
    pub table: StatisticTable,
    pub runs: Vec<AttackRun>,
}

impl AttackReplication {
    pub fn run(&self, mode: AttackMode, statistic: QueryStatisticKind) -> Option<&AttackRun> {
        self.runs.iter().find(|r| r.mode == mode && r.statistic == statistic)
    }
}

#[derive(Clone, Debug)]
pub struct AttackPlan {
    pub lda: LdaConfig,
    pub n_shadow: usize,
    pub attacks: Vec<AttackSpec>,
    pub theta: ThetaOptions,
}

impl AttackPlan {
    pub fn new(lda: LdaConfig, n_shadow: usize) -> Self {
        AttackPlan {
            lda,
            n_shadow,
            attacks: default_attacks(),
            theta: ThetaOptions::default(),
        }
    }
}

/// Seeds of one replication's stages.
#[derive(Clone, Copy, Debug)]
pub struct ReplicationSeeds {
    pub split: u64,
    pub target: u64,
    pub shadows: u64,
}

impl ReplicationSeeds {
    pub fn from(seed: u64) -> Self {
        ReplicationSeeds {
            split: derive_seed(seed, 0),
            target: derive_seed(seed, 1),
            shadows: derive_seed(seed, 2),
        }
    }
}

/// Splits `corpus` in half, trains the target on one half with
/// `target_learner`, trains the shadow ensemble on the whole corpus with
/// `shadow_learner` and scores every document.
pub fn run_attack_replication(
    corpus: &Corpus,
    plan: &AttackPlan,
    seed: u64,
    target_learner: &dyn Learner,
    shadow_learner: &dyn Learner,
) -> Result<AttackReplication> {
    let seeds = ReplicationSeeds::from(seed);
    let (train, _) = split_half(corpus, seeds.split)?;
    let target = target_learner.train(&train, seeds.target)?;
    attack_trained_target(corpus, &train, target, plan, seed, shadow_learner)
}

/// Attacks an already trained target whose training set is `train`.
pub fn attack_trained_target(
    corpus: &Corpus,
    train: &Corpus,
    target: TopicModel,
    plan: &AttackPlan,
    seed: u64,
    shadow_learner: &dyn Learner,
) -> Result<AttackReplication> {
    let seeds = ReplicationSeeds::from(seed);
    let mut members: Vec<usize> = train.documents().iter().map(|d| d.doc_id).collect();
    members.sort_unstable();
    let labels: Vec<bool> = corpus
        .documents()
        .iter()
        .map(|d| members.binary_search(&d.doc_id).is_ok())
        .collect();
    let needs_shadows = plan.attacks.iter().any(|(m, _)| *m != AttackMode::BaselineGlobal);
    if plan.attacks.iter().any(|(m, _)| m.is_literal()) {
        return Err(Error::invalid("replications use shared ensembles; literal modes are per-document"));
    }
    let n = if needs_shadows { plan.n_shadow } else { 0 };
    if needs_shadows && n < AttackMode::OnlineEnsemble.min_shadows() {
        return Err(Error::invalid(format!("ensemble attacks need at least 8 shadow models, got {n}")));
    }
    let ensemble = train_half_sample_ensemble(corpus, n, seeds.shadows, &plan.lda, shadow_learner)?;
    let table = StatisticTable::build(&ensemble, corpus, plan.theta)?;
    let observed = evaluate_documents(&target, corpus, plan.theta)?;
    let runs = plan
        .attacks
        .iter()
        .map(|&(mode, statistic)| {
            let outcome = score_with_table(&table, &observed, corpus, &labels, mode, statistic)?;
            let roc = roc_curve(&outcome.scores)?;
            Ok(AttackRun {
                mode,
                statistic,
                outcome,
                roc,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AttackReplication {
        seed,
        target,
        members,
        labels,
        ensemble,
        table,
        runs,
    })
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-document normality and separation diagnostics of one statistic.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticRow {
    pub doc_id: usize,
    pub statistic: QueryStatisticKind,
    /// `KL(N_in ‖ N_out)` of the fitted normals.
    pub kl_divergence: f64,
    pub p_in: f64,
    pub p_out: f64,
    pub rejected_in: bool,
    pub rejected_out: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatisticDiagnostics {
    pub statistic: QueryStatisticKind,
    pub rows: Vec<DiagnosticRow>,
    /// Documents skipped for having fewer than `min_per_side` samples on a
    /// side or a constant sample.
    pub skipped: usize,
}

impl StatisticDiagnostics {
    /// Share of Shapiro-Wilk tests (in and out) rejected under BH.
    pub fn rejection_rate(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let rejected: usize = self.rows.iter().map(|r| r.rejected_in as usize + r.rejected_out as usize).sum();
        rejected as f64 / (2 * self.rows.len()) as f64
    }

    pub fn rejections(&self) -> usize {
        self.rows.iter().map(|r| r.rejected_in as usize + r.rejected_out as usize).sum()
    }
}

/// KL between fitted in/out normals and Shapiro-Wilk tests of both samples
/// for every document of the table, with Benjamini-Hochberg control at `q`
/// across all tests of a statistic.
pub fn diagnose_statistics(
    table: &StatisticTable,
    statistics: &[QueryStatisticKind],
    min_per_side: usize,
    q: f64,
) -> Result<Vec<StatisticDiagnostics>> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("FDR level must be in (0, 1), got {q}")));
    }
    let min_per_side = min_per_side.max(3);
    statistics
        .iter()
        .map(|&statistic| {
            let mut rows = Vec::new();
            let mut skipped = 0;
            for &doc_id in table.doc_ids() {
                let (ins, outs) = table.samples(doc_id, statistic).expect("doc from table");
                if ins.len() < min_per_side || outs.len() < min_per_side {
                    skipped += 1;
                    continue;
                }
                let (sw_in, sw_out) = match (shapiro_wilk(&ins), shapiro_wilk(&outs)) {
                    (Ok(a), Ok(b)) => (a, b),
                    (Err(Error::ZeroRange), _) | (_, Err(Error::ZeroRange)) => {
                        skipped += 1;
                        continue;
                    }
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                };
                rows.push(DiagnosticRow {
                    doc_id,
                    statistic,
                    kl_divergence: kl_normal(&fit_normal(&ins)?, &fit_normal(&outs)?),
                    p_in: sw_in.p_value,
                    p_out: sw_out.p_value,
                    rejected_in: false,
                    rejected_out: false,
                });
            }
            let p: Vec<f64> = rows.iter().flat_map(|r| [r.p_in, r.p_out]).collect();
            let reject = bh_fdr(&p, q);
            for (i, r) in rows.iter_mut().enumerate() {
                r.rejected_in = reject[2 * i];
                r.rejected_out = reject[2 * i + 1];
            }
            Ok(StatisticDiagnostics {
                statistic,
                rows,
                skipped,
            })
        })
        .collect()
}

pub fn write_diagnostics(
    diagnostics: &[StatisticDiagnostics],
    metadata: &[(&str, String)],
    mut out: impl std::io::Write,
) -> Result<()> {
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "doc_id,statistic,kl_divergence,p_in,p_out,rejected_in,rejected_out")?;
    for d in diagnostics {
        for r in &d.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.doc_id, r.statistic, r.kl_divergence, r.p_in, r.p_out, r.rejected_in as u8, r.rejected_out as u8
            )?;
        }
    }
    Ok(())
}
