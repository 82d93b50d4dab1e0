mod attack;
mod data;
mod defend;
mod diagnose;
mod eval;

pub use attack::attack;
pub use data::{preprocess, profile, synthesize, train};
pub use defend::defend;
pub use diagnose::diagnose_statistics;
pub use eval::{eval_coherence, eval_roc};

use std::collections::HashMap;
use std::fmt::Write as _;

use topic_privacy::corpus::Corpus;
use topic_privacy::eval::{roc_curve, tpr_at_fpr, write_roc, RocCurve};
use topic_privacy::experiment::{median, AttackReplication};
use topic_privacy::lda::{LdaConfig, TopicModel};
use topic_privacy::lira::{
    attack_corpus, train_literal_ensemble, write_manifest, write_scores, AttackConfig, AttackMode, AttackOutcome,
    Learner, Shadows,
};
use topic_privacy::rng::derive_seed;
use topic_privacy::stats::QueryStatisticKind;

use crate::config::LoadedConfig;
use crate::error::CliResult;
use crate::output::OutputDir;

/// Everything a command needs besides its own flags.
pub struct Context {
    pub cfg: LoadedConfig,
    pub out: OutputDir,
}

impl Context {
    pub fn seed(&self) -> u64 {
        self.cfg.config.seed
    }

    /// Seed of replication `r`: the master seed plus the index.
    pub fn replication_seed(&self, r: usize) -> u64 {
        self.seed().wrapping_add(r as u64)
    }

    pub fn replication_dirs(&self, prefix: &str) -> Vec<String> {
        (0..self.cfg.config.replications).map(|r| format!("{prefix}rep_{r:02}")).collect()
    }
}

pub fn spec_name(mode: AttackMode, statistic: QueryStatisticKind) -> String {
    format!("{}_{}", mode.name(), statistic.name())
}

/// Headline numbers of one attack in one replication.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub mode: AttackMode,
    pub statistic: QueryStatisticKind,
    pub auc: Option<f64>,
    pub tpr: Vec<f64>,
    pub scored: usize,
    pub skipped_empty: usize,
    pub skipped_insufficient: usize,
}

fn fpr_column(fpr: f64) -> String {
    format!("tpr_at_{fpr}")
}

/// Writes the score and ROC files of one attack and returns its summary.
/// Single-class score sets (possible for small literal subsets) get a score
/// file but no ROC.
fn write_run(
    ctx: &Context,
    dir: &str,
    mode: AttackMode,
    statistic: QueryStatisticKind,
    seed: u64,
    outcome: &AttackOutcome,
    roc: Option<&RocCurve>,
) -> CliResult<RunSummary> {
    let name = spec_name(mode, statistic);
    let meta = ctx.out.metadata(&[("replication_seed", seed.to_string())]);
    ctx.out.write(&format!("{dir}/scores_{name}.csv"), |w| {
        write_scores(&outcome.scores, statistic, mode, seed, &meta, w)
    })?;
    let fprs = &ctx.cfg.config.attack.fprs;
    if let Some(roc) = roc {
        let meta = ctx.out.metadata(&[
            ("mode", mode.name().to_string()),
            ("statistic", statistic.name().to_string()),
            ("replication_seed", seed.to_string()),
        ]);
        ctx.out.write(&format!("{dir}/roc_{name}.csv"), |w| write_roc(roc, &meta, w))?;
    }
    Ok(RunSummary {
        mode,
        statistic,
        auc: roc.map(|r| r.auc),
        tpr: fprs.iter().map(|&f| roc.map_or(f64::NAN, |r| tpr_at_fpr(r, f))).collect(),
        scored: outcome.scores.len(),
        skipped_empty: outcome.skipped_empty,
        skipped_insufficient: outcome.skipped_insufficient,
    })
}

fn summary_header(fprs: &[f64]) -> String {
    let mut h = String::from("mode,statistic,auc");
    for &f in fprs {
        let _ = write!(h, ",{}", fpr_column(f));
    }
    h.push_str(",scored,skipped_empty,skipped_insufficient\n");
    h
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), |v| v.to_string())
}

/// Writes one replication's files: scores and ROC per attack, the shadow
/// manifest and a summary table.
pub fn write_replication(
    ctx: &Context,
    dir: &str,
    rep: &AttackReplication,
    literal: &[RunSummary],
) -> CliResult<Vec<RunSummary>> {
    let mut summaries = Vec::new();
    for run in &rep.runs {
        summaries.push(write_run(ctx, dir, run.mode, run.statistic, rep.seed, &run.outcome, Some(&run.roc))?);
    }
    summaries.extend(literal.iter().cloned());
    let meta = ctx.out.metadata(&[("replication_seed", rep.seed.to_string())]);
    ctx.out.write(&format!("{dir}/manifest.csv"), |w| write_manifest(&rep.ensemble, &meta, w))?;
    let fprs = &ctx.cfg.config.attack.fprs;
    let mut body = summary_header(fprs);
    for s in &summaries {
        let _ = write!(body, "{},{},{}", s.mode, s.statistic, fmt_opt(s.auc));
        for t in &s.tpr {
            let _ = write!(body, ",{t}");
        }
        let _ = writeln!(body, ",{},{},{}", s.scored, s.skipped_empty, s.skipped_insufficient);
    }
    ctx.out
        .write_text(&format!("{dir}/summary.csv"), &[("replication_seed", rep.seed.to_string())], &body)?;
    Ok(summaries)
}

/// Literal-mode attacks on the first `literal_documents` documents, each
/// with its own ensemble drawn from `corpus`.
pub fn run_literal_attacks(
    ctx: &Context,
    dir: &str,
    corpus: &Corpus,
    target: &TopicModel,
    labels: &[bool],
    seed: u64,
    lda: &LdaConfig,
    learner: &dyn Learner,
    specs: &[(AttackMode, QueryStatisticKind)],
) -> CliResult<Vec<RunSummary>> {
    if specs.is_empty() {
        return Ok(Vec::new());
    }
    let c = &ctx.cfg.config;
    let take = c.attack.literal_documents.min(corpus.len());
    let positions: Vec<usize> = (0..take).collect();
    let subset = corpus.subset(&positions);
    let sub_labels: Vec<bool> = positions.iter().map(|&i| labels[i]).collect();
    let mut ensembles = HashMap::new();
    for (j, d) in subset.documents().iter().enumerate() {
        let e = train_literal_ensemble(corpus, d.doc_id, c.attack.n_shadow, derive_seed(seed, 100 + j as u64), lda, learner)?;
        ensembles.insert(d.doc_id, e);
    }
    let mut out = Vec::new();
    for &(mode, statistic) in specs {
        let mut acfg = AttackConfig::new(mode, statistic, c.attack.n_shadow, seed);
        acfg.theta = ctx.cfg.config.theta_options();
        let outcome = attack_corpus(target, &subset, &sub_labels, &acfg, Shadows::PerDocument(&ensembles))?;
        let roc = roc_curve(&outcome.scores).ok();
        out.push(write_run(ctx, dir, mode, statistic, seed, &outcome, roc.as_ref())?);
    }
    Ok(out)
}

/// Median AUC and TPRs across replications, one row per attack.
pub fn aggregate(fprs: &[f64], reps: &[Vec<RunSummary>]) -> Vec<AggregateRow> {
    let Some(first) = reps.first() else {
        return Vec::new();
    };
    first
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let aucs: Vec<f64> = reps.iter().filter_map(|r| r[i].auc).collect();
            AggregateRow {
                mode: s.mode,
                statistic: s.statistic,
                replications: reps.len(),
                median_auc: median(&aucs),
                median_tpr: (0..fprs.len())
                    .map(|j| median(&reps.iter().map(|r| r[i].tpr[j]).filter(|t| !t.is_nan()).collect::<Vec<_>>()))
                    .collect(),
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct AggregateRow {
    pub mode: AttackMode,
    pub statistic: QueryStatisticKind,
    pub replications: usize,
    pub median_auc: f64,
    pub median_tpr: Vec<f64>,
}

pub fn render_aggregate(fprs: &[f64], rows: &[AggregateRow]) -> String {
    let mut body = String::from("mode,statistic,replications,median_auc");
    for &f in fprs {
        let _ = write!(body, ",median_{}", fpr_column(f));
    }
    body.push('\n');
    for r in rows {
        let _ = write!(body, "{},{},{},{}", r.mode, r.statistic, r.replications, r.median_auc);
        for t in &r.median_tpr {
            let _ = write!(body, ",{t}");
        }
        body.push('\n');
    }
    body
}

/// Rewrites the completion manifest after each finished replication so an
/// interrupted run shows which replications are usable.
pub fn write_progress(ctx: &Context, rel: &str, done: &[(usize, u64)]) -> CliResult<()> {
    let mut body = String::from("index,seed,status\n");
    for (i, s) in done {
        let _ = writeln!(body, "{i},{s},complete");
    }
    ctx.out
        .write_text(rel, &[("planned", ctx.cfg.config.replications.to_string())], &body)?;
    Ok(())
}
