use std::fmt::Write as _;

use topic_privacy::corpus::{split_half, write_comment_header, write_vocabulary};
use topic_privacy::dp::{fdptm_bow, privacy_report, FdptmLearner};
use topic_privacy::eval::{spearman, topic_coherence, write_coherence};
use topic_privacy::experiment::{attack_trained_target, AttackPlan, ReplicationSeeds};
use topic_privacy::lda::write_topic_model;

use super::{aggregate, render_aggregate, write_progress, write_replication, AggregateRow, Context};
use crate::data::load_dataset;
use crate::error::{CliError, CliResult};

fn cell_dir(e1: f64, e2: f64) -> String {
    format!("cell_e1_{e1}_e2_{e2}/")
}

struct CellResult {
    epsilon1: f64,
    epsilon2: f64,
    released_words: usize,
    coherence: f64,
    attack: Vec<AggregateRow>,
}

/// One private release per `(ε₁, ε₂)` cell with its privacy report and
/// coherence, then optionally the attack with FDPTM-trained target and
/// shadows.
pub fn defend(ctx: &Context) -> CliResult<()> {
    let c = &ctx.cfg.config;
    let cells = c.dp_cells();
    let mut claims: Vec<String> = cells.iter().map(|&(a, b)| cell_dir(a, b)).collect();
    claims.push("summary.csv".into());
    ctx.out.claim(&claims)?;

    let data = load_dataset(&ctx.cfg)?;
    let corpus = &data.corpus;
    let mut results = Vec::new();
    for &(e1, e2) in &cells {
        let dir = cell_dir(e1, e2);
        let (dpsu, dplda) = c.dp_params(e1, e2, 0);
        let learner = FdptmLearner { dpsu, dplda };
        let (dpsu, dplda) = learner.seeded(ctx.seed());
        let release = fdptm_bow(corpus, &dpsu, &dplda)?;
        let extra = [
            ("epsilon1", e1.to_string()),
            ("epsilon2", e2.to_string()),
            ("data", data.source.clone()),
        ];
        let meta = ctx.out.metadata(&extra);
        ctx.out.write(&format!("{dir}model.txt"), |w| {
            write_comment_header(&meta, &mut *w)?;
            write_topic_model(&release.model, w)
        })?;
        ctx.out.write(&format!("{dir}vocabulary.txt"), |w| {
            write_comment_header(&meta, &mut *w)?;
            write_vocabulary(release.vocabulary(), w)
        })?;
        ctx.out
            .write_text(&format!("{dir}privacy_report.txt"), &extra, &privacy_report(&release))?;
        let reference = match c.eval.coherence_reference.as_str() {
            "sanitized" => &release.sanitized,
            _ => corpus,
        };
        let coherence = topic_coherence(&release.model, reference, c.eval.coherence_top_m)?;
        let mut cmeta = meta.clone();
        cmeta.push(("coherence_reference", c.eval.coherence_reference.clone()));
        cmeta.push(("zero_frequency_words", coherence.zero_frequency_words.to_string()));
        ctx.out
            .write(&format!("{dir}coherence.csv"), |w| write_coherence(&coherence, &cmeta, w))?;

        let attack = if c.dp.attack {
            attack_cell(ctx, corpus, &learner, &dir)?
        } else {
            Vec::new()
        };
        results.push(CellResult {
            epsilon1: e1,
            epsilon2: e2,
            released_words: release.vocabulary().len(),
            coherence: coherence.mean,
            attack,
        });
    }
    write_summary(ctx, &results)?;
    println!("defend: {} cell(s) -> {}", results.len(), ctx.out.root().display());
    Ok(())
}

fn attack_cell(
    ctx: &Context,
    corpus: &topic_privacy::corpus::Corpus,
    learner: &FdptmLearner,
    dir: &str,
) -> CliResult<Vec<AggregateRow>> {
    let c = &ctx.cfg.config;
    let specs = c.attack_specs()?;
    let mut plan = AttackPlan::new(c.lda_config(), c.attack.n_shadow);
    plan.attacks = specs.into_iter().filter(|(m, _)| !m.is_literal()).collect();
    plan.theta = c.theta_options();
    if plan.attacks.is_empty() {
        return Err(CliError::Usage("defend attacks with shared ensembles; configure a non-literal mode".into()));
    }
    let mut reps = Vec::new();
    let mut done = Vec::new();
    for (r, rep_dir) in ctx.replication_dirs(dir).iter().enumerate() {
        let seed = ctx.replication_seed(r);
        let seeds = ReplicationSeeds::from(seed);
        let (train, _) = split_half(corpus, seeds.split)?;
        // The target goes through the full pipeline so an empty private
        // vocabulary is reported rather than silently attacked.
        let (dpsu, dplda) = learner.seeded(seeds.target);
        let target = fdptm_bow(&train, &dpsu, &dplda)?.model;
        let rep = attack_trained_target(corpus, &train, target, &plan, seed, learner)?;
        reps.push(write_replication(ctx, rep_dir, &rep, &[])?);
        done.push((r, seed));
        write_progress(ctx, &format!("{dir}replications.csv"), &done)?;
    }
    let rows = aggregate(&c.attack.fprs, &reps);
    ctx.out
        .write_text(&format!("{dir}attack_summary.csv"), &[], &render_aggregate(&c.attack.fprs, &rows))?;
    Ok(rows)
}

fn write_summary(ctx: &Context, results: &[CellResult]) -> CliResult<()> {
    let fprs = &ctx.cfg.config.attack.fprs;
    let mut body = String::from("epsilon1,epsilon2,released_words,coherence_mean,mode,statistic,median_auc");
    for f in fprs {
        let _ = write!(body, ",median_tpr_at_{f}");
    }
    body.push('\n');
    for r in results {
        let prefix = format!("{},{},{},{}", r.epsilon1, r.epsilon2, r.released_words, r.coherence);
        if r.attack.is_empty() {
            let _ = write!(body, "{prefix},,,");
            body.push_str(&",".repeat(fprs.len()));
            body.push('\n');
        }
        for a in &r.attack {
            let _ = write!(body, "{prefix},{},{},{}", a.mode, a.statistic, a.median_auc);
            for t in &a.median_tpr {
                let _ = write!(body, ",{t}");
            }
            body.push('\n');
        }
    }
    // Coherence trend in ε₂ for every ε₁ with at least two cells.
    let mut extra = Vec::new();
    let mut e1s: Vec<f64> = results.iter().map(|r| r.epsilon1).collect();
    e1s.sort_by(f64::total_cmp);
    e1s.dedup();
    for e1 in e1s {
        let (x, y): (Vec<f64>, Vec<f64>) = results
            .iter()
            .filter(|r| r.epsilon1 == e1)
            .map(|r| (r.epsilon2, r.coherence))
            .unzip();
        if x.len() >= 2 {
            extra.push((format!("coherence_spearman_vs_epsilon2_at_epsilon1_{e1}"), spearman(&x, &y)?.to_string()));
        }
    }
    let extra: Vec<(&str, String)> = extra.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    ctx.out.write_text("summary.csv", &extra, &body)?;
    Ok(())
}
