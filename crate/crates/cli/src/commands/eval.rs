use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use topic_privacy::corpus::read_vocabulary;
use topic_privacy::eval::{roc_curve, topic_coherence, write_coherence, write_roc};
use topic_privacy::lda::read_topic_model;
use topic_privacy::lira::{read_scores, AttackScore};

use super::Context;
use crate::data::load_dataset;
use crate::error::{CliError, CliResult};

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))
}

/// ROC curve of a score file.
pub fn eval_roc(ctx: &Context, scores: &Path) -> CliResult<()> {
    ctx.out.claim(&["roc.csv".into()])?;
    let records = read_scores(open(scores)?)?;
    let first = records
        .first()
        .ok_or_else(|| CliError::Data(format!("{} has no scores", scores.display())))?;
    let (mode, statistic, seed) = (first.mode, first.statistic, first.seed);
    let plain: Vec<AttackScore> = records.iter().map(|r| r.score).collect();
    let roc = roc_curve(&plain)?;
    let meta = ctx.out.metadata(&[
        ("scores", scores.display().to_string()),
        ("mode", mode.name().to_string()),
        ("statistic", statistic.name().to_string()),
        ("replication_seed", seed.to_string()),
    ]);
    ctx.out.write("roc.csv", |w| write_roc(&roc, &meta, w))?;
    println!("eval-roc: auc={} n_pos={} n_neg={}", roc.auc, roc.n_pos, roc.n_neg);
    Ok(())
}

/// Coherence of a saved model against the configured reference corpus.
pub fn eval_coherence(ctx: &Context, model: &Path, vocabulary: &Path) -> CliResult<()> {
    ctx.out.claim(&["coherence.csv".into()])?;
    let vocab = read_vocabulary(open(vocabulary)?)?;
    let model = read_topic_model(open(model)?, vocab)?;
    let data = load_dataset(&ctx.cfg)?;
    let report = topic_coherence(&model, &data.corpus, ctx.cfg.config.eval.coherence_top_m)?;
    let meta = ctx.out.metadata(&[
        ("data", data.source),
        ("zero_frequency_words", report.zero_frequency_words.to_string()),
    ]);
    ctx.out.write("coherence.csv", |w| write_coherence(&report, &meta, w))?;
    println!("eval-coherence: mean={}", report.mean);
    Ok(())
}
