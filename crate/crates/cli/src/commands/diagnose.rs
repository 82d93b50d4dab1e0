use std::fmt::Write as _;

use topic_privacy::experiment::{diagnose_statistics as diagnose, median, write_diagnostics};
use topic_privacy::lira::{train_half_sample_ensemble, write_manifest, StatisticTable};
use topic_privacy::rng::derive_seed;

use super::Context;
use crate::data::load_dataset;
use crate::error::CliResult;

/// Trains a half-sample shadow ensemble over the dataset and tests, per
/// document and statistic, how far apart the in/out distributions are and
/// whether each looks normal.
pub fn diagnose_statistics(ctx: &Context) -> CliResult<()> {
    ctx.out.claim(&[
        "diagnostics.csv".into(),
        "diagnostics_summary.csv".into(),
        "manifest.csv".into(),
    ])?;
    let c = &ctx.cfg.config;
    let data = load_dataset(&ctx.cfg)?;
    let lda = c.lda_config();
    let ensemble = train_half_sample_ensemble(&data.corpus, c.attack.n_shadow, derive_seed(ctx.seed(), 2), &lda, &lda)?;
    let table = StatisticTable::build(&ensemble, &data.corpus, c.theta_options())?;
    let stats = c.diagnose_statistics()?;
    let results = diagnose(&table, &stats, c.diagnose.min_samples_per_side, c.diagnose.fdr_q)?;

    let extra = [
        ("data", data.source.clone()),
        ("n_shadow", c.attack.n_shadow.to_string()),
        ("fdr_q", c.diagnose.fdr_q.to_string()),
        ("min_samples_per_side", c.diagnose.min_samples_per_side.to_string()),
    ];
    let meta = ctx.out.metadata(&extra);
    ctx.out.write("diagnostics.csv", |w| write_diagnostics(&results, &meta, w))?;
    ctx.out.write("manifest.csv", |w| write_manifest(&ensemble, &meta, w))?;

    let mut body = String::from("statistic,documents,skipped,tests,rejections,rejection_rate,min_kl,median_kl,max_kl\n");
    for d in &results {
        let kl: Vec<f64> = d.rows.iter().map(|r| r.kl_divergence).collect();
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{},{},{}",
            d.statistic,
            d.rows.len(),
            d.skipped,
            2 * d.rows.len(),
            d.rejections(),
            d.rejection_rate(),
            kl.iter().copied().fold(f64::INFINITY, f64::min),
            median(&kl),
            kl.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        );
    }
    ctx.out.write_text("diagnostics_summary.csv", &extra, &body)?;
    print!("{body}");
    Ok(())
}
