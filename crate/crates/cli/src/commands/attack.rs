use std::fmt::Write as _;

use topic_privacy::corpus::Corpus;
use topic_privacy::experiment::{run_attack_replication, AttackPlan};
use topic_privacy::lda::LdaConfig;

use super::{aggregate, render_aggregate, run_literal_attacks, write_progress, write_replication, AggregateRow, Context};
use crate::data::load_dataset;
use crate::error::CliResult;

/// Target on a random half, shared shadow ensemble, every configured attack;
/// repeated per replication and, when configured, per topic count.
pub fn attack(ctx: &Context) -> CliResult<()> {
    let c = &ctx.cfg.config;
    let sweep = !c.attack.k_sweep.is_empty();
    let prefixes: Vec<(usize, String)> = if sweep {
        c.attack.k_sweep.iter().map(|&k| (k, format!("k_{k}/"))).collect()
    } else {
        vec![(c.lda.k, String::new())]
    };
    let mut claims: Vec<String> = prefixes.iter().flat_map(|(_, p)| ctx.replication_dirs(p)).collect();
    for (_, p) in &prefixes {
        claims.push(format!("{p}summary.csv"));
        claims.push(format!("{p}replications.csv"));
    }
    if sweep {
        claims.push("k_sweep.csv".into());
    }
    ctx.out.claim(&claims)?;

    let data = load_dataset(&ctx.cfg)?;
    let mut per_k = Vec::new();
    for (k, prefix) in &prefixes {
        let lda = c.lda_config_with_k(*k);
        let rows = attack_one_k(ctx, &data.corpus, &lda, prefix, &data.source)?;
        per_k.push((*k, rows));
    }
    if sweep {
        write_k_sweep(ctx, &per_k)?;
    }
    println!("attack: wrote {} replication(s) to {}", c.replications, ctx.out.root().display());
    Ok(())
}

fn attack_one_k(
    ctx: &Context,
    corpus: &Corpus,
    lda: &LdaConfig,
    prefix: &str,
    source: &str,
) -> CliResult<Vec<AggregateRow>> {
    let c = &ctx.cfg.config;
    let specs = c.attack_specs()?;
    let (literal, shared): (Vec<_>, Vec<_>) = specs.into_iter().partition(|(m, _)| m.is_literal());
    let mut plan = AttackPlan::new(lda.clone(), c.attack.n_shadow);
    plan.attacks = shared;
    plan.theta = c.theta_options();

    let mut reps = Vec::new();
    let mut done = Vec::new();
    for (r, dir) in ctx.replication_dirs(prefix).iter().enumerate() {
        let seed = ctx.replication_seed(r);
        let rep = run_attack_replication(corpus, &plan, seed, lda, lda)?;
        let lit = run_literal_attacks(ctx, dir, corpus, &rep.target, &rep.labels, seed, lda, lda, &literal)?;
        reps.push(write_replication(ctx, dir, &rep, &lit)?);
        done.push((r, seed));
        write_progress(ctx, &format!("{prefix}replications.csv"), &done)?;
    }
    let rows = aggregate(&c.attack.fprs, &reps);
    let extra = [("k", lda.k.to_string()), ("data", source.to_string())];
    ctx.out
        .write_text(&format!("{prefix}summary.csv"), &extra, &render_aggregate(&c.attack.fprs, &rows))?;
    Ok(rows)
}

/// Median metrics per topic count plus, per attack and FPR, whether the
/// median TPR is non-decreasing in k and how many adjacent inversions occur.
fn write_k_sweep(ctx: &Context, per_k: &[(usize, Vec<AggregateRow>)]) -> CliResult<()> {
    let fprs = &ctx.cfg.config.attack.fprs;
    let mut body = String::from("k,mode,statistic,median_auc");
    for f in fprs {
        let _ = write!(body, ",median_tpr_at_{f}");
    }
    body.push('\n');
    for (k, rows) in per_k {
        for r in rows {
            let _ = write!(body, "{k},{},{},{}", r.mode, r.statistic, r.median_auc);
            for t in &r.median_tpr {
                let _ = write!(body, ",{t}");
            }
            body.push('\n');
        }
    }
    let mut trend = Vec::new();
    if let Some((_, first)) = per_k.first() {
        for (i, row) in first.iter().enumerate() {
            for (j, f) in fprs.iter().enumerate() {
                let series: Vec<f64> = per_k.iter().map(|(_, rows)| rows[i].median_tpr[j]).collect();
                let inversions = series.windows(2).filter(|p| p[1] < p[0]).count();
                trend.push((
                    format!("trend_{}_{}_tpr_at_{f}", row.mode, row.statistic),
                    format!("non_decreasing={} inversions={inversions}", inversions == 0),
                ));
            }
        }
    }
    let extra: Vec<(&str, String)> = trend.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    ctx.out.write_text("k_sweep.csv", &extra, &body)?;
    Ok(())
}
