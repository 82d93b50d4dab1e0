//! Attack metrics (ROC, TPR at fixed FPR, AUC) and utility metrics (topic
//! coherence, top words).

use std::io::Write;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::lda::TopicModel;
use crate::lira::AttackScore;

/// ROC operating points from a descending threshold sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    /// `(fpr, tpr)` pairs, starting at `(0, 0)` and ending at `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl RocCurve {
    /// Smallest non-zero FPR this sample can express, `1 / n_neg`.
    pub fn min_plottable_fpr(&self) -> f64 {
        1.0 / self.n_neg as f64
    }
}

/// ROC curve over the `score` field. Equal scores cross the threshold
/// together, so ties produce a single diagonal step.
pub fn roc_curve(scores: &[AttackScore]) -> Result<RocCurve> {
    let n_pos = scores.iter().filter(|s| s.label).count();
    let n_neg = scores.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    if scores.iter().any(|s| s.score.is_nan()) {
        return Err(Error::invalid("ROC input contains a NaN score"));
    }
    let mut order: Vec<&AttackScore> = scores.iter().collect();
    order.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let threshold = order[i].score;
        while i < order.len() && order[i].score == threshold {
            if order[i].label {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let (px, py) = *points.last().expect("non-empty");
        let p = (fp as f64 / n_neg as f64, tp as f64 / n_pos as f64);
        auc += (p.0 - px) * (p.1 + py) / 2.0;
        points.push(p);
    }
    Ok(RocCurve {
        points,
        auc,
        n_pos,
        n_neg,
    })
}

/// TPR at the largest achieved FPR not exceeding `fpr_target`.
pub fn tpr_at_fpr(curve: &RocCurve, fpr_target: f64) -> f64 {
    curve
        .points
        .iter()
        .filter(|&&(fpr, _)| fpr <= fpr_target)
        .map(|&(_, tpr)| tpr)
        .fold(0.0, f64::max)
}

/// Normalized Mann-Whitney U: `P(score_pos > score_neg) + ½ P(tie)`.
pub fn mann_whitney_auc(scores: &[AttackScore]) -> Result<f64> {
    let pos: Vec<f64> = scores.iter().filter(|s| s.label).map(|s| s.score).collect();
    let neg: Vec<f64> = scores.iter().filter(|s| !s.label).map(|s| s.score).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass);
    }
    let mut u = 0.0;
    for p in &pos {
        for n in &neg {
            u += match p.total_cmp(n) {
                std::cmp::Ordering::Greater => 1.0,
                std::cmp::Ordering::Equal => 0.5,
                std::cmp::Ordering::Less => 0.0,
            };
        }
    }
    Ok(u / (pos.len() * neg.len()) as f64)
}

/// Ids of the `m` most probable words of topic `t`, ties by ascending id.
pub fn top_word_ids(model: &TopicModel, t: usize, m: usize) -> Vec<usize> {
    let row = model.row(t);
    let mut ids: Vec<usize> = (0..row.len()).collect();
    ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    ids.truncate(m);
    ids
}

pub fn top_words(model: &TopicModel, t: usize, m: usize) -> Vec<String> {
    top_word_ids(model, t, m)
        .into_iter()
        .map(|w| model.vocabulary().term(w).expect("id within vocabulary").to_string())
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceReport {
    pub per_topic: Vec<f64>,
    pub mean: f64,
    pub top_words: Vec<Vec<String>>,
    /// Top words with zero reference document frequency, whose `D(v)` was
    /// raised to 1.
    pub zero_frequency_words: usize,
}

/// Co-document-frequency coherence of each topic's `top_m` words against
/// `reference`: `Σ_{m≥2} Σ_{l<m} log((D(v_m, v_l) + 1) / D(v_l))`.
///
/// The reference corpus is matched to the model by term, so it may carry a
/// different (e.g. non-private) vocabulary. A top word absent from the
/// reference has `D(v)` taken as 1.
pub fn topic_coherence(model: &TopicModel, reference: &Corpus, top_m: usize) -> Result<CoherenceReport> {
    if top_m < 2 {
        return Err(Error::invalid("coherence needs at least 2 top words"));
    }
    let model_to_ref = model.vocabulary().mapping_to(reference.vocabulary());
    if model.vocabulary_size() > 0 && model_to_ref.iter().all(Option::is_none) {
        return Err(Error::invalid("model and reference corpus share no vocabulary"));
    }
    let mut per_topic = Vec::with_capacity(model.num_topics());
    let mut top_words_out = Vec::with_capacity(model.num_topics());
    let mut zero_frequency_words = 0;
    for t in 0..model.num_topics() {
        let ids = top_word_ids(model, t, top_m);
        let ref_ids: Vec<Option<usize>> = ids.iter().map(|&w| model_to_ref[w]).collect();
        // Document-frequency tables restricted to this topic's top words.
        let n = ids.len();
        let mut df = vec![0usize; n];
        let mut co = vec![0usize; n * n];
        let mut present = vec![false; n];
        for doc in reference.documents() {
            for (i, r) in ref_ids.iter().enumerate() {
                present[i] = r.is_some_and(|r| doc.count(r) > 0);
            }
            for i in 0..n {
                if !present[i] {
                    continue;
                }
                df[i] += 1;
                for j in 0..i {
                    if present[j] {
                        co[i * n + j] += 1;
                    }
                }
            }
        }
        zero_frequency_words += df.iter().filter(|&&d| d == 0).count();
        let mut c = 0.0;
        for m in 1..n {
            for l in 0..m {
                c += ((co[m * n + l] as f64 + 1.0) / df[l].max(1) as f64).ln();
            }
        }
        per_topic.push(c);
        top_words_out.push(
            ids.iter()
                .map(|&w| model.vocabulary().term(w).expect("id within vocabulary").to_string())
                .collect(),
        );
    }
    let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    Ok(CoherenceReport {
        per_topic,
        mean,
        top_words: top_words_out,
        zero_frequency_words,
    })
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::invalid("spearman needs at least two points"));
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// ROC CSV: `fpr,tpr` rows followed by a `#`-prefixed metadata block.
pub fn write_roc(curve: &RocCurve, metadata: &[(&str, String)], mut out: impl Write) -> Result<()> {
    writeln!(out, "fpr,tpr")?;
    for (fpr, tpr) in &curve.points {
        writeln!(out, "{fpr},{tpr}")?;
    }
    writeln!(out, "# auc={}", curve.auc)?;
    writeln!(out, "# n_pos={}", curve.n_pos)?;
    writeln!(out, "# n_neg={}", curve.n_neg)?;
    writeln!(out, "# min_plottable_fpr={}", curve.min_plottable_fpr())?;
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

/// Coherence CSV: `topic,coherence,top_words` rows plus a final `mean` row.
pub fn write_coherence(report: &CoherenceReport, metadata: &[(&str, String)], mut out: impl Write) -> Result<()> {
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "topic,coherence,top_words")?;
    for (t, (c, words)) in report.per_topic.iter().zip(&report.top_words).enumerate() {
        writeln!(out, "{t},{c},{}", words.join("|"))?;
    }
    writeln!(out, "mean,{},", report.mean)?;
    Ok(())
}
