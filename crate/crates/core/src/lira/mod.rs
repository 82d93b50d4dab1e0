//! Likelihood-ratio membership inference against topic models.
//!
//! The attacker queries `ζ(Φ, d)` (or another statistic of θ̂) on the
//! released model and compares it to the same statistic on shadow models that
//! did or did not train on `d`. Two execution modes exist: *literal* builds a
//! fresh ensemble around every target document, *ensemble* trains one pool of
//! half-sampled shadow models and partitions it per document.

mod io;
mod shadow;

use std::collections::HashMap;

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result, Side};
use crate::lda::{LdaConfig, ThetaOptions, TopicModel};
use crate::par::try_map_indexed;
use crate::stats::{fit_normal, std_normal_cdf, NormalFit, QueryStatisticKind, StatisticValues};

pub use io::{read_manifest, read_scores, write_manifest, write_scores, ManifestEntry, ScoreRecord};
pub use shadow::{
    replay_ensemble, statistics_under, train_half_sample_ensemble, train_literal_ensemble, Learner, Projection,
    ShadowEnsemble,
};

/// Magnitude at which likelihood ratios and their logs are clamped.
pub const SATURATION: f64 = 1e308;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AttackMode {
    OnlineLiteral,
    OfflineLiteral,
    OnlineEnsemble,
    OfflineEnsemble,
    BaselineGlobal,
}

impl AttackMode {
    pub const ALL: [AttackMode; 5] = [
        AttackMode::OnlineLiteral,
        AttackMode::OfflineLiteral,
        AttackMode::OnlineEnsemble,
        AttackMode::OfflineEnsemble,
        AttackMode::BaselineGlobal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackMode::OnlineLiteral => "online_literal",
            AttackMode::OfflineLiteral => "offline_literal",
            AttackMode::OnlineEnsemble => "online_ensemble",
            AttackMode::OfflineEnsemble => "offline_ensemble",
            AttackMode::BaselineGlobal => "baseline_global",
        }
    }

    pub fn is_literal(self) -> bool {
        matches!(self, AttackMode::OnlineLiteral | AttackMode::OfflineLiteral)
    }

    pub fn is_ensemble(self) -> bool {
        matches!(self, AttackMode::OnlineEnsemble | AttackMode::OfflineEnsemble)
    }

    pub fn is_online(self) -> bool {
        matches!(self, AttackMode::OnlineLiteral | AttackMode::OnlineEnsemble)
    }

    /// Smallest shadow count accepted for this mode.
    pub fn min_shadows(self) -> usize {
        match self {
            AttackMode::OnlineLiteral | AttackMode::OfflineLiteral => 4,
            AttackMode::OnlineEnsemble | AttackMode::OfflineEnsemble => 8,
            AttackMode::BaselineGlobal => 0,
        }
    }
}

impl std::fmt::Display for AttackMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AttackMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown attack mode `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackConfig {
    pub mode: AttackMode,
    pub statistic: QueryStatisticKind,
    pub n_shadow: usize,
    pub seed: u64,
    pub theta: ThetaOptions,
}

impl AttackConfig {
    pub fn new(mode: AttackMode, statistic: QueryStatisticKind, n_shadow: usize, seed: u64) -> Self {
        AttackConfig {
            mode,
            statistic,
            n_shadow,
            seed,
            theta: ThetaOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_shadow < self.mode.min_shadows() {
            return Err(Error::invalid(format!(
                "{} needs at least {} shadow models, got {}",
                self.mode,
                self.mode.min_shadows(),
                self.n_shadow
            )));
        }
        if self.mode == AttackMode::BaselineGlobal && !QueryStatisticKind::BASELINES.contains(&self.statistic) {
            return Err(Error::invalid(format!(
                "the global-threshold baseline is defined for θ̂-shape statistics, not {}",
                self.statistic
            )));
        }
        Ok(())
    }
}

/// One document's attack outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackScore {
    pub doc_id: usize,
    /// Test statistic Λ; larger means "more likely a member".
    pub lambda: f64,
    /// Monotone ranking key used for ROC analysis: `log Λ` for online
    /// attacks, the standardized statistic for offline ones, the raw
    /// statistic for baselines. Unlike Λ it does not saturate early.
    pub score: f64,
    pub label: bool,
    /// Set when Λ or its log hit the ±1e308 clamp.
    pub saturated: bool,
}

/// Λ for the online test: ratio of the in and out normal densities at `x`.
/// Returns `(Λ, log Λ, saturated)`; computed in log space.
pub fn online_lambda(x: f64, fit_in: &NormalFit, fit_out: &NormalFit) -> (f64, f64, bool) {
    let mut log_lambda = fit_in.log_pdf(x) - fit_out.log_pdf(x);
    if log_lambda.is_nan() {
        log_lambda = 0.0;
    }
    let mut saturated = false;
    if log_lambda.abs() > SATURATION {
        log_lambda = log_lambda.clamp(-SATURATION, SATURATION);
        saturated = true;
    }
    let lambda = log_lambda.exp();
    let clamped = lambda.clamp(f64::MIN_POSITIVE, SATURATION);
    saturated |= clamped != lambda;
    (clamped, log_lambda, saturated)
}

/// Λ for the one-sided offline test: `Φ((x − μ_out)/σ_out)`. Returns `(Λ, z)`.
pub fn offline_lambda(x: f64, fit_out: &NormalFit) -> (f64, f64) {
    let z = (x - fit_out.mean) / fit_out.std_dev();
    let z = if z.is_nan() { 0.0 } else { z.clamp(-SATURATION, SATURATION) };
    (std_normal_cdf(z), z)
}

fn side_fits(doc_id: usize, ins: &[f64], outs: &[f64], need_in: bool) -> Result<(Option<NormalFit>, NormalFit)> {
    if outs.len() < 2 {
        return Err(Error::InsufficientShadows {
            doc_id,
            side: Side::Out,
            available: outs.len(),
        });
    }
    let fit_in = if need_in {
        if ins.len() < 2 {
            return Err(Error::InsufficientShadows {
                doc_id,
                side: Side::In,
                available: ins.len(),
            });
        }
        Some(fit_normal(ins)?)
    } else {
        None
    };
    Ok((fit_in, fit_normal(outs)?))
}

fn score_from_samples(
    online: bool,
    doc_id: usize,
    observed: f64,
    ins: &[f64],
    outs: &[f64],
    label: bool,
) -> Result<AttackScore> {
    let (fit_in, fit_out) = side_fits(doc_id, ins, outs, online)?;
    Ok(match fit_in {
        Some(fit_in) => {
            let (lambda, log_lambda, saturated) = online_lambda(observed, &fit_in, &fit_out);
            AttackScore {
                doc_id,
                lambda,
                score: log_lambda,
                label,
                saturated,
            }
        }
        None => {
            let (lambda, z) = offline_lambda(observed, &fit_out);
            AttackScore {
                doc_id,
                lambda,
                score: z,
                label,
                saturated: z.abs() >= SATURATION,
            }
        }
    })
}

/// Statistic values of one document under every model of an ensemble, split
/// by whether the model trained on it.
fn split_by_membership(ensemble: &ShadowEnsemble, d: &Document, opts: ThetaOptions) -> Result<(Vec<StatisticValues>, Vec<StatisticValues>)> {
    let mut ins = Vec::new();
    let mut outs = Vec::new();
    for (i, model) in ensemble.models.iter().enumerate() {
        let proj = Projection::new(&ensemble.vocabulary, model.vocabulary());
        let v = statistics_under(model, &proj, d, opts)?;
        if ensemble.contains(i, d.doc_id) {
            ins.push(v);
        } else {
            outs.push(v);
        }
    }
    Ok((ins, outs))
}

fn observed_statistics(
    phi_obs: &TopicModel,
    ensemble: &ShadowEnsemble,
    d: &Document,
    opts: ThetaOptions,
) -> Result<StatisticValues> {
    if d.is_empty() {
        return Err(Error::EmptyDocument(d.doc_id));
    }
    statistics_under(phi_obs, &Projection::new(&ensemble.vocabulary, phi_obs.vocabulary()), d, opts)
}

/// Online LiRA for a single document; `d` is indexed by the ensemble's pool vocabulary.
pub fn online_lira(
    phi_obs: &TopicModel,
    d: &Document,
    ensemble: &ShadowEnsemble,
    statistic: QueryStatisticKind,
) -> Result<f64> {
    let opts = ThetaOptions::default();
    let observed = observed_statistics(phi_obs, ensemble, d, opts)?.get(statistic);
    let (ins, outs) = split_by_membership(ensemble, d, opts)?;
    let ins: Vec<f64> = ins.iter().map(|v| v.get(statistic)).collect();
    let outs: Vec<f64> = outs.iter().map(|v| v.get(statistic)).collect();
    Ok(score_from_samples(true, d.doc_id, observed, &ins, &outs, false)?.lambda)
}

/// Offline LiRA for a single document. Only models that did not train on
/// `d` are used.
pub fn offline_lira(
    phi_obs: &TopicModel,
    d: &Document,
    ensemble: &ShadowEnsemble,
    statistic: QueryStatisticKind,
) -> Result<f64> {
    let opts = ThetaOptions::default();
    let observed = observed_statistics(phi_obs, ensemble, d, opts)?.get(statistic);
    let (_, outs) = split_by_membership(ensemble, d, opts)?;
    let outs: Vec<f64> = outs.iter().map(|v| v.get(statistic)).collect();
    Ok(score_from_samples(false, d.doc_id, observed, &[], &outs, false)?.lambda)
}

/// Global-threshold baseline: each document's score is the raw statistic
/// under the released model. Empty documents are skipped.
pub fn baseline_global(phi_obs: &TopicModel, docs: &[Document], statistic: QueryStatisticKind) -> Result<Vec<AttackScore>> {
    if !QueryStatisticKind::BASELINES.contains(&statistic) {
        return Err(Error::invalid(format!("{statistic} is not a baseline statistic")));
    }
    let opts = ThetaOptions::default();
    docs.iter()
        .filter(|d| !d.is_empty())
        .map(|d| {
            let s = crate::stats::query_statistics(phi_obs, d, opts)?.get(statistic);
            Ok(AttackScore {
                doc_id: d.doc_id,
                lambda: s,
                score: s,
                label: false,
                saturated: false,
            })
        })
        .collect()
}

/// Every statistic of every evaluated document under every shadow model.
/// Built once per ensemble so that all modes and statistics can be scored
/// without re-estimating θ̂.
#[derive(Clone, Debug)]
pub struct StatisticTable {
    doc_ids: Vec<usize>,
    rows: HashMap<usize, usize>,
    /// `values[model][row]`
    values: Vec<Vec<StatisticValues>>,
    /// `members[model][row]`
    members: Vec<Vec<bool>>,
}

impl StatisticTable {
    /// Evaluates the non-empty documents of `docs` (pool vocabulary) under
    /// each shadow model.
    pub fn build(ensemble: &ShadowEnsemble, docs: &Corpus, opts: ThetaOptions) -> Result<Self> {
        let evaluated: Vec<&Document> = docs.documents().iter().filter(|d| !d.is_empty()).collect();
        let doc_ids: Vec<usize> = evaluated.iter().map(|d| d.doc_id).collect();
        let values = try_map_indexed(ensemble.len(), |i| {
            let model = &ensemble.models[i];
            let proj = Projection::new(docs.vocabulary(), model.vocabulary());
            evaluated.iter().map(|d| statistics_under(model, &proj, d, opts)).collect()
        })?;
        let members = (0..ensemble.len())
            .map(|i| doc_ids.iter().map(|&id| ensemble.contains(i, id)).collect())
            .collect();
        let rows = doc_ids.iter().enumerate().map(|(r, &id)| (id, r)).collect();
        Ok(StatisticTable {
            doc_ids,
            rows,
            values,
            members,
        })
    }

    pub fn doc_ids(&self) -> &[usize] {
        &self.doc_ids
    }

    pub fn num_models(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, model: usize, doc_id: usize) -> Option<&StatisticValues> {
        self.rows.get(&doc_id).map(|&r| &self.values[model][r])
    }

    /// Shadow samples of `kind` for `doc_id`, split into (in, out).
    pub fn samples(&self, doc_id: usize, kind: QueryStatisticKind) -> Option<(Vec<f64>, Vec<f64>)> {
        let &r = self.rows.get(&doc_id)?;
        let mut ins = Vec::new();
        let mut outs = Vec::new();
        for (vals, mem) in self.values.iter().zip(&self.members) {
            let x = vals[r].get(kind);
            if mem[r] {
                ins.push(x);
            } else {
                outs.push(x);
            }
        }
        Some((ins, outs))
    }

    /// The table with model `index` dropped.
    pub fn without_model(&self, index: usize) -> StatisticTable {
        let mut t = self.clone();
        t.values.remove(index);
        t.members.remove(index);
        t
    }
}

/// Statistics of each document under one model, `None` for empty documents.
pub fn evaluate_documents(model: &TopicModel, docs: &Corpus, opts: ThetaOptions) -> Result<Vec<Option<StatisticValues>>> {
    let proj = Projection::new(docs.vocabulary(), model.vocabulary());
    let values = try_map_indexed(docs.len(), |i| {
        let d = &docs.documents()[i];
        if d.is_empty() {
            Ok(None)
        } else {
            statistics_under(model, &proj, d, opts).map(Some)
        }
    })?;
    Ok(values)
}

/// Scores and bookkeeping from one batch attack.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AttackOutcome {
    pub scores: Vec<AttackScore>,
    /// Documents skipped because they have no words.
    pub skipped_empty: usize,
    /// Documents skipped because a side of the shadow split had fewer than
    /// two models.
    pub skipped_insufficient: usize,
}

/// Scores precomputed target statistics against a shadow table.
pub fn score_with_table(
    table: &StatisticTable,
    target: &[Option<StatisticValues>],
    docs: &Corpus,
    labels: &[bool],
    mode: AttackMode,
    statistic: QueryStatisticKind,
) -> Result<AttackOutcome> {
    if labels.len() != docs.len() || target.len() != docs.len() {
        return Err(Error::DimensionMismatch {
            expected: docs.len(),
            found: if labels.len() != docs.len() { labels.len() } else { target.len() },
        });
    }
    let mut out = AttackOutcome::default();
    for ((d, &label), t) in docs.documents().iter().zip(labels).zip(target) {
        let Some(t) = t else {
            out.skipped_empty += 1;
            continue;
        };
        let observed = t.get(statistic);
        if mode == AttackMode::BaselineGlobal {
            out.scores.push(AttackScore {
                doc_id: d.doc_id,
                lambda: observed,
                score: observed,
                label,
                saturated: false,
            });
            continue;
        }
        let (ins, outs) = table
            .samples(d.doc_id, statistic)
            .ok_or_else(|| Error::invalid(format!("document {} is missing from the shadow table", d.doc_id)))?;
        match score_from_samples(mode.is_online(), d.doc_id, observed, &ins, &outs, label) {
            Ok(s) => out.scores.push(s),
            Err(Error::InsufficientShadows { .. }) => out.skipped_insufficient += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Shadow models available to a batch attack.
#[derive(Clone, Copy, Debug)]
pub enum Shadows<'a> {
    None,
    Shared(&'a ShadowEnsemble),
    /// Literal ensembles keyed by target doc_id.
    PerDocument(&'a HashMap<usize, ShadowEnsemble>),
}

/// Applies the configured attack to every non-empty document of `eval_docs`.
pub fn attack_corpus(
    phi_obs: &TopicModel,
    eval_docs: &Corpus,
    labels: &[bool],
    cfg: &AttackConfig,
    shadows: Shadows<'_>,
) -> Result<AttackOutcome> {
    cfg.validate()?;
    if labels.len() != eval_docs.len() {
        return Err(Error::DimensionMismatch {
            expected: eval_docs.len(),
            found: labels.len(),
        });
    }
    let target = evaluate_documents(phi_obs, eval_docs, cfg.theta)?;
    match (cfg.mode, shadows) {
        (AttackMode::BaselineGlobal, _) => {
            let empty = StatisticTable {
                doc_ids: Vec::new(),
                rows: HashMap::new(),
                values: Vec::new(),
                members: Vec::new(),
            };
            score_with_table(&empty, &target, eval_docs, labels, cfg.mode, cfg.statistic)
        }
        (m, Shadows::Shared(ensemble)) if m.is_ensemble() => {
            let table = StatisticTable::build(ensemble, eval_docs, cfg.theta)?;
            score_with_table(&table, &target, eval_docs, labels, cfg.mode, cfg.statistic)
        }
        (m, Shadows::PerDocument(per_doc)) if m.is_literal() => {
            let mut out = AttackOutcome::default();
            for ((d, &label), t) in eval_docs.documents().iter().zip(labels).zip(&target) {
                let Some(t) = t else {
                    out.skipped_empty += 1;
                    continue;
                };
                let ensemble = per_doc
                    .get(&d.doc_id)
                    .ok_or_else(|| Error::invalid(format!("no literal ensemble for document {}", d.doc_id)))?;
                let (ins, outs) = split_by_membership(ensemble, d, cfg.theta)?;
                let ins: Vec<f64> = ins.iter().map(|v| v.get(cfg.statistic)).collect();
                let outs: Vec<f64> = outs.iter().map(|v| v.get(cfg.statistic)).collect();
                match score_from_samples(m.is_online(), d.doc_id, t.get(cfg.statistic), &ins, &outs, label) {
                    Ok(s) => out.scores.push(s),
                    Err(Error::InsufficientShadows { .. }) => out.skipped_insufficient += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok(out)
        }
        (m, _) if m.is_literal() => Err(Error::invalid(format!("{m} needs per-document literal ensembles"))),
        (m, _) => Err(Error::invalid(format!("{m} needs a shared shadow ensemble"))),
    }
}

/// Trains the shared shadow ensemble for an ensemble-mode attack with plain LDA.
pub fn train_shadow_ensemble(pool: &Corpus, cfg: &AttackConfig, lda_cfg: &LdaConfig) -> Result<ShadowEnsemble> {
    cfg.validate()?;
    if !cfg.mode.is_ensemble() {
        return Err(Error::invalid(format!(
            "{} does not use a shared ensemble; literal modes train one per document",
            cfg.mode
        )));
    }
    train_half_sample_ensemble(pool, cfg.n_shadow, cfg.seed, lda_cfg, lda_cfg)
}

#[cfg(test)]
mod tests;
