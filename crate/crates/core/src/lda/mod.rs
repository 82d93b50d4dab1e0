//! LDA training by collapsed Gibbs sampling and document likelihood under a
//! fixed topic-word matrix.

mod gibbs;
mod io;
mod synthetic;

use crate::corpus::{Document, Vocabulary};
use crate::error::{Error, Result};

pub use gibbs::GibbsSampler;
pub use io::{read_topic_model, write_topic_model};
pub use synthetic::{generate_synthetic_corpus, planted_topic_model, sample_dirichlet, synthetic_vocabulary};

use crate::corpus::Corpus;

/// Row sums of a topic-word matrix must be within this of 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LdaConfig {
    pub k: usize,
    /// Symmetric document-topic concentration.
    pub alpha: f64,
    /// Symmetric topic-word concentration.
    pub beta: f64,
    pub iterations: usize,
    /// Sweeps completed before counts are snapshotted. When smaller than
    /// `iterations`, Φ is averaged over the snapshots of every later sweep.
    pub burn_in: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// Defaults: `alpha = 1/k`, `beta = 0.01`, 500 sweeps, snapshot at the last.
    pub fn new(k: usize) -> Self {
        LdaConfig {
            k,
            alpha: 1.0 / k.max(1) as f64,
            beta: 0.01,
            iterations: 500,
            burn_in: 500,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Sets the sweep count and moves the snapshot to the last sweep.
    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self.burn_in = iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > u16::MAX as usize {
            return Err(Error::invalid(format!("k must be in 1..=65535, got {}", self.k)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha must be positive"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("beta must be positive"));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be at least 1"));
        }
        if self.burn_in > self.iterations {
            return Err(Error::invalid("burn_in cannot exceed iterations"));
        }
        Ok(())
    }
}

/// A `k × V` row-stochastic topic-word matrix with its vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct TopicModel {
    k: usize,
    phi: Vec<f64>,
    vocabulary: Vocabulary,
}

impl TopicModel {
    /// `phi` is row-major `k × V`. Rows must sum to 1 and entries lie in `[0, 1]`.
    pub fn new(k: usize, phi: Vec<f64>, vocabulary: Vocabulary) -> Result<Self> {
        let v = vocabulary.len();
        if k == 0 {
            return Err(Error::invalid("a topic model needs at least one topic"));
        }
        if phi.len() != k * v {
            return Err(Error::DimensionMismatch {
                expected: k * v,
                found: phi.len(),
            });
        }
        if v > 0 {
            for (z, row) in phi.chunks(v).enumerate() {
                if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return Err(Error::invalid(format!("topic {z} has an entry outside [0, 1]")));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(Error::invalid(format!("topic {z} sums to {sum}, not 1")));
                }
            }
        }
        Ok(TopicModel { k, phi, vocabulary })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, vocabulary: Vocabulary) -> Result<Self> {
        let k = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != vocabulary.len()) {
            return Err(Error::DimensionMismatch {
                expected: vocabulary.len(),
                found: bad.len(),
            });
        }
        TopicModel::new(k, rows.into_iter().flatten().collect(), vocabulary)
    }

    pub fn num_topics(&self) -> usize {
        self.k
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn row(&self, z: usize) -> &[f64] {
        let v = self.vocabulary.len();
        &self.phi[z * v..(z + 1) * v]
    }

    pub fn prob(&self, z: usize, w: usize) -> f64 {
        self.phi[z * self.vocabulary.len() + w]
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// The model with topic `z` moved to position `perm[z]`'s source: row
    /// `i` of the result is row `perm[i]` of `self`.
    pub fn permute_topics(&self, perm: &[usize]) -> Result<TopicModel> {
        if perm.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: perm.len(),
            });
        }
        let mut seen = vec![false; self.k];
        for &p in perm {
            if p >= self.k || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid("not a permutation"));
            }
        }
        let phi = perm.iter().flat_map(|&z| self.row(z).iter().copied()).collect();
        Ok(TopicModel {
            k: self.k,
            phi,
            vocabulary: self.vocabulary.clone(),
        })
    }

    fn check_document(&self, d: &Document) -> Result<()> {
        if let Some(w) = d.max_word_id() {
            if w >= self.vocabulary.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.vocabulary.len(),
                    found: w + 1,
                });
            }
        }
        Ok(())
    }
}

/// A document-topic distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct TopicMixture {
    weights: Vec<f64>,
}

impl TopicMixture {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::invalid("mixture weights must be non-negative and non-empty"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::invalid(format!("mixture weights sum to {sum}, not 1")));
        }
        Ok(TopicMixture { weights })
    }

    pub fn uniform(k: usize) -> Self {
        TopicMixture {
            weights: vec![1.0 / k as f64; k],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Trains LDA with collapsed Gibbs sampling and returns the smoothed
/// topic-word matrix.
pub fn train_lda(corpus: &Corpus, cfg: &LdaConfig) -> Result<TopicModel> {
    let mut sampler = GibbsSampler::new(corpus, cfg)?;
    for _ in 0..cfg.burn_in {
        sampler.sweep();
    }
    let phi = if cfg.burn_in == cfg.iterations {
        sampler.phi()
    } else {
        let mut acc = vec![0.0; cfg.k * corpus.vocabulary().len()];
        let snapshots = cfg.iterations - cfg.burn_in;
        for _ in 0..snapshots {
            sampler.sweep();
            for (a, p) in acc.iter_mut().zip(sampler.phi()) {
                *a += p;
            }
        }
        acc.iter_mut().for_each(|a| *a /= snapshots as f64);
        acc
    };
    TopicModel::new(cfg.k, phi, corpus.vocabulary().clone())
}

/// `Σ_w c_w · log(Σ_z θ_z Φ_{z,w})`. Returns `-∞` when some word of the
/// document has zero probability under the θ-weighted topics.
pub fn log_likelihood(model: &TopicModel, d: &Document, theta: &TopicMixture) -> Result<f64> {
    if theta.len() != model.k {
        return Err(Error::DimensionMismatch {
            expected: model.k,
            found: theta.len(),
        });
    }
    model.check_document(d)?;
    let mut ll = 0.0;
    for &(w, c) in d.counts() {
        let p: f64 = (0..model.k).map(|z| theta.weights[z] * model.prob(z, w)).sum();
        ll += c as f64 * p.ln();
    }
    Ok(ll)
}

/// Stopping rule for [`estimate_theta`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaOptions {
    /// Stop when one EM step gains less than this much log-likelihood.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        ThetaOptions {
            tol: 1e-8,
            max_iter: 1000,
        }
    }
}

/// Maximizes the document log-likelihood over the topic simplex.
///
/// Uses the EM fixed point `θ_z ← (1/n_d) Σ_w c_w θ_z Φ_{z,w} / Σ_z' θ_z' Φ_{z',w}`
/// from the uniform mixture. Returns `(θ̂, ζ)` with `ζ` the log-likelihood at `θ̂`.
pub fn estimate_theta(model: &TopicModel, d: &Document, opts: ThetaOptions) -> Result<(TopicMixture, f64)> {
    let (theta, zeta, _) = run_theta_em(model, d, opts, false)?;
    Ok((theta, zeta))
}

/// Like [`estimate_theta`] but also returns the log-likelihood after every
/// iteration, starting with the uniform initialization.
pub fn estimate_theta_traced(
    model: &TopicModel,
    d: &Document,
    opts: ThetaOptions,
) -> Result<(TopicMixture, f64, Vec<f64>)> {
    run_theta_em(model, d, opts, true)
}

fn run_theta_em(
    model: &TopicModel,
    d: &Document,
    opts: ThetaOptions,
    trace: bool,
) -> Result<(TopicMixture, f64, Vec<f64>)> {
    model.check_document(d)?;
    if d.is_empty() {
        return Err(Error::EmptyDocument(d.doc_id));
    }
    let k = model.k;
    let entries = d.counts();
    let n_d = d.len() as f64;
    // columns[i * k + z] = Φ_{z, w_i}
    let mut columns = Vec::with_capacity(entries.len() * k);
    for &(w, _) in entries {
        columns.extend((0..k).map(|z| model.prob(z, w)));
    }
    let mut theta = vec![1.0 / k as f64; k];
    let mut word_probs = vec![0.0; entries.len()];
    let mut history = Vec::new();

    let evaluate = |theta: &[f64], word_probs: &mut [f64]| -> f64 {
        let mut ll = 0.0;
        for (i, &(_, c)) in entries.iter().enumerate() {
            let col = &columns[i * k..(i + 1) * k];
            let p: f64 = col.iter().zip(theta).map(|(phi, t)| phi * t).sum();
            word_probs[i] = p;
            ll += c as f64 * p.ln();
        }
        ll
    };

    let mut ll = evaluate(&theta, &mut word_probs);
    if trace {
        history.push(ll);
    }
    if ll == f64::NEG_INFINITY || k == 1 {
        return Ok((TopicMixture { weights: theta }, ll, history));
    }
    let mut next = vec![0.0; k];
    for _ in 0..opts.max_iter {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, &(_, c)) in entries.iter().enumerate() {
            let scale = c as f64 / word_probs[i];
            let col = &columns[i * k..(i + 1) * k];
            for z in 0..k {
                next[z] += scale * theta[z] * col[z];
            }
        }
        let total: f64 = next.iter().sum();
        let norm = if total > 0.0 { total } else { n_d };
        for z in 0..k {
            theta[z] = next[z] / norm;
        }
        let updated = evaluate(&theta, &mut word_probs);
        if trace {
            history.push(updated);
        }
        let gain = updated - ll;
        ll = updated;
        if gain < opts.tol {
            break;
        }
    }
    Ok((TopicMixture { weights: theta }, ll, history))
}
