//! Document-level ε-DP LDA by one-shot Laplace perturbation of the final
//! topic-word counts.

use rand_distr::{Distribution, Exp};

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::lda::{GibbsSampler, LdaConfig, TopicModel};
use crate::rng::rng_from_seed;

#[derive(Clone, Debug, PartialEq)]
pub struct DpLdaParams {
    pub epsilon2: f64,
    /// Always 0 for the Laplace mechanism; kept so budgets compose uniformly.
    pub delta2: f64,
    /// Per-document token clamp `L`. `None` uses the 95th percentile of
    /// document lengths, which is computed without privacy.
    pub max_doc_len: Option<usize>,
    pub base: LdaConfig,
    /// Seed of the Laplace noise; the sampler uses `base.seed`.
    pub seed: u64,
}

impl DpLdaParams {
    pub fn new(epsilon2: f64, base: LdaConfig, seed: u64) -> Self {
        DpLdaParams {
            epsilon2,
            delta2: 0.0,
            max_doc_len: None,
            base,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon2 > 0.0 && self.epsilon2.is_finite()) {
            return Err(Error::invalid(format!("epsilon2 must be positive, got {}", self.epsilon2)));
        }
        if !(0.0..1.0).contains(&self.delta2) {
            return Err(Error::invalid("delta2 must be in [0, 1)"));
        }
        if self.max_doc_len == Some(0) {
            return Err(Error::invalid("max_doc_len must be at least 1"));
        }
        self.base.validate()
    }
}

/// Nearest-rank 95th percentile of document lengths (at least 1).
pub fn default_max_doc_len(corpus: &Corpus) -> usize {
    let mut lengths: Vec<usize> = corpus.documents().iter().map(Document::len).collect();
    if lengths.is_empty() {
        return 1;
    }
    lengths.sort_unstable();
    let rank = ((0.95 * lengths.len() as f64).ceil() as usize).clamp(1, lengths.len());
    lengths[rank - 1].max(1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DpLdaRelease {
    pub model: TopicModel,
    pub max_doc_len: usize,
    /// Laplace scale `2L/ε₂` applied to each count.
    pub laplace_scale: f64,
}

pub fn dp_lda_train_detailed(corpus: &Corpus, p: &DpLdaParams) -> Result<DpLdaRelease> {
    p.validate()?;
    let max_doc_len = p.max_doc_len.unwrap_or_else(|| default_max_doc_len(corpus));
    let clamped = Corpus::new(
        corpus.documents().iter().map(|d| d.truncated(max_doc_len)).collect(),
        corpus.vocabulary().clone(),
    )?;
    let mut sampler = GibbsSampler::new(&clamped, &p.base)?;
    for _ in 0..p.base.iterations {
        sampler.sweep();
    }
    let k = p.base.k;
    let v = clamped.vocabulary().len();
    let counts = sampler.topic_word_counts();

    // Adding or removing one document of at most L tokens moves at most L
    // units in and L units out of the count table.
    let laplace_scale = 2.0 * max_doc_len as f64 / p.epsilon2;
    let exp = Exp::new(1.0 / laplace_scale).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = rng_from_seed(p.seed);
    let noisy: Vec<f64> = counts
        .iter()
        .map(|&c| {
            let noise = exp.sample(&mut rng) - exp.sample(&mut rng);
            (c as f64 + noise).max(0.0)
        })
        .collect();

    let beta = p.base.beta;
    let mut phi = Vec::with_capacity(k * v);
    for row in noisy.chunks(v) {
        let total: f64 = row.iter().sum::<f64>() + v as f64 * beta;
        phi.extend(row.iter().map(|&n| (n + beta) / total));
    }
    Ok(DpLdaRelease {
        model: TopicModel::new(k, phi, clamped.vocabulary().clone())?,
        max_doc_len,
        laplace_scale,
    })
}

/// Trains collapsed Gibbs LDA on length-clamped documents and releases
/// `Φ` from Laplace-perturbed final counts.
pub fn dp_lda_train(corpus: &Corpus, p: &DpLdaParams) -> Result<TopicModel> {
    Ok(dp_lda_train_detailed(corpus, p)?.model)
}
