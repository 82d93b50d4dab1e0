use rand::Rng as _;

use super::LdaConfig;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Collapsed Gibbs sampler state for LDA.
///
/// Tokens are laid out document by document. Topic-word counts are stored
/// word-major (`word * k + topic`) so that the per-token conditional reads a
/// contiguous slice.
pub struct GibbsSampler {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    words: Vec<u32>,
    doc_bounds: Vec<usize>,
    topics: Vec<u16>,
    doc_topic: Vec<u32>,
    word_topic: Vec<u32>,
    topic_totals: Vec<u32>,
    cumulative: Vec<f64>,
    rng: Rng,
}

impl GibbsSampler {
    /// Random uniform initial assignment of every token.
    pub fn new(corpus: &Corpus, cfg: &LdaConfig) -> Result<Self> {
        cfg.validate()?;
        let v = corpus.vocabulary().len();
        if v == 0 {
            return Err(Error::EmptyCorpus("vocabulary is empty".into()));
        }
        if corpus.total_tokens() == 0 {
            return Err(Error::EmptyCorpus("every document is empty".into()));
        }
        let k = cfg.k;
        let mut words = Vec::with_capacity(corpus.total_tokens());
        let mut doc_bounds = Vec::with_capacity(corpus.len() + 1);
        doc_bounds.push(0);
        for doc in corpus.documents() {
            for &(w, c) in doc.counts() {
                words.extend(std::iter::repeat_n(w as u32, c as usize));
            }
            doc_bounds.push(words.len());
        }

        let mut rng = rng_from_seed(cfg.seed);
        let mut topics = Vec::with_capacity(words.len());
        let mut doc_topic = vec![0u32; corpus.len() * k];
        let mut word_topic = vec![0u32; v * k];
        let mut topic_totals = vec![0u32; k];
        for d in 0..corpus.len() {
            for i in doc_bounds[d]..doc_bounds[d + 1] {
                let z = rng.random_range(0..k);
                topics.push(z as u16);
                doc_topic[d * k + z] += 1;
                word_topic[words[i] as usize * k + z] += 1;
                topic_totals[z] += 1;
            }
        }
        Ok(GibbsSampler {
            k,
            v,
            alpha: cfg.alpha,
            beta: cfg.beta,
            words,
            doc_bounds,
            topics,
            doc_topic,
            word_topic,
            topic_totals,
            cumulative: vec![0.0; k],
            rng,
        })
    }

    /// One full pass resampling every token from its full conditional
    /// `(n_zw + β)(n_dz + α) / (n_z + Vβ)`.
    pub fn sweep(&mut self) {
        let k = self.k;
        let v_beta = self.v as f64 * self.beta;
        for d in 0..self.doc_bounds.len() - 1 {
            let dt = &mut self.doc_topic[d * k..(d + 1) * k];
            for i in self.doc_bounds[d]..self.doc_bounds[d + 1] {
                let w = self.words[i] as usize;
                let old = self.topics[i] as usize;
                let wt = &mut self.word_topic[w * k..(w + 1) * k];
                dt[old] -= 1;
                wt[old] -= 1;
                self.topic_totals[old] -= 1;

                let mut total = 0.0;
                for z in 0..k {
                    total += (wt[z] as f64 + self.beta) * (dt[z] as f64 + self.alpha)
                        / (self.topic_totals[z] as f64 + v_beta);
                    self.cumulative[z] = total;
                }
                let u = self.rng.random::<f64>() * total;
                let new = self.cumulative.iter().position(|&c| c > u).unwrap_or(k - 1);

                self.topics[i] = new as u16;
                dt[new] += 1;
                wt[new] += 1;
                self.topic_totals[new] += 1;
            }
        }
    }

    pub fn num_topics(&self) -> usize {
        self.k
    }

    pub fn vocabulary_size(&self) -> usize {
        self.v
    }

    pub fn num_tokens(&self) -> usize {
        self.words.len()
    }

    /// Topic-word counts `n_{z,w}`, row-major `k × V`.
    pub fn topic_word_counts(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.k * self.v];
        for w in 0..self.v {
            for z in 0..self.k {
                out[z * self.v + w] = self.word_topic[w * self.k + z];
            }
        }
        out
    }

    pub fn topic_totals(&self) -> &[u32] {
        &self.topic_totals
    }

    /// Current `Φ_{z,w} = (n_zw + β) / (n_z + Vβ)`, row-major.
    pub fn phi(&self) -> Vec<f64> {
        let v_beta = self.v as f64 * self.beta;
        let mut out = vec![0.0; self.k * self.v];
        for w in 0..self.v {
            for z in 0..self.k {
                out[z * self.v + w] = (self.word_topic[w * self.k + z] as f64 + self.beta)
                    / (self.topic_totals[z] as f64 + v_beta);
            }
        }
        out
    }

    /// Sum of all topic-word counts; equals the number of tokens at all times.
    pub fn total_assigned(&self) -> u64 {
        self.word_topic.iter().map(|&c| c as u64).sum()
    }

    /// Checks that the three count tables agree with the assignments.
    pub fn counts_consistent(&self) -> bool {
        let k = self.k;
        let mut dt = vec![0u32; self.doc_topic.len()];
        let mut wt = vec![0u32; self.word_topic.len()];
        let mut tt = vec![0u32; k];
        for d in 0..self.doc_bounds.len() - 1 {
            for i in self.doc_bounds[d]..self.doc_bounds[d + 1] {
                let z = self.topics[i] as usize;
                dt[d * k + z] += 1;
                wt[self.words[i] as usize * k + z] += 1;
                tt[z] += 1;
            }
        }
        dt == self.doc_topic && wt == self.word_topic && tt == self.topic_totals
    }
}
