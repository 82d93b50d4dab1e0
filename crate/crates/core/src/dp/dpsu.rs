//! Differentially private set union over per-author word sets.

use rand_distr::{Distribution, Normal};

use crate::corpus::{Corpus, Vocabulary};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::stats::{std_normal_cdf, std_normal_quantile};

use super::analytic_gaussian_sigma;

#[derive(Clone, Debug, PartialEq)]
pub struct DpsuParams {
    pub epsilon1: f64,
    pub delta1: f64,
    /// Distance of the cutoff Γ above the release threshold, in units of σ.
    pub alpha_cutoff: f64,
    /// Each author contributes at most this many distinct words (their most
    /// frequent ones, ties by word id).
    pub max_words_per_author: usize,
    pub seed: u64,
}

impl DpsuParams {
    pub fn new(epsilon1: f64, delta1: f64, seed: u64) -> Self {
        DpsuParams {
            epsilon1,
            delta1,
            alpha_cutoff: 3.0,
            max_words_per_author: 100,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon1 > 0.0 && self.epsilon1.is_finite()) {
            return Err(Error::invalid(format!("epsilon1 must be positive, got {}", self.epsilon1)));
        }
        if !(self.delta1 > 0.0 && self.delta1 < 1.0) {
            return Err(Error::invalid(format!("delta1 must be in (0, 1), got {}", self.delta1)));
        }
        if !(self.alpha_cutoff > 0.0 && self.alpha_cutoff.is_finite()) {
            return Err(Error::invalid("alpha_cutoff must be positive"));
        }
        if self.max_words_per_author == 0 {
            return Err(Error::invalid("max_words_per_author must be at least 1"));
        }
        Ok(())
    }

    /// Noise scale, release threshold ρ and cutoff Γ.
    ///
    /// Half of δ₁ goes to the Gaussian mechanism (σ for L2 sensitivity 1).
    /// The other half bounds the chance that any of the at most
    /// `max_words_per_author` words only the added author holds (pre-noise
    /// weight ≤ 1) clears ρ.
    pub fn calibrate(&self) -> Result<DpsuCalibration> {
        self.validate()?;
        let sigma = analytic_gaussian_sigma(self.epsilon1, self.delta1 / 2.0, 1.0)?;
        let tail = self.delta1 / (2.0 * self.max_words_per_author as f64);
        let threshold = 1.0 + sigma * std_normal_quantile(1.0 - tail);
        Ok(DpsuCalibration {
            sigma,
            threshold,
            cutoff: threshold + self.alpha_cutoff * sigma,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DpsuCalibration {
    pub sigma: f64,
    /// ρ: a word is released when its noisy weight exceeds this.
    pub threshold: f64,
    /// Γ: accumulated weights are capped here.
    pub cutoff: f64,
}

impl DpsuCalibration {
    /// Probability that a word with pre-noise weight `h` is released.
    pub fn release_probability(&self, h: f64) -> f64 {
        std_normal_cdf((h.min(self.cutoff) - self.threshold) / self.sigma)
    }
}

/// The released vocabulary plus everything needed to audit it.
#[derive(Clone, Debug, PartialEq)]
pub struct DpsuRelease {
    pub vocabulary: Vocabulary,
    /// Source-vocabulary ids of the released words, ascending.
    pub word_ids: Vec<usize>,
    pub calibration: DpsuCalibration,
    pub authors: usize,
}

/// Per-word weights before capping: every author spreads a unit L2 budget
/// over their kept words in proportion to word frequency. Also returns the
/// number of authors.
pub fn dpsu_histogram(corpus: &Corpus, max_words_per_author: usize) -> (Vec<f64>, usize) {
    let mut h = vec![0.0; corpus.vocabulary().len()];
    let sets = corpus.author_word_sets();
    let authors = sets.len();
    for (_, mut words) in sets {
        if words.len() > max_words_per_author {
            words.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            words.truncate(max_words_per_author);
        }
        let norm = words.iter().map(|&(_, c)| (c as f64) * (c as f64)).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        for (w, c) in words {
            h[w] += c as f64 / norm;
        }
    }
    (h, authors)
}

/// Releases words whose Γ-capped weight plus `N(0, σ²)` noise exceeds ρ.
/// Words no author holds are never considered.
pub fn dpsu_select_detailed(corpus: &Corpus, p: &DpsuParams) -> Result<DpsuRelease> {
    let calibration = p.calibrate()?;
    let (h, authors) = dpsu_histogram(corpus, p.max_words_per_author);
    let noise = Normal::new(0.0, calibration.sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = rng_from_seed(p.seed);
    let mut word_ids = Vec::new();
    for (w, &weight) in h.iter().enumerate() {
        if weight <= 0.0 {
            continue;
        }
        let noisy = weight.min(calibration.cutoff) + noise.sample(&mut rng);
        if noisy > calibration.threshold {
            word_ids.push(w);
        }
    }
    let terms = word_ids
        .iter()
        .map(|&w| corpus.vocabulary().term(w).expect("id within vocabulary"));
    Ok(DpsuRelease {
        vocabulary: Vocabulary::from_terms(terms)?,
        word_ids,
        calibration,
        authors,
    })
}

pub fn dpsu_select(corpus: &Corpus, p: &DpsuParams) -> Result<Vocabulary> {
    Ok(dpsu_select_detailed(corpus, p)?.vocabulary)
}
