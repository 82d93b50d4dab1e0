use std::fmt::Write as _;

use super::{compose_privacy, dp_lda_train_detailed, dpsu_select_detailed, DpLdaParams, DpsuParams, DpsuRelease, PrivacyBudget};
use crate::corpus::{build_vocabulary, preprocess, sanitize, to_bow, Corpus, Document, PreprocessConfig, Vocabulary};
use crate::error::{Error, Result};
use crate::lda::TopicModel;
use crate::lira::Learner;
use crate::rng::derive_seed;

/// A private release and the bookkeeping needed to replay and audit it.
#[derive(Clone, Debug)]
pub struct FdptmOutput {
    pub model: TopicModel,
    pub budget: PrivacyBudget,
    pub dpsu: DpsuRelease,
    pub dpsu_params: DpsuParams,
    pub dp_lda_params: DpLdaParams,
    pub max_doc_len: usize,
    pub laplace_scale: f64,
    /// The training corpus restricted to the released vocabulary.
    pub sanitized: Corpus,
}

impl FdptmOutput {
    /// The released vocabulary, identical to the model's.
    pub fn vocabulary(&self) -> &Vocabulary {
        self.model.vocabulary()
    }
}

/// Vocabulary selection, sanitization and DP LDA on an already tokenized
/// bag-of-words corpus.
pub fn fdptm_bow(corpus: &Corpus, dpsu: &DpsuParams, dplda: &DpLdaParams) -> Result<FdptmOutput> {
    dpsu.validate()?;
    dplda.validate()?;
    let budget = compose_privacy(dpsu.epsilon1, dpsu.delta1, dplda.epsilon2, dplda.delta2)?;
    let release = dpsu_select_detailed(corpus, dpsu)?;
    if release.vocabulary.is_empty() {
        return Err(Error::EmptyPrivateVocabulary);
    }
    let sanitized = sanitize(corpus, &release.vocabulary);
    let lda = dp_lda_train_detailed(&sanitized, dplda)?;
    Ok(FdptmOutput {
        model: lda.model,
        budget,
        dpsu: release,
        dpsu_params: dpsu.clone(),
        dp_lda_params: dplda.clone(),
        max_doc_len: lda.max_doc_len,
        laplace_scale: lda.laplace_scale,
        sanitized,
    })
}

/// The full pipeline from raw text: preprocess, select the vocabulary with
/// DPSU, sanitize, train DP LDA. `authors` aligns with `raw_docs`; without
/// it every document is its own author.
pub fn fdptm<S: AsRef<str>>(
    raw_docs: &[S],
    authors: Option<&[usize]>,
    pre_cfg: &PreprocessConfig,
    dpsu: &DpsuParams,
    dplda: &DpLdaParams,
) -> Result<FdptmOutput> {
    if let Some(a) = authors {
        if a.len() != raw_docs.len() {
            return Err(Error::DimensionMismatch {
                expected: raw_docs.len(),
                found: a.len(),
            });
        }
    }
    let tokens = preprocess(raw_docs, pre_cfg)?;
    let vocab = build_vocabulary(&tokens);
    let bow = to_bow(&tokens, &vocab, false)?;
    let corpus = match authors {
        None => bow,
        Some(a) => Corpus::new(
            bow.documents()
                .iter()
                .zip(a)
                .map(|(d, &author)| Document::new(d.doc_id, Some(author), d.counts().iter().copied()))
                .collect(),
            vocab,
        )?,
    };
    fdptm_bow(&corpus, dpsu, dplda)
}

/// FDPTM as a shadow-model learner. Every stage seed is derived from the
/// seed it is handed. A shadow whose DPSU release is empty becomes a model
/// over an empty vocabulary, under which every document scores `ζ = 0`.
#[derive(Clone, Debug)]
pub struct FdptmLearner {
    pub dpsu: DpsuParams,
    pub dplda: DpLdaParams,
}

impl FdptmLearner {
    pub fn seeded(&self, seed: u64) -> (DpsuParams, DpLdaParams) {
        let mut dpsu = self.dpsu.clone();
        dpsu.seed = derive_seed(seed, 1);
        let mut dplda = self.dplda.clone();
        dplda.base.seed = derive_seed(seed, 2);
        dplda.seed = derive_seed(seed, 3);
        (dpsu, dplda)
    }
}

impl Learner for FdptmLearner {
    fn train(&self, corpus: &Corpus, seed: u64) -> Result<TopicModel> {
        let (dpsu, dplda) = self.seeded(seed);
        match fdptm_bow(corpus, &dpsu, &dplda) {
            Ok(out) => Ok(out.model),
            Err(Error::EmptyPrivateVocabulary) => TopicModel::new(dplda.base.k, Vec::new(), Vocabulary::new()),
            Err(e) => Err(e),
        }
    }
}

/// Plain-text record of a release: mechanisms, adjacency, per-stage budgets,
/// clamps and seeds.
pub fn privacy_report(out: &FdptmOutput) -> String {
    let mut r = String::new();
    let c = &out.dpsu.calibration;
    let (p1, p2) = (&out.dpsu_params, &out.dp_lda_params);
    let _ = writeln!(r, "adjacency: document-level, one author per document (explicit author ids group documents)");
    let _ = writeln!(r, "[stage dpsu]");
    let _ = writeln!(r, "mechanism: weighted Gaussian set union, analytic Gaussian calibration");
    let _ = writeln!(r, "epsilon: {}", p1.epsilon1);
    let _ = writeln!(r, "delta: {}", p1.delta1);
    let _ = writeln!(r, "sigma: {}", c.sigma);
    let _ = writeln!(r, "threshold: {}", c.threshold);
    let _ = writeln!(r, "cutoff: {}", c.cutoff);
    let _ = writeln!(r, "alpha_cutoff: {}", p1.alpha_cutoff);
    let _ = writeln!(r, "max_words_per_author: {}", p1.max_words_per_author);
    let _ = writeln!(r, "authors: {}", out.dpsu.authors);
    let _ = writeln!(r, "released_words: {}", out.dpsu.vocabulary.len());
    let _ = writeln!(r, "seed: {}", p1.seed);
    let _ = writeln!(r, "[stage dp_lda]");
    let _ = writeln!(r, "mechanism: Laplace perturbation of final collapsed-Gibbs topic-word counts");
    let _ = writeln!(r, "epsilon: {}", p2.epsilon2);
    let _ = writeln!(r, "delta: {}", p2.delta2);
    let _ = writeln!(r, "max_doc_len: {}", out.max_doc_len);
    let _ = writeln!(
        r,
        "max_doc_len_source: {}",
        if p2.max_doc_len.is_some() { "fixed" } else { "95th percentile of training lengths (not private)" }
    );
    let _ = writeln!(r, "laplace_scale: {}", out.laplace_scale);
    let _ = writeln!(r, "k: {}", p2.base.k);
    let _ = writeln!(r, "alpha: {}", p2.base.alpha);
    let _ = writeln!(r, "beta: {}", p2.base.beta);
    let _ = writeln!(r, "iterations: {}", p2.base.iterations);
    let _ = writeln!(r, "sampler_seed: {}", p2.base.seed);
    let _ = writeln!(r, "noise_seed: {}", p2.seed);
    let _ = writeln!(r, "[total]");
    let _ = writeln!(r, "composition: sequential");
    let _ = writeln!(r, "epsilon: {}", out.budget.epsilon);
    let _ = writeln!(r, "delta: {}", out.budget.delta);
    r
}
