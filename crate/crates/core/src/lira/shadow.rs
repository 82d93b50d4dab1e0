use std::borrow::Cow;

use crate::corpus::{sample_half, Corpus, Document, Vocabulary};
use crate::error::{Error, Result};
use crate::lda::{train_lda, LdaConfig, TopicMixture, TopicModel};
use crate::par::try_map_indexed;
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::{query_statistics, StatisticValues};

/// Anything that turns a training corpus and a seed into a released model.
/// Shadow models must be trained with the same learner as the target.
pub trait Learner: Sync {
    fn train(&self, corpus: &Corpus, seed: u64) -> Result<TopicModel>;
}

impl Learner for LdaConfig {
    fn train(&self, corpus: &Corpus, seed: u64) -> Result<TopicModel> {
        train_lda(corpus, &self.clone().with_seed(seed))
    }
}

impl<F> Learner for F
where
    F: Fn(&Corpus, u64) -> Result<TopicModel> + Sync,
{
    fn train(&self, corpus: &Corpus, seed: u64) -> Result<TopicModel> {
        self(corpus, seed)
    }
}

/// Shadow models with their exact training sets.
#[derive(Clone, Debug)]
pub struct ShadowEnsemble {
    pub models: Vec<TopicModel>,
    /// Sorted doc ids each model was trained on.
    pub memberships: Vec<Vec<usize>>,
    /// Seed handed to the learner for each model.
    pub seeds: Vec<u64>,
    pub config: LdaConfig,
    /// Vocabulary of the pool the memberships refer to.
    pub vocabulary: Vocabulary,
    /// The document a literal ensemble was built around.
    pub target: Option<usize>,
}

impl ShadowEnsemble {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn contains(&self, model: usize, doc_id: usize) -> bool {
        self.memberships[model].binary_search(&doc_id).is_ok()
    }

    /// The ensemble with model `index` dropped.
    pub fn without_model(&self, index: usize) -> ShadowEnsemble {
        let mut e = self.clone();
        e.models.remove(index);
        e.memberships.remove(index);
        e.seeds.remove(index);
        e
    }
}

const MEMBERSHIP_STREAM: u64 = 0x6d656d62;
const TRAINING_STREAM: u64 = 0x74726169;

fn model_seeds(seed: u64, index: usize) -> (u64, u64) {
    let base = derive_seed(seed, index as u64);
    (derive_seed(base, MEMBERSHIP_STREAM), derive_seed(base, TRAINING_STREAM))
}

/// Trains `n` models, each on an independent random half of `pool`.
/// Model `i` depends only on `(seed, i)`.
pub fn train_half_sample_ensemble(
    pool: &Corpus,
    n: usize,
    seed: u64,
    config: &LdaConfig,
    learner: &dyn Learner,
) -> Result<ShadowEnsemble> {
    if pool.len() < 4 {
        return Err(Error::invalid(format!("shadow pool needs at least 4 documents, got {}", pool.len())));
    }
    let m = pool.len();
    let jobs = try_map_indexed(n, |i| {
        let (membership_seed, training_seed) = model_seeds(seed, i);
        let positions = sample_half(m, membership_seed);
        let train = pool.subset(&positions);
        let mut ids: Vec<usize> = train.documents().iter().map(|d| d.doc_id).collect();
        ids.sort_unstable();
        let model = learner.train(&train, training_seed)?;
        Ok((model, ids, training_seed))
    })?;
    Ok(assemble(jobs, config, pool.vocabulary(), None))
}

/// Per-document ensemble: even-indexed models train on a random half that
/// includes `target`, odd-indexed ones on a random half that excludes it.
pub fn train_literal_ensemble(
    pool: &Corpus,
    target: usize,
    n: usize,
    seed: u64,
    config: &LdaConfig,
    learner: &dyn Learner,
) -> Result<ShadowEnsemble> {
    let m = pool.len();
    if m < 4 {
        return Err(Error::invalid(format!("shadow pool needs at least 4 documents, got {m}")));
    }
    let target_doc = pool
        .document(target)
        .ok_or_else(|| Error::invalid(format!("target document {target} is not in the pool")))?;
    let rest = pool.without(target);
    let half = m / 2;
    let jobs = try_map_indexed(n, |i| {
        let (membership_seed, training_seed) = model_seeds(derive_seed(seed, target as u64), i);
        let include = i % 2 == 0;
        let wanted = if include { half - 1 } else { half };
        let mut rng = rng_from_seed(membership_seed);
        let mut positions = rand::seq::index::sample(&mut rng, rest.len(), wanted).into_vec();
        positions.sort_unstable();
        let mut train = rest.subset(&positions);
        if include {
            train.push(target_doc.clone())?;
        }
        let mut ids: Vec<usize> = train.documents().iter().map(|d| d.doc_id).collect();
        ids.sort_unstable();
        let model = learner.train(&train, training_seed)?;
        Ok((model, ids, training_seed))
    })?;
    Ok(assemble(jobs, config, pool.vocabulary(), Some(target)))
}

/// Retrains an ensemble from recorded memberships and seeds.
pub fn replay_ensemble(
    pool: &Corpus,
    memberships: &[Vec<usize>],
    seeds: &[u64],
    config: &LdaConfig,
    learner: &dyn Learner,
) -> Result<ShadowEnsemble> {
    if memberships.len() != seeds.len() {
        return Err(Error::DimensionMismatch {
            expected: memberships.len(),
            found: seeds.len(),
        });
    }
    let jobs = try_map_indexed(seeds.len(), |i| {
        let mut ids = memberships[i].clone();
        ids.sort_unstable();
        let train = pool.with_doc_ids(&ids);
        if train.len() != ids.len() {
            return Err(Error::invalid(format!("membership of model {i} names documents missing from the pool")));
        }
        Ok((learner.train(&train, seeds[i])?, ids, seeds[i]))
    })?;
    Ok(assemble(jobs, config, pool.vocabulary(), None))
}

fn assemble(
    jobs: Vec<(TopicModel, Vec<usize>, u64)>,
    config: &LdaConfig,
    vocabulary: &Vocabulary,
    target: Option<usize>,
) -> ShadowEnsemble {
    let mut e = ShadowEnsemble {
        models: Vec::with_capacity(jobs.len()),
        memberships: Vec::with_capacity(jobs.len()),
        seeds: Vec::with_capacity(jobs.len()),
        config: config.clone(),
        vocabulary: vocabulary.clone(),
        target,
    };
    for (model, ids, seed) in jobs {
        e.models.push(model);
        e.memberships.push(ids);
        e.seeds.push(seed);
    }
    e
}

/// Re-indexes documents from one vocabulary into another, dropping words the
/// target vocabulary lacks.
pub struct Projection {
    mapping: Option<Vec<Option<usize>>>,
}

impl Projection {
    pub fn new(from: &Vocabulary, to: &Vocabulary) -> Self {
        Projection {
            mapping: (from != to).then(|| from.mapping_to(to)),
        }
    }

    pub fn apply<'a>(&self, doc: &'a Document) -> Cow<'a, Document> {
        match &self.mapping {
            None => Cow::Borrowed(doc),
            Some(m) => Cow::Owned(doc.remap(m)),
        }
    }
}

/// Statistics of `doc` (indexed by `projection`'s source vocabulary) under
/// `model`. A document that loses every word in the projection scores
/// `ζ = 0` with a uniform θ̂.
pub fn statistics_under(
    model: &TopicModel,
    projection: &Projection,
    doc: &Document,
    opts: crate::lda::ThetaOptions,
) -> Result<StatisticValues> {
    let d = projection.apply(doc);
    if d.is_empty() {
        return Ok(StatisticValues::from_theta(&TopicMixture::uniform(model.num_topics()), 0.0));
    }
    query_statistics(model, &d, opts)
}
