//! Corpora drawn from the LDA generative process.

use rand::Rng as _;
use rand_distr::{Distribution, Gamma};

use super::TopicModel;
use crate::corpus::{Corpus, Document, Vocabulary};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Purely alphabetic tokens (`taaa`, `taab`, ...) so synthetic corpora
/// survive the default preprocessing unchanged.
pub fn synthetic_vocabulary(v: usize) -> Vocabulary {
    let terms = (0..v).map(|i| {
        let mut s = String::from("t");
        let mut rest = i;
        let mut letters = Vec::new();
        loop {
            letters.push((b'a' + (rest % 26) as u8) as char);
            rest /= 26;
            if rest == 0 && letters.len() >= 3 {
                break;
            }
        }
        s.extend(letters.iter().rev());
        s
    });
    Vocabulary::from_terms(terms).expect("synthetic terms are unique")
}

/// Symmetric Dirichlet draw through normalized Gamma variates. If every
/// variate underflows, one coordinate is chosen uniformly.
pub fn sample_dirichlet(concentration: f64, k: usize, rng: &mut Rng) -> Vec<f64> {
    if k == 1 {
        return vec![1.0];
    }
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 && total.is_finite() {
        draws.iter_mut().for_each(|x| *x /= total);
    } else {
        draws.iter_mut().for_each(|x| *x = 0.0);
        draws[rng.random_range(0..k)] = 1.0;
    }
    draws
}

/// Topics drawn i.i.d. from a symmetric Dirichlet over a synthetic vocabulary.
/// Panics if `k` or `v` is zero, or if `v > 1` and `concentration` is not positive.
pub fn planted_topic_model(k: usize, v: usize, concentration: f64, seed: u64) -> TopicModel {
    let mut rng = rng_from_seed(seed);
    let mut phi = Vec::with_capacity(k * v);
    for _ in 0..k {
        let mut row = sample_dirichlet(concentration, v, &mut rng);
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= sum);
        phi.extend(row);
    }
    TopicModel::new(k, phi, synthetic_vocabulary(v)).expect("dirichlet rows are distributions")
}

fn draw_index(cumulative: &[f64], rng: &mut Rng) -> usize {
    let u = rng.random::<f64>() * cumulative[cumulative.len() - 1];
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

/// Draws `m` documents of `doc_len` tokens: `θ ~ Dirichlet(α)`, then per token
/// a topic from `θ` and a word from that topic's row.
pub fn generate_synthetic_corpus(
    phi_true: &TopicModel,
    alpha: f64,
    m: usize,
    doc_len: usize,
    seed: u64,
) -> Result<Corpus> {
    if m == 0 || doc_len == 0 {
        return Err(Error::invalid("synthetic corpus needs M >= 1 and doc_len >= 1"));
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    let k = phi_true.num_topics();
    let v = phi_true.vocabulary_size();
    let row_cdfs: Vec<Vec<f64>> = (0..k)
        .map(|z| {
            phi_true
                .row(z)
                .iter()
                .scan(0.0, |acc, &p| {
                    *acc += p;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let mut rng = rng_from_seed(seed);
    let mut documents = Vec::with_capacity(m);
    let mut counts = vec![0u32; v];
    for doc_id in 0..m {
        let theta = sample_dirichlet(alpha, k, &mut rng);
        let theta_cdf: Vec<f64> = theta
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..doc_len {
            let z = draw_index(&theta_cdf, &mut rng);
            let w = draw_index(&row_cdfs[z], &mut rng);
            counts[w] += 1;
        }
        documents.push(Document::new(
            doc_id,
            None,
            counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(w, &c)| (w, c)),
        ));
    }
    Corpus::new(documents, phi_true.vocabulary().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabulary_tokens_are_alphabetic_and_unique() {
        let v = synthetic_vocabulary(800);
        assert_eq!(v.term(0), Some("taaa"));
        assert_eq!(v.term(1), Some("taab"));
        assert_eq!(v.term(27), Some("tabb"));
        assert!(v.terms().iter().all(|t| t.chars().all(|c| c.is_ascii_lowercase()) && t.len() >= 4));
    }

    #[test]
    fn point_mass_topic_generates_single_word() {
        let mut row = vec![0.0; 5];
        row[3] = 1.0;
        let model = TopicModel::from_rows(vec![row], synthetic_vocabulary(5)).unwrap();
        let c = generate_synthetic_corpus(&model, 0.5, 10, 7, 1).unwrap();
        assert!(c.documents().iter().all(|d| d.counts() == [(3, 7)]));
    }

    #[test]
    fn same_seed_same_corpus() {
        let model = planted_topic_model(2, 20, 0.5, 3);
        let a = generate_synthetic_corpus(&model, 0.5, 15, 10, 4).unwrap();
        let b = generate_synthetic_corpus(&model, 0.5, 15, 10, 4).unwrap();
        assert_eq!(a, b);
    }
}
