//! Vocabulary-indexed bag-of-words corpora.
//!
//! Documents are never dropped once ingested: a document that loses all of
//! its tokens to preprocessing or sanitization stays in the corpus as an empty
//! document so that document ids and membership labels remain stable.

mod io;
mod text;

use std::collections::HashMap;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub use io::{
    read_corpus, read_raw_documents, read_uci_bow, read_vocabulary, write_comment_header, write_corpus,
    write_uci_bow, write_vocabulary, RawDocuments,
};
pub use text::{default_stopwords, preprocess, PreprocessConfig, Stemmer};

/// Ordered set of unique tokens with dense ids `0..len`.
#[derive(Clone, Debug, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for Vocabulary {}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from a list of unique terms.
    pub fn from_terms<I, S>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::new();
        for term in terms {
            let term = term.into();
            if vocab.index.contains_key(&term) {
                return Err(Error::invalid(format!("duplicate vocabulary term `{term}`")));
            }
            vocab.insert(term);
        }
        Ok(vocab)
    }

    /// Returns the id of `term`, adding it if it is new.
    pub fn insert(&mut self, term: impl Into<String>) -> usize {
        let term = term.into();
        if let Some(&id) = self.index.get(&term) {
            return id;
        }
        let id = self.terms.len();
        self.index.insert(term.clone(), id);
        self.terms.push(term);
        id
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: usize) -> Option<&str> {
        self.terms.get(id).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(term)
    }

    /// For every id in `self`, the id of the same term in `other`, if present.
    pub fn mapping_to(&self, other: &Vocabulary) -> Vec<Option<usize>> {
        self.terms.iter().map(|t| other.id(t)).collect()
    }
}

/// A sparse bag of words. `counts` is sorted by word id and every count is positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub doc_id: usize,
    pub author: Option<usize>,
    counts: Vec<(usize, u32)>,
}

impl Document {
    /// Builds a document from `(word, count)` entries. Entries for the same
    /// word are merged and zero counts are discarded.
    pub fn new(doc_id: usize, author: Option<usize>, entries: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut counts: Vec<(usize, u32)> = entries.into_iter().filter(|&(_, c)| c > 0).collect();
        counts.sort_unstable_by_key(|&(w, _)| w);
        counts.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        Document { doc_id, author, counts }
    }

    pub fn empty(doc_id: usize, author: Option<usize>) -> Self {
        Document {
            doc_id,
            author,
            counts: Vec::new(),
        }
    }

    pub fn counts(&self) -> &[(usize, u32)] {
        &self.counts
    }

    pub fn count(&self, word: usize) -> u32 {
        self.counts
            .binary_search_by_key(&word, |&(w, _)| w)
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }

    /// Total token count `n_d`.
    pub fn len(&self) -> usize {
        self.counts.iter().map(|&(_, c)| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn distinct_words(&self) -> usize {
        self.counts.len()
    }

    pub fn max_word_id(&self) -> Option<usize> {
        self.counts.last().map(|&(w, _)| w)
    }

    /// Re-expresses the document over another vocabulary, dropping words
    /// `mapping` sends to `None`.
    pub fn remap(&self, mapping: &[Option<usize>]) -> Document {
        Document::new(
            self.doc_id,
            self.author,
            self.counts
                .iter()
                .filter_map(|&(w, c)| mapping.get(w).copied().flatten().map(|nw| (nw, c))),
        )
    }

    /// Keeps at most `max_len` tokens: whole counts in word-id order, the
    /// last kept word partially.
    pub fn truncated(&self, max_len: usize) -> Document {
        let mut left = max_len;
        let mut counts = Vec::with_capacity(self.counts.len());
        for &(w, c) in &self.counts {
            if left == 0 {
                break;
            }
            let take = (c as usize).min(left);
            counts.push((w, take as u32));
            left -= take;
        }
        Document {
            doc_id: self.doc_id,
            author: self.author,
            counts,
        }
    }

    /// Author key used for author-level grouping. Documents without an
    /// explicit author are their own author.
    pub fn author_key(&self) -> AuthorKey {
        match self.author {
            Some(a) => AuthorKey::Author(a),
            None => AuthorKey::Document(self.doc_id),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AuthorKey {
    Author(usize),
    Document(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    vocabulary: Vocabulary,
}

impl Corpus {
    /// Validates word ids against the vocabulary and doc-id uniqueness.
    pub fn new(documents: Vec<Document>, vocabulary: Vocabulary) -> Result<Self> {
        let v = vocabulary.len();
        let mut seen = std::collections::HashSet::with_capacity(documents.len());
        for doc in &documents {
            if !seen.insert(doc.doc_id) {
                return Err(Error::invalid(format!("duplicate doc_id {}", doc.doc_id)));
            }
            if let Some(w) = doc.max_word_id() {
                if w >= v {
                    return Err(Error::invalid(format!(
                        "document {} uses word id {w} but V = {v}",
                        doc.doc_id
                    )));
                }
            }
        }
        Ok(Corpus { documents, vocabulary })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(Document::len).sum()
    }

    pub fn document(&self, doc_id: usize) -> Option<&Document> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }

    /// The documents at the given positions, sharing this corpus's vocabulary.
    pub fn subset(&self, positions: &[usize]) -> Corpus {
        Corpus {
            documents: positions.iter().map(|&i| self.documents[i].clone()).collect(),
            vocabulary: self.vocabulary.clone(),
        }
    }

    /// Documents whose ids are in `ids` (sorted), in corpus order.
    pub fn with_doc_ids(&self, ids: &[usize]) -> Corpus {
        Corpus {
            documents: self
                .documents
                .iter()
                .filter(|d| ids.binary_search(&d.doc_id).is_ok())
                .cloned()
                .collect(),
            vocabulary: self.vocabulary.clone(),
        }
    }

    /// Every document of this corpus except `doc_id`.
    pub fn without(&self, doc_id: usize) -> Corpus {
        Corpus {
            documents: self.documents.iter().filter(|d| d.doc_id != doc_id).cloned().collect(),
            vocabulary: self.vocabulary.clone(),
        }
    }

    pub fn push(&mut self, doc: Document) -> Result<()> {
        if self.documents.iter().any(|d| d.doc_id == doc.doc_id) {
            return Err(Error::invalid(format!("duplicate doc_id {}", doc.doc_id)));
        }
        if doc.max_word_id().is_some_and(|w| w >= self.vocabulary.len()) {
            return Err(Error::invalid("document word id out of vocabulary range"));
        }
        self.documents.push(doc);
        Ok(())
    }

    /// Distinct words contributed by each author, in author-key order.
    pub fn author_word_sets(&self) -> Vec<(AuthorKey, Vec<(usize, u32)>)> {
        let mut by_author: std::collections::BTreeMap<AuthorKey, HashMap<usize, u32>> = Default::default();
        for doc in &self.documents {
            let entry = by_author.entry(doc.author_key()).or_default();
            for &(w, c) in doc.counts() {
                *entry.entry(w).or_insert(0) += c;
            }
        }
        by_author
            .into_iter()
            .map(|(key, words)| {
                let mut words: Vec<(usize, u32)> = words.into_iter().collect();
                words.sort_unstable();
                (key, words)
            })
            .collect()
    }
}

/// Distinct tokens in first-occurrence order.
pub fn build_vocabulary<S: AsRef<str>>(token_docs: &[Vec<S>]) -> Vocabulary {
    let mut vocab = Vocabulary::new();
    for doc in token_docs {
        for token in doc {
            vocab.insert(token.as_ref());
        }
    }
    vocab
}

/// Counts tokens against `vocab`. Document ids are positions in `token_docs`.
/// Unknown tokens are an error unless `drop_unknown` is set.
pub fn to_bow<S: AsRef<str>>(token_docs: &[Vec<S>], vocab: &Vocabulary, drop_unknown: bool) -> Result<Corpus> {
    let mut documents = Vec::with_capacity(token_docs.len());
    for (doc_id, tokens) in token_docs.iter().enumerate() {
        let mut ids = Vec::with_capacity(tokens.len());
        for token in tokens {
            match vocab.id(token.as_ref()) {
                Some(id) => ids.push((id, 1)),
                None if drop_unknown => {}
                None => return Err(Error::UnknownToken(token.as_ref().to_string())),
            }
        }
        documents.push(Document::new(doc_id, None, ids));
    }
    Corpus::new(documents, vocab.clone())
}

/// Restricts the corpus to the words of `keep`, re-indexed to `keep`'s ids.
/// Documents that lose all words are retained as empty documents.
pub fn sanitize(corpus: &Corpus, keep: &Vocabulary) -> Corpus {
    let mapping = corpus.vocabulary.mapping_to(keep);
    Corpus {
        documents: corpus.documents.iter().map(|d| d.remap(&mapping)).collect(),
        vocabulary: keep.clone(),
    }
}

/// Random positions of `⌊m/2⌋` documents out of `m`, sorted.
pub fn sample_half(m: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng_from_seed(seed);
    let mut positions: Vec<usize> = (0..m).collect();
    positions.shuffle(&mut rng);
    positions.truncate(m / 2);
    positions.sort_unstable();
    positions
}

/// Splits the corpus into a random half of `⌊M/2⌋` documents and the rest.
pub fn split_half(corpus: &Corpus, seed: u64) -> Result<(Corpus, Corpus)> {
    let m = corpus.len();
    if m < 2 {
        return Err(Error::invalid(format!("split_half needs at least 2 documents, got {m}")));
    }
    let chosen = sample_half(m, seed);
    let mut in_mask = vec![false; m];
    for &i in &chosen {
        in_mask[i] = true;
    }
    let out: Vec<usize> = (0..m).filter(|&i| !in_mask[i]).collect();
    Ok((corpus.subset(&chosen), corpus.subset(&out)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataProfile {
    pub documents: usize,
    pub mean_length: f64,
    pub vocabulary_size: usize,
}

pub fn data_profile(corpus: &Corpus) -> DataProfile {
    let m = corpus.len();
    let mean_length = if m == 0 {
        0.0
    } else {
        corpus.total_tokens() as f64 / m as f64
    };
    DataProfile {
        documents: m,
        mean_length,
        vocabulary_size: corpus.vocabulary.len(),
    }
}
