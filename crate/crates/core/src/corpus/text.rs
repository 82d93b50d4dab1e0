use std::collections::HashSet;

use crate::error::{Error, Result};

const STOPWORDS_EN: &str = include_str!("../../data/stopwords_en.txt");

/// The bundled English stopword list.
pub fn default_stopwords() -> HashSet<String> {
    STOPWORDS_EN
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Stemmer {
    #[default]
    None,
    /// Snowball English (Porter2).
    Porter,
}

impl std::str::FromStr for Stemmer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Stemmer::None),
            "porter" => Ok(Stemmer::Porter),
            other => Err(Error::invalid(format!("unknown stemmer `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PreprocessConfig {
    pub min_token_len: usize,
    pub max_token_len: usize,
    pub stopwords: HashSet<String>,
    pub stemmer: Stemmer,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            min_token_len: 3,
            max_token_len: 15,
            stopwords: default_stopwords(),
            stemmer: Stemmer::None,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_token_len < 1 || self.min_token_len > self.max_token_len {
            return Err(Error::invalid(format!(
                "token length bounds must satisfy 1 <= min <= max (got {}..{})",
                self.min_token_len, self.max_token_len
            )));
        }
        Ok(())
    }

    fn keeps(&self, token: &str) -> bool {
        let len = token.chars().count();
        len >= self.min_token_len && len <= self.max_token_len && !self.stopwords.contains(token)
    }
}

/// Tokenizes raw documents.
///
/// Every character that is not an ASCII letter becomes a separator (this
/// includes U+FFFD from lossy decoding and non-ASCII letters). Tokens are
/// lowercased, filtered by length and stopwords, then stemmed; stems are
/// filtered again so the output never violates the bounds or the stopword
/// list. Empty documents are kept.
pub fn preprocess<S: AsRef<str>>(raw_docs: &[S], cfg: &PreprocessConfig) -> Result<Vec<Vec<String>>> {
    cfg.validate()?;
    let stemmer = match cfg.stemmer {
        Stemmer::None => None,
        Stemmer::Porter => Some(rust_stemmers::Stemmer::create(rust_stemmers::Algorithm::English)),
    };
    Ok(raw_docs
        .iter()
        .map(|raw| {
            raw.as_ref()
                .split(|c: char| !c.is_ascii_alphabetic())
                .filter(|t| !t.is_empty())
                .map(str::to_ascii_lowercase)
                .filter(|t| cfg.keeps(t))
                .filter_map(|t| match &stemmer {
                    None => Some(t),
                    Some(s) => {
                        let stem = s.stem(&t).into_owned();
                        cfg.keeps(&stem).then_some(stem)
                    }
                })
                .collect()
        })
        .collect())
}
