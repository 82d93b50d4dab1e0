use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use topic_privacy::corpus::{
    build_vocabulary, preprocess, read_corpus, read_raw_documents, read_uci_bow, read_vocabulary, to_bow, Corpus,
    Document, RawDocuments,
};

use crate::config::LoadedConfig;
use crate::error::{CliError, CliResult};

pub struct Dataset {
    pub corpus: Corpus,
    /// Short description recorded in output metadata.
    pub source: String,
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))
}

pub fn read_raw(text: &Path, authors: Option<&Path>) -> CliResult<RawDocuments> {
    let authors = authors.map(open).transpose()?;
    Ok(read_raw_documents(open(text)?, authors)?)
}

/// Preprocesses raw text into a bag-of-words corpus carrying the author ids.
pub fn corpus_from_raw(raw: &RawDocuments, cfg: &LoadedConfig) -> CliResult<Corpus> {
    let tokens = preprocess(&raw.texts, &cfg.preprocess_config()?)?;
    let vocab = build_vocabulary(&tokens);
    let bow = to_bow(&tokens, &vocab, false)?;
    match &raw.authors {
        None => Ok(bow),
        Some(authors) => Ok(Corpus::new(
            bow.documents()
                .iter()
                .zip(authors)
                .map(|(d, &a)| Document::new(d.doc_id, Some(a), d.counts().iter().copied()))
                .collect(),
            vocab,
        )?),
    }
}

/// Loads the configured data source.
pub fn load_dataset(cfg: &LoadedConfig) -> CliResult<Dataset> {
    let data = &cfg.config.data;
    if let Some(text) = &data.text {
        let path = cfg.resolve(text);
        let authors = data.authors.as_ref().map(|a| cfg.resolve(a));
        let raw = read_raw(&path, authors.as_deref())?;
        return Ok(Dataset {
            corpus: corpus_from_raw(&raw, cfg)?,
            source: format!("text:{}", text.display()),
        });
    }
    let vocab_path = data.vocabulary.as_ref().map(|v| cfg.resolve(v));
    if let Some(corpus) = &data.corpus {
        let vocab = read_vocabulary(open(vocab_path.as_deref().expect("validated"))?)?;
        return Ok(Dataset {
            corpus: read_corpus(open(&cfg.resolve(corpus))?, vocab)?,
            source: format!("corpus:{}", corpus.display()),
        });
    }
    if let Some(docword) = &data.docword {
        let vocab = open(vocab_path.as_deref().expect("validated"))?;
        return Ok(Dataset {
            corpus: read_uci_bow(open(&cfg.resolve(docword))?, vocab)?,
            source: format!("uci:{}", docword.display()),
        });
    }
    let s = &data.synthetic;
    Ok(Dataset {
        corpus: s.fixture().generate(s.seed)?,
        source: format!(
            "synthetic:k={},V={},M={},doc_len={},seed={}",
            s.topics, s.vocabulary, s.documents, s.doc_len, s.seed
        ),
    })
}
