//! Text formats for corpora.
//!
//! * UCI bag-of-words: three header lines `M`, `V`, `NNZ`, then `NNZ` lines
//!   `docID wordID count` with 1-based ids; the vocabulary file has one token
//!   per line (line `i+1` is word id `i`).
//! * Corpus file: header `M V`, then one line per document
//!   `doc_id author w:c w:c ...` with 0-based word ids and `-` for a missing
//!   author. The vocabulary lives in a companion file, one token per line.
//!
//! Corpus, vocabulary and topic-model readers skip a leading block of `#`
//! lines, where writers may record provenance.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{Corpus, Document, Vocabulary};
use crate::error::{Error, Result};

fn lines_lossy(mut reader: impl BufRead) -> Result<Vec<String>> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    let text = String::from_utf8_lossy(&buf);
    Ok(text.lines().map(|l| l.trim_end_matches('\r').to_string()).collect())
}

/// Number of leading `#` comment lines.
pub(crate) fn comment_header_len(lines: &[String]) -> usize {
    lines.iter().take_while(|l| l.starts_with('#')).count()
}

/// Writes `# key=value` lines.
pub fn write_comment_header(metadata: &[(&str, String)], mut out: impl Write) -> Result<()> {
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

fn parse_usize(src: &str, line: usize, field: &str, what: &str) -> Result<usize> {
    field
        .parse::<usize>()
        .map_err(|_| Error::parse(src, line, format!("expected {what}, found `{field}`")))
}

pub fn read_vocabulary(reader: impl BufRead) -> Result<Vocabulary> {
    let mut vocab = Vocabulary::new();
    let lines = lines_lossy(reader)?;
    let skip = comment_header_len(&lines);
    for (i, line) in lines.into_iter().enumerate().skip(skip) {
        let term = line.trim();
        if term.is_empty() {
            continue;
        }
        if vocab.contains(term) {
            return Err(Error::parse("vocabulary", i + 1, format!("duplicate term `{term}`")));
        }
        vocab.insert(term);
    }
    Ok(vocab)
}

pub fn write_vocabulary(vocab: &Vocabulary, mut out: impl Write) -> Result<()> {
    for term in vocab.terms() {
        writeln!(out, "{term}")?;
    }
    Ok(())
}

/// Reads a UCI bag-of-words pair (`docword`, `vocab`).
pub fn read_uci_bow(docword: impl BufRead, vocab: impl BufRead) -> Result<Corpus> {
    const SRC: &str = "docword";
    let vocabulary = read_vocabulary(vocab)?;
    let lines = lines_lossy(docword)?;
    let mut header = Vec::with_capacity(3);
    let mut body_start = lines.len();
    for (i, line) in lines.iter().enumerate() {
        if header.len() == 3 {
            body_start = i;
            break;
        }
        let field = line.trim();
        if field.is_empty() {
            return Err(Error::parse(SRC, i + 1, "blank line in header"));
        }
        header.push(parse_usize(SRC, i + 1, field, "an integer header value")?);
    }
    if header.len() < 3 {
        return Err(Error::parse(SRC, lines.len(), "header must have three lines: M, V, NNZ"));
    }
    let (m, v, nnz) = (header[0], header[1], header[2]);
    if v != vocabulary.len() {
        return Err(Error::parse(
            SRC,
            2,
            format!("header V = {v} but the vocabulary file has {} terms", vocabulary.len()),
        ));
    }

    let mut per_doc: Vec<Vec<(usize, u32)>> = vec![Vec::new(); m];
    let mut seen = 0usize;
    for (i, line) in lines.iter().enumerate().skip(body_start) {
        let line_no = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(Error::parse(SRC, line_no, "expected `docID wordID count`"));
        }
        let d = parse_usize(SRC, line_no, fields[0], "a document id")?;
        let w = parse_usize(SRC, line_no, fields[1], "a word id")?;
        let c = parse_usize(SRC, line_no, fields[2], "a count")?;
        if d == 0 || d > m {
            return Err(Error::parse(SRC, line_no, format!("document id {d} outside 1..={m}")));
        }
        if w == 0 || w > v {
            return Err(Error::parse(SRC, line_no, format!("word id {w} outside 1..={v}")));
        }
        if c == 0 {
            return Err(Error::parse(SRC, line_no, "count must be positive"));
        }
        let c = u32::try_from(c).map_err(|_| Error::parse(SRC, line_no, "count too large"))?;
        if per_doc[d - 1].iter().any(|&(pw, _)| pw == w - 1) {
            return Err(Error::parse(SRC, line_no, format!("duplicate entry for document {d}, word {w}")));
        }
        per_doc[d - 1].push((w - 1, c));
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::parse(SRC, 3, format!("header NNZ = {nnz} but {seen} entries were read")));
    }
    let documents = per_doc
        .into_iter()
        .enumerate()
        .map(|(doc_id, entries)| Document::new(doc_id, None, entries))
        .collect();
    Corpus::new(documents, vocabulary)
}

/// Writes the corpus as a UCI pair. Document ids are positions (1-based).
pub fn write_uci_bow(corpus: &Corpus, mut docword: impl Write, vocab: impl Write) -> Result<()> {
    let nnz: usize = corpus.documents().iter().map(Document::distinct_words).sum();
    writeln!(docword, "{}\n{}\n{}", corpus.len(), corpus.vocabulary().len(), nnz)?;
    for (i, doc) in corpus.documents().iter().enumerate() {
        for &(w, c) in doc.counts() {
            writeln!(docword, "{} {} {}", i + 1, w + 1, c)?;
        }
    }
    write_vocabulary(corpus.vocabulary(), vocab)
}

pub fn write_corpus(corpus: &Corpus, mut out: impl Write) -> Result<()> {
    writeln!(out, "{} {}", corpus.len(), corpus.vocabulary().len())?;
    for doc in corpus.documents() {
        write!(out, "{} ", doc.doc_id)?;
        match doc.author {
            Some(a) => write!(out, "{a}")?,
            None => write!(out, "-")?,
        }
        for &(w, c) in doc.counts() {
            write!(out, " {w}:{c}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_corpus(reader: impl BufRead, vocabulary: Vocabulary) -> Result<Corpus> {
    const SRC: &str = "corpus";
    let lines = lines_lossy(reader)?;
    let skip = comment_header_len(&lines);
    let mut iter = lines.iter().enumerate().skip(skip).filter(|(_, l)| !l.trim().is_empty());
    let (h, header) = iter.next().ok_or_else(|| Error::parse(SRC, skip + 1, "missing `M V` header"))?;
    let h = h + 1;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(Error::parse(SRC, h, "header must be `M V`"));
    }
    let m = parse_usize(SRC, h, fields[0], "M")?;
    let v = parse_usize(SRC, h, fields[1], "V")?;
    if v != vocabulary.len() {
        return Err(Error::parse(SRC, h, format!("header V = {v} but vocabulary has {}", vocabulary.len())));
    }
    let mut documents = Vec::with_capacity(m);
    for (i, line) in iter {
        let line_no = i + 1;
        let mut fields = line.split_whitespace();
        let doc_id = parse_usize(SRC, line_no, fields.next().unwrap_or(""), "a doc_id")?;
        let author = match fields.next() {
            Some("-") => None,
            Some(a) => Some(parse_usize(SRC, line_no, a, "an author id or `-`")?),
            None => return Err(Error::parse(SRC, line_no, "missing author field")),
        };
        let mut entries = Vec::new();
        for pair in fields {
            let (w, c) = pair
                .split_once(':')
                .ok_or_else(|| Error::parse(SRC, line_no, format!("expected `word:count`, found `{pair}`")))?;
            let w = parse_usize(SRC, line_no, w, "a word id")?;
            let c = parse_usize(SRC, line_no, c, "a count")?;
            if w >= v {
                return Err(Error::parse(SRC, line_no, format!("word id {w} outside 0..{v}")));
            }
            if c == 0 {
                return Err(Error::parse(SRC, line_no, "count must be positive"));
            }
            entries.push((w, c as u32));
        }
        documents.push(Document::new(doc_id, author, entries));
    }
    if documents.len() != m {
        return Err(Error::parse(SRC, h, format!("header M = {m} but {} documents were read", documents.len())));
    }
    Corpus::new(documents, vocabulary).map_err(|e| Error::parse(SRC, 0, e.to_string()))
}

/// Raw text documents, one per line, with optional aligned author labels.
#[derive(Clone, Debug, Default)]
pub struct RawDocuments {
    pub texts: Vec<String>,
    /// Dense author ids (first-occurrence order of the labels), if an author file was given.
    pub authors: Option<Vec<usize>>,
    pub author_names: Vec<String>,
}

pub fn read_raw_documents(text: impl BufRead, authors: Option<impl BufRead>) -> Result<RawDocuments> {
    let texts = lines_lossy(text)?;
    let Some(authors) = authors else {
        return Ok(RawDocuments {
            texts,
            ..Default::default()
        });
    };
    let labels = lines_lossy(authors)?;
    if labels.len() != texts.len() {
        return Err(Error::parse(
            "authors",
            labels.len(),
            format!("{} author lines for {} documents", labels.len(), texts.len()),
        ));
    }
    let mut ids = HashMap::new();
    let mut names = Vec::new();
    let authors = labels
        .iter()
        .map(|l| {
            let l = l.trim().to_string();
            *ids.entry(l.clone()).or_insert_with(|| {
                names.push(l);
                names.len() - 1
            })
        })
        .collect();
    Ok(RawDocuments {
        texts,
        authors: Some(authors),
        author_names: names,
    })
}
