//! Topic model file: line 1 `k V`, then `k` lines of `V` space-separated
//! probabilities written with 17 significant digits (exact round trip). The
//! vocabulary goes in a companion file, one token per line. Leading `#`
//! lines are skipped.

use std::io::{BufRead, Write};

use super::TopicModel;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub fn write_topic_model(model: &TopicModel, mut out: impl Write) -> Result<()> {
    let v = model.vocabulary_size();
    writeln!(out, "{} {}", model.num_topics(), v)?;
    for z in 0..model.num_topics() {
        let row: Vec<String> = model.row(z).iter().map(|p| format!("{p:.16e}")).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn read_topic_model(reader: impl BufRead, vocabulary: Vocabulary) -> Result<TopicModel> {
    const SRC: &str = "model";
    let mut lines = reader.lines().enumerate().peekable();
    while let Some((_, Ok(l))) = lines.peek() {
        if !l.starts_with('#') {
            break;
        }
        lines.next();
    }
    let (h, header) = lines.next().ok_or_else(|| Error::parse(SRC, 1, "missing `k V` header"))?;
    let h = h + 1;
    let header = header?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|f| f.parse().map_err(|_| Error::parse(SRC, h, format!("bad header field `{f}`"))))
        .collect::<Result<_>>()?;
    let [k, v] = dims[..] else {
        return Err(Error::parse(SRC, h, "header must be `k V`"));
    };
    if v != vocabulary.len() {
        return Err(Error::parse(SRC, h, format!("header V = {v} but vocabulary has {}", vocabulary.len())));
    }
    let mut phi = Vec::with_capacity(k * v);
    for z in 0..k {
        let (i, line) = lines
            .next()
            .ok_or_else(|| Error::parse(SRC, h + z + 1, format!("expected {k} topic rows")))?;
        let line = line?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|f| f.parse().map_err(|_| Error::parse(SRC, i + 1, format!("bad probability `{f}`"))))
            .collect::<Result<_>>()?;
        if row.len() != v {
            return Err(Error::parse(SRC, i + 1, format!("row has {} entries, expected {v}", row.len())));
        }
        phi.extend(row);
    }
    TopicModel::new(k, phi, vocabulary).map_err(|e| Error::parse(SRC, 0, e.to_string()))
}
