//! Score files and ensemble manifests.
//!
//! Both are CSV preceded by optional `# key=value` metadata lines. Floats are
//! written in Rust's shortest round-trip form so files are bit-stable.

use std::io::{BufRead, Write};

use super::{AttackMode, AttackScore, ShadowEnsemble};
use crate::error::{Error, Result};
use crate::stats::QueryStatisticKind;

const SCORE_HEADER: &str = "doc_id,label,lambda,score,saturated,statistic,mode,seed";
const MANIFEST_HEADER: &str = "index,seed,doc_ids";

fn write_metadata(out: &mut impl Write, metadata: &[(&str, String)]) -> Result<()> {
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

/// One row of a score file.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreRecord {
    pub score: AttackScore,
    pub statistic: QueryStatisticKind,
    pub mode: AttackMode,
    pub seed: u64,
}

pub fn write_scores(
    scores: &[AttackScore],
    statistic: QueryStatisticKind,
    mode: AttackMode,
    seed: u64,
    metadata: &[(&str, String)],
    mut out: impl Write,
) -> Result<()> {
    write_metadata(&mut out, metadata)?;
    writeln!(out, "{SCORE_HEADER}")?;
    for s in scores {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.doc_id, s.label as u8, s.lambda, s.score, s.saturated as u8, statistic, mode, seed
        )?;
    }
    Ok(())
}

fn data_lines(reader: impl BufRead) -> Result<Vec<(usize, String)>> {
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        lines.push((i + 1, t.to_string()));
    }
    Ok(lines)
}

fn field<T: std::str::FromStr>(src: &str, line: usize, raw: &str, what: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::parse(src, line, format!("expected {what}, found `{raw}`")))
}

fn flag(src: &str, line: usize, raw: &str) -> Result<bool> {
    match raw {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::parse(src, line, format!("expected 0 or 1, found `{raw}`"))),
    }
}

pub fn read_scores(reader: impl BufRead) -> Result<Vec<ScoreRecord>> {
    const SRC: &str = "scores";
    let lines = data_lines(reader)?;
    let mut iter = lines.into_iter();
    match iter.next() {
        Some((_, h)) if h == SCORE_HEADER => {}
        Some((n, _)) => return Err(Error::parse(SRC, n, format!("expected header `{SCORE_HEADER}`"))),
        None => return Err(Error::parse(SRC, 1, "missing header")),
    }
    iter.map(|(n, line)| {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(Error::parse(SRC, n, format!("expected 8 fields, found {}", f.len())));
        }
        Ok(ScoreRecord {
            score: AttackScore {
                doc_id: field(SRC, n, f[0], "a doc_id")?,
                label: flag(SRC, n, f[1])?,
                lambda: field(SRC, n, f[2], "a number")?,
                score: field(SRC, n, f[3], "a number")?,
                saturated: flag(SRC, n, f[4])?,
            },
            statistic: f[5].parse().map_err(|e: Error| Error::parse(SRC, n, e.to_string()))?,
            mode: f[6].parse().map_err(|e: Error| Error::parse(SRC, n, e.to_string()))?,
            seed: field(SRC, n, f[7], "a seed")?,
        })
    })
    .collect()
}

/// One trained shadow model: its index, learner seed and training doc ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub index: usize,
    pub seed: u64,
    pub doc_ids: Vec<usize>,
}

pub fn write_manifest(ensemble: &ShadowEnsemble, metadata: &[(&str, String)], mut out: impl Write) -> Result<()> {
    write_metadata(&mut out, metadata)?;
    writeln!(out, "{MANIFEST_HEADER}")?;
    for (i, (seed, ids)) in ensemble.seeds.iter().zip(&ensemble.memberships).enumerate() {
        let ids: Vec<String> = ids.iter().map(usize::to_string).collect();
        writeln!(out, "{i},{seed},{}", ids.join(" "))?;
    }
    Ok(())
}

pub fn read_manifest(reader: impl BufRead) -> Result<Vec<ManifestEntry>> {
    const SRC: &str = "manifest";
    let lines = data_lines(reader)?;
    let mut iter = lines.into_iter();
    match iter.next() {
        Some((_, h)) if h == MANIFEST_HEADER => {}
        Some((n, _)) => return Err(Error::parse(SRC, n, format!("expected header `{MANIFEST_HEADER}`"))),
        None => return Err(Error::parse(SRC, 1, "missing header")),
    }
    iter.map(|(n, line)| {
        let f: Vec<&str> = line.splitn(3, ',').collect();
        if f.len() != 3 {
            return Err(Error::parse(SRC, n, "expected `index,seed,doc_ids`"));
        }
        let doc_ids = f[2]
            .split_whitespace()
            .map(|id| field(SRC, n, id, "a doc_id"))
            .collect::<Result<Vec<usize>>>()?;
        Ok(ManifestEntry {
            index: field(SRC, n, f[0], "an index")?,
            seed: field(SRC, n, f[1], "a seed")?,
            doc_ids,
        })
    })
    .collect()
}
