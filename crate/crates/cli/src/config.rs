//! Experiment configuration: a TOML file with one section per module. Every
//! field has a default, so an empty file (or no file) describes the
//! synthetic attack experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use topic_privacy::corpus::{default_stopwords, PreprocessConfig};
use topic_privacy::dp::{DpLdaParams, DpsuParams};
use topic_privacy::experiment::SyntheticFixture;
use topic_privacy::lda::{LdaConfig, ThetaOptions};
use topic_privacy::lira::AttackMode;
use topic_privacy::stats::QueryStatisticKind;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub replications: usize,
    pub data: DataSection,
    pub preprocess: PreprocessSection,
    pub lda: LdaSection,
    pub attack: AttackSection,
    pub dp: DpSection,
    pub eval: EvalSection,
    pub diagnose: DiagnoseSection,
}

/// Where documents come from. At most one source may be set; with none,
/// the synthetic fixture is used.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Raw text, one document per line.
    pub text: Option<PathBuf>,
    /// Author label per line of `text`.
    pub authors: Option<PathBuf>,
    /// Corpus file written by `preprocess` (needs `vocabulary`).
    pub corpus: Option<PathBuf>,
    /// UCI bag-of-words docword file (needs `vocabulary`).
    pub docword: Option<PathBuf>,
    pub vocabulary: Option<PathBuf>,
    pub synthetic: SyntheticSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSection {
    pub topics: usize,
    pub vocabulary: usize,
    pub documents: usize,
    pub doc_len: usize,
    pub topic_concentration: f64,
    pub doc_alpha: f64,
    /// Seed of the planted model and corpus; fixed separately from the
    /// master seed so replications share one corpus.
    pub seed: u64,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        let f = SyntheticFixture::default();
        SyntheticSection {
            topics: f.topics,
            vocabulary: f.vocabulary,
            documents: f.documents,
            doc_len: f.doc_len,
            topic_concentration: f.topic_concentration,
            doc_alpha: f.doc_alpha,
            seed: 0,
        }
    }
}

impl SyntheticSection {
    pub fn fixture(&self) -> SyntheticFixture {
        SyntheticFixture {
            topics: self.topics,
            vocabulary: self.vocabulary,
            documents: self.documents,
            doc_len: self.doc_len,
            topic_concentration: self.topic_concentration,
            doc_alpha: self.doc_alpha,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub min_token_len: usize,
    pub max_token_len: usize,
    /// One stopword per line; the bundled English list when unset.
    pub stopwords: Option<PathBuf>,
    /// `none` or `porter`.
    pub stemmer: String,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        PreprocessSection {
            min_token_len: 3,
            max_token_len: 15,
            stopwords: None,
            stemmer: "none".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaSection {
    pub k: usize,
    /// Defaults to `1/k`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    /// Defaults to `iterations` (snapshot of the final sweep).
    pub burn_in: Option<usize>,
}

impl Default for LdaSection {
    fn default() -> Self {
        LdaSection {
            k: 5,
            alpha: None,
            beta: 0.01,
            iterations: 500,
            burn_in: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackSection {
    pub n_shadow: usize,
    /// Attack modes; baselines are run once per entry of `baselines`.
    pub modes: Vec<String>,
    /// Statistic used by the LiRA modes.
    pub statistic: String,
    pub baselines: Vec<String>,
    pub fprs: Vec<f64>,
    /// When non-empty, `attack` repeats the experiment for each topic count.
    pub k_sweep: Vec<usize>,
    /// Documents attacked by the literal (per-document ensemble) modes.
    pub literal_documents: usize,
    pub theta_tol: f64,
    pub theta_max_iter: usize,
}

impl Default for AttackSection {
    fn default() -> Self {
        AttackSection {
            n_shadow: 64,
            modes: vec!["online_ensemble".into(), "offline_ensemble".into(), "baseline_global".into()],
            statistic: "log_likelihood".into(),
            baselines: vec!["neg_entropy".into(), "logit_max_posterior".into(), "std_dev".into()],
            fprs: vec![0.001, 0.01],
            k_sweep: Vec::new(),
            literal_documents: 20,
            theta_tol: ThetaOptions::default().tol,
            theta_max_iter: ThetaOptions::default().max_iter,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpSection {
    pub epsilon1: f64,
    pub delta1: f64,
    pub alpha_cutoff: f64,
    pub max_words_per_author: usize,
    pub epsilon2: f64,
    /// Token clamp; the 95th percentile of document lengths when unset.
    pub max_doc_len: Option<usize>,
    /// `(ε₁, ε₂)` cells; the single `(epsilon1, epsilon2)` cell when empty.
    pub grid: Vec<[f64; 2]>,
    /// Re-run the online attack against each private release.
    pub attack: bool,
}

impl Default for DpSection {
    fn default() -> Self {
        DpSection {
            epsilon1: 1.0,
            delta1: 1e-5,
            alpha_cutoff: 3.0,
            max_words_per_author: 100,
            epsilon2: 1.0,
            max_doc_len: None,
            grid: Vec::new(),
            attack: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub coherence_top_m: usize,
    /// `preprocessed` (the full non-private corpus) or `sanitized`.
    pub coherence_reference: String,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            coherence_top_m: 10,
            coherence_reference: "preprocessed".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseSection {
    pub statistics: Vec<String>,
    pub min_samples_per_side: usize,
    pub fdr_q: f64,
}

impl Default for DiagnoseSection {
    fn default() -> Self {
        DiagnoseSection {
            statistics: QueryStatisticKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            min_samples_per_side: 8,
            fdr_q: 0.05,
        }
    }
}

/// A validated configuration plus the directory its relative paths are
/// resolved against.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
    /// Hex SHA-256 of the effective configuration.
    pub hash: String,
}

impl ExperimentConfig {
    pub fn defaults() -> Self {
        ExperimentConfig {
            replications: 10,
            ..Default::default()
        }
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        // Serde's struct-level default would give `replications = 0`.
        let mut base = toml::Table::try_from(ExperimentConfig::defaults()).expect("defaults serialize");
        let user: toml::Table = text.parse().map_err(|e| CliError::Usage(format!("config: {e}")))?;
        merge(&mut base, user);
        toml::Value::Table(base)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Usage(format!("config: {}", e.message())))
    }

    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> CliResult<()> {
        let usage = |e: topic_privacy::Error| CliError::Usage(e.to_string());
        if self.replications == 0 {
            return Err(CliError::Usage("replications must be at least 1".into()));
        }
        let sources = [self.data.text.is_some(), self.data.corpus.is_some(), self.data.docword.is_some()];
        if sources.iter().filter(|&&s| s).count() > 1 {
            return Err(CliError::Usage("set at most one of data.text, data.corpus, data.docword".into()));
        }
        if (self.data.corpus.is_some() || self.data.docword.is_some()) && self.data.vocabulary.is_none() {
            return Err(CliError::Usage("data.corpus and data.docword need data.vocabulary".into()));
        }
        self.preprocess_config_unchecked().validate().map_err(usage)?;
        self.lda_config().validate().map_err(usage)?;
        for k in &self.attack.k_sweep {
            self.lda_config_with_k(*k).validate().map_err(usage)?;
        }
        self.attack_specs()?;
        self.diagnose_statistics()?;
        if self.attack.fprs.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            return Err(CliError::Usage("attack.fprs must lie in (0, 1)".into()));
        }
        for (e1, e2) in self.dp_cells() {
            let (dpsu, dplda) = self.dp_params(e1, e2, 0);
            dpsu.validate().map_err(usage)?;
            dplda.validate().map_err(usage)?;
        }
        if !matches!(self.eval.coherence_reference.as_str(), "preprocessed" | "sanitized") {
            return Err(CliError::Usage("eval.coherence_reference must be `preprocessed` or `sanitized`".into()));
        }
        if self.eval.coherence_top_m < 2 {
            return Err(CliError::Usage("eval.coherence_top_m must be at least 2".into()));
        }
        if !(self.diagnose.fdr_q > 0.0 && self.diagnose.fdr_q < 1.0) {
            return Err(CliError::Usage("diagnose.fdr_q must lie in (0, 1)".into()));
        }
        Ok(())
    }

    fn preprocess_config_unchecked(&self) -> PreprocessConfig {
        PreprocessConfig {
            min_token_len: self.preprocess.min_token_len,
            max_token_len: self.preprocess.max_token_len,
            stopwords: default_stopwords(),
            stemmer: self.preprocess.stemmer.parse().unwrap_or_default(),
        }
    }

    pub fn lda_config(&self) -> LdaConfig {
        self.lda_config_with_k(self.lda.k)
    }

    pub fn lda_config_with_k(&self, k: usize) -> LdaConfig {
        let mut cfg = LdaConfig::new(k).with_iterations(self.lda.iterations);
        if let Some(alpha) = self.lda.alpha {
            cfg.alpha = alpha;
        }
        cfg.beta = self.lda.beta;
        if let Some(b) = self.lda.burn_in {
            cfg.burn_in = b;
        }
        cfg
    }

    pub fn theta_options(&self) -> ThetaOptions {
        ThetaOptions {
            tol: self.attack.theta_tol,
            max_iter: self.attack.theta_max_iter,
        }
    }

    /// `(mode, statistic)` pairs in configuration order, baselines expanded.
    pub fn attack_specs(&self) -> CliResult<Vec<(AttackMode, QueryStatisticKind)>> {
        let statistic = parse_statistic(&self.attack.statistic)?;
        let mut specs = Vec::new();
        for m in &self.attack.modes {
            let mode: AttackMode = m.parse().map_err(|e: topic_privacy::Error| CliError::Usage(e.to_string()))?;
            if mode == AttackMode::BaselineGlobal {
                for b in &self.attack.baselines {
                    let kind = parse_statistic(b)?;
                    if !QueryStatisticKind::BASELINES.contains(&kind) {
                        return Err(CliError::Usage(format!("`{b}` is not a baseline statistic")));
                    }
                    specs.push((mode, kind));
                }
            } else {
                specs.push((mode, statistic));
            }
        }
        if specs.is_empty() {
            return Err(CliError::Usage("attack.modes selects no attack".into()));
        }
        Ok(specs)
    }

    pub fn diagnose_statistics(&self) -> CliResult<Vec<QueryStatisticKind>> {
        self.diagnose.statistics.iter().map(|s| parse_statistic(s)).collect()
    }

    pub fn dp_cells(&self) -> Vec<(f64, f64)> {
        if self.dp.grid.is_empty() {
            vec![(self.dp.epsilon1, self.dp.epsilon2)]
        } else {
            self.dp.grid.iter().map(|c| (c[0], c[1])).collect()
        }
    }

    pub fn dp_params(&self, epsilon1: f64, epsilon2: f64, seed: u64) -> (DpsuParams, DpLdaParams) {
        let mut dpsu = DpsuParams::new(epsilon1, self.dp.delta1, seed);
        dpsu.alpha_cutoff = self.dp.alpha_cutoff;
        dpsu.max_words_per_author = self.dp.max_words_per_author;
        let mut dplda = DpLdaParams::new(epsilon2, self.lda_config(), seed);
        dplda.max_doc_len = self.dp.max_doc_len;
        (dpsu, dplda)
    }
}

fn parse_statistic(s: &str) -> CliResult<QueryStatisticKind> {
    s.parse().map_err(|e: topic_privacy::Error| CliError::Usage(e.to_string()))
}

/// Recursively overlays `user` onto `base`.
fn merge(base: &mut toml::Table, user: toml::Table) {
    for (key, value) in user {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

impl LoadedConfig {
    /// Reads `path` (or the defaults), applies the seed override, validates.
    pub fn load(path: Option<&Path>, seed: Option<u64>) -> CliResult<Self> {
        let (mut config, base_dir) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (ExperimentConfig::parse(&text)?, dir)
            }
            None => (ExperimentConfig::defaults(), PathBuf::new()),
        };
        if let Some(s) = seed {
            config.seed = s;
        }
        config.validate()?;
        let hash = config.hash();
        Ok(LoadedConfig { config, base_dir, hash })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn preprocess_config(&self) -> CliResult<PreprocessConfig> {
        let mut cfg = self.config.preprocess_config_unchecked();
        cfg.stemmer = self
            .config
            .preprocess
            .stemmer
            .parse()
            .map_err(|e: topic_privacy::Error| CliError::Usage(e.to_string()))?;
        if let Some(p) = &self.config.preprocess.stopwords {
            let path = self.resolve(p);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Data(format!("cannot read stopwords {}: {e}", path.display())))?;
            cfg.stopwords = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_string).collect();
        }
        Ok(cfg)
    }
}
