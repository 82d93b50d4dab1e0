//! Browser bindings for three small interactive demos. Each exported
//! function takes plain numbers and returns a JSON string, so the page needs
//! no generated glue beyond `wasm-bindgen` itself.

use serde::Serialize;
use topic_privacy::corpus::Corpus;
use topic_privacy::dp::{dpsu_select_detailed, DpsuParams};
use topic_privacy::experiment::{run_attack_replication, AttackPlan, SyntheticFixture};
use topic_privacy::lda::{estimate_theta_traced, generate_synthetic_corpus, planted_topic_model, LdaConfig, ThetaOptions};
use topic_privacy::lira::AttackMode;
use topic_privacy::stats::QueryStatisticKind;
use topic_privacy::{Error, Result};
use wasm_bindgen::prelude::*;

fn at_least_one(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// Small enough to train dozens of shadow models in a browser tab.
fn demo_fixture(topics: usize) -> SyntheticFixture {
    SyntheticFixture {
        topics,
        vocabulary: 100,
        documents: 120,
        doc_len: 40,
        ..SyntheticFixture::default()
    }
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub label: String,
    pub auc: f64,
    pub tpr_at_10pct: f64,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Serialize)]
pub struct AttackDemo {
    pub documents: usize,
    pub shadows: usize,
    pub curves: Vec<Curve>,
}

/// Attacks an LDA model trained on half of a planted-topic corpus and
/// returns the ROC curves of the online attack and the global baseline.
pub fn attack_demo(topics: usize, n_shadow: usize, seed: u64) -> Result<AttackDemo> {
    at_least_one("topics", topics)?;
    let corpus = demo_fixture(topics).generate(seed)?;
    let lda = LdaConfig::new(topics).with_iterations(60);
    let mut plan = AttackPlan::new(lda.clone(), n_shadow);
    plan.attacks = vec![
        (AttackMode::OnlineEnsemble, QueryStatisticKind::LogLikelihood),
        (AttackMode::BaselineGlobal, QueryStatisticKind::LogLikelihood),
    ];
    let rep = run_attack_replication(&corpus, &plan, seed, &lda, &lda)?;
    let curves = rep
        .runs
        .iter()
        .map(|r| Curve {
            label: r.label(),
            auc: r.roc.auc,
            tpr_at_10pct: r.tpr_at(0.1),
            points: r.roc.points.clone(),
        })
        .collect();
    Ok(AttackDemo {
        documents: corpus.len(),
        shadows: n_shadow,
        curves,
    })
}

#[derive(Debug, Serialize)]
pub struct VocabularyPoint {
    pub epsilon1: f64,
    pub released: usize,
    pub threshold: f64,
    pub sigma: f64,
}

#[derive(Debug, Serialize)]
pub struct VocabularyDemo {
    pub source_vocabulary: usize,
    pub authors: usize,
    pub points: Vec<VocabularyPoint>,
}

fn author_corpus(authors: usize, seed: u64) -> Result<Corpus> {
    let phi = planted_topic_model(5, 300, 0.1, seed);
    let corpus = generate_synthetic_corpus(&phi, 0.5, authors, 60, seed.wrapping_add(1))?;
    Ok(corpus)
}

/// Size of the privately selected vocabulary as the selection budget grows.
pub fn vocabulary_demo(authors: usize, delta1: f64, epsilons: &[f64], seed: u64) -> Result<VocabularyDemo> {
    at_least_one("authors", authors)?;
    let corpus = author_corpus(authors, seed)?;
    let mut points = Vec::with_capacity(epsilons.len());
    let mut author_count = 0;
    for &eps in epsilons {
        let release = dpsu_select_detailed(&corpus, &DpsuParams::new(eps, delta1, seed))?;
        author_count = release.authors;
        points.push(VocabularyPoint {
            epsilon1: eps,
            released: release.vocabulary.len(),
            threshold: release.calibration.threshold,
            sigma: release.calibration.sigma,
        });
    }
    Ok(VocabularyDemo {
        source_vocabulary: corpus.vocabulary().len(),
        authors: author_count,
        points,
    })
}

#[derive(Debug, Serialize)]
pub struct ThetaDemo {
    pub theta: Vec<f64>,
    pub log_likelihood: f64,
    pub trace: Vec<f64>,
}

/// Fits the topic mixture of one generated document and returns the EM
/// log-likelihood trace.
pub fn theta_demo(topics: usize, doc_len: usize, seed: u64) -> Result<ThetaDemo> {
    at_least_one("topics", topics)?;
    at_least_one("document length", doc_len)?;
    let phi = planted_topic_model(topics, 100, 0.1, seed);
    let corpus = generate_synthetic_corpus(&phi, 0.5, 1, doc_len, seed.wrapping_add(1))?;
    let (theta, zeta, trace) = estimate_theta_traced(&phi, &corpus.documents()[0], ThetaOptions::default())?;
    Ok(ThetaDemo {
        theta: theta.weights().to_vec(),
        log_likelihood: zeta,
        trace,
    })
}

fn to_json<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsValue> {
    let value = r.map_err(|e| JsValue::from_str(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = attackDemo)]
pub fn attack_demo_js(topics: usize, n_shadow: usize, seed: u32) -> std::result::Result<String, JsValue> {
    to_json(attack_demo(topics, n_shadow, seed.into()))
}

#[wasm_bindgen(js_name = vocabularyDemo)]
pub fn vocabulary_demo_js(authors: usize, delta1: f64, epsilons: Vec<f64>, seed: u32) -> std::result::Result<String, JsValue> {
    to_json(vocabulary_demo(authors, delta1, &epsilons, seed.into()))
}

#[wasm_bindgen(js_name = thetaDemo)]
pub fn theta_demo_js(topics: usize, doc_len: usize, seed: u32) -> std::result::Result<String, JsValue> {
    to_json(theta_demo(topics, doc_len, seed.into()))
}
