use std::fmt::Write as _;
use std::path::PathBuf;

use topic_privacy::corpus::{data_profile, write_corpus, write_vocabulary, Corpus};
use topic_privacy::eval::top_words;
use topic_privacy::lda::{planted_topic_model, train_lda, write_topic_model};
use topic_privacy::rng::derive_seed;

use super::Context;
use crate::data::{corpus_from_raw, load_dataset, read_raw};
use crate::error::{CliError, CliResult};

fn profile_text(corpus: &Corpus) -> String {
    let p = data_profile(corpus);
    let empty = corpus.documents().iter().filter(|d| d.is_empty()).count();
    format!(
        "documents={}\nmean_length={}\nvocabulary_size={}\ntotal_tokens={}\nempty_documents={}\n",
        p.documents,
        p.mean_length,
        p.vocabulary_size,
        corpus.total_tokens(),
        empty
    )
}

fn write_corpus_files(ctx: &Context, corpus: &Corpus, extra: &[(&str, String)]) -> CliResult<()> {
    let meta = ctx.out.metadata(extra);
    ctx.out.write("corpus.txt", |w| {
        topic_privacy::corpus::write_comment_header(&meta, &mut *w)?;
        write_corpus(corpus, w)
    })?;
    ctx.out.write("vocabulary.txt", |w| {
        topic_privacy::corpus::write_comment_header(&meta, &mut *w)?;
        write_vocabulary(corpus.vocabulary(), w)
    })?;
    Ok(())
}

/// Raw text to corpus, vocabulary and profile files.
pub fn preprocess(ctx: &Context, input: Option<PathBuf>, authors: Option<PathBuf>) -> CliResult<()> {
    let data = &ctx.cfg.config.data;
    let input = input
        .or_else(|| data.text.as_ref().map(|p| ctx.cfg.resolve(p)))
        .ok_or_else(|| CliError::Usage("preprocess needs --input or data.text".into()))?;
    let authors = authors.or_else(|| data.authors.as_ref().map(|p| ctx.cfg.resolve(p)));
    ctx.out
        .claim(&["corpus.txt".into(), "vocabulary.txt".into(), "profile.txt".into()])?;
    let raw = read_raw(&input, authors.as_deref())?;
    let corpus = corpus_from_raw(&raw, &ctx.cfg)?;
    let extra = [("input", input.display().to_string())];
    write_corpus_files(ctx, &corpus, &extra)?;
    ctx.out.write_text("profile.txt", &extra, &profile_text(&corpus))?;
    println!(
        "preprocess: {} documents, {} terms -> {}",
        corpus.len(),
        corpus.vocabulary().len(),
        ctx.out.root().display()
    );
    Ok(())
}

pub fn profile(ctx: &Context) -> CliResult<()> {
    ctx.out.claim(&["profile.txt".into()])?;
    let data = load_dataset(&ctx.cfg)?;
    let text = profile_text(&data.corpus);
    ctx.out.write_text("profile.txt", &[("data", data.source)], &text)?;
    print!("{text}");
    Ok(())
}

/// Writes the synthetic fixture and its planted model.
pub fn synthesize(ctx: &Context) -> CliResult<()> {
    ctx.out.claim(&[
        "corpus.txt".into(),
        "vocabulary.txt".into(),
        "planted_model.txt".into(),
    ])?;
    let s = &ctx.cfg.config.data.synthetic;
    let corpus = s.fixture().generate(s.seed)?;
    // Same derivation as the fixture generator uses internally.
    let planted = planted_topic_model(s.topics, s.vocabulary, s.topic_concentration, derive_seed(s.seed, 0));
    let extra = [("synthetic_seed", s.seed.to_string())];
    write_corpus_files(ctx, &corpus, &extra)?;
    let meta = ctx.out.metadata(&extra);
    ctx.out.write("planted_model.txt", |w| {
        topic_privacy::corpus::write_comment_header(&meta, &mut *w)?;
        write_topic_model(&planted, w)
    })?;
    println!("synthesize: {} documents -> {}", corpus.len(), ctx.out.root().display());
    Ok(())
}

/// Non-private LDA on the whole dataset.
pub fn train(ctx: &Context) -> CliResult<()> {
    ctx.out
        .claim(&["model.txt".into(), "model_vocabulary.txt".into(), "top_words.csv".into()])?;
    let data = load_dataset(&ctx.cfg)?;
    let cfg = ctx.cfg.config.lda_config().with_seed(ctx.seed());
    let model = train_lda(&data.corpus, &cfg)?;
    let extra = [("data", data.source.clone()), ("k", cfg.k.to_string())];
    let meta = ctx.out.metadata(&extra);
    ctx.out.write("model.txt", |w| {
        topic_privacy::corpus::write_comment_header(&meta, &mut *w)?;
        write_topic_model(&model, w)
    })?;
    ctx.out.write("model_vocabulary.txt", |w| {
        topic_privacy::corpus::write_comment_header(&meta, &mut *w)?;
        write_vocabulary(model.vocabulary(), w)
    })?;
    let m = ctx.cfg.config.eval.coherence_top_m;
    let mut body = String::from("topic,top_words\n");
    for t in 0..model.num_topics() {
        let _ = writeln!(body, "{t},{}", top_words(&model, t, m).join("|"));
    }
    ctx.out.write_text("top_words.csv", &extra, &body)?;
    println!("train: k={} V={} -> {}", cfg.k, model.vocabulary_size(), ctx.out.root().display());
    Ok(())
}
