//! Membership inference attacks against LDA topic models and a fully
//! differentially private topic-modeling pipeline to defend against them.

pub mod corpus;
pub mod dp;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod lda;
pub mod lira;
mod par;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
