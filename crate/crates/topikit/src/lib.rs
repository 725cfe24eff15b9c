//! Topic-distribution toolkit for misinformation analysis.
//!
//! `topikit` extracts topic-distribution representations from the opening and
//! remainder sections of news articles, quantifies the thematic deviation
//! between the two, and uses those representations to separate fake from real
//! news with hypothesis tests, clustering, and classification. Everything is
//! deterministic under explicit seeds and runs at desk scale on user-supplied
//! or synthetic corpora.
//!
//! The pipeline, end to end:
//!
//! 1. [`corpus`] — ingest labelled documents (JSONL/CSV) and preprocess them:
//!    sentence splitting, token normalization, stopword filtering, bigram
//!    phrase promotion, vocabulary and bag-of-words construction.
//! 2. [`lda`] — train LDA topic models by collapsed Gibbs sampling; infer
//!    per-text topic simplexes; report top words and held-out perplexity.
//! 3. [`deviation`] — split each article into its first `l` sentences and the
//!    remainder, infer topic distributions for both against a family of
//!    background models, and aggregate per-class divergence statistics.
//! 4. [`divergence`], [`coherence`], [`stats`] — the distance measures,
//!    UMass topic coherence, and the hypothesis-testing kit behind the
//!    reports.
//! 5. [`features`], [`reduce`], [`cluster`], [`classify`] — topic-feature
//!    matrices, 2-D reduction (PCA/SVD/NMF/t-SNE), K-means purity
//!    evaluation, and logistic-regression/kNN detection protocols.
//! 6. [`embedcmp`] — group comparisons over externally supplied embedding or
//!    score files.
//! 7. [`synth`] — seeded synthetic-corpus generators with controllable
//!    opening/remainder topic drift, used as oracles throughout the test
//!    suite.
//!
//! The `topikit` binary is a thin front end over [`run`]; the `examples/`
//! directory has one runnable example per capability and is the best place
//! to start reading.

pub mod classify;
pub mod cluster;
pub mod coherence;
pub mod corpus;
pub mod deviation;
pub mod divergence;
pub mod embedcmp;
mod error;
pub mod features;
pub mod lda;
pub mod reduce;
pub mod run;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
