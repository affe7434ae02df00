//! Temporal knowledge graph question answering toolkit.
//!
//! The crate turns a graph of time-stamped facts into a categorised
//! question-answer dataset and scores retrieval systems on such datasets.
//!
//! - [`tkg`] parses fact files into a [`tkg::TemporalKG`].
//! - [`algebra`] holds the interval algebra every answer is computed with.
//! - [`sampler`] draws the 1-3 context facts a question is built from.
//! - [`generator`] renders templates, tags categories and capabilities,
//!   audits answers, splits and writes the dataset.
//! - [`paraphrase`] optionally rewrites questions through an HTTP chat model.
//! - [`eval`] implements the multi-fact MRR and Hits@K metrics and the
//!   cosine-similarity retrieval baselines.
//!
//! The `book/` directory of the repository explains the concepts at length;
//! its code listings are compiled as doc-tests of this crate.

pub mod algebra;
pub mod eval;
pub mod generator;
pub mod net;
pub mod paraphrase;
mod rng;
pub mod sampler;
pub mod tkg;

#[cfg(doctest)]
mod book;
