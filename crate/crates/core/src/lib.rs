//! Continuous novelty scores for grant summaries.
//!
//! Past grants are modelled per (agency, year) window: summaries become
//! tf-idf vectors over unigrams and bigrams, the tf-idf matrix is factorized
//! into topic loads with non-negative matrix factorization, and a one-class
//! SVM learns the support of the past topic distribution. A current grant's
//! raw novelty is its signed distance outside that support; raw distances are
//! pooled and min-max scaled into `[0, 1]`.
//!
//! The [`studies`] module relates the scores to publication impact
//! (regression on citations, top-decile comparisons, trend analysis), the
//! [`filter`] module trains the non-research grant classifier by active
//! learning, and [`synthkit`] generates seeded corpora with planted
//! ground truth.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability, and the `grant-novelty` binary for the file-based pipeline.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod detector;
pub mod engine;
pub mod error;
pub mod factorize;
pub mod filter;
pub mod rng;
pub mod sparse;
pub mod stats;
pub mod studies;
pub mod synthkit;
pub mod textpipe;

pub use error::{Error, Result};
