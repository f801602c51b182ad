//! Cross-lingual projection toolkit for political claims analysis.
//!
//! The crate covers the whole desk-scale pipeline: span-annotated corpora and
//! their sentence-level views, a compatible-test-set sampler, machine
//! translation behind a cached backend contract, sentence encoders with linear
//! claim classifiers, the experiment grid (baseline, translate-train,
//! translate-test, multilingual), evaluation metrics and error analysis.
//!
//! Data-parallel inner loops (batch encoding, Monte Carlo trials, grid
//! execution) run on rayon when the `parallel` feature is enabled and fall
//! back to plain iterators otherwise. See [`parallel::Execution`].

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod matcher;
pub mod models;
pub mod parallel;
pub mod rundir;
pub mod sampling;
pub mod synthetic;
pub mod translation;

pub(crate) mod hashing;

pub use error::{Error, Result};
pub use parallel::Execution;
