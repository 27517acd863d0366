//! Product synthesis from merchant offers.
//!
//! This crate holds the allocation-only algorithmic core: the catalog/offer
//! data model, distributional-similarity features computed over historically
//! matched offers and products, the auto-labeled logistic matcher, the
//! reconcile/cluster/fuse pipeline, baseline matchers, evaluation metrics and
//! a seeded synthetic-corpus generator.
//!
//! It is `no_std` and only needs `alloc`. File formats, page extraction and the
//! command-line driver live in the `prodsynth` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod distsim;
mod error;
pub mod eval;
pub mod matcher;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
pub use model::{CandidateTuple, CatalogSchema, Corpus, MatchRecord, Offer, Price, Product};
