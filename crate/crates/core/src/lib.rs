//! Core algorithms for learning to curate museum exhibitions.
//!
//! The crate learns from past exhibitions (a title and overview text mapped to
//! the artworks that were shown) and ranks artworks of a full catalog for a new
//! exhibition prompt. Everything here is pure computation over in-memory data
//! and builds without `std`; file formats, network clients and the command
//! line live in the `exhibit` crate.
//!
//! Modules:
//! - [`corpus`]: catalog and exhibition records, generalized tags, probability
//!   flattened training targets, dataset splits.
//! - [`encoder`]: text standardization, integer token vectorization and a
//!   deterministic local text embedder.
//! - [`neural`]: dense networks with explicit backpropagation, Adam and a
//!   mini-batch training loop.
//! - [`vecindex`]: exact flat search, k-means and an IVF-Flat index.
//! - [`curation`]: hit-score ranking over tag posting lists and evaluation
//!   metrics.
//! - [`finetune`]: chat-format training examples, tolerant parsing of model
//!   output and the retry policy around a chat client.

#![no_std]

extern crate alloc;

pub mod corpus;
pub mod curation;
pub mod encoder;
mod error;
pub mod finetune;
pub mod neural;
pub mod sample;
pub mod vecindex;

pub use error::{Error, Result};

pub use corpus::{ArtworkRecord, Catalog, ExhibitionRecord, Field, TagProbabilityVector, TagVocabulary};
pub use encoder::{EmbeddingVector, TokenSequence, TokenVocabulary};
