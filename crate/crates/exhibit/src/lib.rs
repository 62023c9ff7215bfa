//! File formats, embedding providers, persistence, the batch pipeline, the
//! HTTP API and the command line around `exhibit-core`.
//!
//! A typical run: load the catalog CSV and the exhibitions JSON
//! ([`pipeline::load_corpus`]), build the tag and token vocabularies, train a
//! model variant, then curate new prompts through an [`engine::Engine`],
//! either from the command line or over HTTP ([`service::router`]).

pub mod artifacts;
pub mod cache;
pub mod catalog;
pub mod chat;
pub mod config;
pub mod embedding;
pub mod engine;
mod error;
pub mod exhibitions;
pub mod pipeline;
pub mod service;
pub mod synth;
pub mod transport;

pub use error::{Error, Result};
