//! facetgen: a workbench for training and evaluating query facet generation
//! models under five training objectives.
//!
//! Given a query and its retrieved document snippets, a facet generation
//! model produces the set of short phrases describing the query's intents.
//! This crate provides:
//!
//! * a whitespace tokenizer and vocabulary ([`text`]);
//! * corpus ingestion (native JSONL and facet TSV), a deterministic
//!   synthetic corpus generator, and input/target builders ([`corpus`]);
//! * facet-ordering enumeration and sampling plus per-objective training
//!   example construction ([`permute`]);
//! * a compact encoder-decoder model with exact gradients and an AdamW
//!   optimizer ([`seqmodel`]), trained by [`training`];
//! * the five training objectives as reductions over example groups
//!   ([`objectives`]);
//! * greedy, beam, and sequential decoding ([`inference`]);
//! * matching and diversity metrics with a significance test ([`metrics`]);
//! * experiment configuration and report rendering ([`config`], [`report`]).

pub mod config;
pub mod corpus;
pub mod error;
pub mod inference;
pub mod metrics;
pub mod objectives;
pub mod permute;
pub mod report;
pub mod seqmodel;
pub mod text;
pub mod training;

pub use error::{Error, Result};
pub use objectives::ObjectiveId;
