//! Detection of coordinated text-mutation campaigns in social media corpora.
//!
//! The flow is: [`corpus`] ingests posts, [`embedstore`] aligns them with
//! unit embeddings, [`simgraph`] thresholds cosine similarity into a graph,
//! [`campaigns`] turns components or cliques into campaigns, and
//! [`accounts`] and [`temporal`] analyze who ran them and when.
//! [`pipeline`] chains the stages with a manifest.

mod error;
mod unionfind;

pub mod accounts;
pub mod campaigns;
pub mod corpus;
pub mod embedstore;
pub mod evalkit;
pub mod pipeline;
pub mod simgraph;
pub mod temporal;

pub use error::{Error, Result};
