//! Peer-review network mining from commit trailers.
//!
//! The pipeline parses a canonical commit log ([`ingest`]), extracts
//! `Signed-off-by` / `Acked-by` / `Reviewed-by` lines ([`trailers`]),
//! clusters contributor names into persons ([`identity`]), attaches
//! maintainership and affiliation ([`attributes`]), builds one weighted
//! directed reviewer → author network per subsystem and window ([`graph`])
//! and measures review homophily on them ([`metrics`]). [`pipeline`] runs
//! the whole chain and [`report`] writes the output bundle.

pub mod attributes;
pub mod error;
pub mod graph;
pub mod identity;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod trailers;

pub use error::{Error, Result};
