//! File formats, the HTTP judge client and the command-line front end for
//! `varlab-core`.
//!
//! Everything here is plumbing around the pure core: corpora and model
//! outputs are line-delimited JSON, checkpoints are a small versioned text
//! format, run settings come from a sectioned TOML file, and every command
//! writes a run directory holding the resolved settings, the tool version and
//! its logs.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod corpus;
mod error;
pub mod judge;
pub mod jsonl;
pub mod log;
pub mod mock_judge;
pub mod outputs;
pub mod run;

pub use error::{Error, Result};

/// Name and version written into every run directory and log header.
pub const TOOL: &str = concat!("varlab ", env!("CARGO_PKG_VERSION"));
