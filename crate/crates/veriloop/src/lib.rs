//! Std companion to `veriloop-core`: JSON state files and transcripts,
//! the randomized lemma-check harness, and the `veriloop` command line.

pub mod cli;
pub mod error;
pub mod harness;
pub mod simulate;
pub mod state_file;
pub mod transcript;

pub use error::{Error, Result};

/// Value of the top-level `"schema"` field in every JSON report.
pub const SCHEMA: &str = "veriloop/1";
