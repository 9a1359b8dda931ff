//! Random instances and the lemma-check suites.

pub mod checks;
pub mod instance;

pub use checks::{run_check, run_trial, summarize, CheckConfig, CheckName, CheckReport, CheckSummary};
pub use instance::{random_instance, InstanceSpec, Profile};
