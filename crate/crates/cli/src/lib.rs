//! Support library for the `burstlab` binary: config-file merging and
//! analysis-report assembly. The statistical machinery lives in
//! `burstlab-core`; this crate only orchestrates it.

pub mod config;
pub mod report;

/// Schema identifier embedded in fit output documents.
pub const POSTERIOR_SCHEMA: &str = "burstlab.posterior.v1";
