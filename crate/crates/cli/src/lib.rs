//! Harness around the dedup workflows: dataset ingest and synthesis,
//! configuration, experiment orchestration, and report emission. The
//! `dedup` binary is a thin CLI over this library.

pub mod config;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod report;

pub use config::AppConfig;
pub use dataset::{generate, ingest, Dataset, FileFormat, SyntheticSpec};
pub use error::{HarnessError, Result};
pub use experiment::{compare, execute, skew_sweep, RunSettings, WorkflowKind};
pub use report::{render_pairs, write_pairs, RunReport};
