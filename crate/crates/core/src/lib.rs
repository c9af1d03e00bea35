//! Deduplication toolkit built around sorted-neighborhood blocking on an
//! in-process MapReduce engine.
//!
//! The crate provides:
//!
//! - [`engine`]: a deterministic map/shuffle/sort/reduce dataflow with
//!   worker threads standing in for cluster nodes;
//! - [`keys`] and [`window`]: blocking keys, composite routing keys, and
//!   the sequential sliding-window pass;
//! - [`partition`]: monotone range partitioners, skew injection, and the
//!   Gini coefficient over partition sizes;
//! - [`workflows`]: standard blocking, sorted reduce partitions (SRP), and
//!   the two SRP completions — JobSN (a second job over boundary entities)
//!   and RepSN (map-side replication) — all of which reproduce the
//!   sequential result;
//! - [`matching`]: similarity matchers with weighted-threshold
//!   classification and an early abort.

pub mod engine;
pub mod entity;
pub mod error;
pub mod fixtures;
pub mod keys;
pub mod matching;
pub mod partition;
pub mod window;
pub mod workflows;

pub use engine::{chain_jobs, run_job, split_input, Grouping, JobConfig, JobRun, KeyValue};
pub use entity::{Correspondence, Entity, EntityId};
pub use error::{Error, Result};
pub use keys::{blocking_key, BlockingKey, CompositeKey, KeyRule};
pub use matching::{edit_similarity, match_pair, trigram_similarity, MatchStrategy, Matcher,
    SimilarityFn};
pub use partition::{gini, make_even_partitioner, make_skewed_partitioner, profile, KeyDomain,
    PartitionFunction, PartitionProfile, SkewTransform};
pub use window::{sliding_window, sort_by_blocking_key, srp_missed_pairs, window_pair_count,
    window_pairs};
pub use workflows::{run_jobsn, run_jobsn_detailed, run_repsn, run_srp, run_standard_blocking,
    sequential_sn, JobSnOutcome, JobStats, KeyRoute, WorkflowResult};
