//! End-to-end blocking workflows on the engine: standard blocking, sorted
//! reduce partitions (SRP), the two-job completion (JobSN), and the
//! replication-based completion (RepSN), plus the sequential sliding-window
//! pass they are measured against.
//!
//! Every workflow emits a canonical, duplicate-free pair set so results
//! from different algorithms compare by plain set operations. When a match
//! strategy is supplied the emitted pairs are the match subset; without one
//! the raw blocking pairs are emitted for comparability.

mod jobsn;
mod repsn;
mod srp;
mod standard;

pub use jobsn::{run_jobsn, run_jobsn_detailed, JobSnOutcome};
pub use repsn::run_repsn;
pub use srp::{run_srp, srp_map};
pub use standard::{run_standard_blocking, KeyRoute};

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::entity::{Correspondence, Entity};
use crate::error::{Error, Result};
use crate::keys::KeyRule;
use crate::matching::{match_pair, MatchStrategy};
use crate::partition::PartitionFunction;
use crate::window::{sort_by_blocking_key, window_pairs};

/// Counters of one workflow run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JobStats {
    /// Entity-pair evaluations (candidates passed to the matcher, or
    /// counted as candidates when no matcher is configured).
    pub comparisons: u64,
    /// Pairs emitted by reducers before the final set union.
    pub pairs_emitted: u64,
    /// Entities sent to more than one reducer (RepSN only).
    pub replicated_entities: u64,
    /// Records each reducer received, jobs concatenated in run order.
    pub per_reducer_input: Vec<usize>,
    /// Pair evaluations per reducer, jobs concatenated in run order.
    pub per_reducer_comparisons: Vec<u64>,
    /// MapReduce jobs executed (0 for the sequential pass).
    pub jobs_run: u32,
}

/// Canonical pair set plus counters.
#[derive(Clone, Debug)]
pub struct WorkflowResult {
    pub pairs: Vec<Correspondence>,
    pub stats: JobStats,
}

/// Evaluate one candidate pair: a bare correspondence without a strategy,
/// the classified correspondence (or nothing) with one.
pub(crate) fn consider(
    left: &Entity,
    right: &Entity,
    strategy: Option<&MatchStrategy>,
) -> Result<Option<Correspondence>> {
    match strategy {
        None => Ok(Some(Correspondence::new(
            left.id.clone(),
            right.id.clone(),
            None,
        ))),
        Some(s) => match_pair(left, right, s),
    }
}

/// Sort, deduplicate, and wrap reducer emissions.
pub(crate) fn finalize(emitted: Vec<Correspondence>, mut stats: JobStats) -> WorkflowResult {
    stats.pairs_emitted = emitted.len() as u64;
    let mut pairs = emitted;
    pairs.sort_unstable();
    pairs.dedup();
    WorkflowResult { pairs, stats }
}

pub(crate) fn new_counters(n: usize) -> Arc<Vec<AtomicU64>> {
    Arc::new((0..n).map(|_| AtomicU64::new(0)).collect())
}

pub(crate) fn drain_counters(counters: &[AtomicU64]) -> Vec<u64> {
    counters.iter().map(|c| c.load(Ordering::Relaxed)).collect()
}

/// Common parameter validation for the sorted-neighborhood workflows.
pub(crate) fn validate_sn(p: &PartitionFunction, reducers: usize, window: usize) -> Result<()> {
    if window < 2 {
        return Err(Error::config(format!(
            "window size must be at least 2, got {window}"
        )));
    }
    if reducers != p.partitions() {
        return Err(Error::config(format!(
            "partitioner {} defines {} partitions but {reducers} reducers were requested",
            p.name(),
            p.partitions()
        )));
    }
    Ok(())
}

/// The sequential sliding-window pass over the globally sorted dataset —
/// the result every completion workflow must reproduce.
pub fn sequential_sn(
    entities: &[Entity],
    rule: &KeyRule,
    window: usize,
    strategy: Option<&MatchStrategy>,
) -> Result<WorkflowResult> {
    if window < 2 {
        return Err(Error::config(format!(
            "window size must be at least 2, got {window}"
        )));
    }
    let sorted = sort_by_blocking_key(entities, rule)?;
    let mut emitted = Vec::new();
    let mut comparisons = 0u64;
    for (i, j) in window_pairs(sorted.len(), window) {
        comparisons += 1;
        if let Some(pair) = consider(&sorted[i], &sorted[j], strategy)? {
            emitted.push(pair);
        }
    }
    let stats = JobStats {
        comparisons,
        per_reducer_input: vec![sorted.len()],
        per_reducer_comparisons: vec![comparisons],
        jobs_run: 0,
        ..JobStats::default()
    };
    Ok(finalize(emitted, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn sequential_pass_on_the_demo_fixture_finds_fifteen_pairs() {
        let entities = fixtures::demo_entities();
        let rule = KeyRule::publication_default();
        let result = sequential_sn(&entities, &rule, 3, None).unwrap();
        assert_eq!(result.pairs, fixtures::demo_oracle_pairs());
        assert_eq!(result.stats.comparisons, 15);
        assert_eq!(result.stats.jobs_run, 0);
    }
}
