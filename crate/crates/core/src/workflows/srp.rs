//! Sorted reduce partitions: a monotone partition prefix on the map side
//! gives every reducer a contiguous, sorted key range; each reducer runs
//! the sliding window over its own partition. Pairs spanning partitions
//! are not found here — that is what the completion workflows add.

use std::sync::atomic::Ordering;
use std::sync::Arc;

use crate::engine::{run_job, FnMap, FnReduce, Grouping, JobConfig, KeyValue, MapEmitter,
    MapTask, ReduceEmitter, ReduceTask};
use crate::entity::{Correspondence, Entity};
use crate::error::Result;
use crate::keys::{CompositeKey, KeyRule};
use crate::matching::MatchStrategy;
use crate::partition::PartitionFunction;
use crate::window::window_pairs;

use super::{consider, drain_counters, finalize, new_counters, validate_sn, JobStats,
    WorkflowResult};

/// Key an entity for sorted reduce partitions: the partition prefix `p(k)`
/// in front of the blocking key.
pub fn srp_map(entity: &Entity, p: &PartitionFunction, rule: &KeyRule) -> Result<KeyValue> {
    let key = rule.key_of(entity)?;
    let partition = p.assign(&key) as u32;
    Ok(KeyValue {
        key: CompositeKey::partitioned(partition, key, entity.id.clone()),
        value: entity.clone(),
    })
}

pub(super) fn srp_map_factory(
    rule: KeyRule,
    p: &Arc<PartitionFunction>,
) -> impl FnMut(usize) -> Box<dyn MapTask<Entity>> + '_ {
    move |_| {
        let p = Arc::clone(p);
        Box::new(FnMap(move |entity: &Entity, out: &mut MapEmitter<'_>| {
            let kv = srp_map(entity, &p, &rule)?;
            out.emit(kv.key, kv.value)
        }))
    }
}

pub(super) fn partition_route() -> Arc<dyn Fn(&CompositeKey) -> usize + Send + Sync> {
    Arc::new(|key: &CompositeKey| key.partition.expect("SRP key carries a partition") as usize)
}

/// Run the sliding window independently inside each reduce partition.
pub fn run_srp(
    entities: &[Entity],
    rule: &KeyRule,
    p: &PartitionFunction,
    mappers: usize,
    reducers: usize,
    window: usize,
    strategy: Option<&MatchStrategy>,
) -> Result<WorkflowResult> {
    validate_sn(p, reducers, window)?;
    let rule = *rule;
    let p = Arc::new(p.clone());
    let strategy: Option<Arc<MatchStrategy>> = strategy.map(|s| Arc::new(s.clone()));
    let counters = new_counters(reducers);

    let config = JobConfig {
        mappers,
        reducers,
        route: partition_route(),
        grouping: Grouping::PartitionPrefix,
    };

    let run = run_job(
        entities,
        &config,
        srp_map_factory(rule, &p),
        |reducer| -> Box<dyn ReduceTask<Correspondence>> {
            let strategy = strategy.clone();
            let counters = Arc::clone(&counters);
            Box::new(FnReduce(
                move |group: &[KeyValue], out: &mut ReduceEmitter<'_, Correspondence>| {
                    let mut evaluated = 0u64;
                    for (i, j) in window_pairs(group.len(), window) {
                        evaluated += 1;
                        if let Some(pair) =
                            consider(&group[i].value, &group[j].value, strategy.as_deref())?
                        {
                            out.emit(pair);
                        }
                    }
                    counters[reducer].fetch_add(evaluated, Ordering::Relaxed);
                    Ok(())
                },
            ))
        },
    )?;

    let per_reducer_comparisons = drain_counters(&counters);
    let stats = JobStats {
        comparisons: per_reducer_comparisons.iter().sum(),
        per_reducer_input: run.reducer_inputs.clone(),
        per_reducer_comparisons,
        jobs_run: 1,
        ..JobStats::default()
    };
    Ok(finalize(run.merged_outputs(), stats))
}
