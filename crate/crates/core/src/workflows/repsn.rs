//! Single-job completion of sorted reduce partitions through map-side
//! replication. Each map task tracks, per partition below the last, the
//! `w - 1` locally highest-keyed entities and forwards copies of them to
//! the succeeding reducer. The composite key places the copies in front of
//! the reducer's own partition; the reducer trims that prefix to the last
//! `w - 1` copies, slides the window, and keeps only pairs that involve at
//! least one entity of its own partition.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::engine::{run_job, FnReduce, Grouping, JobConfig, KeyValue, MapEmitter, MapTask,
    ReduceEmitter, ReduceTask};
use crate::entity::{Correspondence, Entity};
use crate::error::Result;
use crate::keys::{BlockingKey, CompositeKey, KeyRule};
use crate::matching::MatchStrategy;
use crate::partition::PartitionFunction;
use crate::window::window_pairs;

use super::{consider, drain_counters, finalize, new_counters, validate_sn, JobStats,
    WorkflowResult};

struct ReplicatingMap {
    rule: KeyRule,
    partitioner: Arc<PartitionFunction>,
    window: usize,
    /// Per partition `i < r` (index `i - 1`): the locally highest-keyed
    /// entities seen so far, at most `w - 1` of them.
    buffers: Vec<Vec<(BlockingKey, Entity)>>,
    replicated: Arc<AtomicU64>,
}

impl MapTask<Entity> for ReplicatingMap {
    fn setup(&mut self) -> Result<()> {
        self.buffers = vec![Vec::new(); self.partitioner.partitions().saturating_sub(1)];
        Ok(())
    }

    fn map(&mut self, entity: &Entity, out: &mut MapEmitter<'_>) -> Result<()> {
        let key = self.rule.key_of(entity)?;
        let partition = self.partitioner.assign(&key) as u32;
        out.emit(
            CompositeKey::bounded(partition, partition, key.clone(), entity.id.clone()),
            entity.clone(),
        )?;

        let last = self.partitioner.partitions() as u32;
        if partition < last {
            let buffer = &mut self.buffers[partition as usize - 1];
            let capacity = self.window - 1;
            if buffer.len() < capacity {
                buffer.push((key, entity.clone()));
            } else {
                // Replace the smallest buffered entity if this one ranks
                // higher. Ranking uses (key, id) — the same order the
                // reducers sort by — so the buffers of all map tasks
                // together always cover the globally highest entities.
                let (min_index, _) = buffer
                    .iter()
                    .enumerate()
                    .min_by(|(_, (ka, ea)), (_, (kb, eb))| (ka, &ea.id).cmp(&(kb, &eb.id)))
                    .expect("buffer is non-empty");
                let (min_key, min_entity) = &buffer[min_index];
                if (&key, &entity.id) > (&(min_key.clone()), &min_entity.id.clone()) {
                    buffer[min_index] = (key, entity.clone());
                }
            }
        }
        Ok(())
    }

    fn finish(&mut self, out: &mut MapEmitter<'_>) -> Result<()> {
        let mut copies = 0u64;
        for (index, buffer) in self.buffers.drain(..).enumerate() {
            let partition = index as u32 + 1;
            for (key, entity) in buffer {
                copies += 1;
                out.emit(
                    CompositeKey::bounded(partition + 1, partition, key, entity.id.clone()),
                    entity,
                )?;
            }
        }
        self.replicated.fetch_add(copies, Ordering::Relaxed);
        Ok(())
    }
}

/// Run RepSN: sorted reduce partitions with map-side boundary replication,
/// completing the sliding-window result in one job.
pub fn run_repsn(
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
    let replicated = Arc::new(AtomicU64::new(0));

    let config = JobConfig {
        mappers,
        reducers,
        route: Arc::new(|key: &CompositeKey| {
            key.boundary.expect("RepSN key carries a bound") as usize
        }),
        grouping: Grouping::BoundaryPrefix,
    };

    let run = run_job(
        entities,
        &config,
        |_| -> Box<dyn MapTask<Entity>> {
            Box::new(ReplicatingMap {
                rule,
                partitioner: Arc::clone(&p),
                window,
                buffers: Vec::new(),
                replicated: Arc::clone(&replicated),
            })
        },
        |reducer| -> Box<dyn ReduceTask<Correspondence>> {
            let strategy = strategy.clone();
            let counters = Arc::clone(&counters);
            Box::new(FnReduce(
                move |group: &[KeyValue], out: &mut ReduceEmitter<'_, Correspondence>| {
                    // Replicated entities sort to the head: their partition
                    // prefix is below the boundary prefix. Keep only the
                    // last w-1 of them in front of the partition's own
                    // entities.
                    let originals_start =
                        group.partition_point(|kv| kv.key.partition != kv.key.boundary);
                    let keep = (window - 1).min(originals_start);
                    let trimmed = &group[originals_start - keep..];

                    let mut evaluated = 0u64;
                    for (i, j) in window_pairs(trimmed.len(), window) {
                        if j < keep {
                            // both entities are copies; the predecessor
                            // reducer owns this pair
                            continue;
                        }
                        evaluated += 1;
                        if let Some(pair) =
                            consider(&trimmed[i].value, &trimmed[j].value, strategy.as_deref())?
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
        replicated_entities: replicated.load(Ordering::Relaxed),
        per_reducer_input: run.reducer_inputs.clone(),
        per_reducer_comparisons,
        jobs_run: 1,
        ..JobStats::default()
    };
    Ok(finalize(run.merged_outputs(), stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn demo_run_restores_all_fifteen_pairs() {
        let result = run_repsn(
            &fixtures::demo_entities(),
            &KeyRule::publication_default(),
            &fixtures::demo_partitioner(),
            3,
            2,
            3,
            None,
        )
        .unwrap();
        assert_eq!(result.pairs, fixtures::demo_oracle_pairs());
        // mapper 1 replicates a and b, mapper 2 replicates e and f,
        // mapper 3 replicates h
        assert_eq!(result.stats.replicated_entities, 5);
        assert!(result.stats.replicated_entities <= 3 * 1 * 2);
        // reducer 2 sees its three entities plus five copies
        assert_eq!(result.stats.per_reducer_input, vec![6, 8]);
    }

    #[test]
    fn single_reducer_needs_no_replication() {
        let entities = fixtures::demo_entities();
        let rule = KeyRule::publication_default();
        let result = run_repsn(
            &entities,
            &rule,
            &PartitionFunction::constant("one"),
            3,
            1,
            3,
            None,
        )
        .unwrap();
        assert_eq!(result.stats.replicated_entities, 0);
        let seq = super::super::sequential_sn(&entities, &rule, 3, None).unwrap();
        assert_eq!(result.pairs, seq.pairs);
    }

    #[test]
    fn replication_bound_is_tight_when_mappers_are_full() {
        // Two mappers, both holding at least w-1 entities of partition 1,
        // replicate exactly (w-1) entities each.
        let titles = ["aa", "ba", "ab", "bb", "ac", "bc", "ad", "bd"];
        let entities: Vec<Entity> = titles
            .iter()
            .enumerate()
            .map(|(i, t)| Entity::new(format!("e{i}"), vec![t.to_string()]))
            .collect();
        let p = PartitionFunction::manual("halves", vec!["az".into()]).unwrap();
        let result = run_repsn(&entities, &KeyRule::publication_default(), &p, 2, 2, 3, None)
            .unwrap();
        let bound = 2 * (2 - 1) * (3 - 1) as u64;
        assert_eq!(result.stats.replicated_entities, bound);
    }

    #[test]
    fn equal_keys_at_the_cutoff_do_not_lose_pairs() {
        // One mapper sees b before a; both carry the partition's highest
        // key. The buffer must prefer the higher id so the reducer-side
        // trim reconstructs the global order.
        let entities = vec![
            Entity::new("b", vec!["mm x".to_string()]),
            Entity::new("a", vec!["mm y".to_string()]),
            Entity::new("z", vec!["tt z".to_string()]),
        ];
        let rule = KeyRule::publication_default();
        let p = PartitionFunction::manual("halves", vec!["pp".into()]).unwrap();
        let result = run_repsn(&entities, &rule, &p, 1, 2, 2, None).unwrap();
        let seq = super::super::sequential_sn(&entities, &rule, 2, None).unwrap();
        assert_eq!(result.pairs, seq.pairs, "pair (b,z) crosses the cut");
    }
}
