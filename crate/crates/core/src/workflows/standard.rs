//! Blocking in map, matching in reduce: entities sharing a blocking key
//! form a block, every block is compared exhaustively.

use std::collections::BTreeMap;
use std::sync::atomic::Ordering;
use std::sync::Arc;

use crate::engine::{run_job, FnMap, FnReduce, Grouping, JobConfig, KeyValue, MapEmitter,
    MapTask, ReduceEmitter, ReduceTask};
use crate::entity::{Correspondence, Entity};
use crate::error::Result;
use crate::keys::{BlockingKey, CompositeKey, KeyRule};
use crate::matching::MatchStrategy;
use crate::partition::PartitionFunction;

use super::{consider, drain_counters, finalize, new_counters, JobStats, WorkflowResult};

/// How standard blocking spreads blocking keys over reducers. Unlike the
/// sorted-neighborhood workflows the assignment need not be monotone; it
/// only has to send equal keys to one reducer.
#[derive(Clone, Debug)]
pub enum KeyRoute {
    /// Range assignment through a partition function.
    Partition(PartitionFunction),
    /// Explicit key table; unlisted keys fall back to hashing.
    Table(BTreeMap<BlockingKey, usize>),
    /// Stable hash of the key.
    Hash,
}

impl KeyRoute {
    fn target(&self, key: &BlockingKey, reducers: usize) -> usize {
        match self {
            KeyRoute::Partition(p) => p.assign(key),
            KeyRoute::Table(map) => map
                .get(key)
                .copied()
                .unwrap_or_else(|| hash_route(key, reducers)),
            KeyRoute::Hash => hash_route(key, reducers),
        }
    }
}

fn hash_route(key: &BlockingKey, reducers: usize) -> usize {
    // FNV-1a; deterministic across runs and builds.
    let mut h: u64 = 0xcbf29ce484222325;
    for byte in key.as_str().bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x100000001b3);
    }
    (h % reducers as u64) as usize + 1
}

/// Group entities by blocking key and evaluate all pairs inside each block.
pub fn run_standard_blocking(
    entities: &[Entity],
    rule: &KeyRule,
    route: &KeyRoute,
    mappers: usize,
    reducers: usize,
    strategy: Option<&MatchStrategy>,
) -> Result<WorkflowResult> {
    let rule = *rule;
    let route = Arc::new(route.clone());
    let strategy: Option<Arc<MatchStrategy>> = strategy.map(|s| Arc::new(s.clone()));
    let counters = new_counters(reducers);

    let config = JobConfig {
        mappers,
        reducers,
        route: {
            let route = Arc::clone(&route);
            Arc::new(move |key: &CompositeKey| route.target(&key.blocking, reducers))
        },
        grouping: Grouping::BlockingKey,
    };

    let run = run_job(
        entities,
        &config,
        |_| -> Box<dyn MapTask<Entity>> {
            Box::new(FnMap(move |entity: &Entity, out: &mut MapEmitter<'_>| {
                let key = rule.key_of(entity)?;
                out.emit(CompositeKey::plain(key, entity.id.clone()), entity.clone())
            }))
        },
        |reducer| -> Box<dyn ReduceTask<Correspondence>> {
            let strategy = strategy.clone();
            let counters = Arc::clone(&counters);
            Box::new(FnReduce(
                move |block: &[KeyValue], out: &mut ReduceEmitter<'_, Correspondence>| {
                    let mut evaluated = 0u64;
                    for i in 0..block.len() {
                        for j in (i + 1)..block.len() {
                            evaluated += 1;
                            if let Some(pair) =
                                consider(&block[i].value, &block[j].value, strategy.as_deref())?
                            {
                                out.emit(pair);
                            }
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::matching::{Matcher, SimilarityFn};

    fn pair(a: &str, b: &str) -> Correspondence {
        Correspondence::new(a.into(), b.into(), None)
    }

    #[test]
    fn demo_blocks_with_explicit_routing() {
        // Keys 1 and 3 share reducer 1, key 2 goes to reducer 2. Without a
        // matcher the blocks {a,d}, {b,e,f,h}, {c,g,i} yield 1 + 6 + 3 pairs.
        let entities = fixtures::demo_entities();
        let rule = KeyRule::publication_default();
        let route = KeyRoute::Table(BTreeMap::from([
            ("1".into(), 1),
            ("2".into(), 2),
            ("3".into(), 1),
        ]));
        let result =
            run_standard_blocking(&entities, &rule, &route, 3, 2, None).unwrap();
        assert_eq!(result.pairs.len(), 10);
        assert_eq!(result.stats.comparisons, 10);
        assert!(result.pairs.contains(&pair("a", "d")));
        assert!(result.pairs.contains(&pair("c", "i")));
        assert!(!result.pairs.contains(&pair("a", "b")), "cross-block pair");
    }

    #[test]
    fn demo_blocks_with_matching_find_the_two_duplicates() {
        // With a strict matcher on the second attribute, only the planted
        // duplicate pairs (a,d) and (c,i) survive.
        let entities = fixtures::demo_entities();
        let rule = KeyRule::publication_default();
        let route = KeyRoute::Table(BTreeMap::from([
            ("1".into(), 1),
            ("2".into(), 2),
            ("3".into(), 1),
        ]));
        let strategy = MatchStrategy::new(
            vec![Matcher {
                attribute: 1,
                similarity: SimilarityFn::Edit,
                weight: 1.0,
            }],
            0.9,
        )
        .unwrap();
        let result =
            run_standard_blocking(&entities, &rule, &route, 3, 2, Some(&strategy)).unwrap();
        let expected = vec![
            Correspondence::new("a".into(), "d".into(), None),
            Correspondence::new("c".into(), "i".into(), None),
        ];
        assert_eq!(result.pairs, expected);
        assert_eq!(result.stats.comparisons, 10, "all block pairs evaluated");
    }

    #[test]
    fn one_entity_per_key_yields_no_pairs() {
        let entities: Vec<Entity> = ["aa", "bb", "cc", "dd"]
            .iter()
            .enumerate()
            .map(|(i, t)| Entity::new(format!("e{i}"), vec![t.to_string()]))
            .collect();
        let rule = KeyRule::publication_default();
        let result =
            run_standard_blocking(&entities, &rule, &KeyRoute::Hash, 2, 3, None).unwrap();
        assert!(result.pairs.is_empty());
        assert_eq!(result.stats.comparisons, 0);
    }

    #[test]
    fn pair_count_is_sum_of_block_pair_counts() {
        // blocks of sizes 4, 3, 1 → C(4,2) + C(3,2) + 0 = 9 pairs
        let titles = ["aa", "aa", "aa", "aa", "bb", "bb", "bb", "cc"];
        let entities: Vec<Entity> = titles
            .iter()
            .enumerate()
            .map(|(i, t)| Entity::new(format!("e{i}"), vec![t.to_string()]))
            .collect();
        let rule = KeyRule::publication_default();
        for reducers in [1, 2, 4] {
            let result =
                run_standard_blocking(&entities, &rule, &KeyRoute::Hash, 2, reducers, None)
                    .unwrap();
            assert_eq!(result.pairs.len(), 9, "reducers={reducers}");
        }
    }
}
