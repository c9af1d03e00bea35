//! Two-job completion of sorted reduce partitions. The first job is SRP
//! with one extra output: every reducer forwards its first and last
//! `w - 1` entities, keyed by the boundary they belong to. The second job
//! regroups those boundary entities, slides the window over each boundary
//! neighborhood, and drops pairs the first job already produced (both
//! members from the same partition). The union of both jobs equals the
//! sequential result.

use std::sync::atomic::Ordering;
use std::sync::Arc;

use crate::engine::{chain_jobs, FnMap, FnReduce, Grouping, JobConfig, KeyValue, MapEmitter,
    MapTask, ReduceEmitter, ReduceTask};
use crate::entity::{Correspondence, Entity};
use crate::error::{Error, Result};
use crate::keys::{CompositeKey, KeyRule};
use crate::matching::MatchStrategy;
use crate::partition::PartitionFunction;
use crate::window::window_pairs;

use super::srp::{partition_route, srp_map_factory};
use super::{consider, drain_counters, finalize, new_counters, validate_sn, JobStats,
    WorkflowResult};

/// Full JobSN output, with the per-phase pair lists kept visible.
#[derive(Clone, Debug)]
pub struct JobSnOutcome {
    pub result: WorkflowResult,
    /// Pairs the SRP phase produced, canonical and deduplicated.
    pub phase_one: Vec<Correspondence>,
    /// Pairs the boundary phase produced after filtering, canonical and
    /// deduplicated.
    pub phase_two: Vec<Correspondence>,
    /// The boundary records handed from the first to the second job.
    pub boundary_records: Vec<KeyValue>,
}

/// Run JobSN and return only the combined result.
#[allow(clippy::too_many_arguments)]
pub fn run_jobsn(
    entities: &[Entity],
    rule: &KeyRule,
    p: &PartitionFunction,
    mappers: usize,
    reducers: usize,
    window: usize,
    boundary_reducers: usize,
    strategy: Option<&MatchStrategy>,
) -> Result<WorkflowResult> {
    run_jobsn_detailed(
        entities,
        rule,
        p,
        mappers,
        reducers,
        window,
        boundary_reducers,
        strategy,
    )
    .map(|outcome| outcome.result)
}

/// Run JobSN keeping phase outputs apart.
#[allow(clippy::too_many_arguments)]
pub fn run_jobsn_detailed(
    entities: &[Entity],
    rule: &KeyRule,
    p: &PartitionFunction,
    mappers: usize,
    reducers: usize,
    window: usize,
    boundary_reducers: usize,
    strategy: Option<&MatchStrategy>,
) -> Result<JobSnOutcome> {
    validate_sn(p, reducers, window)?;
    if boundary_reducers == 0 {
        return Err(Error::config(
            "the boundary job needs at least one reducer",
        ));
    }
    let rule = *rule;
    let p = Arc::new(p.clone());
    let strategy: Option<Arc<MatchStrategy>> = strategy.map(|s| Arc::new(s.clone()));
    let first_counters = new_counters(reducers);
    let second_counters = new_counters(boundary_reducers);

    let first_config = JobConfig {
        mappers,
        reducers,
        route: partition_route(),
        grouping: Grouping::PartitionPrefix,
    };
    // Several boundary groups may share a reducer; grouping by boundary
    // prefix keeps them in separate reduce calls.
    let second_config = JobConfig {
        mappers,
        reducers: boundary_reducers,
        route: Arc::new(move |key: &CompositeKey| {
            let bound = key.boundary.expect("boundary key carries a bound") as usize;
            (bound - 1) % boundary_reducers + 1
        }),
        grouping: Grouping::BoundaryPrefix,
    };

    let total_partitions = reducers as u32;
    let first_reduce = |reducer: usize| -> Box<dyn ReduceTask<Correspondence>> {
        let strategy = strategy.clone();
        let counters = Arc::clone(&first_counters);
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

                // Boundary hand-off: the first w-1 entities relate to the
                // previous partition, the last w-1 to the next one. Short
                // partitions forward everything they have.
                let partition = group[0].key.partition.expect("SRP key carries a partition");
                let fringe = (window - 1).min(group.len());
                if partition > 1 {
                    for kv in &group[..fringe] {
                        out.emit_side(
                            CompositeKey::bounded(
                                partition - 1,
                                partition,
                                kv.key.blocking.clone(),
                                kv.value.id.clone(),
                            ),
                            kv.value.clone(),
                        );
                    }
                }
                if partition < total_partitions {
                    for kv in &group[group.len() - fringe..] {
                        out.emit_side(
                            CompositeKey::bounded(
                                partition,
                                partition,
                                kv.key.blocking.clone(),
                                kv.value.id.clone(),
                            ),
                            kv.value.clone(),
                        );
                    }
                }
                Ok(())
            },
        ))
    };

    let second_map = |_: usize| -> Box<dyn MapTask<KeyValue>> {
        Box::new(FnMap(|kv: &KeyValue, out: &mut MapEmitter<'_>| {
            out.emit(kv.key.clone(), kv.value.clone())
        }))
    };

    let second_reduce = |reducer: usize| -> Box<dyn ReduceTask<Correspondence>> {
        let strategy = strategy.clone();
        let counters = Arc::clone(&second_counters);
        Box::new(FnReduce(
            move |group: &[KeyValue], out: &mut ReduceEmitter<'_, Correspondence>| {
                let mut evaluated = 0u64;
                for (i, j) in window_pairs(group.len(), window) {
                    // Same partition prefix means the first job already
                    // produced the pair; only cross-partition pairs are new.
                    if group[i].key.partition == group[j].key.partition {
                        continue;
                    }
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
    };

    let (first_run, second_run) = chain_jobs(
        entities,
        &first_config,
        srp_map_factory(rule, &p),
        first_reduce,
        &second_config,
        second_map,
        second_reduce,
    )?;

    let boundary_records = first_run.merged_side();
    let mut per_reducer_input = first_run.reducer_inputs.clone();
    per_reducer_input.extend(&second_run.reducer_inputs);
    let mut per_reducer_comparisons = drain_counters(&first_counters);
    per_reducer_comparisons.extend(drain_counters(&second_counters));

    let mut phase_one: Vec<Correspondence> = first_run.merged_outputs();
    let mut phase_two: Vec<Correspondence> = second_run.merged_outputs();
    let emitted: Vec<Correspondence> =
        phase_one.iter().cloned().chain(phase_two.iter().cloned()).collect();
    phase_one.sort_unstable();
    phase_one.dedup();
    phase_two.sort_unstable();
    phase_two.dedup();

    let stats = JobStats {
        comparisons: per_reducer_comparisons.iter().sum(),
        per_reducer_input,
        per_reducer_comparisons,
        jobs_run: 2,
        ..JobStats::default()
    };
    Ok(JobSnOutcome {
        result: finalize(emitted, stats),
        phase_one,
        phase_two,
        boundary_records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn demo_outcome(boundary_reducers: usize) -> JobSnOutcome {
        run_jobsn_detailed(
            &fixtures::demo_entities(),
            &KeyRule::publication_default(),
            &fixtures::demo_partitioner(),
            3,
            2,
            3,
            boundary_reducers,
            None,
        )
        .unwrap()
    }

    #[test]
    fn demo_boundary_handoff_rows() {
        // Reducer 1 forwards its last two entities f and h under bound 1,
        // reducer 2 its first two c and g, also under bound 1.
        let outcome = demo_outcome(1);
        let rows: Vec<String> = outcome
            .boundary_records
            .iter()
            .map(|kv| format!("({},{})", kv.key, kv.value.id))
            .collect();
        assert_eq!(rows, ["(1.1.2,f)", "(1.1.2,h)", "(1.2.3,c)", "(1.2.3,g)"]);
    }

    #[test]
    fn demo_boundary_phase_filters_same_partition_pairs() {
        let outcome = demo_outcome(1);
        assert_eq!(outcome.phase_two, fixtures::demo_boundary_pairs());
        let fh = Correspondence::new("f".into(), "h".into(), None);
        let cg = Correspondence::new("c".into(), "g".into(), None);
        assert!(outcome.phase_one.contains(&fh));
        assert!(!outcome.phase_two.contains(&fh), "(f,h) already found");
        assert!(outcome.phase_one.contains(&cg));
        assert!(!outcome.phase_two.contains(&cg), "(c,g) already found");
    }

    #[test]
    fn demo_completion_restores_all_fifteen_pairs() {
        let outcome = demo_outcome(1);
        assert_eq!(outcome.result.pairs, fixtures::demo_oracle_pairs());
        assert_eq!(outcome.phase_one, fixtures::demo_srp_pairs());
        assert_eq!(outcome.result.stats.jobs_run, 2);
    }

    #[test]
    fn single_partition_has_no_boundaries() {
        let entities = fixtures::demo_entities();
        let rule = KeyRule::publication_default();
        let outcome = run_jobsn_detailed(
            &entities,
            &rule,
            &PartitionFunction::constant("one"),
            2,
            1,
            3,
            1,
            None,
        )
        .unwrap();
        assert!(outcome.boundary_records.is_empty());
        assert!(outcome.phase_two.is_empty());
        let seq = super::super::sequential_sn(&entities, &rule, 3, None).unwrap();
        assert_eq!(outcome.result.pairs, seq.pairs);
    }

    #[test]
    fn boundary_reducer_count_does_not_change_the_result() {
        let reference = demo_outcome(1);
        for r2 in [2, 3] {
            let outcome = demo_outcome(r2);
            assert_eq!(outcome.result.pairs, reference.result.pairs, "r2={r2}");
            assert_eq!(outcome.phase_two, reference.phase_two, "r2={r2}");
        }
    }

    #[test]
    fn zero_boundary_reducers_is_a_configuration_error() {
        let err = run_jobsn(
            &fixtures::demo_entities(),
            &KeyRule::publication_default(),
            &fixtures::demo_partitioner(),
            3,
            2,
            3,
            0,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
