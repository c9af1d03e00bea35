//! A deterministic, multi-threaded, in-process MapReduce dataflow:
//! partitioned map, keyed repartitioning, per-reducer sort, grouped reduce.
//!
//! Mappers and reducers are tasks on worker threads, not machines. Map
//! tasks run concurrently, then reduce tasks run concurrently; the engine
//! owns all data movement between the two phases. User functions must be
//! deterministic and must not share mutable state; under that contract a
//! job's output is identical to the sequential reference execution for any
//! mapper and reducer count.

use std::sync::Arc;

use crate::entity::Entity;
use crate::error::{Error, Result};
use crate::keys::CompositeKey;

/// One routed record: a composite key and the entity it carries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyValue {
    pub key: CompositeKey,
    pub value: Entity,
}

/// Maps a composite key to a reducer index in `1..=reducers`.
pub type RouteFn = Arc<dyn Fn(&CompositeKey) -> usize + Send + Sync>;

/// Which key component delimits one reduce call. Consecutive sorted keys
/// that agree on the component enter the same call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grouping {
    /// One reduce call per distinct blocking key.
    BlockingKey,
    /// One reduce call per distinct partition prefix.
    PartitionPrefix,
    /// One reduce call per distinct boundary prefix.
    BoundaryPrefix,
    /// A single reduce call over the reducer's whole input.
    WholePartition,
}

impl Grouping {
    fn same_group(self, a: &CompositeKey, b: &CompositeKey) -> bool {
        match self {
            Grouping::BlockingKey => a.blocking == b.blocking,
            Grouping::PartitionPrefix => a.partition == b.partition,
            Grouping::BoundaryPrefix => a.boundary == b.boundary,
            Grouping::WholePartition => true,
        }
    }
}

/// Static configuration of one job.
#[derive(Clone)]
pub struct JobConfig {
    pub mappers: usize,
    pub reducers: usize,
    pub route: RouteFn,
    pub grouping: Grouping,
}

impl JobConfig {
    fn validate(&self) -> Result<()> {
        if self.mappers == 0 {
            return Err(Error::config("job needs at least one mapper"));
        }
        if self.reducers == 0 {
            return Err(Error::config("job needs at least one reducer"));
        }
        Ok(())
    }
}

/// Collects map output and routes each record to its reducer bucket.
pub struct MapEmitter<'a> {
    buckets: Vec<Vec<KeyValue>>,
    route: &'a RouteFn,
    reducers: usize,
}

impl MapEmitter<'_> {
    pub fn emit(&mut self, key: CompositeKey, value: Entity) -> Result<()> {
        let target = (self.route)(&key);
        if target < 1 || target > self.reducers {
            return Err(Error::Partition {
                key: key.blocking.clone(),
                target,
                reducers: self.reducers,
            });
        }
        self.buckets[target - 1].push(KeyValue { key, value });
        Ok(())
    }
}

/// Collects reduce output. Each reducer owns a primary stream of `O` and a
/// secondary stream of keyed entities for the next job in a chain.
pub struct ReduceEmitter<'a, O> {
    output: &'a mut Vec<O>,
    side: &'a mut Vec<KeyValue>,
}

impl<O> ReduceEmitter<'_, O> {
    pub fn emit(&mut self, value: O) {
        self.output.push(value);
    }

    /// Emit to the job's secondary stream.
    pub fn emit_side(&mut self, key: CompositeKey, value: Entity) {
        self.side.push(KeyValue { key, value });
    }
}

/// One map task: processes a slice of the input. `setup` runs before the
/// first record, `finish` after the last; both may carry state across
/// records, which is how replication buffers are realized.
pub trait MapTask<I>: Send {
    fn setup(&mut self) -> Result<()> {
        Ok(())
    }

    fn map(&mut self, item: &I, out: &mut MapEmitter<'_>) -> Result<()>;

    fn finish(&mut self, _out: &mut MapEmitter<'_>) -> Result<()> {
        Ok(())
    }
}

/// One reduce task: called once per key group, groups in ascending key
/// order, every group's records sorted by the full composite key.
pub trait ReduceTask<O>: Send {
    fn reduce(&mut self, group: &[KeyValue], out: &mut ReduceEmitter<'_, O>) -> Result<()>;
}

/// Stateless map from a closure.
pub struct FnMap<F>(pub F);

impl<I, F> MapTask<I> for FnMap<F>
where
    F: FnMut(&I, &mut MapEmitter<'_>) -> Result<()> + Send,
{
    fn map(&mut self, item: &I, out: &mut MapEmitter<'_>) -> Result<()> {
        (self.0)(item, out)
    }
}

/// Stateless reduce from a closure.
pub struct FnReduce<F>(pub F);

impl<O, F> ReduceTask<O> for FnReduce<F>
where
    F: FnMut(&[KeyValue], &mut ReduceEmitter<'_, O>) -> Result<()> + Send,
{
    fn reduce(&mut self, group: &[KeyValue], out: &mut ReduceEmitter<'_, O>) -> Result<()> {
        (self.0)(group, out)
    }
}

/// Everything one job produced, per reducer in reducer order.
#[derive(Debug)]
pub struct JobRun<O> {
    /// Primary output of each reducer, in reduce-call emission order.
    pub outputs: Vec<Vec<O>>,
    /// Secondary stream of each reducer.
    pub side_outputs: Vec<Vec<KeyValue>>,
    /// Records each reducer received.
    pub reducer_inputs: Vec<usize>,
}

impl<O> JobRun<O> {
    /// Primary outputs concatenated in reducer order.
    pub fn merged_outputs(self) -> Vec<O> {
        self.outputs.into_iter().flatten().collect()
    }

    /// Secondary outputs concatenated in reducer order.
    pub fn merged_side(&self) -> Vec<KeyValue> {
        self.side_outputs.iter().flatten().cloned().collect()
    }
}

/// Divide the input into `m` contiguous slices whose sizes differ by at
/// most one, preserving input order.
pub fn split_input<T>(items: &[T], m: usize) -> Result<Vec<&[T]>> {
    if m == 0 {
        return Err(Error::config("cannot split input across zero mappers"));
    }
    let n = items.len();
    let base = n / m;
    let extra = n % m;
    let mut slices = Vec::with_capacity(m);
    let mut start = 0;
    for task in 0..m {
        let len = base + usize::from(task < extra);
        slices.push(&items[start..start + len]);
        start += len;
    }
    Ok(slices)
}

/// Run one job: map every input slice, repartition by the routing function,
/// sort each reducer's input by the full composite key, and reduce each key
/// group in order.
pub fn run_job<I, O>(
    input: &[I],
    config: &JobConfig,
    mut map_factory: impl FnMut(usize) -> Box<dyn MapTask<I>>,
    mut reduce_factory: impl FnMut(usize) -> Box<dyn ReduceTask<O>>,
) -> Result<JobRun<O>>
where
    I: Sync,
    O: Send,
{
    config.validate()?;
    let slices = split_input(input, config.mappers)?;
    let map_tasks: Vec<Box<dyn MapTask<I>>> =
        (0..config.mappers).map(&mut map_factory).collect();

    // Map phase: one thread per task, each filling its own reducer buckets.
    let mut per_task_buckets: Vec<Vec<Vec<KeyValue>>> = Vec::with_capacity(config.mappers);
    std::thread::scope(|scope| -> Result<()> {
        let handles: Vec<_> = map_tasks
            .into_iter()
            .zip(&slices)
            .map(|(mut task, slice)| {
                let route = &config.route;
                let reducers = config.reducers;
                scope.spawn(move || -> Result<Vec<Vec<KeyValue>>> {
                    let mut emitter = MapEmitter {
                        buckets: (0..reducers).map(|_| Vec::new()).collect(),
                        route,
                        reducers,
                    };
                    task.setup()?;
                    for item in *slice {
                        task.map(item, &mut emitter)?;
                    }
                    task.finish(&mut emitter)?;
                    Ok(emitter.buckets)
                })
            })
            .collect();
        for (task_index, handle) in handles.into_iter().enumerate() {
            let buckets = handle.join().expect("map thread panicked").map_err(|e| {
                Error::MapTask {
                    task: task_index,
                    source: Box::new(e),
                }
            })?;
            per_task_buckets.push(buckets);
        }
        Ok(())
    })?;

    // Shuffle: concatenate each reducer's records in task order, then sort
    // stably by the full composite key. The entity-id tie-breaker inside the
    // key makes the order canonical regardless of thread count.
    let mut reducer_inputs_data: Vec<Vec<KeyValue>> = (0..config.reducers)
        .map(|_| Vec::new())
        .collect();
    for task_buckets in per_task_buckets {
        for (r, bucket) in task_buckets.into_iter().enumerate() {
            reducer_inputs_data[r].extend(bucket);
        }
    }
    for data in &mut reducer_inputs_data {
        data.sort_by(|a, b| a.key.cmp(&b.key));
    }
    let reducer_inputs: Vec<usize> = reducer_inputs_data.iter().map(Vec::len).collect();

    // Reduce phase: one thread per reducer, grouped calls in key order.
    let reduce_tasks: Vec<Box<dyn ReduceTask<O>>> =
        (0..config.reducers).map(&mut reduce_factory).collect();
    let grouping = config.grouping;
    let mut outputs = Vec::with_capacity(config.reducers);
    let mut side_outputs = Vec::with_capacity(config.reducers);
    std::thread::scope(|scope| -> Result<()> {
        let handles: Vec<_> = reduce_tasks
            .into_iter()
            .zip(&reducer_inputs_data)
            .map(|(mut task, data)| {
                scope.spawn(move || -> Result<(Vec<O>, Vec<KeyValue>)> {
                    debug_assert!(data.is_sorted_by(|a, b| a.key <= b.key));
                    let mut output = Vec::new();
                    let mut side = Vec::new();
                    for group in data.chunk_by(|a, b| grouping.same_group(&a.key, &b.key)) {
                        let mut emitter = ReduceEmitter {
                            output: &mut output,
                            side: &mut side,
                        };
                        task.reduce(group, &mut emitter)?;
                    }
                    Ok((output, side))
                })
            })
            .collect();
        for (task_index, handle) in handles.into_iter().enumerate() {
            let (output, side) = handle.join().expect("reduce thread panicked").map_err(|e| {
                Error::ReduceTask {
                    task: task_index,
                    source: Box::new(e),
                }
            })?;
            outputs.push(output);
            side_outputs.push(side);
        }
        Ok(())
    })?;

    Ok(JobRun {
        outputs,
        side_outputs,
        reducer_inputs,
    })
}

/// Run two jobs back to back: the first job's secondary stream is the
/// second job's map input.
#[allow(clippy::too_many_arguments)]
pub fn chain_jobs<I, O1, O2>(
    input: &[I],
    first_config: &JobConfig,
    first_map: impl FnMut(usize) -> Box<dyn MapTask<I>>,
    first_reduce: impl FnMut(usize) -> Box<dyn ReduceTask<O1>>,
    second_config: &JobConfig,
    second_map: impl FnMut(usize) -> Box<dyn MapTask<KeyValue>>,
    second_reduce: impl FnMut(usize) -> Box<dyn ReduceTask<O2>>,
) -> Result<(JobRun<O1>, JobRun<O2>)>
where
    I: Sync,
    O1: Send,
    O2: Send,
{
    let first = run_job(input, first_config, first_map, first_reduce).map_err(|e| Error::Chain {
        job: 1,
        source: Box::new(e),
    })?;
    let handoff = first.merged_side();
    let second = run_job(&handoff, second_config, second_map, second_reduce).map_err(|e| {
        Error::Chain {
            job: 2,
            source: Box::new(e),
        }
    })?;
    Ok((first, second))
}
