use crate::entity::EntityId;
use crate::keys::BlockingKey;

/// Errors surfaced by the engine, the blocking workflows, and the metrics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid parameters: zero mappers, window below 2, bad fractions, and so on.
    #[error("configuration error: {0}")]
    Config(String),

    /// A blocking-key rule could not be applied to an entity.
    #[error("cannot derive blocking key for entity {entity}: {reason}")]
    Keying { entity: EntityId, reason: String },

    /// A partition function sent a key outside the configured reducer range.
    #[error("partition function mapped key {key:?} to reducer {target}, valid range is 1..={reducers}")]
    Partition {
        key: BlockingKey,
        target: usize,
        reducers: usize,
    },

    /// A matcher could not be evaluated on a pair of entities.
    #[error("cannot match entities {left} and {right}: {reason}")]
    Matching {
        left: EntityId,
        right: EntityId,
        reason: String,
    },

    /// A map task aborted; carries the owning task index.
    #[error("map task {task} failed: {source}")]
    MapTask {
        task: usize,
        #[source]
        source: Box<Error>,
    },

    /// A reduce task aborted; carries the owning task index.
    #[error("reduce task {task} failed: {source}")]
    ReduceTask {
        task: usize,
        #[source]
        source: Box<Error>,
    },

    /// A job inside a multi-job chain failed; carries the job position (1-based).
    #[error("job {job} of chain failed: {source}")]
    Chain {
        job: usize,
        #[source]
        source: Box<Error>,
    },

    /// A metric was requested on degenerate input (empty or all-zero sizes).
    #[error("metric error: {0}")]
    Metric(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
