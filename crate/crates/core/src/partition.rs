//! Monotone range partitioning over blocking keys, skew injection for
//! load-imbalance studies, and the Gini coefficient over partition sizes.

use crate::entity::Entity;
use crate::error::{Error, Result};
use crate::keys::{key_code, key_from_code, BlockingKey, KeyRule, MAX_KEY_CODE};

/// Inclusive range of key codes an even partitioner divides.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyDomain {
    pub low: u32,
    pub high: u32,
}

impl KeyDomain {
    pub fn new(low: &BlockingKey, high: &BlockingKey) -> Self {
        KeyDomain {
            low: key_code(low),
            high: key_code(high),
        }
    }

    /// `"a "` through `"zz"` — the span lowercased titles produce.
    pub fn letters() -> Self {
        KeyDomain {
            low: key_code(&BlockingKey::from("a ")),
            high: MAX_KEY_CODE,
        }
    }

    /// The full two-character code space, `"  "` through `"zz"`.
    pub fn full() -> Self {
        KeyDomain {
            low: 0,
            high: MAX_KEY_CODE,
        }
    }
}

/// A monotone map from blocking key to partition index in `1..=r`,
/// realized as an ascending list of `r - 1` inclusive upper boundaries.
/// A key goes to the first partition whose boundary is not below it; keys
/// above the last boundary go to partition `r`.
#[derive(Clone, Debug)]
pub struct PartitionFunction {
    name: String,
    boundaries: Vec<BlockingKey>,
    partitions: usize,
}

impl PartitionFunction {
    /// Build from an explicit boundary list. The partition count is one
    /// more than the number of boundaries.
    pub fn manual(name: impl Into<String>, boundaries: Vec<BlockingKey>) -> Result<Self> {
        for pair in boundaries.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::config(format!(
                    "partition boundaries must be strictly ascending, got {:?} before {:?}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(PartitionFunction {
            name: name.into(),
            partitions: boundaries.len() + 1,
            boundaries,
        })
    }

    /// The single-partition function `p ≡ 1`.
    pub fn constant(name: impl Into<String>) -> Self {
        PartitionFunction {
            name: name.into(),
            boundaries: Vec::new(),
            partitions: 1,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn partitions(&self) -> usize {
        self.partitions
    }

    pub fn boundaries(&self) -> &[BlockingKey] {
        &self.boundaries
    }

    /// Partition index for a key, 1-based.
    pub fn assign(&self, key: &BlockingKey) -> usize {
        self.boundaries.partition_point(|b| b < key) + 1
    }

    /// Lowest key code that still lands in the last partition.
    pub(crate) fn last_partition_floor(&self) -> Option<u32> {
        match self.boundaries.last() {
            None => Some(0),
            Some(b) => {
                let code = key_code(b) + 1;
                (code <= MAX_KEY_CODE).then_some(code)
            }
        }
    }
}

/// Divide a key-code domain into `r` contiguous intervals of equal width.
pub fn make_even_partitioner(r: usize, domain: KeyDomain) -> Result<PartitionFunction> {
    if r == 0 {
        return Err(Error::config("partition count must be at least 1"));
    }
    if domain.low >= domain.high || domain.high > MAX_KEY_CODE {
        return Err(Error::config(format!(
            "degenerate key domain [{}, {}]",
            domain.low, domain.high
        )));
    }
    let span = u64::from(domain.high - domain.low + 1);
    if span < r as u64 {
        return Err(Error::config(format!(
            "domain of {span} key codes cannot form {r} partitions"
        )));
    }
    let boundaries = (1..r)
        .map(|i| {
            let upper = u64::from(domain.low) + span * i as u64 / r as u64 - 1;
            key_from_code(upper as u32)
        })
        .collect();
    PartitionFunction::manual(format!("even{r}"), boundaries)
}

/// Rewrites the blocking keys of a chosen subset of entities so that a
/// target fraction of the dataset falls in the base partitioner's last
/// partition. Selection and replacement keys are derived from a seeded
/// hash of the entity id, so the transform is reproducible.
#[derive(Clone, Debug)]
pub struct SkewTransform {
    base: PartitionFunction,
    fraction: f64,
    seed: u64,
}

impl SkewTransform {
    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    /// Apply the transform: entities already in the last partition count
    /// toward the quota; the remainder is topped up by hash rank. Returns
    /// the rewritten dataset.
    pub fn apply(&self, entities: &[Entity], rule: &KeyRule) -> Result<Vec<Entity>> {
        let r = self.base.partitions();
        let quota = (self.fraction * entities.len() as f64).ceil() as usize;
        let floor = self.base.last_partition_floor().ok_or_else(|| {
            Error::config("last partition of the base partitioner admits no keys")
        })?;
        let span = u64::from(MAX_KEY_CODE - floor + 1);

        let mut out: Vec<Entity> = entities.to_vec();
        let mut candidates: Vec<(u64, usize)> = Vec::new();
        let mut already = 0usize;
        for (idx, entity) in entities.iter().enumerate() {
            let key = rule.key_of(entity)?;
            if self.base.assign(&key) == r {
                already += 1;
            } else {
                candidates.push((seeded_hash(self.seed, entity.id.as_str()), idx));
            }
        }
        let need = quota.saturating_sub(already);
        candidates.sort_unstable();
        for &(hash, idx) in candidates.iter().take(need) {
            let entity = &entities[idx];
            let code = floor + (hash % span) as u32;
            let target = key_from_code(code);
            out[idx] = rewrite_key_source(entity, rule, &target)?;
        }
        Ok(out)
    }
}

/// Pair a base partitioner with a key-rewriting skew transform; the
/// returned function is the base renamed after the injected fraction.
pub fn make_skewed_partitioner(
    base: &PartitionFunction,
    fraction: f64,
    seed: u64,
) -> Result<(SkewTransform, PartitionFunction)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::config(format!(
            "skew fraction must lie in (0, 1), got {fraction}"
        )));
    }
    if base.partitions() < 2 {
        return Err(Error::config(
            "skew injection needs a base partitioner with at least 2 partitions",
        ));
    }
    let name = format!("{}_{:02}", base.name(), (fraction * 100.0).round() as u32);
    Ok((
        SkewTransform {
            base: base.clone(),
            fraction,
            seed,
        },
        base.clone().renamed(name),
    ))
}

/// Replace the key-bearing prefix of the rule's source attribute so the
/// derived blocking key becomes `target`.
fn rewrite_key_source(entity: &Entity, rule: &KeyRule, target: &BlockingKey) -> Result<Entity> {
    let value = entity.attribute(rule.attribute).ok_or_else(|| Error::Keying {
        entity: entity.id.clone(),
        reason: format!("attribute index {} out of range", rule.attribute),
    })?;
    let rest: String = value.chars().skip(rule.prefix_len).collect();
    let mut attributes: Vec<String> = entity.attributes.to_vec();
    attributes[rule.attribute] = format!("{}{}", target.as_str(), rest);
    Ok(Entity::new(entity.id.clone(), attributes))
}

fn seeded_hash(seed: u64, id: &str) -> u64 {
    // FNV-1a over the seed bytes then the id bytes; stable across runs.
    let mut h: u64 = 0xcbf29ce484222325;
    for byte in seed.to_le_bytes().into_iter().chain(id.bytes()) {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Per-partition entity counts with their Gini coefficient. Sizes are kept
/// ascending, the order the coefficient is defined over.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionProfile {
    pub sizes: Vec<u64>,
    pub gini: f64,
}

/// Gini coefficient of a size distribution:
/// `g = 2·Σ i·y_i / (n·Σ y_i) − (n+1)/n` with the sizes sorted ascending.
/// 0 means equal partitions; values approach 1 under maximal skew.
pub fn gini(sizes: &[u64]) -> Result<f64> {
    if sizes.is_empty() {
        return Err(Error::Metric("gini of an empty size list".into()));
    }
    let total: u64 = sizes.iter().sum();
    if total == 0 {
        return Err(Error::Metric("gini of all-zero sizes".into()));
    }
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &y)| (i + 1) as f64 * y as f64)
        .sum();
    Ok(2.0 * weighted / (n * total as f64) - (n + 1.0) / n)
}

/// Entity count of each partition, in partition order.
pub fn counts_by_partition(
    entities: &[Entity],
    p: &PartitionFunction,
    rule: &KeyRule,
) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; p.partitions()];
    for entity in entities {
        let key = rule.key_of(entity)?;
        counts[p.assign(&key) - 1] += 1;
    }
    Ok(counts)
}

/// Profile a dataset under a partitioner: ascending partition sizes plus
/// their Gini coefficient.
pub fn profile(
    entities: &[Entity],
    p: &PartitionFunction,
    rule: &KeyRule,
) -> Result<PartitionProfile> {
    let counts = counts_by_partition(entities, p, rule)?;
    let gini = gini(&counts)?;
    let mut sizes = counts;
    sizes.sort_unstable();
    Ok(PartitionProfile { sizes, gini })
}
