//! Shared builders for randomized workflow configurations: a monotone
//! partitioner with every partition populated, plus the quadratic oracle
//! the workflows are checked against.

use std::collections::BTreeSet;

use dedup_core::keys::{key_from_code, MAX_KEY_CODE};
use dedup_core::{Correspondence, Entity, KeyRule, PartitionFunction};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub struct RandomCase {
    pub entities: Vec<Entity>,
    pub partitioner: PartitionFunction,
    pub mappers: usize,
    pub reducers: usize,
    pub window: usize,
    pub boundary_reducers: usize,
}

/// Build a seeded random case: r in 1..=5, w in 2..=10, m in 1..=4, a
/// random monotone partitioner, and at least w-1 entities per partition.
pub fn random_case(seed: u64, max_n: usize) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = rng.random_range(2..=10usize);
    let reducers = rng.random_range(1..=5usize);
    let mappers = rng.random_range(1..=4usize);
    let boundary_reducers = rng.random_range(1..=reducers.max(2) - 1);

    // r-1 distinct ascending boundary codes leave every partition a
    // non-empty code range
    let mut codes = BTreeSet::new();
    while codes.len() < reducers - 1 {
        codes.insert(rng.random_range(0..MAX_KEY_CODE));
    }
    let boundary_codes: Vec<u32> = codes.into_iter().collect();
    let boundaries = boundary_codes.iter().map(|&c| key_from_code(c)).collect();
    let partitioner =
        PartitionFunction::manual(format!("random{seed}"), boundaries).expect("ascending");

    // code range of each partition, then w-1 entities plus a random surplus
    let mut ranges = Vec::with_capacity(reducers);
    let mut low = 0u32;
    for &code in &boundary_codes {
        ranges.push((low, code));
        low = code + 1;
    }
    ranges.push((low, MAX_KEY_CODE));

    let headroom = (max_n / reducers).saturating_sub(window - 1);
    let mut entities = Vec::new();
    for (low, high) in ranges {
        let count = window - 1 + rng.random_range(0..=headroom);
        for _ in 0..count {
            let code = rng.random_range(low..=high);
            let key = key_from_code(code);
            let suffix: String = (0..rng.random_range(0..6usize))
                .map(|_| char::from(rng.random_range(b'a'..=b'z')))
                .collect();
            let id = format!("e{:04}", entities.len());
            entities.push(Entity::new(id, vec![format!("{}{}", key.as_str(), suffix)]));
        }
    }
    entities.shuffle(&mut rng);

    RandomCase {
        entities,
        partitioner,
        mappers,
        reducers,
        window,
        boundary_reducers,
    }
}

/// Quadratic reference: sort by (key, id) with local code, then collect
/// every index pair within window distance.
pub fn oracle_pairs(entities: &[Entity], rule: &KeyRule, window: usize) -> Vec<Correspondence> {
    let mut keyed: Vec<(String, &Entity)> = entities
        .iter()
        .map(|e| (rule.key_of(e).unwrap().as_str().to_owned(), e))
        .collect();
    keyed.sort_by(|(ka, ea), (kb, eb)| (ka, &ea.id).cmp(&(kb, &eb.id)));
    let mut pairs = Vec::new();
    for i in 0..keyed.len() {
        for j in (i + 1)..keyed.len() {
            if j - i <= window - 1 {
                pairs.push(Correspondence::new(
                    keyed[i].1.id.clone(),
                    keyed[j].1.id.clone(),
                    None,
                ));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}
