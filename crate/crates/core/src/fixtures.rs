//! The nine-entity walkthrough dataset used across documentation and
//! tests: entities `a`..`i` with blocking keys 1, 2, or 3, split 3/3/3
//! over mappers, with keys 1 and 2 on the first of two reduce partitions.

use crate::entity::{Correspondence, Entity};
use crate::partition::PartitionFunction;

/// Key each demo entity carries, in id order `a`..`i`.
const DEMO_KEYS: [&str; 9] = ["1", "2", "3", "1", "2", "2", "3", "2", "3"];

/// The demo entities in input order. The first attribute carries the
/// blocking key; the second marks the planted duplicate groups so match
/// strategies have something to act on.
pub fn demo_entities() -> Vec<Entity> {
    DEMO_KEYS
        .iter()
        .enumerate()
        .map(|(i, key)| {
            let id = char::from(b'a' + i as u8).to_string();
            // a/d and c/i are duplicates of each other, everything else distinct
            let payload = match id.as_str() {
                "a" | "d" => "gradient descent methods",
                "c" | "i" => "columnar storage engines",
                "b" => "wavelet image coding",
                "e" => "protein folding dynamics",
                "f" => "ranked retrieval models",
                "g" => "garbage collection pauses",
                _ => "network intrusion alerts",
            };
            Entity::new(id, vec![key.to_string(), payload.to_string()])
        })
        .collect()
}

/// Two partitions: keys up to 2 on the first, key 3 on the second.
pub fn demo_partitioner() -> PartitionFunction {
    PartitionFunction::manual("demo", vec!["2".into()]).expect("valid boundary list")
}

fn pairs(raw: &[(&str, &str)]) -> Vec<Correspondence> {
    let mut out: Vec<Correspondence> = raw
        .iter()
        .map(|(a, b)| Correspondence::new((*a).into(), (*b).into(), None))
        .collect();
    out.sort_unstable();
    out
}

/// All 15 pairs the window of size 3 finds on the sorted demo dataset.
pub fn demo_oracle_pairs() -> Vec<Correspondence> {
    pairs(&[
        ("a", "d"),
        ("a", "b"),
        ("d", "b"),
        ("d", "e"),
        ("b", "e"),
        ("b", "f"),
        ("e", "f"),
        ("e", "h"),
        ("f", "h"),
        ("f", "c"),
        ("h", "c"),
        ("h", "g"),
        ("c", "g"),
        ("c", "i"),
        ("g", "i"),
    ])
}

/// The three oracle pairs whose entities sit on different reduce
/// partitions; plain SRP cannot find them.
pub fn demo_boundary_pairs() -> Vec<Correspondence> {
    pairs(&[("f", "c"), ("h", "c"), ("h", "g")])
}

/// Oracle pairs minus the cross-partition pairs: what SRP alone finds.
pub fn demo_srp_pairs() -> Vec<Correspondence> {
    let missing = demo_boundary_pairs();
    demo_oracle_pairs()
        .into_iter()
        .filter(|p| !missing.contains(p))
        .collect()
}
