//! Blocking keys, the rules that derive them, and the composite keys that
//! drive shuffle routing and reducer-side sorting.

use std::fmt;

use crate::entity::{Entity, EntityId};
use crate::error::{Error, Result};

/// A blocking key, ordered lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockingKey(String);

impl BlockingKey {
    pub fn new(value: impl Into<String>) -> Self {
        BlockingKey(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BlockingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for BlockingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlockingKey({:?})", self.0)
    }
}

impl From<&str> for BlockingKey {
    fn from(s: &str) -> Self {
        BlockingKey(s.to_owned())
    }
}

/// Derives a blocking key from one attribute: the lowercased first
/// `prefix_len` characters. Shorter values yield shorter keys; lexicographic
/// order handles those naturally ("d" < "db").
///
/// The publication default is the lowercased first two characters of the
/// title attribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyRule {
    pub attribute: usize,
    pub prefix_len: usize,
}

impl KeyRule {
    pub fn new(attribute: usize, prefix_len: usize) -> Self {
        KeyRule {
            attribute,
            prefix_len,
        }
    }

    /// Two-character prefix of attribute 0 (title-first layouts).
    pub fn publication_default() -> Self {
        KeyRule::new(0, 2)
    }

    /// Derive the blocking key for one entity.
    pub fn key_of(&self, entity: &Entity) -> Result<BlockingKey> {
        let value = entity.attribute(self.attribute).ok_or_else(|| Error::Keying {
            entity: entity.id.clone(),
            reason: format!(
                "attribute index {} out of range (entity has {})",
                self.attribute,
                entity.attributes.len()
            ),
        })?;
        let prefix: String = value.to_lowercase().chars().take(self.prefix_len).collect();
        Ok(BlockingKey(prefix))
    }
}

/// Free-function form of [`KeyRule::key_of`].
pub fn blocking_key(entity: &Entity, rule: &KeyRule) -> Result<BlockingKey> {
    rule.key_of(entity)
}

/// Ordered key of optional boundary prefix, optional partition prefix,
/// blocking key, and entity id. Comparison is component-wise in that order;
/// the id makes sorting canonical when blocking keys collide.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CompositeKey {
    pub boundary: Option<u32>,
    pub partition: Option<u32>,
    pub blocking: BlockingKey,
    pub entity: EntityId,
}

impl CompositeKey {
    /// Plain key: no prefixes. Standard blocking routes and groups on these.
    pub fn plain(blocking: BlockingKey, entity: EntityId) -> Self {
        CompositeKey {
            boundary: None,
            partition: None,
            blocking,
            entity,
        }
    }

    /// Key of the form `p(k).k` used by sorted reduce partitions.
    pub fn partitioned(partition: u32, blocking: BlockingKey, entity: EntityId) -> Self {
        CompositeKey {
            boundary: None,
            partition: Some(partition),
            blocking,
            entity,
        }
    }

    /// Key of the form `bound.partition.k` used for boundary routing.
    pub fn bounded(bound: u32, partition: u32, blocking: BlockingKey, entity: EntityId) -> Self {
        CompositeKey {
            boundary: Some(bound),
            partition: Some(partition),
            blocking,
            entity,
        }
    }
}

impl fmt::Display for CompositeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(b) = self.boundary {
            write!(f, "{b}.")?;
        }
        if let Some(p) = self.partition {
            write!(f, "{p}.")?;
        }
        write!(f, "{}", self.blocking)
    }
}

/// Number of distinct character codes: space plus `a`..`z`.
pub const KEY_RADIX: u32 = 27;

/// Largest code a two-character key can take (`"zz"`).
pub const MAX_KEY_CODE: u32 = KEY_RADIX * KEY_RADIX - 1;

fn char_code(c: char) -> u32 {
    match c {
        ' ' => 0,
        'a'..='z' => c as u32 - 'a' as u32 + 1,
        // Anything below 'a' (digits, punctuation) folds to the low end,
        // anything above 'z' to the high end. Folding keeps the code
        // monotone with respect to lexicographic key order.
        c if c < 'a' => 0,
        _ => KEY_RADIX - 1,
    }
}

/// Integer code of the first two characters of a key, base 27 with
/// space < a < … < z. Missing characters count as zero, so `"d"` and
/// `"d "` share a code; the mapping is monotone, not injective.
pub fn key_code(key: &BlockingKey) -> u32 {
    let mut chars = key.as_str().chars();
    let hi = chars.next().map_or(0, char_code);
    let lo = chars.next().map_or(0, char_code);
    hi * KEY_RADIX + lo
}

/// Canonical two-character key for a code produced by [`key_code`].
pub fn key_from_code(code: u32) -> BlockingKey {
    assert!(code <= MAX_KEY_CODE, "key code {code} out of range");
    let to_char = |d: u32| {
        if d == 0 {
            ' '
        } else {
            char::from_u32('a' as u32 + d - 1).unwrap()
        }
    };
    let hi = to_char(code / KEY_RADIX);
    let lo = to_char(code % KEY_RADIX);
    BlockingKey([hi, lo].iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entity(id: &str, title: &str) -> Entity {
        Entity::new(id, vec![title.to_owned()])
    }

    #[test]
    fn publication_rule_takes_lowercased_two_char_prefix() {
        let rule = KeyRule::publication_default();
        let key = rule.key_of(&entity("x", "MapReduce Basics")).unwrap();
        assert_eq!(key.as_str(), "ma");
    }

    #[test]
    fn short_title_keeps_the_space() {
        let rule = KeyRule::publication_default();
        let key = rule.key_of(&entity("x", "A survey")).unwrap();
        assert_eq!(key.as_str(), "a ");
    }

    #[test]
    fn titles_shorter_than_prefix_use_what_exists() {
        let rule = KeyRule::publication_default();
        assert_eq!(rule.key_of(&entity("x", "DB")).unwrap().as_str(), "db");
        assert_eq!(rule.key_of(&entity("x", "D")).unwrap().as_str(), "d");
        assert!(BlockingKey::from("d") < BlockingKey::from("db"));
    }

    #[test]
    fn missing_attribute_names_the_entity() {
        let rule = KeyRule::new(3, 2);
        let err = rule.key_of(&entity("e7", "title")).unwrap_err();
        match err {
            Error::Keying { entity, .. } => assert_eq!(entity.as_str(), "e7"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn composite_key_orders_component_wise() {
        let id = EntityId::new("x");
        let k = |b: Option<u32>, p: Option<u32>, key: &str| CompositeKey {
            boundary: b,
            partition: p,
            blocking: key.into(),
            entity: id.clone(),
        };
        // boundary dominates partition dominates blocking key
        assert!(k(Some(1), Some(9), "z") < k(Some(2), Some(1), "a"));
        assert!(k(Some(1), Some(1), "z") < k(Some(1), Some(2), "a"));
        assert!(k(Some(1), Some(1), "a") < k(Some(1), Some(1), "b"));
        // entity id breaks full ties
        let a = CompositeKey::partitioned(1, "m".into(), EntityId::new("a"));
        let b = CompositeKey::partitioned(1, "m".into(), EntityId::new("b"));
        assert!(a < b);
    }

    #[test]
    fn sorting_any_permutation_is_canonical() {
        let mk = |p: u32, key: &str, id: &str| {
            CompositeKey::partitioned(p, key.into(), EntityId::new(id))
        };
        let canon = vec![
            mk(1, "a ", "q"),
            mk(1, "ab", "p"),
            mk(1, "ab", "z"),
            mk(2, "aa", "a"),
        ];
        let mut shuffled = vec![
            canon[2].clone(),
            canon[0].clone(),
            canon[3].clone(),
            canon[1].clone(),
        ];
        shuffled.sort();
        assert_eq!(shuffled, canon);
    }

    #[test]
    fn key_codes_round_trip_and_stay_monotone() {
        assert_eq!(key_code(&"a ".into()), 27);
        assert_eq!(key_code(&"aa".into()), 28);
        assert_eq!(key_code(&"zz".into()), MAX_KEY_CODE);
        assert_eq!(key_from_code(27).as_str(), "a ");
        assert_eq!(key_from_code(MAX_KEY_CODE).as_str(), "zz");
        // "d" and "d " share a code; order between keys still respects codes
        assert_eq!(key_code(&"d".into()), key_code(&"d ".into()));
        let keys = ["", "a", "a ", "ab", "b", "da", "db", "zz"];
        for w in keys.windows(2) {
            assert!(key_code(&w[0].into()) <= key_code(&w[1].into()));
        }
    }
}
