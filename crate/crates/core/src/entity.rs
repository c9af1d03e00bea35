//! Records under resolution and the pairs produced by blocking and matching.

use std::fmt;
use std::sync::Arc;

/// Opaque entity identifier. Cheap to clone; ordered lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(Arc<str>);

impl EntityId {
    pub fn new(id: impl AsRef<str>) -> Self {
        EntityId(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EntityId({})", self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        EntityId::new(s)
    }
}

impl From<String> for EntityId {
    fn from(s: String) -> Self {
        EntityId(Arc::from(s))
    }
}

/// A record with an identifier and an ordered list of attribute values.
///
/// Attributes are addressed by index; the ingest layer resolves header
/// names to indices. The attribute list is shared, so clones are cheap
/// while records move through the engine.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Entity {
    pub id: EntityId,
    pub attributes: Arc<[String]>,
}

impl Entity {
    pub fn new(id: impl Into<EntityId>, attributes: Vec<String>) -> Self {
        Entity {
            id: id.into(),
            attributes: attributes.into(),
        }
    }

    pub fn attribute(&self, index: usize) -> Option<&str> {
        self.attributes.get(index).map(String::as_str)
    }
}

/// An unordered entity pair, optionally carrying a similarity score.
///
/// Pairs are canonicalized on construction (smaller id first) and compare,
/// hash, and order by the id pair alone, so result sets from different
/// algorithms can be compared by plain set operations. The score is
/// metadata for reporting.
#[derive(Clone, Debug)]
pub struct Correspondence {
    pub left: EntityId,
    pub right: EntityId,
    pub similarity: Option<f64>,
}

impl Correspondence {
    /// Canonicalize the pair: the smaller id becomes `left`.
    ///
    /// Self-pairs are a logic error in the callers and are rejected loudly.
    pub fn new(a: EntityId, b: EntityId, similarity: Option<f64>) -> Self {
        assert!(a != b, "self-pair ({a}, {a}) is not a correspondence");
        if a <= b {
            Correspondence {
                left: a,
                right: b,
                similarity,
            }
        } else {
            Correspondence {
                left: b,
                right: a,
                similarity,
            }
        }
    }

    pub fn ids(&self) -> (&EntityId, &EntityId) {
        (&self.left, &self.right)
    }
}

impl PartialEq for Correspondence {
    fn eq(&self, other: &Self) -> bool {
        self.left == other.left && self.right == other.right
    }
}

impl Eq for Correspondence {}

impl PartialOrd for Correspondence {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Correspondence {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.left, &self.right).cmp(&(&other.left, &other.right))
    }
}

impl std::hash::Hash for Correspondence {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.left.hash(state);
        self.right.hash(state);
    }
}

impl fmt::Display for Correspondence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.similarity {
            Some(s) => write!(f, "({}, {}, {s:.4})", self.left, self.right),
            None => write!(f, "({}, {})", self.left, self.right),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correspondence_is_canonical() {
        let c1 = Correspondence::new("b".into(), "a".into(), None);
        let c2 = Correspondence::new("a".into(), "b".into(), Some(0.9));
        assert_eq!(c1.left.as_str(), "a");
        assert_eq!(c1.right.as_str(), "b");
        assert_eq!(c1, c2, "score does not participate in identity");
    }

    #[test]
    #[should_panic(expected = "self-pair")]
    fn self_pair_rejected() {
        let _ = Correspondence::new("x".into(), "x".into(), None);
    }
}
