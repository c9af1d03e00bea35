//! The sequential sliding-window pass over a sorted entity list. This is
//! the reference the parallel workflows must reproduce.

use crate::entity::{Correspondence, Entity};
use crate::error::{Error, Result};
use crate::keys::KeyRule;

/// Index pairs `(i, j)` with `i < j` and `j - i <= w - 1`, in window-move
/// order: each new position pairs with the `w - 1` positions before it.
pub fn window_pairs(n: usize, w: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..n).flat_map(move |j| (j.saturating_sub(w - 1)..j).map(move |i| (i, j)))
}

/// Number of pairs the window of size `w` produces over `n` records:
/// `(w-1)·(n - w/2)` once the list is at least a window long, all pairs
/// otherwise.
pub fn window_pair_count(n: u64, w: u64) -> u64 {
    if n >= w {
        (w - 1) * n - w * (w - 1) / 2
    } else {
        n.saturating_sub(1) * n / 2
    }
}

/// Move a window of size `w` over an already sorted entity list and return
/// every in-window pair exactly once, canonicalized.
///
/// Lists shorter than the window degenerate to full pairwise comparison.
pub fn sliding_window(sorted: &[Entity], w: usize) -> Result<Vec<Correspondence>> {
    if w < 2 {
        return Err(Error::config(format!("window size must be at least 2, got {w}")));
    }
    let mut pairs = Vec::with_capacity(window_pair_count(sorted.len() as u64, w as u64) as usize);
    for (i, j) in window_pairs(sorted.len(), w) {
        pairs.push(Correspondence::new(
            sorted[i].id.clone(),
            sorted[j].id.clone(),
            None,
        ));
    }
    Ok(pairs)
}

/// Sort entities by `(blocking key, id)` — the order every sliding-window
/// pass assumes.
pub fn sort_by_blocking_key(entities: &[Entity], rule: &KeyRule) -> Result<Vec<Entity>> {
    let mut keyed = entities
        .iter()
        .map(|e| Ok((rule.key_of(e)?, e.clone())))
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by(|(ka, ea), (kb, eb)| (ka, &ea.id).cmp(&(kb, &eb.id)));
    Ok(keyed.into_iter().map(|(_, e)| e).collect())
}

/// Upper bound on the correspondences sorted reduce partitions miss:
/// `(r-1)·w·(w-1)/2`, attained when every reduce partition holds at least
/// `w-1` entities.
pub fn srp_missed_pairs(reducers: u64, w: u64) -> u64 {
    (reducers - 1) * w * (w - 1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entity::EntityId;

    fn entities(ids: &[&str]) -> Vec<Entity> {
        ids.iter().map(|id| Entity::new(*id, vec![String::new()])).collect()
    }

    /// Independent oracle: all index pairs within distance `w - 1`.
    fn quadratic_pairs(n: usize, w: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if j - i <= w - 1 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn nine_entity_walkthrough_matches_listed_pairs() {
        // Sorted order a,d,b,e,f,h,c,g,i with w=3 yields these 15 pairs,
        // in window-move order.
        let sorted = entities(&["a", "d", "b", "e", "f", "h", "c", "g", "i"]);
        let got = sliding_window(&sorted, 3).unwrap();
        let expect = [
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
        ];
        let expect: Vec<Correspondence> = expect
            .iter()
            .map(|(a, b)| Correspondence::new(EntityId::new(a), EntityId::new(b), None))
            .collect();
        assert_eq!(got, expect);
        assert_eq!(got.len() as u64, window_pair_count(9, 3));
    }

    #[test]
    fn two_entities_one_pair() {
        let got = sliding_window(&entities(&["x", "y"]), 2).unwrap();
        assert_eq!(got, vec![Correspondence::new("x".into(), "y".into(), None)]);
    }

    #[test]
    fn window_below_two_is_a_configuration_error() {
        assert!(matches!(
            sliding_window(&entities(&["x"]), 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn shorter_than_window_degenerates_to_all_pairs() {
        let got = sliding_window(&entities(&["a", "b", "c"]), 10).unwrap();
        assert_eq!(got.len(), 3);
        assert_eq!(window_pair_count(3, 10), 3);
    }

    #[test]
    fn pair_count_matches_formula_for_all_small_sizes() {
        for n in 0..=60usize {
            for w in 2..=12usize {
                let by_window = window_pairs(n, w).count() as u64;
                assert_eq!(
                    by_window,
                    window_pair_count(n as u64, w as u64),
                    "n={n} w={w}"
                );
                assert_eq!(
                    by_window,
                    quadratic_pairs(n, w).len() as u64,
                    "n={n} w={w}"
                );
            }
        }
    }

    #[test]
    fn no_duplicate_and_no_self_pairs() {
        for n in [0usize, 1, 5, 23] {
            for w in [2usize, 3, 7] {
                let pairs: Vec<_> = window_pairs(n, w).collect();
                let mut seen = std::collections::HashSet::new();
                for (i, j) in pairs {
                    assert!(i < j);
                    assert!(seen.insert((i, j)), "duplicate pair ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn missed_pair_bound_examples() {
        assert_eq!(srp_missed_pairs(2, 3), 3);
        assert_eq!(srp_missed_pairs(1, 2), 0);
        assert_eq!(srp_missed_pairs(1, 9), 0);
        assert_eq!(srp_missed_pairs(3, 4), 12);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn matches_quadratic_oracle(n in 0usize..50, w in 2usize..10) {
                let ids: Vec<String> = (0..n).map(|i| format!("e{i:03}")).collect();
                let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
                let sorted = entities(&refs);
                let got: Vec<(usize, usize)> = window_pairs(sorted.len(), w).collect();
                let mut got_sorted = got.clone();
                got_sorted.sort_unstable();
                prop_assert_eq!(got_sorted, quadratic_pairs(n, w));
            }
        }
    }
}
