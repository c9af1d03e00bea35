//! Pairwise match strategies: attribute similarity functions combined into
//! a weighted average against a threshold, with an early abort once the
//! remaining matchers can no longer lift the score over the threshold.

use std::collections::BTreeSet;

use crate::entity::{Correspondence, Entity};
use crate::error::{Error, Result};

/// Levenshtein distance over unicode scalar values.
fn levenshtein(a: &str, b: &str) -> usize {
    if a == b {
        return 0;
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut current = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        current[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(ca != cb);
            current[j + 1] = substitution.min(prev[j + 1] + 1).min(current[j] + 1);
        }
        std::mem::swap(&mut prev, &mut current);
    }
    prev[b.len()]
}

/// Edit similarity: `1 − levenshtein(a,b) / max(|a|,|b|)`; two empty
/// strings are identical.
pub fn edit_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

fn grams(s: &str) -> BTreeSet<Vec<char>> {
    let chars: Vec<char> = s.chars().collect();
    if chars.is_empty() {
        return BTreeSet::new();
    }
    if chars.len() < 3 {
        return BTreeSet::from([chars]);
    }
    chars.windows(3).map(<[char]>::to_vec).collect()
}

/// Trigram similarity: Jaccard coefficient of the character 3-gram sets.
/// Strings shorter than three characters count as a single gram; two empty
/// strings are identical.
pub fn trigram_similarity(a: &str, b: &str) -> f64 {
    let ga = grams(a);
    let gb = grams(b);
    if ga.is_empty() && gb.is_empty() {
        return 1.0;
    }
    let intersection = ga.intersection(&gb).count() as f64;
    let union = (ga.len() + gb.len()) as f64 - intersection;
    intersection / union
}

/// Trigram similarity with the Dice coefficient instead of Jaccard.
pub fn trigram_dice_similarity(a: &str, b: &str) -> f64 {
    let ga = grams(a);
    let gb = grams(b);
    if ga.is_empty() && gb.is_empty() {
        return 1.0;
    }
    let intersection = ga.intersection(&gb).count() as f64;
    2.0 * intersection / (ga.len() + gb.len()) as f64
}

/// Similarity function selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimilarityFn {
    Edit,
    Trigram,
    TrigramDice,
}

impl SimilarityFn {
    pub fn apply(self, a: &str, b: &str) -> f64 {
        match self {
            SimilarityFn::Edit => edit_similarity(a, b),
            SimilarityFn::Trigram => trigram_similarity(a, b),
            SimilarityFn::TrigramDice => trigram_dice_similarity(a, b),
        }
    }
}

/// One matcher: a similarity function on an attribute with a weight.
#[derive(Clone, Copy, Debug)]
pub struct Matcher {
    pub attribute: usize,
    pub similarity: SimilarityFn,
    pub weight: f64,
}

/// Weighted matcher combination with a threshold classifier. Weights are
/// normalized to sum to one on construction.
#[derive(Clone, Debug)]
pub struct MatchStrategy {
    matchers: Vec<Matcher>,
    threshold: f64,
}

impl MatchStrategy {
    pub fn new(matchers: Vec<Matcher>, threshold: f64) -> Result<Self> {
        if matchers.is_empty() {
            return Err(Error::config("match strategy needs at least one matcher"));
        }
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::config(format!(
                "match threshold must lie in [0, 1], got {threshold}"
            )));
        }
        if matchers.iter().any(|m| m.weight <= 0.0) {
            return Err(Error::config("matcher weights must be positive"));
        }
        let total: f64 = matchers.iter().map(|m| m.weight).sum();
        let matchers = matchers
            .into_iter()
            .map(|m| Matcher {
                weight: m.weight / total,
                ..m
            })
            .collect();
        Ok(MatchStrategy {
            matchers,
            threshold,
        })
    }

    /// Edit distance on attribute 0 and trigrams on attribute 1, equal
    /// weights, matches at 0.75.
    pub fn publication_default() -> Self {
        MatchStrategy::new(
            vec![
                Matcher {
                    attribute: 0,
                    similarity: SimilarityFn::Edit,
                    weight: 0.5,
                },
                Matcher {
                    attribute: 1,
                    similarity: SimilarityFn::Trigram,
                    weight: 0.5,
                },
            ],
            0.75,
        )
        .expect("default strategy is valid")
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn matchers(&self) -> &[Matcher] {
        &self.matchers
    }

    /// Evaluate matchers in declared order, aborting once the score can no
    /// longer reach the threshold. The abort never changes the decision,
    /// only how many matchers run.
    pub fn evaluate(&self, left: &Entity, right: &Entity) -> Result<MatchEvaluation> {
        let mut score = 0.0;
        let mut remaining: f64 = 1.0;
        let mut executed = 0;
        for matcher in &self.matchers {
            let a = attribute_of(left, matcher.attribute, right)?;
            let b = attribute_of(right, matcher.attribute, left)?;
            score += matcher.weight * matcher.similarity.apply(a, b);
            remaining -= matcher.weight;
            executed += 1;
            if score + remaining < self.threshold {
                return Ok(MatchEvaluation {
                    score,
                    executed,
                    is_match: false,
                });
            }
        }
        Ok(MatchEvaluation {
            score,
            executed,
            is_match: score >= self.threshold,
        })
    }

    /// Like [`MatchStrategy::evaluate`] but always runs every matcher;
    /// reference path for the short-circuit soundness check.
    pub fn evaluate_exhaustive(&self, left: &Entity, right: &Entity) -> Result<MatchEvaluation> {
        let mut score = 0.0;
        for matcher in &self.matchers {
            let a = attribute_of(left, matcher.attribute, right)?;
            let b = attribute_of(right, matcher.attribute, left)?;
            score += matcher.weight * matcher.similarity.apply(a, b);
        }
        Ok(MatchEvaluation {
            score,
            executed: self.matchers.len(),
            is_match: score >= self.threshold,
        })
    }
}

fn attribute_of<'e>(entity: &'e Entity, index: usize, other: &Entity) -> Result<&'e str> {
    entity.attribute(index).ok_or_else(|| Error::Matching {
        left: entity.id.clone(),
        right: other.id.clone(),
        reason: format!("attribute index {index} out of range"),
    })
}

/// Outcome of one pair evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchEvaluation {
    /// Weighted score accumulated before a decision was reached.
    pub score: f64,
    /// How many matchers actually ran.
    pub executed: usize,
    pub is_match: bool,
}

/// Classify a pair: the correspondence with its score if the weighted
/// average reaches the threshold, nothing otherwise.
pub fn match_pair(
    left: &Entity,
    right: &Entity,
    strategy: &MatchStrategy,
) -> Result<Option<Correspondence>> {
    let eval = strategy.evaluate(left, right)?;
    Ok(eval.is_match.then(|| {
        Correspondence::new(left.id.clone(), right.id.clone(), Some(eval.score))
    }))
}
