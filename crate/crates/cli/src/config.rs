//! TOML configuration: named partitioners, a match strategy, and an
//! optional dataset source, plus resolution of built-in partitioner names.

use std::path::Path;

use dedup_core::{
    make_even_partitioner, make_skewed_partitioner, KeyDomain, MatchStrategy, Matcher,
    PartitionFunction, SimilarityFn, SkewTransform,
};
use serde::Deserialize;

use crate::dataset::Dataset;
use crate::error::{HarnessError, Result};

/// Seed for skew-injection key rewriting when none is configured.
pub const DEFAULT_SKEW_SEED: u64 = 7;

/// Ten-partition boundary list for the `manual` built-in. The values are
/// decile cuts of the synthetic generator's key distribution (uniform
/// two-letter keys), not taken from any published dataset.
const MANUAL_BOUNDARIES: [&str; 9] = ["cp", "fe", "hs", "kh", "mw", "pl", "sa", "up", "xe"];

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppConfig {
    pub dataset: Option<DatasetSection>,
    #[serde(default, rename = "partitioner")]
    pub partitioners: Vec<PartitionerSection>,
    pub strategy: Option<StrategySection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub path: Option<String>,
    pub format: Option<String>,
    pub synthetic: Option<String>,
    /// Name of a skewed partitioner whose key-rewriting transform is
    /// applied to the dataset after loading.
    pub skew: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionerSection {
    pub name: String,
    pub kind: String,
    pub boundaries: Option<Vec<String>>,
    /// Partition count for `kind = "even"`.
    #[serde(alias = "partitions")]
    pub r: Option<usize>,
    /// Fraction for `kind = "skewed"`.
    #[serde(alias = "fraction")]
    pub f: Option<f64>,
    pub base: Option<String>,
    pub seed: Option<u64>,
    /// Key-code domain for `kind = "even"` as two keys, low then high.
    pub domain: Option<[String; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySection {
    pub threshold: f64,
    #[serde(rename = "matcher")]
    pub matchers: Vec<MatcherSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatcherSection {
    pub attr: AttrRef,
    #[serde(rename = "fn")]
    pub function: String,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum AttrRef {
    Index(usize),
    Name(String),
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<AppConfig> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| {
            HarnessError::config(format!("cannot parse {}: {e}", path.display()))
        })
    }

    fn section(&self, name: &str) -> Option<&PartitionerSection> {
        self.partitioners.iter().find(|p| p.name == name)
    }

    /// Resolve a partitioner name: configured entries first, then the
    /// built-ins `demo`, `single`, `manual`, `even<r>`, and
    /// `even<r>_<percent>` (the skewed family).
    pub fn resolve_partitioner(
        &self,
        name: &str,
    ) -> Result<(PartitionFunction, Option<SkewTransform>)> {
        self.resolve_partitioner_inner(name, 0)
    }

    fn resolve_partitioner_inner(
        &self,
        name: &str,
        depth: usize,
    ) -> Result<(PartitionFunction, Option<SkewTransform>)> {
        if depth > 8 {
            return Err(HarnessError::config(format!(
                "partitioner {name:?} nests skewed bases too deeply"
            )));
        }
        if let Some(section) = self.section(name) {
            return self.build_section(section, depth);
        }
        match name {
            "demo" => return Ok((dedup_core::fixtures::demo_partitioner(), None)),
            "single" => return Ok((PartitionFunction::constant("single"), None)),
            "manual" => {
                let boundaries = MANUAL_BOUNDARIES.iter().map(|b| (*b).into()).collect();
                let p = PartitionFunction::manual("manual", boundaries)?;
                return Ok((p, None));
            }
            _ => {}
        }
        if let Some(rest) = name.strip_prefix("even") {
            let (r_part, fraction_part) = match rest.split_once('_') {
                Some((r, f)) => (r, Some(f)),
                None => (rest, None),
            };
            if let Ok(r) = r_part.parse::<usize>() {
                let base = make_even_partitioner(r, KeyDomain::letters())
                    .map_err(HarnessError::Core)?;
                return match fraction_part {
                    None => Ok((base, None)),
                    Some(percent) => {
                        let percent: u32 = percent.parse().map_err(|_| {
                            HarnessError::config(format!(
                                "bad skew percentage in partitioner name {name:?}"
                            ))
                        })?;
                        let (transform, renamed) = make_skewed_partitioner(
                            &base,
                            f64::from(percent) / 100.0,
                            DEFAULT_SKEW_SEED,
                        )?;
                        Ok((renamed, Some(transform)))
                    }
                };
            }
        }
        let mut known: Vec<&str> = self.partitioners.iter().map(|p| p.name.as_str()).collect();
        known.extend(["demo", "single", "manual", "even<r>", "even<r>_<percent>"]);
        Err(HarnessError::config(format!(
            "unknown partitioner {name:?}; known: {}",
            known.join(", ")
        )))
    }

    fn build_section(
        &self,
        section: &PartitionerSection,
        depth: usize,
    ) -> Result<(PartitionFunction, Option<SkewTransform>)> {
        match section.kind.as_str() {
            "manual" => {
                let boundaries = section.boundaries.clone().ok_or_else(|| {
                    HarnessError::config(format!(
                        "manual partitioner {:?} needs a boundaries list",
                        section.name
                    ))
                })?;
                let boundaries = boundaries.into_iter().map(Into::into).collect();
                let p = PartitionFunction::manual(section.name.clone(), boundaries)?;
                Ok((p, None))
            }
            "even" => {
                let r = section.r.ok_or_else(|| {
                    HarnessError::config(format!(
                        "even partitioner {:?} needs r",
                        section.name
                    ))
                })?;
                let domain = match &section.domain {
                    None => KeyDomain::letters(),
                    Some([low, high]) => {
                        KeyDomain::new(&low.as_str().into(), &high.as_str().into())
                    }
                };
                let p = make_even_partitioner(r, domain)?.renamed(section.name.clone());
                Ok((p, None))
            }
            "skewed" => {
                let base_name = section.base.as_deref().ok_or_else(|| {
                    HarnessError::config(format!(
                        "skewed partitioner {:?} needs a base",
                        section.name
                    ))
                })?;
                let fraction = section.f.ok_or_else(|| {
                    HarnessError::config(format!(
                        "skewed partitioner {:?} needs f",
                        section.name
                    ))
                })?;
                let (base, _) = self.resolve_partitioner_inner(base_name, depth + 1)?;
                let seed = section.seed.unwrap_or(DEFAULT_SKEW_SEED);
                let (transform, renamed) = make_skewed_partitioner(&base, fraction, seed)?;
                Ok((renamed.renamed(section.name.clone()), Some(transform)))
            }
            other => Err(HarnessError::config(format!(
                "partitioner {:?} has unknown kind {other:?} (expected manual, even, or skewed)",
                section.name
            ))),
        }
    }
}

impl StrategySection {
    /// Turn the section into a strategy, resolving attribute names against
    /// the dataset's header.
    pub fn build(&self, dataset: &Dataset) -> Result<MatchStrategy> {
        let matchers = self
            .matchers
            .iter()
            .map(|m| {
                let attribute = match &m.attr {
                    AttrRef::Index(i) => *i,
                    AttrRef::Name(name) => dataset.attribute_index(name).ok_or_else(|| {
                        HarnessError::config(format!(
                            "matcher attribute {name:?} not present; dataset has {:?}",
                            dataset.attribute_names
                        ))
                    })?,
                };
                let similarity = match m.function.as_str() {
                    "edit" => SimilarityFn::Edit,
                    "trigram" => SimilarityFn::Trigram,
                    "dice" | "trigram-dice" => SimilarityFn::TrigramDice,
                    other => {
                        return Err(HarnessError::config(format!(
                            "unknown similarity function {other:?} (expected edit, trigram, or dice)"
                        )))
                    }
                };
                Ok(Matcher {
                    attribute,
                    similarity,
                    weight: m.weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MatchStrategy::new(matchers, self.threshold).map_err(HarnessError::Core)
    }
}

/// Load a standalone strategy file (same shape as the `[strategy]`
/// section).
pub fn load_strategy_file(path: &Path, dataset: &Dataset) -> Result<MatchStrategy> {
    let text = std::fs::read_to_string(path)?;
    let section: StrategySection = toml::from_str(&text).map_err(|e| {
        HarnessError::config(format!("cannot parse {}: {e}", path.display()))
    })?;
    section.build(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset;

    #[test]
    fn builtin_partitioner_names_resolve() {
        let config = AppConfig::default();
        let (demo, none) = config.resolve_partitioner("demo").unwrap();
        assert_eq!(demo.partitions(), 2);
        assert!(none.is_none());

        let (even8, _) = config.resolve_partitioner("even8").unwrap();
        assert_eq!(even8.partitions(), 8);

        let (manual, _) = config.resolve_partitioner("manual").unwrap();
        assert_eq!(manual.partitions(), 10);

        let (skewed, transform) = config.resolve_partitioner("even8_85").unwrap();
        assert_eq!(skewed.partitions(), 8);
        assert_eq!(skewed.name(), "even8_85");
        assert!((transform.unwrap().fraction() - 0.85).abs() < 1e-12);

        assert!(config.resolve_partitioner("nope").is_err());
    }

    #[test]
    fn config_sections_parse_and_build() {
        let text = r#"
            [dataset]
            synthetic = "n=50,seed=2"

            [[partitioner]]
            name = "coarse"
            kind = "even"
            r = 4

            [[partitioner]]
            name = "coarse_60"
            kind = "skewed"
            base = "coarse"
            f = 0.60
            seed = 11

            [[partitioner]]
            name = "handmade"
            kind = "manual"
            boundaries = ["f ", "pz"]

            [strategy]
            threshold = 0.75
            [[strategy.matcher]]
            attr = "title"
            fn = "edit"
            weight = 0.5
            [[strategy.matcher]]
            attr = 1
            fn = "trigram"
            weight = 0.5
        "#;
        let config: AppConfig = toml::from_str(text).unwrap();
        assert_eq!(config.partitioners.len(), 3);

        let (coarse, _) = config.resolve_partitioner("coarse").unwrap();
        assert_eq!(coarse.partitions(), 4);
        let (skewed, transform) = config.resolve_partitioner("coarse_60").unwrap();
        assert_eq!(skewed.name(), "coarse_60");
        assert!(transform.is_some());
        let (handmade, _) = config.resolve_partitioner("handmade").unwrap();
        assert_eq!(handmade.partitions(), 3);

        let dataset = dataset::synthetic("n=10,seed=1").unwrap();
        let strategy = config.strategy.unwrap().build(&dataset).unwrap();
        assert_eq!(strategy.matchers().len(), 2);
        assert_eq!(strategy.matchers()[0].attribute, 0);
        assert_eq!(strategy.matchers()[1].attribute, 1);
    }

    #[test]
    fn strategy_rejects_unknown_attributes_and_functions() {
        let dataset = dataset::synthetic("n=5,seed=1").unwrap();
        let bad_attr: StrategySection = toml::from_str(
            r#"
            threshold = 0.5
            [[matcher]]
            attr = "venue"
            fn = "edit"
        "#,
        )
        .unwrap();
        assert!(bad_attr.build(&dataset).is_err());

        let bad_fn: StrategySection = toml::from_str(
            r#"
            threshold = 0.5
            [[matcher]]
            attr = "title"
            fn = "cosine"
        "#,
        )
        .unwrap();
        assert!(bad_fn.build(&dataset).is_err());
    }
}
