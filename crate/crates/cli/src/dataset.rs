//! Dataset sources: delimited-file ingest and the seeded synthetic
//! generator with planted near-duplicates.

use std::collections::HashSet;
use std::path::Path;

use dedup_core::{fixtures, Correspondence, Entity};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{HarnessError, Result};

/// A loaded dataset: entities, the attribute names behind the indices,
/// and — for synthetic data — the planted duplicate pairs.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub label: String,
    pub entities: Vec<Entity>,
    pub attribute_names: Vec<String>,
    pub planted: Vec<Correspondence>,
}

impl Dataset {
    /// Index of a named attribute.
    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attribute_names.iter().position(|a| a == name)
    }
}

/// Input file format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileFormat {
    Tsv,
    Csv,
}

impl FileFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "tsv" | "tab" => Some(FileFormat::Tsv),
            "csv" => Some(FileFormat::Csv),
            _ => None,
        }
    }

    fn delimiter(self) -> u8 {
        match self {
            FileFormat::Tsv => b'\t',
            FileFormat::Csv => b',',
        }
    }
}

impl std::str::FromStr for FileFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(FileFormat::Tsv),
            "csv" => Ok(FileFormat::Csv),
            other => Err(HarnessError::config(format!(
                "unknown file format {other:?}, expected tsv or csv"
            ))),
        }
    }
}

/// Read a delimited file: header row names the columns, first column is
/// the entity id, remaining columns are attributes.
pub fn ingest(path: &Path, format: FileFormat) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .flexible(false)
        .from_path(path)
        .map_err(|e| HarnessError::config(format!("cannot open {}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| csv_error_to_ingest(&e))?
        .clone();
    if headers.len() < 2 {
        return Err(HarnessError::config(format!(
            "{} needs an id column and at least one attribute column",
            path.display()
        )));
    }
    let attribute_names: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();

    let mut entities = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error_to_ingest(&e))?;
        let line = record
            .position()
            .map(csv::Position::line)
            .unwrap_or_default();
        let id = record.get(0).unwrap_or_default();
        if id.is_empty() {
            return Err(HarnessError::Ingest {
                line,
                reason: "empty entity id".into(),
            });
        }
        if !seen.insert(id.to_owned()) {
            return Err(HarnessError::DuplicateId {
                id: id.to_owned(),
                line,
            });
        }
        let attributes: Vec<String> = record.iter().skip(1).map(str::to_owned).collect();
        entities.push(Entity::new(id, attributes));
    }

    Ok(Dataset {
        label: path.display().to_string(),
        entities,
        attribute_names,
        planted: Vec::new(),
    })
}

fn csv_error_to_ingest(error: &csv::Error) -> HarnessError {
    let line = match error.kind() {
        csv::ErrorKind::UnequalLengths { pos, .. } => {
            pos.as_ref().map(csv::Position::line).unwrap_or_default()
        }
        _ => error
            .position()
            .map(csv::Position::line)
            .unwrap_or_default(),
    };
    HarnessError::Ingest {
        line,
        reason: error.to_string(),
    }
}

/// Synthetic dataset parameters. Parsed from specs like
/// `n=5000,seed=42,dup=0.05,alpha=a-z`; the word `demo` selects the
/// built-in nine-entity walkthrough dataset instead.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub seed: u64,
    pub duplicate_rate: f64,
    /// Inclusive range of first-letter choices for blocking keys.
    pub alphabet: (char, char),
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n: 1000,
            seed: 1,
            duplicate_rate: 0.0,
            alphabet: ('a', 'z'),
        }
    }
}

impl SyntheticSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let mut out = SyntheticSpec::default();
        for part in spec.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                HarnessError::config(format!("synthetic spec entry {part:?} is not key=value"))
            })?;
            match key.trim() {
                "n" => {
                    out.n = value.trim().parse().map_err(|_| {
                        HarnessError::config(format!("invalid entity count {value:?}"))
                    })?
                }
                "seed" => {
                    out.seed = value.trim().parse().map_err(|_| {
                        HarnessError::config(format!("invalid seed {value:?}"))
                    })?
                }
                "dup" => {
                    let rate: f64 = value.trim().parse().map_err(|_| {
                        HarnessError::config(format!("invalid duplicate rate {value:?}"))
                    })?;
                    if !(0.0..1.0).contains(&rate) {
                        return Err(HarnessError::config(format!(
                            "duplicate rate must lie in [0, 1), got {rate}"
                        )));
                    }
                    out.duplicate_rate = rate;
                }
                "alpha" => {
                    let (lo, hi) = value
                        .trim()
                        .split_once('-')
                        .ok_or_else(|| {
                            HarnessError::config(format!(
                                "alphabet {value:?} is not of the form a-z"
                            ))
                        })?;
                    let (lo, hi) = (single_letter(lo)?, single_letter(hi)?);
                    if lo > hi {
                        return Err(HarnessError::config(format!(
                            "alphabet range {value:?} is reversed"
                        )));
                    }
                    out.alphabet = (lo, hi);
                }
                other => {
                    return Err(HarnessError::config(format!(
                        "unknown synthetic spec key {other:?}"
                    )))
                }
            }
        }
        Ok(out)
    }

    pub fn label(&self) -> String {
        format!(
            "synthetic n={} seed={} dup={:.2} alpha={}-{}",
            self.n, self.seed, self.duplicate_rate, self.alphabet.0, self.alphabet.1
        )
    }
}

fn single_letter(s: &str) -> Result<char> {
    let mut chars = s.trim().chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_lowercase() => Ok(c),
        _ => Err(HarnessError::config(format!(
            "alphabet bound {s:?} must be a single lowercase letter"
        ))),
    }
}

const WORDS: &[&str] = &[
    "analysis", "approach", "blocking", "clustering", "database", "detection", "distributed",
    "efficient", "entity", "evaluation", "framework", "graph", "incremental", "indexing",
    "integration", "join", "language", "learning", "linkage", "matching", "metadata", "method",
    "mining", "model", "network", "optimization", "parallel", "partitioning", "performance",
    "pipeline", "processing", "quality", "query", "ranking", "records", "resolution", "retrieval",
    "scalable", "schema", "search", "semantic", "similarity", "storage", "streaming", "survey",
    "system", "techniques", "web",
];

/// Generate a seeded publication-like dataset. A `duplicate_rate` share of
/// the records are near-copies of earlier records: same abstract, title
/// perturbed by at most two character edits outside the key prefix. The
/// planted pair list accompanies the entities.
pub fn generate(spec: &SyntheticSpec) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let duplicates = (spec.duplicate_rate * spec.n as f64).floor() as usize;
    let originals = spec.n - duplicates;

    let mut entities: Vec<Entity> = Vec::with_capacity(spec.n);
    let (lo, hi) = (spec.alphabet.0 as u8, spec.alphabet.1 as u8);
    for i in 0..originals {
        let first = char::from(rng.random_range(lo..=hi));
        let second = char::from(rng.random_range(lo..=hi));
        let mut token = String::new();
        token.push(first);
        token.push(second);
        for _ in 0..rng.random_range(2..=5usize) {
            token.push(char::from(rng.random_range(b'a'..=b'z')));
        }
        let mut title = token;
        for _ in 0..rng.random_range(2..=5usize) {
            title.push(' ');
            title.push_str(WORDS.choose(&mut rng).expect("word list is non-empty"));
        }
        let abstract_text = (0..rng.random_range(8..=20usize))
            .map(|_| *WORDS.choose(&mut rng).expect("word list is non-empty"))
            .collect::<Vec<_>>()
            .join(" ");
        entities.push(Entity::new(
            format!("e{i:07}"),
            vec![title, abstract_text],
        ));
    }

    let mut planted = Vec::with_capacity(duplicates);
    for i in 0..duplicates {
        let source = entities[rng.random_range(0..originals)].clone();
        let title = perturb_title(source.attribute(0).unwrap_or(""), &mut rng);
        let abstract_text = source.attribute(1).unwrap_or("").to_owned();
        let id = format!("e{:07}", originals + i);
        planted.push(Correspondence::new(
            source.id.clone(),
            id.as_str().into(),
            None,
        ));
        entities.push(Entity::new(id, vec![title, abstract_text]));
    }

    entities.shuffle(&mut rng);
    planted.sort_unstable();

    Ok(Dataset {
        label: spec.label(),
        entities,
        attribute_names: vec!["title".into(), "abstract".into()],
        planted,
    })
}

/// Apply one or two random character edits at positions past the blocking
/// key prefix, keeping the derived key intact.
fn perturb_title(title: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = title.chars().collect();
    for _ in 0..rng.random_range(1..=2usize) {
        if chars.len() < 3 {
            break;
        }
        let pos = rng.random_range(2..chars.len());
        match rng.random_range(0..3u8) {
            0 => chars[pos] = char::from(rng.random_range(b'a'..=b'z')),
            1 => chars.insert(pos, char::from(rng.random_range(b'a'..=b'z'))),
            _ => {
                chars.remove(pos);
            }
        }
    }
    chars.into_iter().collect()
}

/// The built-in nine-entity walkthrough dataset.
pub fn demo_dataset() -> Dataset {
    Dataset {
        label: "demo".into(),
        entities: fixtures::demo_entities(),
        attribute_names: vec!["key".into(), "payload".into()],
        planted: vec![
            Correspondence::new("a".into(), "d".into(), None),
            Correspondence::new("c".into(), "i".into(), None),
        ],
    }
}

/// Load `demo` or a synthetic spec string.
pub fn synthetic(spec: &str) -> Result<Dataset> {
    if spec.trim() == "demo" {
        Ok(demo_dataset())
    } else {
        generate(&SyntheticSpec::parse(spec)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dedup_core::KeyRule;
    use std::io::Write;

    #[test]
    fn ingest_reads_header_and_rows() {
        let mut file = tempfile::NamedTempFile::with_suffix(".tsv").unwrap();
        writeln!(file, "id\ttitle\tabstract").unwrap();
        writeln!(file, "p1\tparallel joins\tlong text one").unwrap();
        writeln!(file, "p2\tsorted runs\tlong text two").unwrap();
        writeln!(file, "p3\tmerge trees\tlong text three").unwrap();
        let dataset = ingest(file.path(), FileFormat::Tsv).unwrap();
        assert_eq!(dataset.entities.len(), 3);
        assert_eq!(dataset.attribute_names, vec!["title", "abstract"]);
        assert_eq!(dataset.entities[0].id.as_str(), "p1");
        assert_eq!(dataset.entities[2].attribute(1), Some("long text three"));
        assert_eq!(dataset.attribute_index("abstract"), Some(1));
    }

    #[test]
    fn ingest_empty_file_after_header() {
        let mut file = tempfile::NamedTempFile::with_suffix(".tsv").unwrap();
        writeln!(file, "id\ttitle").unwrap();
        let dataset = ingest(file.path(), FileFormat::Tsv).unwrap();
        assert!(dataset.entities.is_empty());
    }

    #[test]
    fn ingest_reports_the_malformed_line() {
        let mut file = tempfile::NamedTempFile::with_suffix(".tsv").unwrap();
        writeln!(file, "id\ttitle\tabstract").unwrap();
        writeln!(file, "p1\tcomplete row\ttext").unwrap();
        writeln!(file, "p2\tmissing column").unwrap();
        let err = ingest(file.path(), FileFormat::Tsv).unwrap_err();
        match err {
            HarnessError::Ingest { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ingest_rejects_duplicate_ids() {
        let mut file = tempfile::NamedTempFile::with_suffix(".csv").unwrap();
        writeln!(file, "id,title").unwrap();
        writeln!(file, "p1,one").unwrap();
        writeln!(file, "p1,two").unwrap();
        let err = ingest(file.path(), FileFormat::Csv).unwrap_err();
        assert!(matches!(err, HarnessError::DuplicateId { .. }));
    }

    #[test]
    fn generation_is_reproducible_byte_for_byte() {
        let spec = SyntheticSpec::parse("n=500,seed=99,dup=0.1").unwrap();
        let one = generate(&spec).unwrap();
        let two = generate(&spec).unwrap();
        assert_eq!(format!("{:?}", one.entities), format!("{:?}", two.entities));
        assert_eq!(one.planted, two.planted);
    }

    #[test]
    fn duplicates_share_key_and_stay_close() {
        let spec = SyntheticSpec::parse("n=400,seed=3,dup=0.2").unwrap();
        let dataset = generate(&spec).unwrap();
        assert_eq!(dataset.planted.len(), 80);
        let rule = KeyRule::publication_default();
        let by_id = |id: &dedup_core::EntityId| {
            dataset.entities.iter().find(|e| &e.id == id).unwrap()
        };
        for pair in &dataset.planted {
            let left = by_id(&pair.left);
            let right = by_id(&pair.right);
            assert_eq!(
                rule.key_of(left).unwrap(),
                rule.key_of(right).unwrap(),
                "perturbation must not touch the key prefix"
            );
            let sim = dedup_core::edit_similarity(
                left.attribute(0).unwrap(),
                right.attribute(0).unwrap(),
            );
            assert!(sim > 0.8, "planted pair drifted too far: {sim}");
        }
    }

    #[test]
    fn empty_dataset_is_allowed() {
        let dataset = generate(&SyntheticSpec::parse("n=0").unwrap()).unwrap();
        assert!(dataset.entities.is_empty());
        assert!(dataset.planted.is_empty());
    }

    #[test]
    fn demo_keyword_yields_the_fixture() {
        let dataset = synthetic("demo").unwrap();
        assert_eq!(dataset.entities.len(), 9);
        let rule = KeyRule::publication_default();
        let keys: Vec<String> = dataset
            .entities
            .iter()
            .map(|e| rule.key_of(e).unwrap().as_str().to_owned())
            .collect();
        assert_eq!(keys, ["1", "2", "3", "1", "2", "2", "3", "2", "3"]);
    }

    #[test]
    fn spec_parse_rejects_nonsense() {
        assert!(SyntheticSpec::parse("n=abc").is_err());
        assert!(SyntheticSpec::parse("dup=1.5").is_err());
        assert!(SyntheticSpec::parse("alpha=z-a").is_err());
        assert!(SyntheticSpec::parse("what=1").is_err());
    }
}
