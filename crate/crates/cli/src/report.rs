//! Structured run reports: flat `key: value` lines plus a per-reducer
//! table, deterministic for a fixed seed and configuration except for the
//! elapsed-time field.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use dedup_core::Correspondence;

use crate::error::Result;

#[derive(Clone, Debug)]
pub struct RunReport {
    pub workflow: String,
    /// Configuration echo, in print order.
    pub config: Vec<(String, String)>,
    pub pairs: u64,
    pub comparisons: u64,
    pub replicated_entities: u64,
    pub jobs_run: u32,
    pub gini: Option<f64>,
    /// `(input records, pair evaluations)` per reducer, jobs concatenated.
    pub per_reducer: Vec<(usize, u64)>,
    pub elapsed_ms: u128,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "workflow: {}", self.workflow);
        for (key, value) in &self.config {
            let _ = writeln!(out, "{key}: {value}");
        }
        let _ = writeln!(out, "pairs: {}", self.pairs);
        let _ = writeln!(out, "comparisons: {}", self.comparisons);
        let _ = writeln!(out, "replicated_entities: {}", self.replicated_entities);
        let _ = writeln!(out, "jobs_run: {}", self.jobs_run);
        if let Some(gini) = self.gini {
            let _ = writeln!(out, "gini: {gini:.6}");
        }
        let _ = writeln!(out, "elapsed_ms: {}", self.elapsed_ms);
        if !self.per_reducer.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "reducer\tinput\tcomparisons");
            for (index, (input, comparisons)) in self.per_reducer.iter().enumerate() {
                let _ = writeln!(out, "{}\t{input}\t{comparisons}", index + 1);
            }
        }
        for warning in &self.warnings {
            let _ = writeln!(out, "warning: {warning}");
        }
        out
    }

    /// Write the rendered report to a file or, without a path, to stdout.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        match path {
            Some(path) => std::fs::write(path, self.render())?,
            None => print!("{}", self.render()),
        }
        Ok(())
    }
}

/// One row per pair, `left<TAB>right[<TAB>score]`, in canonical order.
pub fn render_pairs(pairs: &[Correspondence]) -> String {
    let mut out = String::new();
    for pair in pairs {
        match pair.similarity {
            Some(score) => {
                let _ = writeln!(out, "{}\t{}\t{score:.6}", pair.left, pair.right);
            }
            None => {
                let _ = writeln!(out, "{}\t{}", pair.left, pair.right);
            }
        }
    }
    out
}

pub fn write_pairs(path: &Path, pairs: &[Correspondence]) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(render_pairs(pairs).as_bytes())?;
    Ok(())
}

/// Table for the skew sweep: one row per partitioner variant.
#[derive(Clone, Debug)]
pub struct SkewRow {
    pub partitioner: String,
    pub fraction: Option<f64>,
    pub gini: f64,
    pub max_reducer_input: usize,
    pub max_reducer_comparisons: u64,
    pub comparisons: u64,
    pub pairs: u64,
    pub elapsed_ms: u128,
}

pub fn render_skew_table(workflow: &str, rows: &[SkewRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "workflow: {workflow}");
    let _ = writeln!(
        out,
        "partitioner\tfraction\tgini\tmax_input\tmax_comparisons\tcomparisons\tpairs\telapsed_ms"
    );
    for row in rows {
        let fraction = row
            .fraction
            .map_or("-".to_owned(), |f| format!("{f:.2}"));
        let _ = writeln!(
            out,
            "{}\t{}\t{:.6}\t{}\t{}\t{}\t{}\t{}",
            row.partitioner,
            fraction,
            row.gini,
            row.max_reducer_input,
            row.max_reducer_comparisons,
            row.comparisons,
            row.pairs,
            row.elapsed_ms
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_renders_flat_lines_and_table() {
        let report = RunReport {
            workflow: "srp".into(),
            config: vec![("window".into(), "3".into())],
            pairs: 12,
            comparisons: 12,
            replicated_entities: 0,
            jobs_run: 1,
            gini: Some(1.0 / 6.0),
            per_reducer: vec![(6, 9), (3, 3)],
            elapsed_ms: 5,
            warnings: vec![],
        };
        let text = report.render();
        assert!(text.contains("workflow: srp\n"));
        assert!(text.contains("window: 3\n"));
        assert!(text.contains("gini: 0.166667\n"));
        assert!(text.contains("reducer\tinput\tcomparisons\n"));
        assert!(text.contains("2\t3\t3\n"));
    }

    #[test]
    fn pairs_render_with_and_without_scores() {
        let pairs = vec![
            Correspondence::new("a".into(), "b".into(), None),
            Correspondence::new("c".into(), "d".into(), Some(0.8125)),
        ];
        assert_eq!(render_pairs(&pairs), "a\tb\nc\td\t0.812500\n");
    }
}
