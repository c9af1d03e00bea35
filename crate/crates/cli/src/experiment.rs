//! Experiment orchestration: run one workflow, compare several, or sweep a
//! skewed-partitioner family.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use dedup_core::{
    partition, run_jobsn, run_repsn, run_srp, run_standard_blocking, sequential_sn,
    Correspondence, Entity, KeyRoute, KeyRule, MatchStrategy, PartitionFunction, WorkflowResult,
};

use crate::config::AppConfig;
use crate::dataset::Dataset;
use crate::error::{HarnessError, Result};
use crate::report::{RunReport, SkewRow};

/// The workflows the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorkflowKind {
    SeqSn,
    Standard,
    Srp,
    JobSn,
    RepSn,
}

impl WorkflowKind {
    pub const ALL: [WorkflowKind; 5] = [
        WorkflowKind::SeqSn,
        WorkflowKind::Standard,
        WorkflowKind::Srp,
        WorkflowKind::JobSn,
        WorkflowKind::RepSn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WorkflowKind::SeqSn => "seq-sn",
            WorkflowKind::Standard => "standard",
            WorkflowKind::Srp => "srp",
            WorkflowKind::JobSn => "jobsn",
            WorkflowKind::RepSn => "repsn",
        }
    }

    /// Whether this workflow is expected to reproduce the full sequential
    /// sliding-window result.
    pub fn completes_sn(self) -> bool {
        matches!(
            self,
            WorkflowKind::SeqSn | WorkflowKind::JobSn | WorkflowKind::RepSn
        )
    }
}

impl fmt::Display for WorkflowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for WorkflowKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        WorkflowKind::ALL
            .into_iter()
            .find(|w| w.name() == s)
            .ok_or_else(|| {
                HarnessError::config(format!(
                    "unknown workflow {s:?}; expected one of seq-sn, standard, srp, jobsn, repsn"
                ))
            })
    }
}

/// Everything one run needs besides the dataset.
#[derive(Clone, Debug)]
pub struct RunSettings {
    pub workflow: WorkflowKind,
    pub window: Option<usize>,
    pub mappers: usize,
    pub reducers: Option<usize>,
    pub boundary_reducers: usize,
    pub partitioner: Option<String>,
    pub key_attribute: Option<String>,
    pub key_length: usize,
}

impl RunSettings {
    pub fn new(workflow: WorkflowKind) -> Self {
        RunSettings {
            workflow,
            window: None,
            mappers: 1,
            reducers: None,
            boundary_reducers: 1,
            partitioner: None,
            key_attribute: None,
            key_length: 2,
        }
    }

    fn key_rule(&self, dataset: &Dataset) -> Result<KeyRule> {
        let attribute = match &self.key_attribute {
            None => 0,
            Some(name) => dataset.attribute_index(name).ok_or_else(|| {
                HarnessError::config(format!(
                    "key attribute {name:?} not present; dataset has {:?}",
                    dataset.attribute_names
                ))
            })?,
        };
        if self.key_length == 0 {
            return Err(HarnessError::config("key prefix length must be positive"));
        }
        Ok(KeyRule::new(attribute, self.key_length))
    }

    fn window(&self) -> Result<usize> {
        self.window.ok_or_else(|| {
            HarnessError::config(format!(
                "workflow {} needs --window",
                self.workflow.name()
            ))
        })
    }
}

/// A dataset prepared for one run: skew transform applied, rule resolved.
struct Prepared {
    entities: Vec<Entity>,
    rule: KeyRule,
    partitioner: Option<PartitionFunction>,
    reducers: usize,
}

fn prepare(dataset: &Dataset, settings: &RunSettings, config: &AppConfig) -> Result<Prepared> {
    let rule = settings.key_rule(dataset)?;
    let (partitioner, transform) = match &settings.partitioner {
        None => (None, None),
        Some(name) => {
            let (p, transform) = config.resolve_partitioner(name)?;
            (Some(p), transform)
        }
    };
    let entities = match transform {
        Some(t) => t.apply(&dataset.entities, &rule)?,
        None => dataset.entities.clone(),
    };
    let reducers = settings
        .reducers
        .or_else(|| partitioner.as_ref().map(PartitionFunction::partitions))
        .unwrap_or(1);
    Ok(Prepared {
        entities,
        rule,
        partitioner,
        reducers,
    })
}

fn require_partitioner<'p>(
    prepared: &'p Prepared,
    workflow: WorkflowKind,
) -> Result<&'p PartitionFunction> {
    prepared.partitioner.as_ref().ok_or_else(|| {
        HarnessError::config(format!(
            "workflow {} needs --partitioner",
            workflow.name()
        ))
    })
}

/// Run one workflow over a dataset and assemble its report.
pub fn execute(
    dataset: &Dataset,
    settings: &RunSettings,
    config: &AppConfig,
    strategy: Option<&MatchStrategy>,
) -> Result<(WorkflowResult, RunReport)> {
    let prepared = prepare(dataset, settings, config)?;
    let workflow = settings.workflow;
    let mut warnings = Vec::new();

    // Completion workflows assume each partition can fill a window fringe;
    // short partitions are legal but may hide cross-boundary pairs that
    // span more than two partitions.
    if let (Some(p), Ok(window)) = (&prepared.partitioner, settings.window()) {
        if workflow != WorkflowKind::Standard {
            let counts = partition::counts_by_partition(&prepared.entities, p, &prepared.rule)?;
            for (index, &count) in counts.iter().enumerate() {
                if (count as usize) < window - 1 {
                    warnings.push(format!(
                        "partition {} holds {count} entities, fewer than window-1 = {}; \
                         boundary completion is best-effort here",
                        index + 1,
                        window - 1
                    ));
                }
            }
        }
    }

    let started = Instant::now();
    let result = match workflow {
        WorkflowKind::SeqSn => {
            sequential_sn(&prepared.entities, &prepared.rule, settings.window()?, strategy)?
        }
        WorkflowKind::Standard => {
            let route = match &prepared.partitioner {
                Some(p) => KeyRoute::Partition(p.clone()),
                None => KeyRoute::Hash,
            };
            run_standard_blocking(
                &prepared.entities,
                &prepared.rule,
                &route,
                settings.mappers,
                prepared.reducers,
                strategy,
            )?
        }
        WorkflowKind::Srp => run_srp(
            &prepared.entities,
            &prepared.rule,
            require_partitioner(&prepared, workflow)?,
            settings.mappers,
            prepared.reducers,
            settings.window()?,
            strategy,
        )?,
        WorkflowKind::JobSn => run_jobsn(
            &prepared.entities,
            &prepared.rule,
            require_partitioner(&prepared, workflow)?,
            settings.mappers,
            prepared.reducers,
            settings.window()?,
            settings.boundary_reducers,
            strategy,
        )?,
        WorkflowKind::RepSn => run_repsn(
            &prepared.entities,
            &prepared.rule,
            require_partitioner(&prepared, workflow)?,
            settings.mappers,
            prepared.reducers,
            settings.window()?,
            strategy,
        )?,
    };
    let elapsed_ms = started.elapsed().as_millis();

    let gini = match &prepared.partitioner {
        Some(p) => Some(partition::profile(&prepared.entities, p, &prepared.rule)?.gini),
        None => None,
    };

    let mut config_echo = vec![("dataset".to_owned(), dataset.label.clone())];
    config_echo.push(("entities".to_owned(), prepared.entities.len().to_string()));
    if let Some(w) = settings.window {
        config_echo.push(("window".to_owned(), w.to_string()));
    }
    config_echo.push(("mappers".to_owned(), settings.mappers.to_string()));
    config_echo.push(("reducers".to_owned(), prepared.reducers.to_string()));
    if workflow == WorkflowKind::JobSn {
        config_echo.push((
            "boundary_reducers".to_owned(),
            settings.boundary_reducers.to_string(),
        ));
    }
    if let Some(p) = &prepared.partitioner {
        config_echo.push(("partitioner".to_owned(), p.name().to_owned()));
    }

    let stats = &result.stats;
    let per_reducer = stats
        .per_reducer_input
        .iter()
        .copied()
        .zip(stats.per_reducer_comparisons.iter().copied())
        .collect();
    let report = RunReport {
        workflow: workflow.name().to_owned(),
        config: config_echo,
        pairs: result.pairs.len() as u64,
        comparisons: stats.comparisons,
        replicated_entities: stats.replicated_entities,
        jobs_run: stats.jobs_run,
        gini,
        per_reducer,
        elapsed_ms,
        warnings,
    };
    Ok((result, report))
}

/// Outcome of comparison mode.
pub struct Comparison {
    pub reports: Vec<RunReport>,
    pub results: Vec<(WorkflowKind, WorkflowResult)>,
    /// Rendered pairwise difference summary.
    pub summary: String,
    /// Violation message when workflows that must agree did not.
    pub violation: Option<String>,
}

fn difference_sample(a: &BTreeSet<Correspondence>, b: &BTreeSet<Correspondence>) -> String {
    const SAMPLE: usize = 8;
    let only_a: Vec<String> = a.difference(b).take(SAMPLE).map(|c| c.to_string()).collect();
    let only_b: Vec<String> = b.difference(a).take(SAMPLE).map(|c| c.to_string()).collect();
    format!(
        "left-only {} e.g. [{}]; right-only {} e.g. [{}]",
        a.difference(b).count(),
        only_a.join(" "),
        b.difference(a).count(),
        only_b.join(" ")
    )
}

/// Run several workflows on one dataset and verify that every workflow
/// expected to complete the sliding-window result produced the same pair
/// set. Other pairings are summarized, not asserted.
pub fn compare(
    dataset: &Dataset,
    template: &RunSettings,
    workflows: &[WorkflowKind],
    config: &AppConfig,
    strategy: Option<&MatchStrategy>,
) -> Result<Comparison> {
    if workflows.is_empty() {
        return Err(HarnessError::config("comparison mode needs workflows"));
    }
    let mut reports = Vec::new();
    let mut results = Vec::new();
    for &workflow in workflows {
        let mut settings = template.clone();
        settings.workflow = workflow;
        let (result, report) = execute(dataset, &settings, config, strategy)?;
        reports.push(report);
        results.push((workflow, result));
    }

    let sets: Vec<(WorkflowKind, BTreeSet<Correspondence>)> = results
        .iter()
        .map(|(w, r)| (*w, r.pairs.iter().cloned().collect()))
        .collect();

    let mut summary = String::new();
    let mut violation = None;
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            let (wa, pa) = &sets[i];
            let (wb, pb) = &sets[j];
            let line = if pa == pb {
                format!("{wa} vs {wb}: equal ({} pairs)\n", pa.len())
            } else {
                format!("{wa} vs {wb}: differ — {}\n", difference_sample(pa, pb))
            };
            summary.push_str(&line);
            if wa.completes_sn() && wb.completes_sn() && pa != pb && violation.is_none() {
                violation = Some(format!(
                    "{wa} and {wb} must produce identical pair sets: {}",
                    difference_sample(pa, pb)
                ));
            }
        }
    }

    Ok(Comparison {
        reports,
        results,
        summary,
        violation,
    })
}

/// Sweep a partitioner family over a list of skew fractions, running the
/// replication workflow once per variant, and report load metrics.
pub fn skew_sweep(
    dataset: &Dataset,
    family: &str,
    fractions: &[f64],
    window: usize,
    mappers: Option<usize>,
    config: &AppConfig,
) -> Result<Vec<SkewRow>> {
    let (base, base_transform) = config.resolve_partitioner(family)?;
    if base_transform.is_some() {
        return Err(HarnessError::config(format!(
            "skew sweep expects an unskewed base family, got {family:?}"
        )));
    }
    let rule = KeyRule::new(0, 2);
    let mappers = mappers.unwrap_or_else(|| base.partitions());

    let mut rows = Vec::new();
    let mut variants: Vec<(String, Option<f64>)> = vec![(base.name().to_owned(), None)];
    for &fraction in fractions {
        variants.push((format!("{}_{:02}", base.name(), (fraction * 100.0).round()), Some(fraction)));
    }

    for (name, fraction) in variants {
        let (entities, partitioner) = match fraction {
            None => (dataset.entities.clone(), base.clone()),
            Some(f) => {
                let (transform, renamed) = dedup_core::make_skewed_partitioner(
                    &base,
                    f,
                    crate::config::DEFAULT_SKEW_SEED,
                )?;
                (transform.apply(&dataset.entities, &rule)?, renamed)
            }
        };
        let gini = partition::profile(&entities, &partitioner, &rule)?.gini;
        let started = Instant::now();
        let result = run_repsn(
            &entities,
            &rule,
            &partitioner,
            mappers,
            partitioner.partitions(),
            window,
            None,
        )?;
        let elapsed_ms = started.elapsed().as_millis();
        rows.push(SkewRow {
            partitioner: name,
            fraction,
            gini,
            max_reducer_input: result
                .stats
                .per_reducer_input
                .iter()
                .copied()
                .max()
                .unwrap_or(0),
            max_reducer_comparisons: result
                .stats
                .per_reducer_comparisons
                .iter()
                .copied()
                .max()
                .unwrap_or(0),
            comparisons: result.stats.comparisons,
            pairs: result.pairs.len() as u64,
            elapsed_ms,
        });
    }
    Ok(rows)
}
