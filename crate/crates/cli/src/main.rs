use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use dedup_cli::config::{load_strategy_file, AppConfig};
use dedup_cli::dataset::{self, Dataset, FileFormat};
use dedup_cli::error::{HarnessError, Result};
use dedup_cli::experiment::{self, RunSettings, WorkflowKind};
use dedup_cli::report;
use dedup_core::{KeyRule, MatchStrategy};

#[derive(Parser)]
#[command(
    name = "dedup",
    version,
    about = "Sorted-neighborhood deduplication workflows on an in-process MapReduce engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one workflow and emit its report
    Run(RunArgs),
    /// Run several workflows and check that their pair sets agree
    Compare(CompareArgs),
    /// Sweep a skewed partitioner family and report load metrics
    Skew(SkewArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Delimited input file; header row, first column is the entity id
    #[arg(long, value_name = "PATH", conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    /// Input format, tsv or csv (inferred from the extension when omitted)
    #[arg(long, value_name = "FMT")]
    format: Option<String>,
    /// Synthetic dataset: n=..,seed=..,dup=..,alpha=a-z or the word "demo"
    #[arg(long, value_name = "SPEC")]
    synthetic: Option<String>,
    /// TOML file with [dataset], [[partitioner]], and [strategy] sections
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

impl DataArgs {
    fn load(&self) -> Result<(Dataset, AppConfig)> {
        let config = match &self.config {
            Some(path) => AppConfig::load(path)?,
            None => AppConfig::default(),
        };

        if let Some(path) = &self.input {
            let format = match &self.format {
                Some(f) => f.parse()?,
                None => FileFormat::from_path(path).ok_or_else(|| {
                    HarnessError::config(format!(
                        "cannot infer the format of {}; pass --format tsv|csv",
                        path.display()
                    ))
                })?,
            };
            return Ok((dataset::ingest(path, format)?, config));
        }
        if let Some(spec) = &self.synthetic {
            return Ok((dataset::synthetic(spec)?, config));
        }
        if let Some(section) = &config.dataset {
            let mut loaded = if let Some(path) = &section.path {
                let path = PathBuf::from(path);
                let format = match &section.format {
                    Some(f) => f.parse()?,
                    None => FileFormat::from_path(&path).ok_or_else(|| {
                        HarnessError::config(format!(
                            "cannot infer the format of {}; set dataset.format",
                            path.display()
                        ))
                    })?,
                };
                dataset::ingest(&path, format)?
            } else if let Some(spec) = &section.synthetic {
                dataset::synthetic(spec)?
            } else {
                return Err(HarnessError::config(
                    "config [dataset] needs either path or synthetic",
                ));
            };
            if let Some(skew_name) = &section.skew {
                let (_, transform) = config.resolve_partitioner(skew_name)?;
                let transform = transform.ok_or_else(|| {
                    HarnessError::config(format!(
                        "dataset.skew = {skew_name:?} does not name a skewed partitioner"
                    ))
                })?;
                loaded.entities =
                    transform.apply(&loaded.entities, &KeyRule::publication_default())?;
                loaded.label = format!("{} skew={skew_name}", loaded.label);
            }
            return Ok((loaded, config));
        }
        Err(HarnessError::config(
            "no dataset: pass --input, --synthetic, or a config with a [dataset] section",
        ))
    }
}

#[derive(Args)]
struct WorkflowArgs {
    /// Sliding-window size (required by all workflows except standard)
    #[arg(long)]
    window: Option<usize>,
    /// Parallel map tasks
    #[arg(long, default_value_t = 1)]
    mappers: usize,
    /// Parallel reduce tasks (defaults to the partitioner's partition count)
    #[arg(long)]
    reducers: Option<usize>,
    /// Partitioner name: configured, demo, single, manual, even<r>, even<r>_<pct>
    #[arg(long)]
    partitioner: Option<String>,
    /// Reducers for the boundary job of jobsn
    #[arg(long, default_value_t = 1)]
    phase2_reducers: usize,
    /// Match strategy TOML file; without it raw blocking pairs are emitted
    #[arg(long = "match", value_name = "PATH")]
    match_file: Option<PathBuf>,
    /// Attribute the blocking key is derived from (default: first column)
    #[arg(long)]
    key_attr: Option<String>,
    /// Blocking-key prefix length
    #[arg(long, default_value_t = 2)]
    key_len: usize,
}

impl WorkflowArgs {
    fn settings(&self, workflow: WorkflowKind) -> RunSettings {
        RunSettings {
            workflow,
            window: self.window,
            mappers: self.mappers,
            reducers: self.reducers,
            boundary_reducers: self.phase2_reducers,
            partitioner: self.partitioner.clone(),
            key_attribute: self.key_attr.clone(),
            key_length: self.key_len,
        }
    }

    fn strategy(&self, dataset: &Dataset, config: &AppConfig) -> Result<Option<MatchStrategy>> {
        if let Some(path) = &self.match_file {
            return Ok(Some(load_strategy_file(path, dataset)?));
        }
        match &config.strategy {
            Some(section) => Ok(Some(section.build(dataset)?)),
            None => Ok(None),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Workflow: seq-sn, standard, srp, jobsn, or repsn
    #[arg(long)]
    workflow: String,
    #[command(flatten)]
    flow: WorkflowArgs,
    /// Write the canonical pair listing to this file
    #[arg(long, value_name = "PATH")]
    emit_pairs: Option<PathBuf>,
    /// Write the report to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated workflow list, e.g. seq-sn,jobsn,repsn
    #[arg(long, value_name = "LIST")]
    workflows: String,
    #[command(flatten)]
    flow: WorkflowArgs,
    /// Write reports and the comparison summary to this file
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SkewArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Base partitioner family, e.g. even8
    #[arg(long)]
    family: String,
    /// Comma-separated skew fractions, e.g. 0.40,0.55,0.70,0.85
    #[arg(long, value_name = "LIST")]
    fractions: String,
    /// Sliding-window size
    #[arg(long)]
    window: usize,
    /// Parallel map tasks (defaults to the family's partition count)
    #[arg(long)]
    mappers: Option<usize>,
    /// Write the table to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

fn run(args: RunArgs) -> Result<i32> {
    let (dataset, config) = args.data.load()?;
    let workflow: WorkflowKind = args.workflow.parse()?;
    let strategy = args.flow.strategy(&dataset, &config)?;
    let settings = args.flow.settings(workflow);
    let (result, run_report) = experiment::execute(&dataset, &settings, &config, strategy.as_ref())?;

    if let Some(path) = &args.emit_pairs {
        report::write_pairs(path, &result.pairs)?;
    }
    run_report.emit(args.report.as_deref())?;
    if args.report.is_some() {
        for warning in &run_report.warnings {
            eprintln!("warning: {warning}");
        }
    }
    Ok(0)
}

fn compare(args: CompareArgs) -> Result<i32> {
    let (dataset, config) = args.data.load()?;
    let workflows = args
        .workflows
        .split(',')
        .filter(|w| !w.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<WorkflowKind>>>()?;
    let strategy = args.flow.strategy(&dataset, &config)?;
    let template = args.flow.settings(WorkflowKind::SeqSn);
    let comparison =
        experiment::compare(&dataset, &template, &workflows, &config, strategy.as_ref())?;

    let mut text = String::new();
    for report in &comparison.reports {
        text.push_str(&report.render());
        text.push('\n');
    }
    text.push_str("comparison:\n");
    text.push_str(&comparison.summary);
    match &args.report {
        Some(path) => std::fs::write(path, &text)?,
        None => print!("{text}"),
    }

    if let Some(violation) = comparison.violation {
        return Err(HarnessError::EqualityFailed(violation));
    }
    Ok(0)
}

fn skew(args: SkewArgs) -> Result<i32> {
    let (dataset, config) = args.data.load()?;
    let fractions = args
        .fractions
        .split(',')
        .filter(|f| !f.is_empty())
        .map(|f| {
            f.trim().parse::<f64>().map_err(|_| {
                HarnessError::config(format!("invalid skew fraction {f:?}"))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let rows = experiment::skew_sweep(
        &dataset,
        &args.family,
        &fractions,
        args.window,
        args.mappers,
        &config,
    )?;
    let text = report::render_skew_table("repsn", &rows);
    match &args.report {
        Some(path) => std::fs::write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare(args),
        Command::Skew(args) => skew(args),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            error.exit_code()
        }
    };
    std::process::exit(code);
}
