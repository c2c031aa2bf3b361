//! Experiment orchestration: TOML configs, run matrices across seeds with
//! idempotent resume, JSONL run logs, and the aggregate results CSV.

pub mod stats;

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cases::{VariantConfig, VariantMode};
use crate::engine::{run_evolution, AdditionEvent, GenerationLog, RunConfig, RunResult};
use crate::error::ConfigError;
use crate::problems::{write_dataset, DatasetHeader, Problem, TrainingCase};
use crate::rng;
use crate::vm::CATALOG_VERSION;

/// Environment variable bounding how many runs execute concurrently.
pub const PARALLELISM_ENV: &str = "ICDGP_JOBS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error(transparent)]
    Invalid(#[from] ConfigError),
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("{failed} of {total} runs failed")]
    FailedRuns { failed: usize, total: usize },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

/// One experiment arm, resolved and validated.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub name: String,
    pub problem: Problem,
    pub run_config: RunConfig,
    pub train_size: usize,
    pub test_size: usize,
    pub data_seed: u64,
}

impl Experiment {
    /// The arm's dataset; deterministic in `data_seed`.
    pub fn dataset(&self) -> Vec<TrainingCase> {
        self.problem.generate_dataset(
            self.train_size,
            self.test_size,
            &mut rng::seeded(self.data_seed),
        )
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    experiment: ExperimentSection,
    #[serde(default)]
    evolution: EvolutionSection,
    variant: VariantSection,
    #[serde(default)]
    data: DataSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    name: String,
    problem: String,
    /// `desk` (population 200, 2M executions) or `full` (population 1000,
    /// 300k executions per training case). Explicit keys override.
    #[serde(default = "default_scale")]
    scale: String,
}

fn default_scale() -> String {
    "desk".to_string()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvolutionSection {
    population_size: Option<usize>,
    budget: Option<u64>,
    step_limit: Option<u64>,
    umad_rate: Option<f64>,
    min_initial_genome: Option<usize>,
    max_initial_genome: Option<usize>,
    max_genome_size: Option<usize>,
    simplify_steps: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariantSection {
    variant: String,
    q: Option<f64>,
    d: Option<u64>,
    cap: Option<usize>,
    initial_active_size: Option<usize>,
    random_addition: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DataSection {
    train_size: Option<usize>,
    test_size: Option<usize>,
    data_seed: Option<u64>,
}

/// Loads and validates one experiment arm from a TOML file.
pub fn load_experiment(path: &Path) -> Result<Experiment, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let file: ExperimentFile = toml::from_str(&text).map_err(|e| HarnessError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    resolve_experiment(file).map_err(|e| HarnessError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn resolve_experiment(file: ExperimentFile) -> Result<Experiment, ConfigError> {
    let problem = Problem::from_name(&file.experiment.problem)?;
    let train_size = file.data.train_size.unwrap_or(problem.default_train_size());
    let test_size = file.data.test_size.unwrap_or(problem.default_test_size());
    let data_seed = file.data.data_seed.unwrap_or(20260809);

    let mut variant = VariantConfig::new(VariantMode::parse(&file.variant.variant)?);
    if let Some(q) = file.variant.q {
        variant.q = q;
    }
    if let Some(d) = file.variant.d {
        variant.d = d;
    }
    if let Some(cap) = file.variant.cap {
        variant.cap = cap;
    }
    if let Some(s) = file.variant.initial_active_size {
        variant.initial_size = s;
    }
    if let Some(r) = file.variant.random_addition {
        variant.random_addition = r;
    }

    let mut config = match file.experiment.scale.as_str() {
        "desk" => RunConfig::desk_scale(variant),
        "full" => RunConfig::full_scale(variant, problem),
        other => {
            return Err(ConfigError::invalid(
                "scale",
                format!("`{other}` is neither `desk` nor `full`"),
            ))
        }
    };
    let ev = file.evolution;
    if let Some(v) = ev.population_size {
        config.population_size = v;
    }
    if let Some(v) = ev.budget {
        config.budget = v;
    }
    if let Some(v) = ev.step_limit {
        config.step_limit = v;
    }
    if let Some(v) = ev.umad_rate {
        config.umad_rate = v;
    }
    if let Some(v) = ev.min_initial_genome {
        config.min_initial_genome = v;
    }
    if let Some(v) = ev.max_initial_genome {
        config.max_initial_genome = v;
    }
    if let Some(v) = ev.max_genome_size {
        config.max_genome_size = v;
    }
    if let Some(v) = ev.simplify_steps {
        config.simplify_steps = v;
    }
    config.validate()?;
    if config.variant.initial_size > train_size {
        return Err(ConfigError::InitialActiveTooLarge {
            requested: config.variant.initial_size,
            available: train_size,
        });
    }
    if file.experiment.name.is_empty()
        || !file
            .experiment
            .name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        return Err(ConfigError::invalid(
            "name",
            "must be non-empty and use only [A-Za-z0-9_-]",
        ));
    }
    Ok(Experiment {
        name: file.experiment.name,
        problem,
        run_config: config,
        train_size,
        test_size,
        data_seed,
    })
}

/// Parses a seed list: a single seed (`7`), an inclusive range (`0..9`), or
/// a comma list (`1,2,5`). Seeds must be distinct.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>, ConfigError> {
    let bad = |msg: &str| ConfigError::invalid("seeds", format!("`{spec}`: {msg}"));
    let seeds: Vec<u64> = if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad("bad range start"))?;
        let b: u64 = b.trim().parse().map_err(|_| bad("bad range end"))?;
        if a > b {
            return Err(bad("empty range"));
        }
        (a..=b).collect()
    } else {
        spec.split(',')
            .map(|p| p.trim().parse::<u64>().map_err(|_| bad("bad seed")))
            .collect::<Result<Vec<_>, _>>()?
    };
    if seeds.is_empty() {
        return Err(bad("no seeds"));
    }
    let mut dedup = seeds.clone();
    dedup.sort_unstable();
    dedup.dedup();
    if dedup.len() != seeds.len() {
        return Err(bad("seeds must be distinct"));
    }
    Ok(seeds)
}

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

/// One line of a per-run JSONL file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunRecord {
    Header(RunHeader),
    Generation(GenerationLog),
    Addition(AdditionEvent),
    Summary(RunSummary),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunHeader {
    pub problem: String,
    pub variant: String,
    pub seed: u64,
    pub population_size: usize,
    pub budget: u64,
    pub data_seed: u64,
    pub catalog_version: u32,
    pub initial_active: Vec<usize>,
}

/// Terminal record of one run; also the aggregate CSV row.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub variant: String,
    pub seed: u64,
    pub outcome: String,
    pub generations: u64,
    pub executions: u64,
    pub final_active: usize,
    pub executions_at_solution: Option<u64>,
}

/// Outcome string recorded for a run that panicked.
pub const RUN_FAILED: &str = "run_failed";

fn summarize(result: &RunResult) -> RunSummary {
    RunSummary {
        problem: result.problem.name().to_string(),
        variant: result.variant.clone(),
        seed: result.seed,
        outcome: result.outcome.as_str().to_string(),
        generations: result.generations,
        executions: result.ledger.used(),
        final_active: result.final_active_size,
        executions_at_solution: result.executions_at_solution(),
    }
}

/// Serializes a completed run as JSONL: header, generation records with
/// their addition events, then the summary.
pub fn run_records(exp: &Experiment, result: &RunResult) -> Vec<RunRecord> {
    let mut records = vec![RunRecord::Header(RunHeader {
        problem: result.problem.name().to_string(),
        variant: result.variant.clone(),
        seed: result.seed,
        population_size: exp.run_config.population_size,
        budget: exp.run_config.budget,
        data_seed: exp.data_seed,
        catalog_version: CATALOG_VERSION,
        initial_active: result.initial_active.clone(),
    })];
    for log in &result.logs {
        let generation = log.generation;
        records.push(RunRecord::Generation(log.clone()));
        for add in result.additions.iter().filter(|a| a.generation == generation) {
            records.push(RunRecord::Addition(add.clone()));
        }
    }
    records.push(RunRecord::Summary(summarize(result)));
    records
}

fn write_records(path: &Path, records: &[RunRecord]) -> Result<(), HarnessError> {
    let mut out = Vec::new();
    for rec in records {
        serde_json::to_writer(&mut out, rec).expect("records serialize");
        out.push(b'\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Reads a per-run JSONL file back into records.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut records = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line).map_err(|e| HarnessError::Malformed {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?,
        );
    }
    Ok(records)
}

fn completed_summary(path: &Path) -> Option<RunSummary> {
    if !path.exists() {
        return None;
    }
    let records = read_records(path).ok()?;
    records.into_iter().rev().find_map(|r| match r {
        RunRecord::Summary(s) => Some(s),
        _ => None,
    })
}

// ---------------------------------------------------------------------------
// Matrix execution
// ---------------------------------------------------------------------------

fn run_file_path(out_dir: &Path, exp: &Experiment, seed: u64) -> PathBuf {
    out_dir.join("runs").join(format!("{}_s{}.jsonl", exp.name, seed))
}

/// Executes every (experiment, seed) run, skipping runs already completed on
/// disk, and writes `aggregate.csv` under `out_dir`. Failed (panicked) runs
/// are recorded with outcome `run_failed`, never dropped.
pub fn run_matrix(
    experiments: &[Experiment],
    seeds: &[u64],
    out_dir: &Path,
) -> Result<Vec<RunSummary>, HarnessError> {
    run_matrix_with(experiments, seeds, out_dir, |exp, dataset, seed| {
        run_evolution(&exp.run_config, exp.problem, dataset, seed)
            .expect("configs validated before launch")
    })
}

/// Matrix driver with an injectable runner (tests substitute failing ones).
pub(crate) fn run_matrix_with(
    experiments: &[Experiment],
    seeds: &[u64],
    out_dir: &Path,
    runner: impl Fn(&Experiment, &[TrainingCase], u64) -> RunResult + Sync,
) -> Result<Vec<RunSummary>, HarnessError> {
    let runs_dir = out_dir.join("runs");
    fs::create_dir_all(&runs_dir).map_err(io_err(&runs_dir))?;

    let jobs: Vec<(&Experiment, u64)> = experiments
        .iter()
        .flat_map(|e| seeds.iter().map(move |&s| (e, s)))
        .collect();

    let pool = thread_pool()?;
    let results: Vec<Result<RunSummary, HarnessError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(exp, seed)| {
                let path = run_file_path(out_dir, exp, seed);
                if let Some(summary) = completed_summary(&path) {
                    return Ok(summary);
                }
                let dataset = exp.dataset();
                let outcome = catch_unwind(AssertUnwindSafe(|| runner(exp, &dataset, seed)));
                let (records, summary) = match outcome {
                    Ok(result) => {
                        let summary = summarize(&result);
                        (run_records(exp, &result), summary)
                    }
                    Err(_) => {
                        let summary = RunSummary {
                            problem: exp.problem.name().to_string(),
                            variant: exp.run_config.variant.label(),
                            seed,
                            outcome: RUN_FAILED.to_string(),
                            generations: 0,
                            executions: 0,
                            final_active: 0,
                            executions_at_solution: None,
                        };
                        (vec![RunRecord::Summary(summary.clone())], summary)
                    }
                };
                write_records(&path, &records)?;
                Ok(summary)
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        rows.push(r?);
    }
    rows.sort_by(|a, b| {
        (&a.problem, &a.variant, a.seed).cmp(&(&b.problem, &b.variant, b.seed))
    });
    write_aggregate(&out_dir.join("aggregate.csv"), &rows)?;
    Ok(rows)
}

fn thread_pool() -> Result<rayon::ThreadPool, HarnessError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(PARALLELISM_ENV) {
        let n: usize = v.parse().map_err(|_| {
            ConfigError::invalid(PARALLELISM_ENV, format!("`{v}` is not a thread count"))
        })?;
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build()
        .map_err(|e| ConfigError::invalid(PARALLELISM_ENV, e.to_string()).into())
}

/// Writes the aggregate CSV (one row per run).
pub fn write_aggregate(path: &Path, rows: &[RunSummary]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| HarnessError::Malformed {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    }
    let bytes = w.into_inner().expect("csv buffer");
    fs::write(path, bytes).map_err(io_err(path))
}

/// Reads an aggregate CSV back.
pub fn read_aggregate(path: &Path) -> Result<Vec<RunSummary>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::Malformed {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    r.deserialize()
        .map(|rec| {
            rec.map_err(|e| HarnessError::Malformed {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Generates a dataset and writes it with its seed header.
pub fn generate_data_file(
    problem: Problem,
    seed: u64,
    train_size: usize,
    test_size: usize,
    path: &Path,
) -> Result<(), HarnessError> {
    let cases = problem.generate_dataset(train_size, test_size, &mut rng::seeded(seed));
    let header = DatasetHeader {
        problem,
        seed,
        train_size,
        test_size,
        catalog_version: CATALOG_VERSION,
    };
    let mut buf = Vec::new();
    write_dataset(&mut buf, &header, &cases).map_err(io_err(path))?;
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    file.write_all(&buf).map_err(io_err(path))
}

#[cfg(test)]
mod tests;
