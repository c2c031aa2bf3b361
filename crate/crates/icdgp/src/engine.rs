//! The generational evolutionary loop: evaluation on the active set, budget
//! accounting, lexicase selection, UMAD variation, counterexample hooks,
//! solution verification, simplification, generalization testing, and
//! diversity telemetry.
//!
//! Budget accounting counts (program, case) executions. Each generation
//! costs `population_size * |T_A|` evaluation executions; verifying a
//! trigger individual costs one execution per training case it has not
//! seen; simplification executions are tracked in their own ledger bucket.
//! A run never starts a generation once the budget is used up.

use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::cases::{CapContext, CaseSet, TriggerOutcome, VariantConfig, VariantMode};
use crate::error::ConfigError;
use crate::genome::{genome_to_line, random_genome, translate, PlushyGenome};
use crate::problems::{case_error, Problem, TrainingCase};
use crate::rng as rngs;
use crate::selection::{detect_hyperselection, lexicase_select, ErrorVector};
use crate::vm::{execute, output_of, PushProgram, PushValue};

/// An evaluated member of the population.
#[derive(Clone, Debug)]
pub struct Individual {
    pub genome: PlushyGenome,
    pub program: PushProgram,
    /// Per-active-case errors, in active-set order.
    pub errors: ErrorVector,
    /// Per-active-case outputs, in the same order; `None` is NO_OUTPUT.
    pub behavior: Vec<Option<PushValue>>,
}

impl Individual {
    pub fn pass_count(&self) -> usize {
        self.errors.iter().filter(|&&e| e == 0.0).count()
    }
}

/// Execution counts by purpose; the run terminates at a generation boundary
/// once `used() >= limit`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub limit: u64,
    pub evaluation: u64,
    pub verification: u64,
    pub simplification: u64,
}

impl BudgetLedger {
    pub fn new(limit: u64) -> Self {
        BudgetLedger {
            limit,
            ..Default::default()
        }
    }

    pub fn used(&self) -> u64 {
        self.evaluation + self.verification + self.simplification
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    TrainSolutionGeneralized,
    TrainSolutionFailedTest,
    BudgetExhausted,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::TrainSolutionGeneralized => "train_solution_generalized",
            Outcome::TrainSolutionFailedTest => "train_solution_failed_test",
            Outcome::BudgetExhausted => "budget_exhausted",
        }
    }
}

/// What triggered a case addition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdditionSource {
    Passer,
    Threshold,
    Tick,
    RandomTick,
}

/// One case addition, with enough context to re-check it independently:
/// the triggering individual's serialized genome and its error on the
/// added case at the moment of addition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdditionEvent {
    pub generation: u64,
    pub case_index: usize,
    pub source: AdditionSource,
    pub trigger_genome: Option<String>,
    pub trigger_error: Option<f64>,
    pub evicted: Option<usize>,
}

/// Per-generation telemetry record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenerationLog {
    pub generation: u64,
    /// Cumulative executions at the end of the generation (before any
    /// post-solution simplification).
    pub executions_used: u64,
    pub active_cases: usize,
    pub best_pass_count: usize,
    pub behavioral_diversity: f64,
    pub hyperselection: bool,
    pub cases_added: Vec<usize>,
    pub evaluation_executions: u64,
    pub verification_executions: u64,
}

/// The training solution, before and after simplification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionInfo {
    pub genome: String,
    pub simplified: String,
    pub found_at_generation: u64,
    pub executions_at_solution: u64,
    pub generalized: bool,
}

/// Terminal outcome and full telemetry of one evolutionary run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub problem: Problem,
    pub variant: String,
    pub seed: u64,
    pub outcome: Outcome,
    pub generations: u64,
    pub final_active_size: usize,
    pub initial_active: Vec<usize>,
    pub ledger: BudgetLedger,
    pub solution: Option<SolutionInfo>,
    pub logs: Vec<GenerationLog>,
    pub additions: Vec<AdditionEvent>,
}

impl RunResult {
    pub fn executions_at_solution(&self) -> Option<u64> {
        self.solution.as_ref().map(|s| s.executions_at_solution)
    }
}

/// Engine parameters for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub population_size: usize,
    /// Execution budget.
    pub budget: u64,
    /// Interpreter step limit per execution.
    pub step_limit: u64,
    /// UMAD addition rate.
    pub umad_rate: f64,
    /// Initial genome lengths are uniform in this inclusive range.
    pub min_initial_genome: usize,
    pub max_initial_genome: usize,
    /// Children longer than this revert to their parent's genome.
    pub max_genome_size: usize,
    /// Hill-climbing steps for post-solution simplification.
    pub simplify_steps: u64,
    pub variant: VariantConfig,
}

impl RunConfig {
    /// Desk-scale defaults: population 200, 2M executions.
    pub fn desk_scale(variant: VariantConfig) -> Self {
        RunConfig {
            population_size: 200,
            budget: 2_000_000,
            step_limit: crate::vm::DEFAULT_STEP_LIMIT,
            umad_rate: 0.09,
            min_initial_genome: 1,
            max_initial_genome: 100,
            max_genome_size: 500,
            simplify_steps: 1000,
            variant,
        }
    }

    /// Full-scale defaults: population 1000, 300,000 executions per
    /// training case.
    pub fn full_scale(variant: VariantConfig, problem: Problem) -> Self {
        let train = problem.default_train_size();
        RunConfig {
            population_size: 1000,
            budget: problem.default_budget(train),
            ..RunConfig::desk_scale(variant)
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size == 0 {
            return Err(ConfigError::invalid("population_size", "must be >= 1"));
        }
        if self.budget == 0 {
            return Err(ConfigError::invalid("budget", "must be >= 1"));
        }
        if self.step_limit == 0 {
            return Err(ConfigError::invalid("step_limit", "must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.umad_rate) {
            return Err(ConfigError::invalid(
                "umad_rate",
                format!("{} not in [0, 1)", self.umad_rate),
            ));
        }
        if self.min_initial_genome > self.max_initial_genome {
            return Err(ConfigError::invalid(
                "min_initial_genome",
                "exceeds max_initial_genome",
            ));
        }
        if self.max_genome_size == 0 {
            return Err(ConfigError::invalid("max_genome_size", "must be >= 1"));
        }
        self.variant.validate()
    }
}

/// Executes programs on cases and turns outputs into errors.
#[derive(Clone, Copy, Debug)]
pub struct Evaluator {
    pub problem: Problem,
    pub step_limit: u64,
}

impl Evaluator {
    pub fn new(problem: Problem, step_limit: u64) -> Self {
        Evaluator {
            problem,
            step_limit,
        }
    }

    /// One budget-unit execution: run the program on the case's inputs and
    /// score the designated output stack.
    pub fn run_case(&self, program: &PushProgram, case: &TrainingCase) -> (f64, Option<PushValue>) {
        let state = execute(program, &case.inputs, self.step_limit);
        let out = output_of(&state, self.problem.output_type());
        (case_error(out.as_ref(), &case.output), out)
    }
}

/// Result of checking an individual against the cases it has not seen.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub passed: bool,
    pub failed: Vec<usize>,
    pub executions: u64,
}

/// Evaluates `program` on every train case outside `known_passed` (results
/// on the active set are reused, not re-executed).
pub fn verify_on_full(
    program: &PushProgram,
    train: &[TrainingCase],
    known_passed: &[usize],
    ev: &Evaluator,
) -> VerifyReport {
    let mut failed = Vec::new();
    let mut executions = 0;
    for (idx, case) in train.iter().enumerate() {
        if known_passed.contains(&idx) {
            continue;
        }
        executions += 1;
        if ev.run_case(program, case).0 != 0.0 {
            failed.push(idx);
        }
    }
    VerifyReport {
        passed: failed.is_empty(),
        failed,
        executions,
    }
}

/// Proportion of distinct behavior vectors in the population.
pub fn behavioral_diversity(population: &[Individual]) -> f64 {
    let distinct: HashSet<&Vec<Option<PushValue>>> =
        population.iter().map(|i| &i.behavior).collect();
    distinct.len() as f64 / population.len() as f64
}

/// Hill-climbing simplification: repeatedly drop 1..=4 random genes and keep
/// the removal when the behavior vector over every case in `behavior_cases`
/// is unchanged. The result never behaves differently on those cases and is
/// never longer than the input.
pub fn simplify(
    genome: &PlushyGenome,
    steps: u64,
    behavior_of: &mut impl FnMut(&PlushyGenome) -> Vec<Option<PushValue>>,
    rng: &mut impl Rng,
) -> PlushyGenome {
    if steps == 0 || genome.is_empty() {
        return genome.clone();
    }
    let baseline = behavior_of(genome);
    let mut best = genome.clone();
    for _ in 0..steps {
        if best.is_empty() {
            break;
        }
        let k = rng.random_range(1..=4usize.min(best.len()));
        let mut remove = rand::seq::index::sample(rng, best.len(), k).into_vec();
        remove.sort_unstable();
        let candidate = PlushyGenome(
            best.0
                .iter()
                .enumerate()
                .filter(|(i, _)| !remove.contains(i))
                .map(|(_, g)| g.clone())
                .collect(),
        );
        if behavior_of(&candidate) == baseline {
            best = candidate;
        }
    }
    best
}

/// Success iff the program has error 0 on every test case.
pub fn generalization_test(
    genome: &PlushyGenome,
    test_cases: &[TrainingCase],
    ev: &Evaluator,
) -> bool {
    let program = translate(genome);
    test_cases
        .iter()
        .all(|case| ev.run_case(&program, case).0 == 0.0)
}

fn evaluate_population(
    genomes: &[PlushyGenome],
    active: &[usize],
    train: &[TrainingCase],
    ev: &Evaluator,
) -> Vec<Individual> {
    genomes
        .par_iter()
        .map(|genome| {
            let program = translate(genome);
            let mut errors = Vec::with_capacity(active.len());
            let mut behavior = Vec::with_capacity(active.len());
            for &idx in active {
                let (err, out) = ev.run_case(&program, &train[idx]);
                errors.push(err);
                behavior.push(out);
            }
            Individual {
                genome: genome.clone(),
                program,
                errors,
                behavior,
            }
        })
        .collect()
}

/// Runs one evolutionary run to completion. Every random draw flows from
/// `seed`; identical (config, problem, dataset, seed) inputs reproduce the
/// result byte for byte.
pub fn run_evolution(
    config: &RunConfig,
    problem: Problem,
    dataset: &[TrainingCase],
    seed: u64,
) -> Result<RunResult, ConfigError> {
    config.validate()?;
    let mut rng = rngs::seeded(seed);
    let mut case_set = CaseSet::new(dataset.to_vec(), config.variant.initial_size, &mut rng)?;
    let pool = problem.gene_pool();
    let ev = Evaluator::new(problem, config.step_limit);
    let mut ledger = BudgetLedger::new(config.budget);
    let initial_active = case_set.active().to_vec();

    let mut population: Vec<PlushyGenome> = (0..config.population_size)
        .map(|_| {
            let size = rng.random_range(config.min_initial_genome..=config.max_initial_genome);
            random_genome(&pool, size, &mut rng)
        })
        .collect();

    let mut logs: Vec<GenerationLog> = Vec::new();
    let mut additions: Vec<AdditionEvent> = Vec::new();
    let mut generation: u64 = 0;
    let mut outcome = Outcome::BudgetExhausted;
    let mut solution: Option<SolutionInfo> = None;

    while ledger.used() < ledger.limit {
        let eval_active = case_set.active().to_vec();
        let individuals =
            evaluate_population(&population, &eval_active, case_set.train(), &ev);
        let evaluation_executions = (individuals.len() * eval_active.len()) as u64;
        ledger.evaluation += evaluation_executions;
        let mut verification_executions: u64 = 0;

        let pass_counts: Vec<usize> = individuals.iter().map(Individual::pass_count).collect();
        let best_pass_count = *pass_counts.iter().max().unwrap();
        let diversity = behavioral_diversity(&individuals);

        // Pass counts per evaluated active case, for capped eviction.
        let case_pass_counts: Vec<(usize, usize)> = eval_active
            .iter()
            .enumerate()
            .map(|(pos, &idx)| {
                let passed = individuals.iter().filter(|ind| ind.errors[pos] == 0.0).count();
                (idx, passed)
            })
            .collect();
        let cap_ctx = CapContext {
            cap: config.variant.cap,
            pass_counts: &case_pass_counts,
        };
        let cap = (config.variant.mode == VariantMode::Capped).then_some(&cap_ctx);

        let mut cases_added: Vec<usize> = Vec::new();
        let mut solution_index: Option<usize> = None;

        // Trigger processing, in population index order. Verification
        // short-circuits across individuals at the first solution.
        for (i, ind) in individuals.iter().enumerate() {
            let passes_all = pass_counts[i] == eval_active.len();
            let (triggered, source) = match config.variant.mode {
                VariantMode::Standard | VariantMode::Generation | VariantMode::Capped => {
                    (passes_all, AdditionSource::Passer)
                }
                VariantMode::Threshold => {
                    let need = config.variant.q * eval_active.len() as f64 - 1e-9;
                    (pass_counts[i] as f64 >= need, AdditionSource::Threshold)
                }
                VariantMode::Static => (passes_all, AdditionSource::Passer),
            };
            if !triggered {
                continue;
            }
            if config.variant.mode == VariantMode::Static {
                let report = verify_on_full(&ind.program, case_set.train(), &eval_active, &ev);
                verification_executions += report.executions;
                if report.passed {
                    solution_index = Some(i);
                    break;
                }
                continue;
            }
            let mut eval_err = |_idx: usize, case: &TrainingCase| {
                verification_executions += 1;
                ev.run_case(&ind.program, case).0
            };
            let result = if config.variant.mode == VariantMode::Threshold {
                case_set.process_threshold(
                    passes_all,
                    &eval_active,
                    &mut eval_err,
                    generation,
                    cap,
                    &mut rng,
                )
            } else {
                case_set.process_passer(&eval_active, &mut eval_err, generation, cap, &mut rng)
            };
            match result {
                TriggerOutcome::Solution => {
                    solution_index = Some(i);
                    break;
                }
                TriggerOutcome::Added {
                    case,
                    error,
                    evicted,
                } => {
                    cases_added.push(case);
                    additions.push(AdditionEvent {
                        generation,
                        case_index: case,
                        source,
                        trigger_genome: Some(genome_to_line(&ind.genome)),
                        trigger_error: error,
                        evicted,
                    });
                }
                TriggerOutcome::NoNewCase => {}
            }
        }

        // Generation-based additions fire only when neither a passer nor a
        // previous tick has added a case for d generations.
        if solution_index.is_none()
            && matches!(
                config.variant.mode,
                VariantMode::Generation | VariantMode::Capped
            )
            && case_set.should_tick(config.variant.d, generation)
        {
            if config.variant.random_addition {
                let result = case_set.random_tick(generation, cap, &mut rng);
                if let TriggerOutcome::Added { case, evicted, .. } = result {
                    cases_added.push(case);
                    additions.push(AdditionEvent {
                        generation,
                        case_index: case,
                        source: AdditionSource::RandomTick,
                        trigger_genome: None,
                        trigger_error: None,
                        evicted,
                    });
                }
            } else {
                let best = pick_best(&pass_counts, &mut rng);
                let program = &individuals[best].program;
                let mut eval_err = |_idx: usize, case: &TrainingCase| {
                    verification_executions += 1;
                    ev.run_case(program, case).0
                };
                let result = case_set.generation_tick(&mut eval_err, generation, cap, &mut rng);
                if let TriggerOutcome::Added { case, error, evicted } = result {
                    cases_added.push(case);
                    additions.push(AdditionEvent {
                        generation,
                        case_index: case,
                        source: AdditionSource::Tick,
                        trigger_genome: Some(genome_to_line(&individuals[best].genome)),
                        trigger_error: error,
                        evicted,
                    });
                }
            }
        }

        ledger.verification += verification_executions;

        if let Some(winner) = solution_index {
            logs.push(GenerationLog {
                generation,
                executions_used: ledger.used(),
                active_cases: case_set.active_len(),
                best_pass_count,
                behavioral_diversity: diversity,
                hyperselection: false,
                cases_added,
                evaluation_executions,
                verification_executions,
            });
            let executions_at_solution = ledger.used();
            let genome = individuals[winner].genome.clone();
            let train = case_set.train();
            let mut behavior_of = |g: &PlushyGenome| {
                ledger.simplification += train.len() as u64;
                let program = translate(g);
                train
                    .iter()
                    .map(|case| ev.run_case(&program, case).1)
                    .collect()
            };
            let simplified = simplify(&genome, config.simplify_steps, &mut behavior_of, &mut rng);
            let generalized = generalization_test(&simplified, case_set.test(), &ev);
            outcome = if generalized {
                Outcome::TrainSolutionGeneralized
            } else {
                Outcome::TrainSolutionFailedTest
            };
            solution = Some(SolutionInfo {
                genome: genome_to_line(&genome),
                simplified: genome_to_line(&simplified),
                found_at_generation: generation,
                executions_at_solution,
                generalized,
            });
            break;
        }

        // Parent selection over the evaluation-time error vectors.
        let error_refs: Vec<&[f64]> = individuals.iter().map(|i| i.errors.as_slice()).collect();
        let mut counts = vec![0usize; individuals.len()];
        let parents: Vec<usize> = (0..config.population_size)
            .map(|_| {
                let s = lexicase_select(&error_refs, &mut rng);
                counts[s] += 1;
                s
            })
            .collect();
        let hyperselection = detect_hyperselection(&counts).is_some();

        logs.push(GenerationLog {
            generation,
            executions_used: ledger.used(),
            active_cases: case_set.active_len(),
            best_pass_count,
            behavioral_diversity: diversity,
            hyperselection,
            cases_added,
            evaluation_executions,
            verification_executions,
        });

        population = parents
            .iter()
            .map(|&p| {
                let child = crate::genome::umad(
                    &individuals[p].genome,
                    &pool,
                    config.umad_rate,
                    &mut rng,
                );
                if child.len() > config.max_genome_size {
                    individuals[p].genome.clone()
                } else {
                    child
                }
            })
            .collect();
        generation += 1;
    }

    Ok(RunResult {
        problem,
        variant: config.variant.label(),
        seed,
        outcome,
        generations: logs.len() as u64,
        final_active_size: case_set.active_len(),
        initial_active,
        ledger,
        solution,
        logs,
        additions,
    })
}

fn pick_best(pass_counts: &[usize], rng: &mut impl Rng) -> usize {
    let best = *pass_counts.iter().max().unwrap();
    let tied: Vec<usize> = pass_counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c == best)
        .map(|(i, _)| i)
        .collect();
    *tied.choose(rng).unwrap()
}

#[cfg(test)]
mod tests;
