//! Thin command-line front end over the library: dataset generation,
//! experiment matrices, success-rate statistics, and success curves.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use icdgp::harness::{
    self, generate_data_file, load_experiment, parse_seeds, read_aggregate, run_matrix,
    stats::{compare_arms, cumulative_success_curves, success_table, write_curves},
    RUN_FAILED,
};
use icdgp::problems::Problem;

#[derive(Parser)]
#[command(name = "icdgp", version, about = "Counterexample-driven GP experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem dataset file (header line + one JSON case per line).
    GenerateData {
        /// Problem name, e.g. `smallest` or `negative-to-zero`.
        problem: String,
        #[arg(long)]
        seed: u64,
        /// Output file path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        train_size: Option<usize>,
        #[arg(long)]
        test_size: Option<usize>,
    },
    /// Run one experiment arm (a TOML config) across seeds.
    Run {
        /// Experiment config file(s).
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Seeds: `7`, `0..9` (inclusive), or `1,2,5`.
        #[arg(long)]
        seeds: String,
        /// Output directory (per-run JSONL under runs/, plus aggregate.csv).
        #[arg(long)]
        out: PathBuf,
    },
    /// Success tables and arm comparisons from an aggregate CSV.
    Stats {
        aggregate: PathBuf,
        /// Compare two arms by variant label, e.g. `generation_d50 static`.
        #[arg(long, num_args = 2, value_names = ["ARM_A", "ARM_B"])]
        compare: Option<Vec<String>>,
    },
    /// Cumulative success curves (CSV) from an aggregate CSV.
    Curves {
        aggregate: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::GenerateData {
            problem,
            seed,
            out,
            train_size,
            test_size,
        } => {
            let problem = Problem::from_name(&problem)?;
            let train = train_size.unwrap_or(problem.default_train_size());
            let test = test_size.unwrap_or(problem.default_test_size());
            generate_data_file(problem, seed, train, test, &out)?;
            println!(
                "wrote {} ({} train + {} test cases, seed {seed})",
                out.display(),
                train,
                test
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { configs, seeds, out } => {
            let seeds = parse_seeds(&seeds)?;
            let experiments = configs
                .iter()
                .map(|p| load_experiment(p))
                .collect::<Result<Vec<_>, _>>()?;
            let rows = run_matrix(&experiments, &seeds, &out)?;
            let failed = rows.iter().filter(|r| r.outcome == RUN_FAILED).count();
            for ((problem, variant), count) in success_table(&rows) {
                println!(
                    "{problem} {variant}: {}/{} generalized",
                    count.successes, count.total
                );
            }
            println!("aggregate: {}", out.join("aggregate.csv").display());
            if failed > 0 {
                Err(harness::HarnessError::FailedRuns {
                    failed,
                    total: rows.len(),
                }
                .into())
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Stats { aggregate, compare } => {
            let rows = read_aggregate(&aggregate)?;
            for ((problem, variant), count) in success_table(&rows) {
                println!(
                    "{problem} {variant}: {}/{} generalized",
                    count.successes, count.total
                );
            }
            if let Some(arms) = compare {
                let comparisons = compare_arms(&rows, &arms[0], &arms[1]);
                if comparisons.is_empty() {
                    return Err(format!(
                        "no problem has both arms `{}` and `{}`",
                        arms[0], arms[1]
                    )
                    .into());
                }
                for c in comparisons {
                    println!(
                        "{}: {} {}/{} vs {} {}/{} -> chi2 = {:.6}, p = {:.6}, {}",
                        c.problem,
                        c.arm_a,
                        c.a.successes,
                        c.a.total,
                        c.arm_b,
                        c.b.successes,
                        c.b.total,
                        c.chi.statistic,
                        c.chi.p_value,
                        if c.chi.significant {
                            "significant at 0.05"
                        } else {
                            "not significant at 0.05"
                        }
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Curves { aggregate, out } => {
            let rows = read_aggregate(&aggregate)?;
            let points = cumulative_success_curves(&rows);
            match out {
                Some(path) => {
                    let mut file = std::fs::File::create(&path)?;
                    write_curves(&mut file, &points)?;
                    println!("wrote {}", path.display());
                }
                None => write_curves(&mut std::io::stdout().lock(), &points)?,
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
