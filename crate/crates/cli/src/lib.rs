//! Command-line experiment runner for `qsymlab`.
//!
//! Every command writes a JSON [`report::ExperimentReport`]; curve-shaped
//! results can also be written as CSV. Exit codes: 0 success, 1 failed check
//! or runtime failure, 2 usage error.

pub mod inputs;
pub mod report;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qsymlab_core::compiler::{estimate_success, exact_success};
use qsymlab_core::disting::{sweep_r, Method};
use qsymlab_core::distributions::DEFAULT_ENUMERATION_BUDGET;
use qsymlab_core::zoo;
use serde::Serialize;

use crate::report::{CompileRunRow, CurveRow, ExperimentReport};

/// Environment variable overriding the enumeration budget.
pub const BUDGET_ENV: &str = "QSYMLAB_BUDGET";

/// Compiled runs are embedded in the report only up to this many trials.
pub const MAX_EMBEDDED_RUNS: u64 = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "qsymlab",
    version,
    about = "Quantum query simulation and small-range compilation experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the compiled classical algorithm for a zoo function on one input.
    CompileRun(CompileRunArgs),
    /// Measure permutation versus small-range distinguishing advantage over a list of r.
    Distinguish(DistinguishArgs),
    /// Run the built-in property suite at n <= 4 and print a pass/fail table.
    Verify,
    /// Catalog of zoo entries.
    Zoo {
        #[command(subcommand)]
        command: ZooCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum ZooCommand {
    /// List ids, parameter constraints and query counts.
    List,
}

#[derive(Debug, Args, Serialize)]
pub struct CompileRunArgs {
    /// Zoo function id (dj, grover-or, const0, const1).
    #[arg(long)]
    pub zoo: String,
    /// Input length.
    #[arg(long)]
    pub n: usize,
    /// constant0 | constant1 | balanced | unique:K | random-promise | comma-separated values.
    #[arg(long)]
    pub input: String,
    /// Range size of the small-range distribution, 1 <= r <= n.
    #[arg(long)]
    pub r: usize,
    /// Monte Carlo trials (ignored with --exact).
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Root seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grover iterations (grover-or only; default is the usual rounding of pi/4 sqrt(n)).
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Average exactly over the support of the small-range distribution.
    #[arg(long)]
    pub exact: bool,
    /// JSON report path; stdout if omitted.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Per-trial CSV path.
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    /// Maximum worker threads.
    #[arg(long)]
    #[serde(skip)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct DistinguishArgs {
    /// Distinguisher id (zero-query, collision-sniffer, collision-sniffer-2).
    #[arg(long)]
    pub algo: String,
    #[arg(long)]
    pub n: usize,
    /// Comma-separated r values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub r_list: Vec<usize>,
    /// Oracle draws per side (ignored with --exact).
    #[arg(long, default_value_t = 2000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Enumerate both distributions instead of sampling.
    #[arg(long)]
    pub exact: bool,
    /// JSON report path; stdout if omitted.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Advantage-vs-r CSV path.
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub jobs: Option<usize>,
}

/// A problem with the flags rather than with the computation.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Exit code for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use qsymlab_core::Error as E;
    if err.is::<UsageError>() {
        return 2;
    }
    match err.downcast_ref::<E>() {
        Some(
            E::InvalidParameter(_)
            | E::OutOfRange { .. }
            | E::OffDomain(_)
            | E::GuardExceeded(_)
            | E::BudgetExceeded { .. },
        ) => 2,
        _ => 1,
    }
}

/// Enumeration budget, honoring [`BUDGET_ENV`].
pub fn enumeration_budget() -> Result<u64> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            UsageError(format!("{BUDGET_ENV}={v:?} is not a non-negative integer")).into()
        }),
        Err(_) => Ok(DEFAULT_ENUMERATION_BUDGET),
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::CompileRun(args) => {
            let mut report = compile_run(&args)?;
            if let Some(path) = &args.csv {
                report::write_csv(path, &CompileRunRow::from_results(&report.results))?;
            }
            if !report.results.runs_embedded {
                if let Some(est) = report.results.estimate.as_mut() {
                    est.runs.clear();
                }
            }
            emit(&report, args.out.as_deref())?;
            Ok(0)
        }
        Command::Distinguish(args) => {
            let report = distinguish(&args)?;
            for w in &report.results.warnings {
                eprintln!("warning: {w}");
            }
            emit(&report, args.out.as_deref())?;
            if let Some(path) = &args.csv {
                report::write_csv(path, &CurveRow::from_sweep(&report.results))?;
            }
            Ok(0)
        }
        Command::Verify => {
            let outcome = verify::run_suite(&verify::default_gadget);
            print!("{}", outcome.table());
            Ok(if outcome.all_passed() { 0 } else { 1 })
        }
        Command::Zoo {
            command: ZooCommand::List,
        } => {
            print!("{}", zoo_table());
            Ok(0)
        }
    }
}

fn emit<T: Serialize>(report: &ExperimentReport<T>, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match out {
        Some(path) => {
            std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
    }
}

/// Deterministic payload of `compile-run`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct CompileRunResults {
    pub function: String,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub input: Vec<usize>,
    pub expected_bit: u8,
    pub base_queries: usize,
    pub amplified_queries: usize,
    pub estimate: Option<qsymlab_core::compiler::SuccessEstimate>,
    pub runs_embedded: bool,
    pub exact: Option<qsymlab_core::compiler::ExactSuccess>,
    /// `num/den` form of the exact probability when one was recovered.
    pub exact_fraction: Option<String>,
}

pub fn compile_run(args: &CompileRunArgs) -> Result<ExperimentReport<CompileRunResults>> {
    let started = report::now_unix_ms();
    let entry = zoo::entry(&args.zoo, args.n, args.iterations)?;
    let x = inputs::parse_input(&args.input, &entry, args.seed)?;
    let expected_bit = entry.function.evaluate(&x).map_err(|_| {
        UsageError(format!(
            "input {:?} is outside the promise of '{}'",
            x.values(),
            entry.id
        ))
    })?;
    if args.r == 0 || args.r > args.n {
        return Err(UsageError(format!("--r {} must lie in [1, {}]", args.r, args.n)).into());
    }
    let q = entry.algorithm.query_count();
    let mut results = CompileRunResults {
        function: entry.id.clone(),
        n: entry.n,
        m: entry.m,
        r: args.r,
        input: x.values().to_vec(),
        expected_bit,
        base_queries: q,
        amplified_queries: 3 * q,
        estimate: None,
        runs_embedded: false,
        exact: None,
        exact_fraction: None,
    };
    if args.exact {
        let exact = exact_success(
            &entry.algorithm,
            &x,
            expected_bit,
            args.r,
            enumeration_budget()?,
        )?;
        results.exact_fraction = exact.probability_rational.map(|(a, b)| format!("{a}/{b}"));
        results.exact = Some(exact);
    } else {
        if args.trials == 0 {
            return Err(UsageError("--trials must be at least 1".into()).into());
        }
        let est = estimate_success(
            &entry.algorithm,
            &x,
            expected_bit,
            args.r,
            args.trials,
            args.seed,
            args.jobs,
        )?;
        results.runs_embedded = args.trials <= MAX_EMBEDDED_RUNS;
        results.estimate = Some(est);
    }
    let report = ExperimentReport::new("compile-run", args, args.seed, started, results)?;
    Ok(report)
}

pub fn distinguish(
    args: &DistinguishArgs,
) -> Result<ExperimentReport<qsymlab_core::disting::Sweep>> {
    let started = report::now_unix_ms();
    let b = zoo::distinguisher(&args.algo, args.n)?;
    let method = if args.exact {
        Method::Exact
    } else {
        Method::MonteCarlo
    };
    if let Some(&bad) = args.r_list.iter().find(|&&r| r == 0 || r > args.n) {
        return Err(UsageError(format!("r = {bad} outside [1, {}]", args.n)).into());
    }
    let sweep = sweep_r(
        &b,
        &args.r_list,
        args.samples,
        args.seed,
        method,
        enumeration_budget()?,
        args.jobs,
    )?;
    ExperimentReport::new("distinguish", args, args.seed, started, sweep)
}

pub fn zoo_table() -> String {
    let mut out = format!(
        "{:<20} {:<14} {:<38} {:<16} {}\n",
        "id", "kind", "constraints", "queries", "description"
    );
    for z in zoo::catalog() {
        out.push_str(&format!(
            "{:<20} {:<14} {:<38} {:<16} {}\n",
            z.id, z.kind, z.constraints, z.query_count, z.description
        ));
    }
    out
}
