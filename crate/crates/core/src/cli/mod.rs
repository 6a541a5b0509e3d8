//! Command-line front end: `run`, `sweep`, `schedule dump` and `oracle`.
//!
//! Exit codes: 0 on success, 2 for a bad configuration or usage, 3 when a
//! solver run fails numerically, 1 for anything else.

pub mod config;
pub mod runner;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ExperimentConfig, ExperimentKind, Scheme};
pub use runner::{
    iterations_to_decades, run_experiment, sweep, thread_cap, DecadeHit, ErrorMetric, Summary, SweepParam,
};

use crate::error::{Error, Result};
use crate::problems::oracle::MIN_ORACLE_BUDGET;
use crate::schedule::{GridRanges, ScheduleCriterion, ScheduleMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "restartkit", version, about = "Restarted first-order methods with unknown sharpness constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Overrides {
    /// Replace the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the configured scheme.
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Replace the trace output path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Replace the inner-iteration budget.
    #[arg(long)]
    budget: Option<u64>,
    /// Run restart instances on a worker pool.
    #[arg(long)]
    parallel: bool,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = self.scheme {
            cfg.scheme = s;
        }
        if let Some(o) = &self.output {
            cfg.output_path = Some(o.clone());
        }
        if let Some(t) = self.budget {
            cfg.restart.t = Some(t);
        }
        if self.parallel {
            cfg.restart.parallel = Some(true);
        }
        cfg.validate()
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write its trace and summary.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run one experiment per value of a parameter.
    Sweep {
        config: PathBuf,
        /// alpha, beta, sigma, lambda or mu.
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Schedule utilities.
    Schedule {
        #[command(subcommand)]
        command: ScheduleCommand,
    },
    /// Estimate the optimal value of a configured problem with a long run.
    Oracle {
        config: PathBuf,
        #[arg(long, default_value_t = MIN_ORACLE_BUDGET)]
        budget: u64,
    },
}

#[derive(Debug, Subcommand)]
enum ScheduleCommand {
    /// Print the first grid triples of the assignment as CSV `n,i,j,k,h`.
    Dump {
        #[arg(long, default_value = "both_unknown")]
        mode: ScheduleMode,
        #[arg(long, default_value_t = 2.0)]
        c1: f64,
        #[arg(long, default_value_t = 2.0)]
        c2: f64,
        #[arg(long, default_value_t = 100)]
        count: u64,
        /// `i_min,i_max,j_min,j_max` for `ranges_known`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        ranges: Option<Vec<i64>>,
    },
}

/// Maps an error to its exit code.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_config_error() {
        EXIT_CONFIG
    } else if err.is_solver_failure() {
        EXIT_SOLVER
    } else {
        EXIT_OTHER
    }
}

fn dump_schedule(
    out: &mut dyn Write,
    mode: ScheduleMode,
    c1: f64,
    c2: f64,
    count: u64,
    ranges: Option<Vec<i64>>,
) -> Result<()> {
    let criterion = match (mode, ranges) {
        (ScheduleMode::RangesKnown, Some(r)) if r.len() != 4 => {
            return Err(Error::config("ranges", "expected i_min,i_max,j_min,j_max"))
        }
        (ScheduleMode::RangesKnown, Some(r)) => {
            let unsigned =
                |v: i64| u64::try_from(v).map_err(|_| Error::config("ranges", "j bounds must be nonnegative"));
            ScheduleCriterion::ranges_known(GridRanges {
                i_min: r[0],
                i_max: r[1],
                j_min: unsigned(r[2])?,
                j_max: unsigned(r[3])?,
            })?
        }
        (ScheduleMode::RangesKnown, None) => return Err(Error::config("ranges", "required for mode ranges_known")),
        (_, Some(_)) => return Err(Error::config("ranges", "only valid with mode ranges_known")),
        (m, None) => ScheduleCriterion::new(m, c1, c2)?,
    };
    let mut e = criterion.enumerator();
    writeln!(out, "n,i,j,k,h")?;
    for n in 1..=count {
        let p = e.next_point();
        writeln!(out, "{n},{},{},{},{}", p.i, p.j, p.k, criterion.h_value(p)?)?;
    }
    Ok(())
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let threads = thread_cap();
    match cli.command {
        Command::Run { config, overrides } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            overrides.apply(&mut cfg)?;
            let report = run_experiment(&cfg, threads)?;
            let s = &report.summary;
            writeln!(
                out,
                "{} {}: {} inner iterations, {} restarts, objective {:.6e}, trace {}",
                s.experiment,
                s.scheme,
                s.inner_iterations,
                s.restarts,
                s.final_objective,
                s.trace_path.display()
            )?;
        }
        Command::Sweep { config, param, values, overrides } => {
            let param = SweepParam::parse(&param)?;
            let mut cfg = ExperimentConfig::load(&config)?;
            overrides.apply(&mut cfg)?;
            let rows = sweep(&cfg, param, &values, threads)?;
            for r in rows {
                writeln!(
                    out,
                    "{}={:e}: {} inner iterations, trace {}",
                    param.as_str(),
                    r.value,
                    r.inner_iterations,
                    r.trace_path.display()
                )?;
            }
        }
        Command::Schedule { command: ScheduleCommand::Dump { mode, c1, c2, count, ranges } } => {
            dump_schedule(out, mode, c1, c2, count, ranges)?
        }
        Command::Oracle { config, budget } => {
            let cfg = ExperimentConfig::load(&config)?;
            let r = runner::oracle(&cfg, budget)?;
            let json = serde_json::json!({
                "value": r.value,
                "uncertainty": r.uncertainty,
                "lower_estimate": r.lower_estimate(),
                "inner_iterations": r.inner_iterations,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&json)?)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Output goes to `out`, diagnostics to `err`.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point used by the binary.
pub fn main_entry() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
