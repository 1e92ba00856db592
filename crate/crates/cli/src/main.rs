//! Command-line front end: run suites, generate and verify reduced case
//! sets, build the results dashboard, and emit scheduling lines.
//!
//! Exit codes: 0 on success, 1 when tests fail or a requested check does not
//! hold (incomplete coverage, failed run, runtime error), 2 for unusable
//! invocations (argument errors, malformed schedule times).

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod dashboard;
mod generate;
mod run;
mod schedule;

#[derive(Parser)]
#[command(name = "snowleopard", version, about = "Data-driven test automation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a test suite (or ad-hoc cases) against a data container.
    Run(RunArgs),
    /// Generate a reduced set of test cases from a parameter space.
    Gen(GenArgs),
    /// Check a set of rows for complete t-way coverage.
    Verify(VerifyArgs),
    /// Render an HTML dashboard from report files.
    Dashboard(DashboardArgs),
    /// Print commands that start a run at a given time, or wait and run.
    Schedule(ScheduleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Suite file (test_case,run,priority). Optional when --case is given.
    #[arg(long, required_unless_present = "case")]
    suite: Option<std::path::PathBuf>,
    /// XML test data container.
    #[arg(long)]
    data: std::path::PathBuf,
    /// Run only these case ids. Without --suite, runs them ad hoc.
    #[arg(long = "case")]
    case: Vec<String>,
    /// Most relaxed priority to run (bat, p1, p2, p3). Default: everything.
    #[arg(long)]
    priority: Option<String>,
    /// Budget in seconds for each case's setup, steps, and validation.
    #[arg(long, default_value_t = 300)]
    timeout: u64,
    /// Logs root. Falls back to $SNOWLEOPARD_LOGS, then "Logs".
    #[arg(long)]
    logs: Option<std::path::PathBuf>,
    /// Build id to install before running.
    #[arg(long)]
    build: Option<String>,
    /// Directory the builds live in.
    #[arg(long, default_value = "builds")]
    builds: std::path::PathBuf,
    /// Known-bug database (case_id,bug_id).
    #[arg(long)]
    bugdb: Option<std::path::PathBuf>,
    /// Where the results mail is written. Default: <logs root>/outbox.
    #[arg(long)]
    outbox: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Parameter space file: one "name: v1, v2, ..." per line.
    #[arg(long)]
    params: std::path::PathBuf,
    /// Generate every combination.
    #[arg(long, conflicts_with = "strength", required_unless_present = "strength")]
    all: bool,
    /// Generate a t-way covering set of this strength.
    #[arg(long)]
    strength: Option<usize>,
    /// Write the rows here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Seed accepted for signature stability; generation is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refuse --all beyond this many rows.
    #[arg(long, default_value_t = snowleopard_core::reduction::DEFAULT_ENUMERATION_CAP)]
    cap: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Parameter space file the rows must conform to.
    #[arg(long)]
    params: std::path::PathBuf,
    /// CSV rows to check (header of parameter names).
    #[arg(long)]
    rows: std::path::PathBuf,
    /// Coverage strength to check.
    #[arg(long)]
    strength: usize,
}

#[derive(Args)]
struct DashboardArgs {
    /// Glob matching report files, e.g. "Logs/*/report.csv".
    #[arg(long)]
    reports: String,
    /// Output page.
    #[arg(long, default_value = "dashboard.html")]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct ScheduleArgs {
    /// Time of day (HH:MM, 24h) to print scheduling lines for.
    #[arg(long, conflicts_with = "wait_until", required_unless_present = "wait_until")]
    at: Option<String>,
    /// Sleep until this time of day (HH:MM, 24h), then run the command.
    #[arg(long)]
    wait_until: Option<String>,
    /// The command to schedule.
    #[arg(last = true, required = true)]
    command: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run::execute(args),
        Command::Gen(args) => generate::generate(args),
        Command::Verify(args) => generate::verify(args),
        Command::Dashboard(args) => dashboard::execute(args),
        Command::Schedule(args) => schedule::execute(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
