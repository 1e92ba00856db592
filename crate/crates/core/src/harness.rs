//! The suite runner: executes test cases through their four phases and keeps
//! the run alive no matter what a case does.
//!
//! Every phase runs on its own watchdog thread. A panic in test code is
//! caught and recorded as a crash; a phase that never returns is abandoned at
//! the deadline and recorded as a timeout. Either way the harness itself
//! keeps going: cleanup still runs (on a fresh driver if the old one is stuck
//! with the abandoned thread), the report row is completed, the environment
//! reset hook fires, and the next case starts. One broken case costs one row
//! in the report, not the night's run.
//!
//! The report file is rewritten after every change, so a run that dies at
//! case forty still leaves thirty-nine finished rows and one visibly
//! in-flight row on disk.

use std::io;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use chrono::{Local, NaiveDateTime};
use thiserror::Error;

use crate::datacontainer::{lookup_case_data, ParamMap, TestDataMap};
use crate::drivers::DriverHandle;
use crate::logreport::{
    open_run_directory, send_mail, BugDb, CaseStatus, LogLevel, LogSink, Outbox, ReportError,
    ReportWriter,
};
use crate::suite::{Priority, Suite};
use crate::testlib::{Phase, PhaseContext, PhaseFailure, PhaseFn, TestCaseDefinition, TestCaseRegistry};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("harness: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Install(#[from] InstallError),
    #[error("build \"{build_id}\" was requested but no installer is configured")]
    MissingInstaller { build_id: String },
}

#[derive(Debug, Error)]
pub enum InstallError {
    #[error("no build \"{build_id}\" under {}", root.display())]
    UnknownBuild { build_id: String, root: PathBuf },
    #[error("install: {0}")]
    Io(#[from] io::Error),
}

// ---------------------------------------------------------------------------
// Build installation and environment reset hooks

/// Fetches and installs the build a run is pinned to. Runs that fail here
/// never start: no run directory, no report.
pub trait BuildInstaller {
    fn install(&self, build_id: &str) -> Result<PathBuf, InstallError>;
}

/// Builds laid out as directories named after their id under one root.
/// Install verifies the directory is present and hands back its path.
pub struct LocalDirInstaller {
    root: PathBuf,
}

impl LocalDirInstaller {
    pub fn new(root: impl Into<PathBuf>) -> LocalDirInstaller {
        LocalDirInstaller { root: root.into() }
    }
}

impl BuildInstaller for LocalDirInstaller {
    fn install(&self, build_id: &str) -> Result<PathBuf, InstallError> {
        let path = self.root.join(build_id);
        if path.is_dir() {
            Ok(path)
        } else {
            Err(InstallError::UnknownBuild {
                build_id: build_id.to_string(),
                root: self.root.clone(),
            })
        }
    }
}

/// Hook run after a crash or timeout to put the bench back in a known state
/// before the next case. Errors are reported as a string so implementations
/// stay trivial.
pub trait EnvironmentReset {
    fn reset_environment(&self) -> Result<(), String>;
}

/// Reset hook for applications where a fresh driver is all the reset needed.
pub struct NoopEnvironmentReset;

impl EnvironmentReset for NoopEnvironmentReset {
    fn reset_environment(&self) -> Result<(), String> {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Run configuration

/// Produces one driver per test case. Fresh handles also replace drivers
/// lost to a timed-out phase.
pub type DriverFactory = Box<dyn Fn() -> DriverHandle + Send + Sync>;

pub struct RunConfig {
    /// Run only entries at or above this urgency (`Bat` counts as most
    /// urgent). `None` runs everything marked runnable.
    pub priority_filter: Option<Priority>,
    /// Budget for setup, steps, and validation together. Cleanup gets the
    /// same budget again on its own.
    pub timeout: Duration,
    /// Run directories are created under here.
    pub logs_root: PathBuf,
    /// Build to install before the run starts.
    pub build_id: Option<String>,
    /// Known-bug database consulted for failed cases.
    pub bugdb_path: Option<PathBuf>,
    /// Where the end-of-run mail is written. `None` sends nothing.
    pub outbox: Option<Outbox>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            priority_filter: None,
            timeout: Duration::from_secs(300),
            logs_root: PathBuf::from("Logs"),
            build_id: None,
            bugdb_path: None,
            outbox: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Case results

/// Why a case did not pass.
#[derive(Debug, Clone)]
pub enum FailureKind {
    /// A phase reported a described failure.
    Assertion {
        phase: Phase,
        failure: PhaseFailure,
    },
    /// Test code panicked; the panic was contained on the phase thread.
    Crash { phase: Phase, message: String },
    /// A phase outlived the case budget and was abandoned.
    Timeout { phase: Phase },
    /// The case could not start at all (not registered, no data).
    SetupError { message: String },
}

/// Outcome of one suite entry. Skipped entries carry no times.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub case_id: String,
    pub status: CaseStatus,
    pub failure: Option<FailureKind>,
    pub start: Option<NaiveDateTime>,
    pub end: Option<NaiveDateTime>,
    pub bug_id: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Totals {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl Totals {
    pub fn executed(&self) -> usize {
        self.passed + self.failed
    }
}

pub fn summarize(results: &[CaseResult]) -> Totals {
    let mut totals = Totals::default();
    for result in results {
        match result.status {
            CaseStatus::Pass => totals.passed += 1,
            CaseStatus::Fail => totals.failed += 1,
            CaseStatus::Skipped => totals.skipped += 1,
        }
    }
    totals
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub suite_name: String,
    pub results: Vec<CaseResult>,
    pub totals: Totals,
}

/// A finished run plus where its artifacts live.
#[derive(Debug)]
pub struct SuiteRunOutcome {
    pub result: SuiteResult,
    pub run_dir: PathBuf,
    pub report_path: PathBuf,
    pub log_path: PathBuf,
    pub mail_path: Option<PathBuf>,
}

/// Process exit status for a run: zero only when nothing failed.
pub fn exit_code(result: &SuiteResult) -> i32 {
    if result.totals.failed == 0 {
        0
    } else {
        1
    }
}

// ---------------------------------------------------------------------------
// Phase execution

enum PhaseOutcome {
    Finished(Result<(), PhaseFailure>),
    Crashed(String),
    TimedOut,
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(text) = payload.downcast_ref::<&str>() {
        (*text).to_string()
    } else if let Some(text) = payload.downcast_ref::<String>() {
        text.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

/// Runs one phase on a watchdog thread. The phase either finishes (cleanly
/// or with a caught panic) or blows its budget, in which case the thread is
/// abandoned and keeps whatever it holds; the caller must treat the driver
/// as lost.
fn run_phase(f: &PhaseFn, ctx: PhaseContext, budget: Duration) -> PhaseOutcome {
    let (tx, rx) = mpsc::channel();
    let f = f.clone();
    let spawned = std::thread::Builder::new()
        .name(format!("phase-{}", ctx.case_id))
        .spawn(move || {
            let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| f(&ctx)));
            let _ = tx.send(match outcome {
                Ok(result) => PhaseOutcome::Finished(result),
                Err(payload) => PhaseOutcome::Crashed(panic_message(payload)),
            });
        });
    if spawned.is_err() {
        return PhaseOutcome::Crashed("phase thread could not be spawned".to_string());
    }
    match rx.recv_timeout(budget) {
        Ok(outcome) => outcome,
        Err(mpsc::RecvTimeoutError::Timeout) => PhaseOutcome::TimedOut,
        Err(mpsc::RecvTimeoutError::Disconnected) => {
            PhaseOutcome::Crashed("phase thread ended without reporting".to_string())
        }
    }
}

fn write_crash_dump(run_dir: &Path, case_id: &str, phase: Phase, message: &str) {
    use std::io::Write;
    let path = run_dir.join(format!("{case_id}.crash.txt"));
    let Ok(mut file) = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
    else {
        return;
    };
    let _ = writeln!(file, "test case {case_id} crashed in {phase}\n{message}\n");
}

/// Runs one case through all four phases.
///
/// Setup, steps, and validation share `timeout`; the first failure, crash,
/// or timeout among them fails the case and skips the rest of the three.
/// Cleanup then runs exactly once with a fresh budget, on a replacement
/// driver if a timeout orphaned the original. Trouble during cleanup is
/// logged but never changes the verdict: the case passes if and only if
/// setup, steps, and validation all succeeded.
pub fn execute_case(
    definition: &TestCaseDefinition,
    data: &ParamMap,
    driver_factory: &dyn Fn() -> DriverHandle,
    log: &LogSink,
    timeout: Duration,
    run_dir: Option<&Path>,
) -> CaseResult {
    let case_id = definition.case_id().to_string();
    let start = Local::now().naive_local();
    let _ = log.log(LogLevel::Info, &format!("Running test case {case_id}..."));

    let driver = driver_factory();
    let context = |driver: &DriverHandle| PhaseContext {
        case_id: case_id.clone(),
        data: data.clone(),
        driver: driver.clone(),
        log: log.clone(),
    };

    let clock = Instant::now();
    let mut failure: Option<FailureKind> = None;
    for phase in [Phase::Setup, Phase::Steps, Phase::Validation] {
        let remaining = timeout.saturating_sub(clock.elapsed());
        if remaining.is_zero() {
            failure = Some(FailureKind::Timeout { phase });
        } else {
            match run_phase(definition.phase(phase), context(&driver), remaining) {
                PhaseOutcome::Finished(Ok(())) => continue,
                PhaseOutcome::Finished(Err(described)) => {
                    failure = Some(FailureKind::Assertion {
                        phase,
                        failure: described,
                    });
                }
                PhaseOutcome::Crashed(message) => {
                    failure = Some(FailureKind::Crash { phase, message });
                }
                PhaseOutcome::TimedOut => failure = Some(FailureKind::Timeout { phase }),
            }
        }
        break;
    }

    match &failure {
        None => {}
        Some(FailureKind::Assertion { failure: f, .. }) => {
            let _ = log.log_failure(&f.message, f.locator.as_ref());
        }
        Some(FailureKind::Crash { phase, message }) => {
            let _ = log.log(
                LogLevel::Failed,
                &format!("test case {case_id} crashed in {phase}: {message}"),
            );
            if let Some(dir) = run_dir {
                write_crash_dump(dir, &case_id, *phase, message);
            }
        }
        Some(FailureKind::Timeout { phase }) => {
            let _ = log.log(
                LogLevel::Failed,
                &format!(
                    "test case {case_id} timed out in {phase} after {}s",
                    timeout.as_secs_f64()
                ),
            );
        }
        Some(FailureKind::SetupError { .. }) => unreachable!("not produced here"),
    }

    // A thread abandoned mid-phase may still hold the driver; cleanup gets a
    // fresh one so it cannot wedge on the orphan's locks.
    let cleanup_driver = if matches!(failure, Some(FailureKind::Timeout { .. })) {
        driver_factory()
    } else {
        driver
    };
    match run_phase(
        definition.phase(Phase::Cleanup),
        context(&cleanup_driver),
        timeout,
    ) {
        PhaseOutcome::Finished(Ok(())) => {}
        PhaseOutcome::Finished(Err(described)) => {
            let _ = log.log_failure(
                &format!("cleanup for {case_id} failed: {}", described.message),
                described.locator.as_ref(),
            );
        }
        PhaseOutcome::Crashed(message) => {
            let _ = log.log(
                LogLevel::Failed,
                &format!("cleanup for {case_id} crashed: {message}"),
            );
            if let Some(dir) = run_dir {
                write_crash_dump(dir, &case_id, Phase::Cleanup, &message);
            }
        }
        PhaseOutcome::TimedOut => {
            let _ = log.log(
                LogLevel::Failed,
                &format!(
                    "cleanup for {case_id} timed out after {}s",
                    timeout.as_secs_f64()
                ),
            );
        }
    }

    let status = if failure.is_none() {
        let _ = log.log(
            LogLevel::Passed,
            &format!("test case {case_id} completed successfully"),
        );
        CaseStatus::Pass
    } else {
        CaseStatus::Fail
    };
    CaseResult {
        case_id,
        status,
        failure,
        start: Some(start),
        end: Some(Local::now().naive_local()),
        bug_id: None,
    }
}

// ---------------------------------------------------------------------------
// Suite runner

pub struct SuiteRunner {
    config: RunConfig,
    registry: TestCaseRegistry,
    data: TestDataMap,
    driver_factory: DriverFactory,
    installer: Option<Box<dyn BuildInstaller>>,
    env_reset: Box<dyn EnvironmentReset>,
}

impl SuiteRunner {
    pub fn new(
        config: RunConfig,
        registry: TestCaseRegistry,
        data: TestDataMap,
        driver_factory: DriverFactory,
    ) -> SuiteRunner {
        SuiteRunner {
            config,
            registry,
            data,
            driver_factory,
            installer: None,
            env_reset: Box::new(NoopEnvironmentReset),
        }
    }

    pub fn with_installer(mut self, installer: impl BuildInstaller + 'static) -> Self {
        self.installer = Some(Box::new(installer));
        self
    }

    pub fn with_environment_reset(mut self, reset: impl EnvironmentReset + 'static) -> Self {
        self.env_reset = Box::new(reset);
        self
    }

    fn entry_is_runnable(&self, entry: &crate::suite::SuiteEntry) -> bool {
        entry.run
            && self
                .config
                .priority_filter
                .is_none_or(|max| entry.priority <= max)
    }

    /// Runs a suite start to finish and returns the artifacts. Aborts only
    /// on configuration-level problems (bad bug database, unknown build,
    /// unwritable logs root); a broken test case is a failed row, never an
    /// abort.
    pub fn run_suite(&self, suite: &Suite) -> Result<SuiteRunOutcome, HarnessError> {
        let bugdb = match &self.config.bugdb_path {
            Some(path) => Some(BugDb::load(path)?),
            None => None,
        };

        let installed = match &self.config.build_id {
            Some(build_id) => {
                let Some(installer) = &self.installer else {
                    return Err(HarnessError::MissingInstaller {
                        build_id: build_id.clone(),
                    });
                };
                Some((build_id.clone(), installer.install(build_id)?))
            }
            None => None,
        };

        let run_dir = open_run_directory(&self.config.logs_root, &Local::now().naive_local())?;
        let report_path = run_dir.join("report.csv");
        let mut report = ReportWriter::create(report_path.clone())?;
        let log_path = run_dir.join("harness.log");
        let log = LogSink::to_path(&log_path)?;
        let _ = log.log(LogLevel::Info, "Logging Started...");
        let _ = log.log(
            LogLevel::Info,
            &format!("Running suite {} ({} entries)...", suite.name, suite.entries.len()),
        );
        if let Some((build_id, path)) = &installed {
            let _ = log.log(
                LogLevel::Info,
                &format!("Installed build {build_id} from {}...", path.display()),
            );
        }

        let mut results: Vec<CaseResult> = Vec::new();
        for entry in &suite.entries {
            if !self.entry_is_runnable(entry) {
                report.skip_case(&entry.case_id)?;
                let _ = log.log(LogLevel::Info, &format!("{} skipped...", entry.case_id));
                results.push(CaseResult {
                    case_id: entry.case_id.clone(),
                    status: CaseStatus::Skipped,
                    failure: None,
                    start: None,
                    end: None,
                    bug_id: None,
                });
                continue;
            }

            let setup_problem = match self.registry.get(&entry.case_id) {
                None => Some(format!("no test case \"{}\" is registered", entry.case_id)),
                Some(_) => match lookup_case_data(&self.data, &entry.case_id) {
                    Ok(_) => None,
                    Err(e) => Some(e.to_string()),
                },
            };
            if let Some(message) = setup_problem {
                let now = Local::now().naive_local();
                report.start_case(&entry.case_id, &now)?;
                let _ = log.log(LogLevel::Failed, &message);
                let bug_id = bugdb
                    .as_ref()
                    .and_then(|db| db.lookup(&entry.case_id))
                    .map(str::to_string);
                report.complete_case(&entry.case_id, &now, CaseStatus::Fail, bug_id.as_deref())?;
                results.push(CaseResult {
                    case_id: entry.case_id.clone(),
                    status: CaseStatus::Fail,
                    failure: Some(FailureKind::SetupError { message }),
                    start: Some(now),
                    end: Some(now),
                    bug_id,
                });
                continue;
            }

            let definition = self.registry.get(&entry.case_id).expect("checked above");
            let data = lookup_case_data(&self.data, &entry.case_id)
                .expect("checked above")
                .clone();
            let start = Local::now().naive_local();
            report.start_case(&entry.case_id, &start)?;
            let mut result = execute_case(
                definition,
                &data,
                self.driver_factory.as_ref(),
                &log,
                self.config.timeout,
                Some(&run_dir),
            );
            if result.status == CaseStatus::Fail {
                result.bug_id = bugdb
                    .as_ref()
                    .and_then(|db| db.lookup(&entry.case_id))
                    .map(str::to_string);
            }
            let end = result.end.expect("executed cases carry an end time");
            report.complete_case(&entry.case_id, &end, result.status, result.bug_id.as_deref())?;

            if matches!(
                result.failure,
                Some(FailureKind::Crash { .. }) | Some(FailureKind::Timeout { .. })
            ) {
                if let Err(message) = self.env_reset.reset_environment() {
                    let _ = log.log(
                        LogLevel::Failed,
                        &format!("environment reset after {} failed: {message}", entry.case_id),
                    );
                } else {
                    let _ = log.log(
                        LogLevel::Info,
                        &format!("Environment reset after {}...", entry.case_id),
                    );
                }
            }
            results.push(result);
        }

        let totals = summarize(&results);
        let _ = log.log(
            LogLevel::Info,
            &format!(
                "Run complete: {} passed, {} failed, {} skipped...",
                totals.passed, totals.failed, totals.skipped
            ),
        );

        let run_id = run_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".to_string());
        let mail_path = match &self.config.outbox {
            Some(outbox) => match send_mail(
                outbox,
                &suite.name,
                totals.passed,
                totals.failed,
                &report_path,
                &run_id,
            ) {
                Ok(path) => {
                    let _ = log.log(
                        LogLevel::Info,
                        &format!("Results mailed to {}...", path.display()),
                    );
                    Some(path)
                }
                Err(e) => {
                    let _ = log.log(LogLevel::Failed, &format!("results mail failed: {e}"));
                    None
                }
            },
            None => None,
        };

        Ok(SuiteRunOutcome {
            result: SuiteResult {
                suite_name: suite.name.clone(),
                results,
                totals,
            },
            run_dir,
            report_path,
            log_path,
            mail_path,
        })
    }
}
