//! Data-driven test automation: crash-tolerant suite execution over
//! XML-backed test data, with combinatorial reduction of the case space.
//!
//! The pieces, bottom up:
//!
//! - [`reduction`]: turns a parameter space into a small covering set of
//!   test rows (all combinations, or greedy t-way coverage), with
//!   verification and a brute-force minimality oracle for small spaces.
//! - [`datacontainer`]: XML test data containers parsed into per-case
//!   parameter maps, including `*_expected` overrides for validators.
//! - [`suite`]: CSV test suites with run flags and priorities, and the
//!   priority-cumulative selection rule.
//! - [`drivers`]: the application seam ([`drivers::AppDriver`]) plus a mock
//!   web application with fault injection for exercising the harness.
//! - [`testlib`]: four-phase test case definitions, the case registry, and
//!   keyword-argument methods with defaults.
//! - [`logreport`]: tagged logs, per-run report files, the known-bug
//!   database, results mail, and the results dashboard.
//! - [`harness`]: the suite runner that holds it all together and survives
//!   crashing, hanging, and failing cases.

pub mod datacontainer;
pub mod drivers;
pub mod harness;
pub mod logreport;
pub mod reduction;
pub mod suite;
pub mod testlib;

pub use datacontainer::{
    lookup_case_data, parse_container, ContainerError, ContainerParse, DataValue, ExpectedValue,
    ParamMap, TestDataMap,
};
pub use drivers::{
    dump_config, validate_config, Action, AppDriver, ConfigDump, DriverError, DriverHandle, Fault,
    FaultKind, Mismatch, MockWebApp,
};
pub use harness::{
    execute_case, exit_code, summarize, BuildInstaller, CaseResult, DriverFactory,
    EnvironmentReset, FailureKind, HarnessError, InstallError, LocalDirInstaller,
    NoopEnvironmentReset, RunConfig, SuiteResult, SuiteRunOutcome, SuiteRunner, Totals,
};
pub use logreport::{
    format_log_line, format_timestamp, legacy_chart_params, open_run_directory, read_report,
    render_dashboard, send_mail, summarize_reports, BugDb, CaseStatus, DashboardTotals, LogLevel,
    LogSink, Outbox, ReportError, ReportRow, ReportSummary, ReportWriter, SourceLocator,
};
pub use reduction::{
    count_all, gen_all, gen_tway, min_size_bruteforce, parse_rows_csv, rows_to_csv,
    verify_coverage, CoverageReport, CoveringSet, Parameter, ParameterSpec, ReductionError,
    TestRow, UncoveredTuple,
};
pub use suite::{parse_suite, select_runnable, serialize_suite, Priority, Suite, SuiteEntry, SuiteError};
pub use testlib::{
    configurable_keys, data_driven_case, ArgMap, Keyword, MethodFn, MethodRegistry, Phase,
    PhaseContext, PhaseFailure, PhaseFn, PhaseResult, TestCaseDefinition, TestCaseRegistry,
    TestlibError, CONFIG_PAGE,
};
