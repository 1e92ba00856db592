//! The `run` subcommand: load the suite and data, register the standard
//! data-driven case for every entry, and hand everything to the harness.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use snowleopard_core::datacontainer::parse_container;
use snowleopard_core::drivers::MockWebApp;
use snowleopard_core::harness::{
    exit_code, DriverFactory, LocalDirInstaller, RunConfig, SuiteRunner,
};
use snowleopard_core::logreport::Outbox;
use snowleopard_core::suite::{parse_suite, Priority, Suite, SuiteEntry};
use snowleopard_core::testlib::{configurable_keys, data_driven_case, TestCaseRegistry, CONFIG_PAGE};

use crate::RunArgs;

fn logs_root(args: &RunArgs) -> PathBuf {
    if let Some(path) = &args.logs {
        return path.clone();
    }
    if let Some(env) = std::env::var_os("SNOWLEOPARD_LOGS") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from("Logs")
}

pub fn execute(args: RunArgs) -> anyhow::Result<ExitCode> {
    let data_text = std::fs::read_to_string(&args.data)
        .with_context(|| format!("reading data container {}", args.data.display()))?;
    let parsed = parse_container(&data_text)
        .with_context(|| format!("parsing data container {}", args.data.display()))?;
    for warning in &parsed.warnings {
        eprintln!("warning: {warning}");
    }

    let suite = load_suite(&args)?;

    let priority_filter = match &args.priority {
        None => None,
        Some(text) => Some(
            Priority::parse(text)
                .with_context(|| format!("unknown priority \"{text}\" (use bat, p1, p2, or p3)"))?,
        ),
    };

    // Every case drives the same config page; its elements are every
    // configurable key appearing anywhere in the container.
    let mut elements: Vec<String> = parsed
        .data
        .cases
        .values()
        .flat_map(|case| configurable_keys(case).into_iter().map(str::to_string))
        .collect();
    elements.sort();
    elements.dedup();
    let factory: DriverFactory = Box::new(move || {
        MockWebApp::new()
            .with_page(CONFIG_PAGE, elements.clone())
            .into_handle()
    });

    let mut registry = TestCaseRegistry::new();
    for entry in &suite.entries {
        if registry.get(&entry.case_id).is_none() {
            registry
                .register_case(data_driven_case(&entry.case_id))
                .expect("fresh ids cannot collide");
        }
    }

    let root = logs_root(&args);
    let outbox_dir = args.outbox.clone().unwrap_or_else(|| root.join("outbox"));
    let config = RunConfig {
        priority_filter,
        timeout: Duration::from_secs(args.timeout),
        logs_root: root,
        build_id: args.build.clone(),
        bugdb_path: args.bugdb.clone(),
        outbox: Some(Outbox::new(outbox_dir)),
    };
    let runner = SuiteRunner::new(config, registry, parsed.data, factory)
        .with_installer(LocalDirInstaller::new(args.builds.clone()));

    let outcome = runner.run_suite(&suite)?;

    for result in &outcome.result.results {
        println!("{} {}", result.case_id, result.status);
    }
    let totals = outcome.result.totals;
    println!(
        "{} passed, {} failed, {} skipped",
        totals.passed, totals.failed, totals.skipped
    );
    println!("run directory: {}", outcome.run_dir.display());

    Ok(ExitCode::from(exit_code(&outcome.result) as u8))
}

fn load_suite(args: &RunArgs) -> anyhow::Result<Suite> {
    match &args.suite {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading suite {}", path.display()))?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "suite".to_string());
            let mut suite = parse_suite(&text, &name)
                .with_context(|| format!("parsing suite {}", path.display()))?;
            if !args.case.is_empty() {
                suite.entries.retain(|e| args.case.contains(&e.case_id));
                if suite.entries.is_empty() {
                    bail!("none of the requested cases appear in {}", path.display());
                }
            }
            Ok(suite)
        }
        // Ad hoc: just the named cases, every one runnable and most urgent.
        None => Ok(Suite {
            name: "ad-hoc".into(),
            entries: args
                .case
                .iter()
                .map(|id| SuiteEntry {
                    case_id: id.clone(),
                    run: true,
                    priority: Priority::Bat,
                })
                .collect(),
        }),
    }
}
