//! The `dashboard` subcommand: gather report files and render the page.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use snowleopard_core::logreport::{render_dashboard, summarize_reports};

use crate::DashboardArgs;

pub fn execute(args: DashboardArgs) -> anyhow::Result<ExitCode> {
    let mut paths: Vec<PathBuf> = glob::glob(&args.reports)
        .with_context(|| format!("bad glob pattern \"{}\"", args.reports))?
        .collect::<Result<_, _>>()
        .context("walking report files")?;
    paths.sort();

    let (summaries, totals) = summarize_reports(&paths)?;
    let html = render_dashboard(&summaries, &totals);
    std::fs::write(&args.out, html)
        .with_context(|| format!("writing dashboard to {}", args.out.display()))?;

    // No matches is an empty page, not an error: a fresh bench has no runs.
    println!(
        "dashboard: {} report(s), {} passed, {} failed, {} skipped -> {}",
        summaries.len(),
        totals.passed,
        totals.failed,
        totals.skipped,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
