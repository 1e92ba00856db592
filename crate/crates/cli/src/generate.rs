//! The `gen` and `verify` subcommands over the reduction engine.

use std::process::ExitCode;

use anyhow::Context;
use snowleopard_core::reduction::{
    gen_all, gen_tway, parse_rows_csv, rows_to_csv, verify_coverage, CoveringSet, ParameterSpec,
    ReductionError,
};

use crate::{GenArgs, VerifyArgs};

/// At most this many uncovered tuples are listed before eliding the rest.
const UNCOVERED_LISTING_CAP: usize = 50;

fn load_spec(path: &std::path::Path) -> anyhow::Result<ParameterSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading parameter space {}", path.display()))?;
    ParameterSpec::parse(&text)
        .with_context(|| format!("parsing parameter space {}", path.display()))
}

pub fn generate(args: GenArgs) -> anyhow::Result<ExitCode> {
    let spec = load_spec(&args.params)?;
    let set = if args.all {
        match gen_all(&spec, Some(args.cap)) {
            Ok(set) => set,
            // The refusal names the exact combination count so the caller
            // can decide whether to raise the cap or reduce instead.
            Err(e @ ReductionError::EnumerationCapExceeded { .. }) => {
                eprintln!("error: {e}");
                return Ok(ExitCode::from(1));
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        let strength = args.strength.expect("clap requires --all or --strength");
        gen_tway(&spec, strength, args.seed)?
    };

    let csv = rows_to_csv(&set);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv)
                .with_context(|| format!("writing rows to {}", path.display()))?;
            eprintln!("{} rows written to {}", set.rows.len(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

pub fn verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let spec = load_spec(&args.params)?;
    let text = std::fs::read_to_string(&args.rows)
        .with_context(|| format!("reading rows {}", args.rows.display()))?;
    let rows = parse_rows_csv(&spec, &text)
        .with_context(|| format!("parsing rows {}", args.rows.display()))?;
    let set = CoveringSet {
        spec,
        strength: args.strength,
        rows,
    };
    let report = verify_coverage(&set, args.strength)?;
    if report.complete {
        println!(
            "complete: {} rows cover all {} tuples at strength {}",
            set.rows.len(),
            report.total_tuples,
            args.strength
        );
        return Ok(ExitCode::SUCCESS);
    }
    println!(
        "incomplete: {} of {} tuples uncovered at strength {}",
        report.uncovered.len(),
        report.total_tuples,
        args.strength
    );
    for tuple in report.uncovered.iter().take(UNCOVERED_LISTING_CAP) {
        println!("  {tuple}");
    }
    if report.uncovered.len() > UNCOVERED_LISTING_CAP {
        println!(
            "  ... and {} more",
            report.uncovered.len() - UNCOVERED_LISTING_CAP
        );
    }
    Ok(ExitCode::from(1))
}
