//! Test suites: ordered lists of case ids with run flags and priorities.
//!
//! A suite is a small CSV table (`test_case,run,priority`) kept next to the
//! test data, so deciding *what* runs tonight is a data edit, not a code
//! change. Priorities range from `Bat` (build acceptance, most urgent) down
//! to `P3`; filtering to a priority keeps everything at least that urgent,
//! so the BAT set is part of every filtered run.

use thiserror::Error;

/// Header required on every suite file.
pub const SUITE_HEADER: &str = "test_case,run,priority";

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("suite \"{suite}\" is missing the \"{SUITE_HEADER}\" header, found \"{found}\"")]
    MissingHeader { suite: String, found: String },
    #[error("suite \"{suite}\" row {row}: {message}")]
    Row {
        suite: String,
        row: usize,
        message: String,
    },
    #[error("reading suite: {0}")]
    Csv(#[from] csv::Error),
}

/// Case urgency, `Bat` being the most urgent. The derived order puts `Bat`
/// first so "everything at least priority X" is `priority <= X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Priority {
    Bat,
    P1,
    P2,
    P3,
}

impl Priority {
    /// Case-insensitive parse of `Bat`, `P1`, `P2`, `P3`.
    pub fn parse(text: &str) -> Option<Priority> {
        match text.to_ascii_lowercase().as_str() {
            "bat" => Some(Priority::Bat),
            "p1" => Some(Priority::P1),
            "p2" => Some(Priority::P2),
            "p3" => Some(Priority::P3),
            _ => None,
        }
    }
}

impl std::fmt::Display for Priority {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Priority::Bat => "Bat",
            Priority::P1 => "P1",
            Priority::P2 => "P2",
            Priority::P3 => "P3",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteEntry {
    pub case_id: String,
    pub run: bool,
    pub priority: Priority,
}

/// An ordered suite. Entry order is execution order; case ids are unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Suite {
    pub name: String,
    pub entries: Vec<SuiteEntry>,
}

/// Parses a suite from CSV text. The header row is row 1; parse errors cite
/// the offending file row.
pub fn parse_suite(text: &str, name: &str) -> Result<Suite, SuiteError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<&str> = reader.headers()?.iter().collect();
    if header.join(",") != SUITE_HEADER {
        return Err(SuiteError::MissingHeader {
            suite: name.to_string(),
            found: header.join(","),
        });
    }
    let mut entries: Vec<SuiteEntry> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let fields: Vec<&str> = record.iter().collect();
        if fields.len() != 3 {
            return Err(SuiteError::Row {
                suite: name.to_string(),
                row,
                message: format!("expected 3 columns, found {}", fields.len()),
            });
        }
        let case_id = fields[0].trim().to_string();
        if case_id.is_empty() {
            return Err(SuiteError::Row {
                suite: name.to_string(),
                row,
                message: "empty test_case id".into(),
            });
        }
        if entries.iter().any(|e| e.case_id == case_id) {
            return Err(SuiteError::Row {
                suite: name.to_string(),
                row,
                message: format!("duplicate case id \"{case_id}\""),
            });
        }
        let run = match fields[1].trim() {
            "Y" => true,
            "N" => false,
            other => {
                return Err(SuiteError::Row {
                    suite: name.to_string(),
                    row,
                    message: format!("run flag must be Y or N, found \"{other}\""),
                });
            }
        };
        let priority = Priority::parse(fields[2].trim()).ok_or_else(|| SuiteError::Row {
            suite: name.to_string(),
            row,
            message: format!(
                "priority must be one of Bat, P1, P2, P3, found \"{}\"",
                fields[2]
            ),
        })?;
        entries.push(SuiteEntry {
            case_id,
            run,
            priority,
        });
    }
    Ok(Suite {
        name: name.to_string(),
        entries,
    })
}

/// Renders a suite back to the CSV dialect [`parse_suite`] reads.
pub fn serialize_suite(suite: &Suite) -> String {
    let mut out = String::from(SUITE_HEADER);
    out.push('\n');
    for e in &suite.entries {
        out.push_str(&format!(
            "{},{},{}\n",
            e.case_id,
            if e.run { "Y" } else { "N" },
            e.priority
        ));
    }
    out
}

/// Entries that should execute: run flag set, and when a filter is given,
/// priority at least as urgent as the filter. `Bat` entries always qualify.
/// Suite order is preserved.
pub fn select_runnable(suite: &Suite, max_priority: Option<Priority>) -> Vec<&SuiteEntry> {
    suite
        .entries
        .iter()
        .filter(|e| e.run && max_priority.is_none_or(|max| e.priority <= max))
        .collect()
}
