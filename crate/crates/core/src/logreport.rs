//! Logging, run reports, bug links, mail, and the results dashboard.
//!
//! Every run gets its own timestamped directory under the logs root, holding
//! one tagged log file per case plus a `report.csv` that is rewritten after
//! every case so a mid-run crash still leaves a readable report. Log lines
//! carry an `[INFO]`, `[PASSED]` or `[FAILED]` tag so failures can be grepped
//!out of hundreds of case logs; assertion failures append the source file and
//! line that raised them. At the end of a run the report is mailed as an
//! `.eml`-style file into an outbox directory, and any number of reports can
//! be aggregated into a single self-contained HTML dashboard.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use chrono::{Datelike, Local, NaiveDateTime, Timelike};
use thiserror::Error;

/// Header row of every run report.
pub const REPORT_HEADER: &str = "id,start_time,end_time,status,bug_id";

/// Header row of a bug database file.
pub const BUGDB_HEADER: &str = "case_id,bug_id";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report: {0}")]
    Io(#[from] io::Error),
    #[error("report: {0}")]
    Csv(#[from] csv::Error),
    #[error("report row for \"{id}\" completed but never started")]
    NotStarted { id: String },
    #[error("report row for \"{id}\" already recorded")]
    AlreadyRecorded { id: String },
    #[error("report \"{path}\" is missing the \"{REPORT_HEADER}\" header, found \"{found}\"")]
    MissingHeader { path: String, found: String },
    #[error("report \"{path}\" row {row}: expected 5 columns, found {found}")]
    BadRow {
        path: String,
        row: usize,
        found: usize,
    },
    #[error("bug database \"{path}\" {message}")]
    BadBugDb { path: String, message: String },
}

// ---------------------------------------------------------------------------
// Tagged log lines

/// Tag carried by every log line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogLevel {
    Info,
    Passed,
    Failed,
}

impl fmt::Display for LogLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogLevel::Info => "INFO",
            LogLevel::Passed => "PASSED",
            LogLevel::Failed => "FAILED",
        })
    }
}

/// Source position appended to assertion-failure lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLocator {
    pub file: String,
    pub line: u32,
}

impl SourceLocator {
    pub fn new(file: impl Into<String>, line: u32) -> Self {
        SourceLocator {
            file: file.into(),
            line,
        }
    }
}

/// Log timestamp: day and month unpadded, time always six digits.
pub fn format_timestamp(ts: &NaiveDateTime) -> String {
    format!(
        "{}-{}-{} {:02}:{:02}:{:02}",
        ts.day(),
        ts.month(),
        ts.year(),
        ts.hour(),
        ts.minute(),
        ts.second()
    )
}

/// Renders one log line. Messages are kept to a single line; any embedded
/// line breaks become spaces. A locator appends ` at <file> line <n>.` after
/// the message (directly after the tag when the message is empty).
pub fn format_log_line(
    ts: &NaiveDateTime,
    level: LogLevel,
    message: &str,
    locator: Option<&SourceLocator>,
) -> String {
    let message = message.replace(['\r', '\n'], " ");
    let mut line = format!("{} [{}] {}", format_timestamp(ts), level, message);
    if let Some(loc) = locator {
        if !message.is_empty() {
            line.push(' ');
        }
        line.push_str(&format!("at {} line {}.", loc.file, loc.line));
    }
    line
}

enum SinkOut {
    File(fs::File),
    Memory(Vec<u8>),
}

/// A shared, cloneable log destination. Each line is flushed as it is
/// written, so logs survive a harness crash mid-case.
#[derive(Clone)]
pub struct LogSink {
    out: Arc<Mutex<SinkOut>>,
}

fn lock_out(out: &Mutex<SinkOut>) -> MutexGuard<'_, SinkOut> {
    out.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

impl LogSink {
    /// Opens (or truncates) a log file at `path`.
    pub fn to_path(path: &Path) -> io::Result<LogSink> {
        Ok(LogSink {
            out: Arc::new(Mutex::new(SinkOut::File(fs::File::create(path)?))),
        })
    }

    /// A sink that accumulates in memory; handy under test.
    pub fn in_memory() -> LogSink {
        LogSink {
            out: Arc::new(Mutex::new(SinkOut::Memory(Vec::new()))),
        }
    }

    /// Everything written so far, for in-memory sinks only.
    pub fn memory_contents(&self) -> Option<String> {
        match &*lock_out(&self.out) {
            SinkOut::Memory(bytes) => Some(String::from_utf8_lossy(bytes).into_owned()),
            SinkOut::File(_) => None,
        }
    }

    /// Writes a line stamped with the current wall-clock time.
    pub fn log(&self, level: LogLevel, message: &str) -> io::Result<()> {
        self.log_line_at(&Local::now().naive_local(), level, message, None)
    }

    /// Writes a `[FAILED]` line, appending the locator when one is known.
    pub fn log_failure(&self, message: &str, locator: Option<&SourceLocator>) -> io::Result<()> {
        self.log_line_at(
            &Local::now().naive_local(),
            LogLevel::Failed,
            message,
            locator,
        )
    }

    /// Writes a fully specified line. Tests use this to pin timestamps.
    pub fn log_line_at(
        &self,
        ts: &NaiveDateTime,
        level: LogLevel,
        message: &str,
        locator: Option<&SourceLocator>,
    ) -> io::Result<()> {
        let line = format_log_line(ts, level, message, locator);
        let mut out = lock_out(&self.out);
        match &mut *out {
            SinkOut::File(file) => {
                writeln!(file, "{line}")?;
                file.flush()
            }
            SinkOut::Memory(bytes) => {
                bytes.extend_from_slice(line.as_bytes());
                bytes.push(b'\n');
                Ok(())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Run directories

/// Creates `root/YYYYMMDD_HHMMSS/`, appending `_2`, `_3`, ... when a run in
/// the same second already claimed the name. Returns the created directory.
pub fn open_run_directory(root: &Path, stamp: &NaiveDateTime) -> io::Result<PathBuf> {
    fs::create_dir_all(root)?;
    let base = format!(
        "{:04}{:02}{:02}_{:02}{:02}{:02}",
        stamp.year(),
        stamp.month(),
        stamp.day(),
        stamp.hour(),
        stamp.minute(),
        stamp.second()
    );
    let mut attempt = 1usize;
    loop {
        let name = if attempt == 1 {
            base.clone()
        } else {
            format!("{base}_{attempt}")
        };
        let dir = root.join(&name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => attempt += 1,
            Err(e) => return Err(e),
        }
    }
}

// ---------------------------------------------------------------------------
// Run report

/// Final disposition of one suite entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseStatus {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for CaseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseStatus::Pass => "Pass",
            CaseStatus::Fail => "Fail",
            CaseStatus::Skipped => "Skipped",
        })
    }
}

impl CaseStatus {
    pub fn parse(text: &str) -> Option<CaseStatus> {
        match text {
            "Pass" => Some(CaseStatus::Pass),
            "Fail" => Some(CaseStatus::Fail),
            "Skipped" => Some(CaseStatus::Skipped),
            _ => None,
        }
    }
}

/// One row read back from a report file. Times are `HH:MM`, empty for rows
/// that never ran (skips, or a case in flight when the harness died).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub id: String,
    pub start_time: String,
    pub end_time: String,
    pub status: String,
    pub bug_id: String,
}

enum RowState {
    InProgress { id: String, start: String },
    Done(ReportRow),
}

/// Writes the per-run `report.csv`. A case's row is started when the case
/// starts and completed when it ends; the file on disk is rewritten after
/// every change so it always reflects everything known so far.
pub struct ReportWriter {
    path: PathBuf,
    rows: Vec<RowState>,
}

impl ReportWriter {
    /// Creates the report with its header row.
    pub fn create(path: PathBuf) -> Result<ReportWriter, ReportError> {
        let writer = ReportWriter {
            path,
            rows: Vec::new(),
        };
        writer.flush()?;
        Ok(writer)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn known(&self, id: &str) -> bool {
        self.rows.iter().any(|r| match r {
            RowState::InProgress { id: known, .. } => known == id,
            RowState::Done(row) => row.id == id,
        })
    }

    /// Records that a case has started; its row exists from this moment.
    pub fn start_case(&mut self, id: &str, start: &NaiveDateTime) -> Result<(), ReportError> {
        if self.known(id) {
            return Err(ReportError::AlreadyRecorded { id: id.to_string() });
        }
        self.rows.push(RowState::InProgress {
            id: id.to_string(),
            start: start.format("%H:%M").to_string(),
        });
        self.flush()
    }

    /// Fills in the end time, status, and any linked bug for a started case.
    pub fn complete_case(
        &mut self,
        id: &str,
        end: &NaiveDateTime,
        status: CaseStatus,
        bug_id: Option<&str>,
    ) -> Result<(), ReportError> {
        let slot = self
            .rows
            .iter_mut()
            .find(|r| matches!(r, RowState::InProgress { id: known, .. } if known == id));
        let Some(slot) = slot else {
            return Err(ReportError::NotStarted { id: id.to_string() });
        };
        let RowState::InProgress { id, start } = slot else {
            unreachable!()
        };
        *slot = RowState::Done(ReportRow {
            id: std::mem::take(id),
            start_time: std::mem::take(start),
            end_time: end.format("%H:%M").to_string(),
            status: status.to_string(),
            bug_id: bug_id.unwrap_or("").to_string(),
        });
        self.flush()
    }

    /// Records a row for an entry that never executed.
    pub fn skip_case(&mut self, id: &str) -> Result<(), ReportError> {
        if self.known(id) {
            return Err(ReportError::AlreadyRecorded { id: id.to_string() });
        }
        self.rows.push(RowState::Done(ReportRow {
            id: id.to_string(),
            start_time: String::new(),
            end_time: String::new(),
            status: CaseStatus::Skipped.to_string(),
            bug_id: String::new(),
        }));
        self.flush()
    }

    fn flush(&self) -> Result<(), ReportError> {
        let mut writer = csv::WriterBuilder::new()
            .quote_style(csv::QuoteStyle::Necessary)
            .from_writer(Vec::new());
        writer
            .write_record(REPORT_HEADER.split(','))
            .expect("in-memory write");
        for row in &self.rows {
            let rendered = match row {
                RowState::InProgress { id, start } => {
                    [id.clone(), start.clone(), String::new(), String::new(), String::new()]
                }
                RowState::Done(r) => [
                    r.id.clone(),
                    r.start_time.clone(),
                    r.end_time.clone(),
                    r.status.clone(),
                    r.bug_id.clone(),
                ],
            };
            writer.write_record(&rendered).expect("in-memory write");
        }
        let bytes = writer.into_inner().expect("in-memory flush");
        fs::write(&self.path, bytes)?;
        Ok(())
    }
}

/// Reads a report file back, enforcing the header and column shape.
pub fn read_report(path: &Path) -> Result<Vec<ReportRow>, ReportError> {
    let text = fs::read_to_string(path)?;
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<&str> = reader.headers()?.iter().collect();
    if header.join(",") != REPORT_HEADER {
        return Err(ReportError::MissingHeader {
            path: shown,
            found: header.join(","),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 5 {
            return Err(ReportError::BadRow {
                path: shown,
                row: i + 2,
                found: record.len(),
            });
        }
        rows.push(ReportRow {
            id: record[0].to_string(),
            start_time: record[1].to_string(),
            end_time: record[2].to_string(),
            status: record[3].to_string(),
            bug_id: record[4].to_string(),
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Bug database

/// Known-bug links: case id to the bug filed for its failure. Failed report
/// rows carry the linked bug id so a red row points straight at its bug.
#[derive(Debug, Clone, Default)]
pub struct BugDb {
    map: std::collections::BTreeMap<String, String>,
}

impl BugDb {
    pub fn empty() -> BugDb {
        BugDb::default()
    }

    /// Loads `case_id,bug_id` rows. Any malformed row fails the load; a bad
    /// bug link discovered mid-run would silently unlink failures.
    pub fn load(path: &Path) -> Result<BugDb, ReportError> {
        let shown = path.display().to_string();
        let text = fs::read_to_string(path)?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(text.as_bytes());
        let header: Vec<&str> = reader.headers()?.iter().collect();
        if header.join(",") != BUGDB_HEADER {
            return Err(ReportError::BadBugDb {
                path: shown,
                message: format!(
                    "is missing the \"{BUGDB_HEADER}\" header, found \"{}\"",
                    header.join(",")
                ),
            });
        }
        let mut map = std::collections::BTreeMap::new();
        for (i, record) in reader.records().enumerate() {
            let row = i + 2;
            let record = record.map_err(ReportError::Csv)?;
            let fields: Vec<&str> = record.iter().collect();
            if fields.len() != 2 || fields[0].trim().is_empty() || fields[1].trim().is_empty() {
                return Err(ReportError::BadBugDb {
                    path: shown,
                    message: format!("row {row}: expected non-empty case_id and bug_id"),
                });
            }
            if map
                .insert(fields[0].trim().to_string(), fields[1].trim().to_string())
                .is_some()
            {
                return Err(ReportError::BadBugDb {
                    path: shown,
                    message: format!("row {row}: duplicate case_id \"{}\"", fields[0]),
                });
            }
        }
        Ok(BugDb { map })
    }

    /// The bug filed for `case_id`, if one is known.
    pub fn lookup(&self, case_id: &str) -> Option<&str> {
        self.map.get(case_id).map(String::as_str)
    }
}

// ---------------------------------------------------------------------------
// Mail

/// A directory of `.eml`-style message files standing in for a mail gateway.
#[derive(Debug, Clone)]
pub struct Outbox {
    dir: PathBuf,
}

impl Outbox {
    pub fn new(dir: PathBuf) -> Outbox {
        Outbox { dir }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

/// Writes the end-of-run message: subject with the pass/fail totals, a short
/// body, and the report file attached verbatim after a marker line. Returns
/// the path of the message file.
pub fn send_mail(
    outbox: &Outbox,
    suite_name: &str,
    passed: usize,
    failed: usize,
    report_path: &Path,
    run_id: &str,
) -> io::Result<PathBuf> {
    fs::create_dir_all(&outbox.dir)?;
    let report_bytes = fs::read(report_path)?;
    let report_name = report_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report.csv".to_string());
    let mut message = String::new();
    message.push_str(&format!(
        "Subject: Suite {suite_name}: {passed} passed, {failed} failed\n"
    ));
    message.push_str("From: snowleopard harness\n");
    message.push_str("To: test-results\n");
    message.push_str(&format!(
        "Date: {}\n\n",
        format_timestamp(&Local::now().naive_local())
    ));
    message.push_str(&format!("Suite: {suite_name}\n"));
    message.push_str(&format!("Passed: {passed}\n"));
    message.push_str(&format!("Failed: {failed}\n\n"));
    message.push_str(&format!("--- attachment: {report_name} ---\n"));
    message.push_str(&String::from_utf8_lossy(&report_bytes));

    let mut attempt = 1usize;
    loop {
        let name = if attempt == 1 {
            format!("{run_id}.eml")
        } else {
            format!("{run_id}_{attempt}.eml")
        };
        let path = outbox.dir.join(&name);
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(mut file) => {
                file.write_all(message.as_bytes())?;
                return Ok(path);
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => attempt += 1,
            Err(e) => return Err(e),
        }
    }
}

// ---------------------------------------------------------------------------
// Dashboard

/// Counts aggregated from one or more report files.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DashboardTotals {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

/// Per-report counts plus where they came from.
#[derive(Debug, Clone)]
pub struct ReportSummary {
    pub source: String,
    pub totals: DashboardTotals,
}

/// Reads and tallies each report file.
pub fn summarize_reports(
    paths: &[PathBuf],
) -> Result<(Vec<ReportSummary>, DashboardTotals), ReportError> {
    let mut summaries = Vec::new();
    let mut grand = DashboardTotals::default();
    for path in paths {
        let mut totals = DashboardTotals::default();
        for row in read_report(path)? {
            totals.total += 1;
            match CaseStatus::parse(&row.status) {
                Some(CaseStatus::Pass) => totals.passed += 1,
                Some(CaseStatus::Fail) => totals.failed += 1,
                Some(CaseStatus::Skipped) | None => totals.skipped += 1,
            }
        }
        grand.total += totals.total;
        grand.passed += totals.passed;
        grand.failed += totals.failed;
        grand.skipped += totals.skipped;
        summaries.push(ReportSummary {
            source: path.display().to_string(),
            totals,
        });
    }
    Ok((summaries, grand))
}

/// The chart parameters older tooling consumed; kept verbatim in the page.
pub fn legacy_chart_params(passed: usize, failed: usize) -> String {
    format!("cht=p&chd=t:{passed},{failed}&chl=Pass|Fail")
}

fn escape_html(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Point on a circle, angle measured clockwise from twelve o'clock.
fn pie_point(cx: f64, cy: f64, r: f64, degrees: f64) -> (f64, f64) {
    let rad = degrees.to_radians();
    (cx + r * rad.sin(), cy - r * rad.cos())
}

fn pie_svg(passed: usize, failed: usize) -> String {
    let executed = passed + failed;
    if executed == 0 {
        return "<p class=\"empty\">No executed cases.</p>".to_string();
    }
    let (cx, cy, r) = (100.0, 100.0, 90.0);
    let mut svg = String::from(
        "<svg width=\"200\" height=\"200\" viewBox=\"0 0 200 200\" role=\"img\" \
         aria-label=\"pass and fail share\">",
    );
    if failed == 0 || passed == 0 {
        let color = if failed == 0 { "#2e7d32" } else { "#c62828" };
        svg.push_str(&format!(
            "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{r}\" fill=\"{color}\"/>"
        ));
    } else {
        let angle = 360.0 * passed as f64 / executed as f64;
        let (sx, sy) = pie_point(cx, cy, r, 0.0);
        let (mx, my) = pie_point(cx, cy, r, angle);
        let pass_large = i32::from(angle > 180.0);
        let fail_large = i32::from(360.0 - angle > 180.0);
        svg.push_str(&format!(
            "<path d=\"M {cx} {cy} L {sx:.2} {sy:.2} A {r} {r} 0 {pass_large} 1 {mx:.2} {my:.2} Z\" \
             fill=\"#2e7d32\"/>"
        ));
        svg.push_str(&format!(
            "<path d=\"M {cx} {cy} L {mx:.2} {my:.2} A {r} {r} 0 {fail_large} 1 {sx:.2} {sy:.2} Z\" \
             fill=\"#c62828\"/>"
        ));
    }
    svg.push_str("</svg>");
    svg
}

/// Renders the dashboard: a pie of pass vs fail, per-report numbers, and the
/// legacy chart parameter string. Self-contained, no external assets.
pub fn render_dashboard(reports: &[ReportSummary], totals: &DashboardTotals) -> String {
    let mut html = String::from(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n\
         <title>Test Results</title>\n<style>\n\
         body { font-family: sans-serif; margin: 2em; color: #222; }\n\
         table { border-collapse: collapse; margin: 1em 0; }\n\
         th, td { border: 1px solid #999; padding: 0.3em 0.8em; text-align: left; }\n\
         th { background: #eee; }\n\
         .legend span { display: inline-block; width: 0.8em; height: 0.8em; margin-right: 0.3em; }\n\
         .pass { background: #2e7d32; }\n\
         .fail { background: #c62828; }\n\
         .empty { color: #666; font-style: italic; }\n\
         code { background: #f4f4f4; padding: 0.1em 0.3em; }\n\
         </style>\n</head>\n<body>\n<h1>Test Results</h1>\n",
    );
    html.push_str(&pie_svg(totals.passed, totals.failed));
    html.push_str(&format!(
        "\n<p class=\"legend\"><span class=\"pass\"></span>Pass: {} \
         <span class=\"fail\"></span>Fail: {}</p>\n",
        totals.passed, totals.failed
    ));
    html.push_str("<table>\n<tr><th>Report</th><th>Total</th><th>Passed</th><th>Failed</th><th>Skipped</th></tr>\n");
    for report in reports {
        html.push_str(&format!(
            "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>\n",
            escape_html(&report.source),
            report.totals.total,
            report.totals.passed,
            report.totals.failed,
            report.totals.skipped
        ));
    }
    html.push_str(&format!(
        "<tr><th>All reports</th><th>{}</th><th>{}</th><th>{}</th><th>{}</th></tr>\n</table>\n",
        totals.total, totals.passed, totals.failed, totals.skipped
    ));
    if reports.is_empty() {
        html.push_str("<p class=\"empty\">No reports found.</p>\n");
    }
    html.push_str(&format!(
        "<p>Legacy chart parameters: <code>{}</code></p>\n</body>\n</html>\n",
        legacy_chart_params(totals.passed, totals.failed)
    ));
    html
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn ts(y: i32, mo: u32, d: u32, h: u32, mi: u32, s: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(y, mo, d)
            .unwrap()
            .and_hms_opt(h, mi, s)
            .unwrap()
    }

    #[test]
    fn timestamp_leaves_day_and_month_unpadded() {
        assert_eq!(format_timestamp(&ts(2010, 8, 3, 12, 7, 28)), "3-8-2010 12:07:28");
        assert_eq!(
            format_timestamp(&ts(2010, 11, 23, 1, 2, 3)),
            "23-11-2010 01:02:03"
        );
    }

    #[test]
    fn info_line_matches_sample_byte_for_byte() {
        let line = format_log_line(
            &ts(2010, 8, 3, 12, 7, 28),
            LogLevel::Info,
            "Logging Started...",
            None,
        );
        assert_eq!(line, "3-8-2010 12:07:28 [INFO] Logging Started...");
    }

    #[test]
    fn failed_line_with_empty_message_matches_sample() {
        let line = format_log_line(
            &ts(2010, 8, 3, 12, 8, 34),
            LogLevel::Failed,
            "",
            Some(&SourceLocator::new("C:\\Perl\\lib\\Class.pm", 113)),
        );
        assert_eq!(
            line,
            "3-8-2010 12:08:34 [FAILED] at C:\\Perl\\lib\\Class.pm line 113."
        );
    }

    #[test]
    fn failed_line_keeps_locator_as_suffix_after_message() {
        let line = format_log_line(
            &ts(2010, 8, 3, 12, 8, 34),
            LogLevel::Failed,
            "freq mismatch",
            Some(&SourceLocator::new("steps.rs", 41)),
        );
        assert!(line.ends_with(" at steps.rs line 41."));
        assert!(line.contains("[FAILED] freq mismatch"));
    }

    #[test]
    fn empty_info_message_keeps_trailing_space() {
        let line = format_log_line(&ts(2010, 8, 3, 12, 0, 0), LogLevel::Info, "", None);
        assert!(line.ends_with("[INFO] "));
    }

    #[test]
    fn multiline_messages_are_flattened() {
        let line = format_log_line(
            &ts(2010, 8, 3, 12, 0, 0),
            LogLevel::Info,
            "one\ntwo",
            None,
        );
        assert_eq!(line, "3-8-2010 12:00:00 [INFO] one two");
    }

    #[test]
    fn sink_appends_lines_in_order() {
        let sink = LogSink::in_memory();
        sink.log(LogLevel::Info, "first").unwrap();
        sink.log(LogLevel::Passed, "second").unwrap();
        let text = sink.memory_contents().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains("[INFO] first"));
        assert!(lines[1].contains("[PASSED] second"));
    }

    #[test]
    fn run_directory_uses_compact_stamp_and_suffixes_collisions() {
        let root = tempfile::tempdir().unwrap();
        let stamp = ts(2010, 8, 3, 12, 7, 28);
        let first = open_run_directory(root.path(), &stamp).unwrap();
        assert_eq!(first.file_name().unwrap(), "20100803_120728");
        let second = open_run_directory(root.path(), &stamp).unwrap();
        assert_eq!(second.file_name().unwrap(), "20100803_120728_2");
        let third = open_run_directory(root.path(), &stamp).unwrap();
        assert_eq!(third.file_name().unwrap(), "20100803_120728_3");
    }

    #[test]
    fn run_directory_unwritable_root_errors() {
        let err = open_run_directory(Path::new("/proc/no-such-root"), &ts(2010, 8, 3, 0, 0, 0));
        assert!(err.is_err());
    }

    #[test]
    fn report_rows_go_through_start_then_complete() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        let mut report = ReportWriter::create(path.clone()).unwrap();
        report.start_case("tc1", &ts(2010, 8, 3, 12, 7, 0)).unwrap();
        // The in-flight row is already on disk.
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("tc1,12:07,,,"));
        report
            .complete_case("tc1", &ts(2010, 8, 3, 12, 10, 0), CaseStatus::Pass, None)
            .unwrap();
        report.start_case("tc2", &ts(2010, 8, 3, 12, 11, 0)).unwrap();
        report
            .complete_case(
                "tc2",
                &ts(2010, 8, 3, 12, 12, 0),
                CaseStatus::Fail,
                Some("PR2410"),
            )
            .unwrap();
        let rows = read_report(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(
            rows[0],
            ReportRow {
                id: "tc1".into(),
                start_time: "12:07".into(),
                end_time: "12:10".into(),
                status: "Pass".into(),
                bug_id: "".into(),
            }
        );
        assert_eq!(rows[1].bug_id, "PR2410");
        assert_eq!(rows[1].status, "Fail");
    }

    #[test]
    fn completing_an_unstarted_row_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut report = ReportWriter::create(dir.path().join("report.csv")).unwrap();
        let err = report
            .complete_case("ghost", &ts(2010, 8, 3, 12, 0, 0), CaseStatus::Pass, None)
            .unwrap_err();
        assert!(matches!(err, ReportError::NotStarted { .. }));
    }

    #[test]
    fn skipped_rows_have_empty_times() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        let mut report = ReportWriter::create(path.clone()).unwrap();
        report.skip_case("tc9").unwrap();
        let rows = read_report(&path).unwrap();
        assert_eq!(rows[0].start_time, "");
        assert_eq!(rows[0].end_time, "");
        assert_eq!(rows[0].status, "Skipped");
    }

    #[test]
    fn report_header_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        ReportWriter::create(path.clone()).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), REPORT_HEADER);
    }

    #[test]
    fn bugdb_loads_and_looks_up() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bugs.csv");
        fs::write(&path, "case_id,bug_id\ntc2,PR2410\ntc7,PR99\n").unwrap();
        let db = BugDb::load(&path).unwrap();
        assert_eq!(db.lookup("tc2"), Some("PR2410"));
        assert_eq!(db.lookup("tc1"), None);
    }

    #[test]
    fn bugdb_rejects_malformed_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bugs.csv");
        fs::write(&path, "case_id,bug_id\ntc2,\n").unwrap();
        assert!(matches!(
            BugDb::load(&path),
            Err(ReportError::BadBugDb { .. })
        ));
        fs::write(&path, "wrong,header\ntc2,PR1\n").unwrap();
        assert!(matches!(
            BugDb::load(&path),
            Err(ReportError::BadBugDb { .. })
        ));
    }

    #[test]
    fn mail_subject_and_attachment_are_exact() {
        let dir = tempfile::tempdir().unwrap();
        let report_path = dir.path().join("report.csv");
        fs::write(&report_path, "id,start_time,end_time,status,bug_id\ntc1,12:07,12:10,Pass,\n")
            .unwrap();
        let outbox = Outbox::new(dir.path().join("outbox"));
        let mail_path =
            send_mail(&outbox, "nightly", 2, 1, &report_path, "20100803_120728").unwrap();
        let message = fs::read_to_string(&mail_path).unwrap();
        assert!(message.starts_with("Subject: Suite nightly: 2 passed, 1 failed\n"));
        let marker = "--- attachment: report.csv ---\n";
        let attachment = message.split_once(marker).unwrap().1;
        assert_eq!(attachment.as_bytes(), fs::read(&report_path).unwrap());
    }

    #[test]
    fn mail_filenames_do_not_collide() {
        let dir = tempfile::tempdir().unwrap();
        let report_path = dir.path().join("report.csv");
        fs::write(&report_path, "id,start_time,end_time,status,bug_id\n").unwrap();
        let outbox = Outbox::new(dir.path().join("outbox"));
        let a = send_mail(&outbox, "s", 0, 0, &report_path, "run").unwrap();
        let b = send_mail(&outbox, "s", 0, 0, &report_path, "run").unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn dashboard_counts_match_reports() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        fs::write(
            &a,
            "id,start_time,end_time,status,bug_id\n\
             tc1,12:07,12:10,Pass,\ntc2,12:11,12:12,Fail,PR2410\ntc3,12:13,12:14,Pass,\n",
        )
        .unwrap();
        let b = dir.path().join("b.csv");
        fs::write(
            &b,
            "id,start_time,end_time,status,bug_id\ntc4,,,Skipped,\ntc5,09:00,09:01,Pass,\n",
        )
        .unwrap();
        let (summaries, totals) = summarize_reports(&[a, b]).unwrap();
        assert_eq!(summaries.len(), 2);
        assert_eq!(totals.total, 5);
        assert_eq!(totals.passed, 3);
        assert_eq!(totals.failed, 1);
        assert_eq!(totals.skipped, 1);
        let html = render_dashboard(&summaries, &totals);
        assert!(html.contains("cht=p&chd=t:3,1&chl=Pass|Fail"));
        assert!(html.contains("<svg"));
        assert!(html.contains("<th>All reports</th><th>5</th><th>3</th><th>1</th><th>1</th>"));
    }

    #[test]
    fn dashboard_with_no_reports_is_an_empty_state() {
        let (summaries, totals) = summarize_reports(&[]).unwrap();
        let html = render_dashboard(&summaries, &totals);
        assert!(html.contains("No reports found."));
        assert!(html.contains("No executed cases."));
    }

    #[test]
    fn dashboard_all_pass_draws_a_full_circle() {
        let svg = pie_svg(3, 0);
        assert!(svg.contains("<circle"));
        let svg = pie_svg(0, 2);
        assert!(svg.contains("#c62828"));
    }

    #[test]
    fn legacy_chart_string_is_exact() {
        assert_eq!(legacy_chart_params(2, 1), "cht=p&chd=t:2,1&chl=Pass|Fail");
    }
}
