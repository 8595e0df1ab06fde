use std::fmt::Write as _;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::Result;
use crate::experiment::ExperimentReport;
use crate::hybrid::RetrievalResult;
use crate::io::{read_text, write_text};

pub const CSV_HEADER: &str = "method,relevance,diversity,items";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format {other:?} (expected csv or json)")),
        }
    }
}

/// One row per result; metrics to 4 decimals, item ids joined by `;`.
/// A result with fewer than two items leaves the diversity field empty.
pub fn results_to_csv(results: &[RetrievalResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in results {
        let diversity = r.diversity.map(|d| format!("{d:.4}")).unwrap_or_default();
        let items: Vec<String> = r.items.iter().map(|i| i.id.to_string()).collect();
        writeln!(out, "{},{:.4},{},{}", r.method, r.relevance, diversity, items.join(";")).expect("write to string");
    }
    out
}

pub fn to_csv(report: &ExperimentReport) -> String {
    results_to_csv(&report.results)
}

pub fn to_json(report: &ExperimentReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(text)?)
}

pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => Ok(to_csv(report)),
        ReportFormat::Json => to_json(report),
    }
}

pub fn export_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    write_text(path, &render_report(report, format)?)
}

pub fn import_json_report(path: &Path) -> Result<ExperimentReport> {
    from_json(&read_text(path)?)
}
