//! Function-spec input, run configs and report output.

use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quaternion::Quaternion;
use crate::series::SliceSeries;
use crate::verify::{Corpus, CorpusMember, RunConfig, VerificationReport};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("entry `{entry}`: {message}")]
    Validation { entry: String, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(serde_json::Error),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_syntax() || e.is_data() || e.is_eof() {
            IoError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
        } else {
            IoError::Json(e)
        }
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File { path: path.to_owned(), source })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    fs::write(path, bytes).map_err(|source| IoError::File { path: path.to_owned(), source })
}

/// Parses `{"name": [[x0, x1, x2, x3], ...], ...}`, coefficients by ascending
/// degree. Entry order is kept.
pub fn parse_function_spec(text: &str) -> Result<Corpus, IoError> {
    let entries: IndexMap<String, Vec<[f64; 4]>> = serde_json::from_str(text)?;
    let mut members = Vec::with_capacity(entries.len());
    for (name, coeffs) in entries {
        if coeffs.is_empty() {
            return Err(IoError::Validation { entry: name, message: "a series needs at least one coefficient".into() });
        }
        let coeffs: Vec<Quaternion> = coeffs.into_iter().map(Quaternion::from).collect();
        let series = SliceSeries::new(coeffs)
            .map_err(|e| IoError::Validation { entry: name.clone(), message: e.to_string() })?;
        members.push(CorpusMember { name, series });
    }
    Ok(Corpus::new(members))
}

pub fn load_function_spec(path: impl AsRef<Path>) -> Result<Corpus, IoError> {
    parse_function_spec(&read(path.as_ref())?)
}

/// Inverse of [`parse_function_spec`].
pub fn function_spec_json(corpus: &Corpus) -> String {
    let entries: IndexMap<&str, Vec<[f64; 4]>> = corpus
        .members()
        .iter()
        .map(|m| (m.name.as_str(), m.series.coeffs().iter().map(|c| [c.x0, c.x1, c.x2, c.x3]).collect()))
        .collect();
    serde_json::to_string_pretty(&entries).expect("finite coefficients serialize")
}

/// A complete run: the config that reproduces it and its reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub config: RunConfig,
    pub reports: Vec<VerificationReport>,
}

impl ReportDocument {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" | "csv-summary" => Ok(Format::Csv),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

/// Reads a run config, or the config embedded in a report document.
pub fn parse_config(text: &str) -> Result<RunConfig, IoError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("reports").is_some() {
        let doc: ReportDocument = serde_json::from_value(value)?;
        return Ok(doc.config);
    }
    Ok(serde_json::from_value(value)?)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig, IoError> {
    parse_config(&read(path.as_ref())?)
}

pub fn report_json(doc: &ReportDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("reports serialize");
    s.push('\n');
    s
}

const CSV_HEADER: [&str; 9] = ["suite", "function", "pass", "constant", "value", "witness", "samples", "skipped", "seed"];

/// One row per (suite, function); a suite that failed before producing
/// records gets a single row with an empty function name.
pub fn report_csv(doc: &ReportDocument) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for report in &doc.reports {
        let suite = report.suite.name();
        let seed = report.seed.to_string();
        if report.records.is_empty() {
            let pass = report.pass.to_string();
            w.write_record([suite, "", &pass, "", "", "", "0", "0", &seed])?;
        }
        for r in &report.records {
            let value = r.main_value().map(|v| v.to_string()).unwrap_or_default();
            let witness = r
                .main_witness()
                .map(|ws| ws.iter().map(|q| format!("{} {} {} {}", q.x0, q.x1, q.x2, q.x3)).collect::<Vec<_>>().join(";"))
                .unwrap_or_default();
            w.write_record([
                suite,
                &r.function,
                &r.pass.to_string(),
                &r.main,
                &value,
                &witness,
                &r.samples.to_string(),
                &r.skipped.to_string(),
                &seed,
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| IoError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes the document and returns whether every suite passed.
pub fn emit_report(doc: &ReportDocument, path: impl AsRef<Path>, format: Format) -> Result<bool, IoError> {
    let text = match format {
        Format::Json => report_json(doc),
        Format::Csv => report_csv(doc)?,
    };
    write(path.as_ref(), text.as_bytes())?;
    Ok(doc.all_pass())
}
