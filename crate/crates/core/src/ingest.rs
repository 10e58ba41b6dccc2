//! Commit-log ingestion.
//!
//! The input is a byte stream in the canonical log format: records are
//! separated by `0x1E`; inside a record the header fields are separated by
//! `0x1F` in the order hash, author name, author e-mail, author date, commit
//! date, merge flag, body. The body is followed by a line holding only `--`
//! and then the touched paths, one per line.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, Read, Write};

use chrono::{DateTime, FixedOffset, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RECORD_SEPARATOR: u8 = 0x1E;
pub const FIELD_SEPARATOR: u8 = 0x1F;
pub const PATHS_MARKER: &str = "--";

const HEADER_FIELDS: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitRecord {
    pub hash: String,
    pub author_name: String,
    pub author_email: String,
    pub author_date: DateTime<FixedOffset>,
    pub commit_date: DateTime<FixedOffset>,
    pub body: Vec<String>,
    pub paths: Vec<String>,
    pub is_merge: bool,
}

impl CommitRecord {
    /// Writes the record in the canonical log format, including the leading
    /// record separator.
    pub fn write_canonical<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let sep = FIELD_SEPARATOR as char;
        write!(
            out,
            "{rs}{hash}{sep}{name}{sep}{email}{sep}{adate}{sep}{cdate}{sep}{merge}{sep}",
            rs = RECORD_SEPARATOR as char,
            hash = self.hash,
            name = self.author_name,
            email = self.author_email,
            adate = self.author_date.to_rfc3339(),
            cdate = self.commit_date.to_rfc3339(),
            merge = if self.is_merge { "1" } else { "0" },
        )?;
        for line in &self.body {
            writeln!(out, "{line}")?;
        }
        writeln!(out, "{PATHS_MARKER}")?;
        for path in &self.paths {
            writeln!(out, "{path}")?;
        }
        Ok(())
    }
}

/// Top-level directory a commit touches. Files living directly in the
/// repository root map to [`Subsystem::Root`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum Subsystem {
    Root,
    Directory(String),
}

impl Subsystem {
    pub const ROOT_LABEL: &'static str = "ROOT";

    pub fn name(&self) -> &str {
        match self {
            Subsystem::Root => Self::ROOT_LABEL,
            Subsystem::Directory(name) => name,
        }
    }

    pub fn of_path(path: &str) -> Subsystem {
        let path = path.trim_start_matches("./").trim_start_matches('/');
        match path.split_once('/') {
            Some((first, _)) if !first.is_empty() => Subsystem::Directory(first.to_string()),
            _ => Subsystem::Root,
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<String> for Subsystem {
    fn from(s: String) -> Self {
        if s == Self::ROOT_LABEL {
            Subsystem::Root
        } else {
            Subsystem::Directory(s)
        }
    }
}

impl From<&str> for Subsystem {
    fn from(s: &str) -> Self {
        Subsystem::from(s.to_string())
    }
}

impl From<Subsystem> for String {
    fn from(s: Subsystem) -> Self {
        s.name().to_string()
    }
}

/// How a commit touching several top-level directories is attributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribution {
    /// Counted once in every touched subsystem.
    #[default]
    All,
    /// Counted only in the subsystem of the first listed path.
    First,
}

/// Half-open time interval `[start, end)` with a display label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub label: String,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl Window {
    pub fn new(label: impl Into<String>, start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self> {
        if start >= end {
            return Err(Error::Config(format!(
                "window start {start} is not before end {end}"
            )));
        }
        Ok(Window {
            label: label.into(),
            start,
            end,
        })
    }

    /// Calendar year in UTC.
    pub fn year(year: i32) -> Result<Self> {
        let start = Utc
            .with_ymd_and_hms(year, 1, 1, 0, 0, 0)
            .single()
            .ok_or_else(|| Error::Config(format!("year {year} out of range")))?;
        let end = Utc
            .with_ymd_and_hms(year + 1, 1, 1, 0, 0, 0)
            .single()
            .ok_or_else(|| Error::Config(format!("year {year} out of range")))?;
        Window::new(year.to_string(), start, end)
    }

    pub fn years(from: i32, to: i32) -> Result<Vec<Self>> {
        if from > to {
            return Err(Error::Config(format!("--from {from} is after --to {to}")));
        }
        (from..=to).map(Window::year).collect()
    }

    pub fn contains(&self, instant: &DateTime<FixedOffset>) -> bool {
        let t = instant.with_timezone(&Utc);
        self.start <= t && t < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    MalformedRecord,
    TruncatedStream,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 0-based index of the record chunk within the stream.
    pub record_index: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DiagnosticKind::MalformedRecord => "malformed record",
            DiagnosticKind::TruncatedStream => "truncated stream",
        };
        write!(f, "record #{}: {kind}: {}", self.record_index, self.message)
    }
}

#[derive(Debug, Default, Clone)]
pub struct ParsedStream {
    pub records: Vec<CommitRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParsedStream {
    pub fn malformed_count(&self) -> usize {
        self.diagnostics
            .iter()
            .filter(|d| d.kind == DiagnosticKind::MalformedRecord)
            .count()
    }
}

pub fn read_commit_stream<R: Read>(mut input: R) -> Result<ParsedStream> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(Error::Stream)?;
    Ok(parse_commit_stream(&bytes))
}

/// Parses a canonical log stream. Malformed records are skipped and reported
/// in [`ParsedStream::diagnostics`]; a broken final record is reported as a
/// truncated stream.
pub fn parse_commit_stream(bytes: &[u8]) -> ParsedStream {
    let mut parsed = ParsedStream::default();
    let chunks: Vec<&[u8]> = bytes.split(|b| *b == RECORD_SEPARATOR).collect();
    let last = chunks.len().saturating_sub(1);

    for (index, chunk) in chunks.iter().enumerate() {
        let text = String::from_utf8_lossy(chunk).replace("\r\n", "\n");
        if text.trim().is_empty() {
            continue;
        }
        match parse_record(&text) {
            Ok(record) => parsed.records.push(record),
            Err(message) => {
                let kind = if index == last {
                    log::warn!("discarding partial final record: {message}");
                    DiagnosticKind::TruncatedStream
                } else {
                    log::warn!("skipping malformed record #{index}: {message}");
                    DiagnosticKind::MalformedRecord
                };
                parsed.diagnostics.push(Diagnostic {
                    record_index: index,
                    kind,
                    message,
                });
            }
        }
    }
    parsed
}

fn parse_record(text: &str) -> std::result::Result<CommitRecord, String> {
    let text = text.strip_prefix('\n').unwrap_or(text);
    let fields: Vec<&str> = text.split(FIELD_SEPARATOR as char).collect();
    if fields.len() != HEADER_FIELDS {
        return Err(format!(
            "expected {HEADER_FIELDS} header fields, found {}",
            fields.len()
        ));
    }

    let hash = fields[0].trim();
    if !matches!(hash.len(), 40 | 64) || !hash.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
        return Err(format!("invalid commit hash {hash:?}"));
    }
    let author_date = parse_date(fields[3]).map_err(|e| format!("author date: {e}"))?;
    let commit_date = parse_date(fields[4]).map_err(|e| format!("commit date: {e}"))?;
    let is_merge = match fields[5].trim() {
        "0" => false,
        "1" => true,
        other => return Err(format!("invalid merge flag {other:?}")),
    };

    let lines: Vec<&str> = fields[6].split('\n').collect();
    let marker = lines
        .iter()
        .rposition(|line| *line == PATHS_MARKER)
        .ok_or_else(|| "missing `--` line before the path list".to_string())?;
    let body = lines[..marker].iter().map(|l| l.to_string()).collect();
    let paths = lines[marker + 1..]
        .iter()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();

    Ok(CommitRecord {
        hash: hash.to_string(),
        author_name: fields[1].to_string(),
        author_email: fields[2].to_string(),
        author_date,
        commit_date,
        body,
        paths,
        is_merge,
    })
}

fn parse_date(raw: &str) -> std::result::Result<DateTime<FixedOffset>, chrono::ParseError> {
    DateTime::parse_from_rfc3339(raw.trim())
}

/// Non-merge commits whose commit date falls inside `window`.
pub fn filter_commits<'a, I>(records: I, window: &Window) -> Vec<&'a CommitRecord>
where
    I: IntoIterator<Item = &'a CommitRecord>,
{
    records
        .into_iter()
        .filter(|r| !r.is_merge && window.contains(&r.commit_date))
        .collect()
}

pub fn assign_subsystems(record: &CommitRecord) -> BTreeSet<Subsystem> {
    record.paths.iter().map(|p| Subsystem::of_path(p)).collect()
}

/// Subsystems a commit contributes to under the given attribution rule.
pub fn attributed_subsystems(record: &CommitRecord, attribution: Attribution) -> BTreeSet<Subsystem> {
    match attribution {
        Attribution::All => assign_subsystems(record),
        Attribution::First => record
            .paths
            .first()
            .map(|p| Subsystem::of_path(p))
            .into_iter()
            .collect(),
    }
}
