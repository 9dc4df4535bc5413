//! The canonical CSV interchange format.
//!
//! ```text
//! observed_at,country,province,city,confirmed,cured,deaths
//! 2020-04-10T00:00:00Z,Italy,,,147577,30455,18849
//! ```
//!
//! UTF-8, LF line endings, RFC 3339 timestamps, no quoting. A field that would
//! need quoting (it contains a comma) cannot be represented and the line is
//! rejected.

use std::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::region::RegionId;
use crate::series::DailyRecord;

pub const HEADER: &str = "observed_at,country,province,city,confirmed,cured,deaths";

/// One upstream observation before region normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RawRow {
    pub observed_at: DateTime<Utc>,
    pub raw_country: String,
    pub raw_province: Option<String>,
    pub raw_city: Option<String>,
    pub confirmed: u64,
    pub cured: u64,
    pub deaths: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl From<LineError> for Error {
    fn from(e: LineError) -> Self {
        Error::Parse {
            line: e.line,
            message: e.message,
        }
    }
}

/// Strict parse: the first bad line aborts with its line number (1-based,
/// the header is line 1).
pub fn parse_canonical_csv(data: &[u8]) -> Result<Vec<RawRow>> {
    let (rows, errors) = parse_canonical_csv_lenient(data)?;
    match errors.into_iter().next() {
        Some(e) => Err(e.into()),
        None => Ok(rows),
    }
}

/// Parses every line, collecting per-line errors instead of stopping. Only a
/// non-UTF-8 body or a bad header fails the whole document.
pub fn parse_canonical_csv_lenient(data: &[u8]) -> Result<(Vec<RawRow>, Vec<LineError>)> {
    let text = std::str::from_utf8(data).map_err(|e| Error::Parse {
        line: 1 + data[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        message: "invalid UTF-8".into(),
    })?;
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    match lines.next() {
        Some(HEADER) => {}
        Some(other) => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header {HEADER:?}, found {other:?}"),
            })
        }
        None => unreachable!("split yields at least one item"),
    }
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        if line.is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(row) => rows.push(row),
            Err(message) => errors.push(LineError {
                line: lineno,
                message,
            }),
        }
    }
    Ok((rows, errors))
}

fn parse_line(line: &str) -> std::result::Result<RawRow, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 7 {
        return Err(format!(
            "expected 7 fields, found {} (fields may not contain commas)",
            fields.len()
        ));
    }
    if fields.iter().any(|f| f.starts_with('"')) {
        return Err("quoted fields are not supported".into());
    }
    let observed_at = DateTime::parse_from_rfc3339(fields[0])
        .map_err(|e| format!("bad observed_at {:?}: {e}", fields[0]))?
        .with_timezone(&Utc);
    let country = fields[1].trim();
    if country.is_empty() {
        return Err("country is empty".into());
    }
    let opt = |s: &str| {
        let s = s.trim();
        (!s.is_empty()).then(|| s.to_owned())
    };
    let count = |name: &str, s: &str| -> std::result::Result<u64, String> {
        if s.trim_start().starts_with('-') {
            return Err(format!("negative {name} count {s:?}"));
        }
        s.trim().parse::<u64>().map_err(|_| format!("{name} is not a non-negative integer: {s:?}"))
    };
    Ok(RawRow {
        observed_at,
        raw_country: country.to_owned(),
        raw_province: opt(fields[2]),
        raw_city: opt(fields[3]),
        confirmed: count("confirmed", fields[4])?,
        cured: count("cured", fields[5])?,
        deaths: count("deaths", fields[6])?,
    })
}

pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Serializes records keyed by canonical region id. Callers supply the
/// ordering; the store uses region id, then date.
pub fn write_canonical_csv<'a>(records: impl IntoIterator<Item = (&'a RegionId, &'a DailyRecord)>) -> String {
    let mut out = String::with_capacity(4096);
    out.push_str(HEADER);
    out.push('\n');
    for (id, rec) in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            format_timestamp(&rec.observed_at),
            id.country_code(),
            id.province_name().unwrap_or(""),
            id.city_name().unwrap_or(""),
            rec.confirmed,
            rec.cured,
            rec.deaths
        );
    }
    out
}
