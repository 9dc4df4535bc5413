//! Fetch → parse → normalize → coalesce → repair → publish.

mod coalesce;
mod dxy;
mod fetch;
mod normalize;
mod repair;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

pub use crate::canonical::{parse_canonical_csv, parse_canonical_csv_lenient, RawRow};
pub use coalesce::{coalesce_daily, Observation};
pub use dxy::{parse_dxy_json, DxyParse};
pub use fetch::{fetch_source, CONNECT_TIMEOUT, MAX_REDIRECTS, TOTAL_TIMEOUT};
pub use normalize::{normalize_region, Normalized};
pub use repair::repair_monotonic;

use crate::error::{Error, Result};
use crate::region::RegionId;
use crate::series::{CumulativeSeries, DailyRecord};
use crate::store::{DatasetVersion, Store, VersionBuilder};
use crate::tables::Tables;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    CanonicalCsv,
    DxyJson,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::CanonicalCsv => "canonical_csv",
            SourceKind::DxyJson => "dxy_json",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical_csv" => Ok(SourceKind::CanonicalCsv),
            "dxy_json" => Ok(SourceKind::DxyJson),
            other => Err(Error::invalid(format!(
                "unknown source kind {other:?} (expected canonical_csv or dxy_json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceDescriptor {
    pub kind: SourceKind,
    pub location: String,
}

impl SourceDescriptor {
    pub fn new(kind: SourceKind, location: impl Into<String>) -> Result<Self> {
        let location = location.into();
        if location.trim().is_empty() {
            return Err(Error::invalid("source location is empty"));
        }
        Ok(SourceDescriptor { kind, location })
    }
}

/// `kind=location`, e.g. `canonical_csv=fixtures/world.csv`.
impl FromStr for SourceDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, location) = s
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("source {s:?} is not of the form kind=location")))?;
        SourceDescriptor::new(kind.parse()?, location)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedSource {
    pub rows: Vec<RawRow>,
    pub skipped: usize,
}

pub fn parse_source(kind: SourceKind, data: &[u8]) -> Result<ParsedSource> {
    match kind {
        SourceKind::CanonicalCsv => Ok(ParsedSource {
            rows: parse_canonical_csv(data)?,
            skipped: 0,
        }),
        SourceKind::DxyJson => {
            let DxyParse { rows, skipped } = parse_dxy_json(data)?;
            Ok(ParsedSource { rows, skipped })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceReport {
    pub kind: SourceKind,
    pub location: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub retryable: bool,
    pub rows_parsed: usize,
    pub rows_skipped: usize,
}

/// Row accounting holds `rows_parsed = rows_attributed + rows_skipped`;
/// quarantined rows are attributed (to the quarantine bucket).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub version_id: u64,
    pub sources: Vec<SourceReport>,
    pub rows_parsed: usize,
    pub rows_skipped: usize,
    pub rows_attributed: usize,
    pub rows_quarantined: usize,
    pub quarantined_names: BTreeMap<String, usize>,
    pub records: usize,
    pub regions: usize,
    pub anomalies: usize,
    /// (region, date) records that are new or whose repaired counts differ
    /// from the previous version.
    pub value_changes: usize,
}

impl IngestReport {
    pub fn failed_sources(&self) -> usize {
        self.sources.iter().filter(|s| !s.ok).count()
    }
}

/// Parses and normalizes one source without touching any store.
pub fn normalize_rows(rows: &[RawRow], tables: &Tables) -> (Vec<Observation>, BTreeMap<String, usize>) {
    let mut quarantined = BTreeMap::new();
    let observations = rows
        .iter()
        .map(|row| {
            let n = normalize_region(row, tables);
            if n.quarantined {
                *quarantined.entry(row.raw_country.clone()).or_insert(0) += 1;
            }
            Observation {
                region: n.region,
                observed_at: row.observed_at,
                confirmed: row.confirmed,
                cured: row.cured,
                deaths: row.deaths,
            }
        })
        .collect();
    (observations, quarantined)
}

/// Builds the next version from already-fetched source bytes. Existing
/// records of `current` compete with the new rows under the same coalescing
/// rule, so re-ingesting identical data changes nothing.
pub fn stage_snapshot(
    current: &DatasetVersion,
    tables: &Tables,
    fetched: Vec<(SourceDescriptor, Result<Vec<u8>>)>,
) -> Result<(VersionBuilder, IngestReport)> {
    if fetched.is_empty() {
        return Err(Error::invalid("at least one source is required"));
    }
    let mut report = IngestReport::default();
    let mut observations = Vec::new();
    for (desc, bytes) in fetched {
        let parsed = bytes.and_then(|b| parse_source(desc.kind, &b));
        match parsed {
            Ok(ParsedSource { rows, skipped }) => {
                let (obs, quarantined) = normalize_rows(&rows, tables);
                report.rows_parsed += rows.len() + skipped;
                report.rows_skipped += skipped;
                report.rows_attributed += obs.len();
                for (name, n) in quarantined {
                    report.rows_quarantined += n;
                    *report.quarantined_names.entry(name).or_insert(0) += n;
                }
                observations.extend(obs);
                report.sources.push(SourceReport {
                    kind: desc.kind,
                    location: desc.location,
                    ok: true,
                    error: None,
                    retryable: false,
                    rows_parsed: rows.len() + skipped,
                    rows_skipped: skipped,
                });
            }
            Err(e) => {
                tracing::warn!(source = %desc.location, error = %e, "source failed");
                report.sources.push(SourceReport {
                    kind: desc.kind,
                    location: desc.location,
                    ok: false,
                    retryable: e.is_retryable(),
                    error: Some(e.to_string()),
                    rows_parsed: 0,
                    rows_skipped: 0,
                });
            }
        }
    }
    if report.failed_sources() == report.sources.len() {
        return Err(Error::AllSourcesFailed(report.sources.len()));
    }

    let existing = current
        .series()
        .values()
        .flat_map(|s| s.raw.iter().map(|r| Observation::from_record(s.region.clone(), r)));
    let merged = coalesce_daily(existing.chain(observations));

    let mut per_region: BTreeMap<RegionId, Vec<DailyRecord>> = BTreeMap::new();
    for ((region, _), rec) in merged {
        per_region.entry(region).or_default().push(rec);
    }

    let mut builder = VersionBuilder::on(current);
    for (region, raw) in per_region {
        let (repaired, anomalies) = repair_monotonic(&raw)?;
        report.records += raw.len();
        report.anomalies += anomalies.len();
        report.value_changes += count_changes(current.series().get(&region), &repaired);
        builder.insert_series(CumulativeSeries {
            region,
            raw,
            repaired,
            anomalies,
        });
    }
    report.regions = builder.series().len();
    builder.fill_registry(tables);
    Ok((builder, report))
}

fn count_changes(previous: Option<&CumulativeSeries>, repaired: &[DailyRecord]) -> usize {
    let Some(prev) = previous else {
        return repaired.len();
    };
    repaired
        .iter()
        .filter(|rec| {
            match prev.repaired.binary_search_by_key(&rec.date, |r| r.date) {
                Ok(i) => prev.repaired[i].counts() != rec.counts(),
                Err(_) => true,
            }
        })
        .count()
}

/// Fetches every source (concurrently), stages the merged data against the
/// store's current version and publishes it. If every source fails the
/// store is left untouched.
pub async fn ingest_snapshot(
    store: &Store,
    descs: &[SourceDescriptor],
) -> Result<(Arc<DatasetVersion>, IngestReport)> {
    if descs.is_empty() {
        return Err(Error::invalid("at least one source is required"));
    }
    let bodies = futures::future::join_all(descs.iter().map(|d| fetch_source(&d.location))).await;
    let fetched = descs.iter().cloned().zip(bodies).collect();
    let current = store.current();
    let (builder, mut report) = stage_snapshot(&current, store.tables(), fetched)?;
    let version = store.publish(builder)?;
    report.version_id = version.version_id();
    Ok((version, report))
}
