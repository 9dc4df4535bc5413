use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use axum::extract::rejection::{PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::Json;
use chrono::{DateTime, NaiveDate, Utc};
use epitrack_core::metrics::{
    self, derive_series, effective_series, ComparisonTable, DerivedPoint, HierarchyNode, MapEntry, Metric,
    MetricValue, WorldSummary,
};
use epitrack_core::store::SearchHit;
use epitrack_core::{AnomalyFlag, Continent, DatasetVersion, RegionId};
use serde::Serialize;

use crate::error::ApiError;
use crate::AppState;

type ApiResult<T> = Result<Json<Versioned<T>>, ApiError>;
type Params = Result<Query<HashMap<String, String>>, QueryRejection>;

/// Every document names the version it was computed from.
#[derive(Debug, Serialize)]
pub struct Versioned<T> {
    pub version_id: u64,
    pub as_of: DateTime<Utc>,
    #[serde(flatten)]
    pub body: T,
}

fn versioned<T>(v: &DatasetVersion, body: T) -> ApiResult<T> {
    Ok(Json(Versioned {
        version_id: v.version_id(),
        as_of: v.as_of(),
        body,
    }))
}

fn params(q: Params) -> Result<HashMap<String, String>, ApiError> {
    q.map(|Query(m)| m).map_err(|e| ApiError::invalid(e.body_text()))
}

fn parse_date(raw: &str) -> Result<NaiveDate, ApiError> {
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .map_err(|_| ApiError::invalid(format!("malformed date {raw:?}; expected YYYY-MM-DD")))
}

fn date_param(p: &HashMap<String, String>, key: &str) -> Result<Option<NaiveDate>, ApiError> {
    p.get(key).map(|s| parse_date(s)).transpose()
}

fn latest_date(v: &DatasetVersion) -> Option<NaiveDate> {
    v.date_range().map(|(_, last)| last)
}

pub async fn healthz() -> &'static str {
    "ok"
}

#[derive(Debug, Serialize)]
pub struct SummaryDoc {
    /// `None` only on an empty store queried without a date.
    pub data_date: Option<NaiveDate>,
    #[serde(flatten)]
    pub summary: WorldSummary,
}

pub async fn summary(State(state): State<AppState>, q: Params) -> ApiResult<SummaryDoc> {
    let v = state.store.current();
    let p = params(q)?;
    let date = date_param(&p, "date")?.or_else(|| latest_date(&v));
    let summary = match date {
        Some(d) => metrics::world_summary(&v, d)?,
        None => WorldSummary::default(),
    };
    versioned(&v, SummaryDoc { data_date: date, summary })
}

#[derive(Debug, Serialize)]
pub struct MapDoc {
    pub date: Option<NaiveDate>,
    pub entries: Vec<MapEntry>,
    pub totals: WorldSummary,
}

pub async fn map(State(state): State<AppState>, q: Params) -> ApiResult<MapDoc> {
    let v = state.store.current();
    let p = params(q)?;
    let doc = match date_param(&p, "date")?.or_else(|| latest_date(&v)) {
        Some(d) => {
            let m = metrics::map_snapshot(&v, d)?;
            MapDoc {
                date: Some(m.date),
                entries: m.entries,
                totals: m.totals,
            }
        }
        None => MapDoc {
            date: None,
            entries: Vec::new(),
            totals: WorldSummary::default(),
        },
    };
    versioned(&v, doc)
}

#[derive(Debug, Serialize)]
pub struct SearchDoc {
    pub query: String,
    pub results: Vec<SearchHitDoc>,
}

#[derive(Debug, Serialize)]
pub struct SearchHitDoc {
    /// `CN/Hubei/Wuhan` form, usable in series URLs and `compare`.
    pub path: String,
    #[serde(flatten)]
    pub hit: SearchHit,
}

pub async fn search(State(state): State<AppState>, q: Params) -> ApiResult<SearchDoc> {
    let v = state.store.current();
    let p = params(q)?;
    let query = p.get("q").cloned().unwrap_or_default();
    let results = v
        .resolve_region(&query)?
        .into_iter()
        .map(|hit| SearchHitDoc {
            path: hit.id.to_string(),
            hit,
        })
        .collect();
    versioned(&v, SearchDoc { query, results })
}

#[derive(Debug, Serialize)]
pub struct SeriesDoc {
    pub region: RegionId,
    pub path: String,
    pub display_name: String,
    pub continent: Continent,
    pub population: Option<u64>,
    /// True when the region has no series of its own and the points are
    /// the rollup of its children.
    pub rolled_up: bool,
    pub anomalies: Vec<AnomalyFlag>,
    pub points: Vec<DerivedPoint>,
}

fn path_region(
    path: Result<Path<Vec<String>>, PathRejection>,
) -> Result<RegionId, ApiError> {
    let Path(parts) = path.map_err(|e| ApiError::invalid(e.body_text()))?;
    let mut parts = parts.into_iter();
    let country = parts.next().unwrap_or_default();
    RegionId::new(country, parts.next(), parts.next())
        .map_err(|_| ApiError::not_found("unknown region"))
}

pub async fn series(
    State(state): State<AppState>,
    path: Result<Path<Vec<String>>, PathRejection>,
) -> ApiResult<SeriesDoc> {
    let v = state.store.current();
    let id = path_region(path)?;
    let meta = v.meta(&id)?;
    let series = effective_series(&v, &id)?;
    let points = derive_series(&series, meta)?;
    let own = v.series().get(&id);
    versioned(
        &v,
        SeriesDoc {
            path: id.to_string(),
            region: id,
            display_name: meta.display_name.clone(),
            continent: meta.continent,
            population: meta.population,
            rolled_up: own.is_none(),
            anomalies: own.map(|s| s.anomalies.clone()).unwrap_or_default(),
            points,
        },
    )
}

pub async fn compare(State(state): State<AppState>, q: Params) -> ApiResult<ComparisonTable> {
    let v = state.store.current();
    let p = params(q)?;
    let raw = p
        .get("regions")
        .ok_or_else(|| ApiError::invalid("missing regions parameter"))?;
    let regions = raw
        .split(',')
        .map(|r| r.trim().parse::<RegionId>().map_err(|e| ApiError::invalid(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if regions.len() > metrics::MAX_COMPARE_REGIONS {
        return Err(ApiError::invalid(format!(
            "at most {} regions, got {}",
            metrics::MAX_COMPARE_REGIONS,
            regions.len()
        )));
    }
    let metric: Metric = match p.get("metric") {
        Some(m) => m.parse()?,
        None => Metric::TotalConfirmed,
    };
    let from = date_param(&p, "from")?;
    let to = date_param(&p, "to")?;
    for id in &regions {
        v.meta(id)?;
    }
    let range = v.date_range();
    let (Some(from), Some(to)) = (from.or(range.map(|r| r.0)), to.or(range.map(|r| r.1))) else {
        return Err(ApiError::not_found("no data in this version"));
    };
    let table = metrics::compare(&v, &regions, metric, from, to)?;
    versioned(&v, table)
}

#[derive(Debug, Serialize)]
pub struct HierarchyDoc {
    pub root: HierarchyNode,
}

pub async fn hierarchy(
    State(state): State<AppState>,
    path: Result<Path<String>, PathRejection>,
) -> ApiResult<HierarchyDoc> {
    let v = state.store.current();
    let Path(code) = path.map_err(|e| ApiError::invalid(e.body_text()))?;
    let id = RegionId::country(&code).map_err(|_| ApiError::not_found(format!("unknown country {code:?}")))?;
    let root = metrics::hierarchy(&v, &id)?;
    versioned(&v, HierarchyDoc { root })
}

#[derive(Debug, Serialize)]
pub struct TopEntry {
    pub region: RegionId,
    pub value: Option<MetricValue>,
}

#[derive(Debug, Serialize)]
pub struct TopDoc {
    pub metric: Metric,
    pub date: Option<NaiveDate>,
    pub entries: Vec<TopEntry>,
}

pub async fn top(State(state): State<AppState>, q: Params) -> ApiResult<TopDoc> {
    let v = state.store.current();
    let p = params(q)?;
    let metric: Metric = match p.get("metric") {
        Some(m) => m.parse()?,
        None => Metric::TotalConfirmed,
    };
    let k = match p.get("k") {
        Some(k) => k
            .parse::<usize>()
            .map_err(|_| ApiError::invalid(format!("k must be a positive integer, got {k:?}")))?,
        None => 5,
    };
    let date = date_param(&p, "date")?.or_else(|| latest_date(&v));
    let entries = match date {
        Some(d) => metrics::top_k(&v, metric, d, k)?
            .into_iter()
            .map(|(region, value)| TopEntry { region, value })
            .collect(),
        None if k == 0 => return Err(ApiError::invalid("k must be at least 1")),
        None => Vec::new(),
    };
    versioned(&v, TopDoc { metric, date, entries })
}

#[derive(Debug, Serialize)]
pub struct ContinentsDoc {
    pub groups: BTreeMap<Continent, Vec<RegionId>>,
}

pub async fn continents(State(state): State<AppState>) -> ApiResult<ContinentsDoc> {
    let v = state.store.current();
    let groups = metrics::continent_groups(&v);
    versioned(&v, ContinentsDoc { groups })
}

#[derive(Debug, Serialize)]
pub struct DateRange {
    pub from: NaiveDate,
    pub to: NaiveDate,
}

#[derive(Debug, Serialize)]
pub struct MetaDoc {
    pub region_count: usize,
    pub series_count: usize,
    pub date_range: Option<DateRange>,
}

pub async fn meta(State(state): State<AppState>) -> ApiResult<MetaDoc> {
    let v: Arc<DatasetVersion> = state.store.current();
    let doc = MetaDoc {
        region_count: v.registry().len(),
        series_count: v.series().len(),
        date_range: v.date_range().map(|(from, to)| DateRange { from, to }),
    };
    versioned(&v, doc)
}

pub async fn fallback() -> ApiError {
    ApiError::not_found("no such endpoint")
}
