use std::cmp::Ordering;

use chrono::NaiveDate;
use serde::Serialize;

use super::derive::{derive_series, DerivedPoint};
use super::rollup::effective_series;
use super::{Metric, MetricValue};
use crate::error::{Error, Result};
use crate::region::RegionId;
use crate::store::DatasetVersion;

pub const MAX_COMPARE_REGIONS: usize = 10;
/// Upper bound on the date axis so one request cannot build an unbounded
/// matrix.
pub const MAX_COMPARE_DAYS: i64 = 3660;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub metric: Metric,
    pub regions: Vec<RegionId>,
    /// Every calendar day of the requested range.
    pub dates: Vec<NaiveDate>,
    /// `values[i][j]` is region `i` on `dates[j]`; `None` means no data.
    pub values: Vec<Vec<Option<MetricValue>>>,
}

/// The metric on `date`: the point on that day, or for cumulative metrics
/// the last point before it. `points` must be in date order.
pub fn value_on(points: &[DerivedPoint], metric: Metric, date: NaiveDate) -> Option<MetricValue> {
    let idx = points.partition_point(|p| p.date <= date);
    let p = points.get(idx.checked_sub(1)?)?;
    if p.date == date || metric.carries_forward() {
        metric.extract(p)
    } else {
        None
    }
}

fn derived_for(version: &DatasetVersion, id: &RegionId) -> Result<Vec<DerivedPoint>> {
    let meta = version.meta(id)?;
    match effective_series(version, id) {
        Ok(series) => derive_series(&series, meta),
        Err(Error::NotFound(_)) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

pub fn compare(
    version: &DatasetVersion,
    regions: &[RegionId],
    metric: Metric,
    from: NaiveDate,
    to: NaiveDate,
) -> Result<ComparisonTable> {
    if regions.is_empty() || regions.len() > MAX_COMPARE_REGIONS {
        return Err(Error::invalid(format!(
            "compare takes 1 to {MAX_COMPARE_REGIONS} regions, got {}",
            regions.len()
        )));
    }
    if from > to {
        return Err(Error::invalid(format!("range start {from} is after end {to}")));
    }
    let span = (to - from).num_days() + 1;
    if span > MAX_COMPARE_DAYS {
        return Err(Error::invalid(format!(
            "range spans {span} days; at most {MAX_COMPARE_DAYS} allowed"
        )));
    }
    let dates: Vec<NaiveDate> = from.iter_days().take(span as usize).collect();
    let values = regions
        .iter()
        .map(|id| {
            let points = derived_for(version, id)?;
            Ok(dates.iter().map(|&d| value_on(&points, metric, d)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(ComparisonTable {
        metric,
        regions: regions.to_vec(),
        dates,
        values,
    })
}

/// Countries ranked by `metric` on `date`, largest first; absent values
/// last, ties by region id.
pub fn top_k(
    version: &DatasetVersion,
    metric: Metric,
    date: NaiveDate,
    k: usize,
) -> Result<Vec<(RegionId, Option<MetricValue>)>> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let mut ranked = version
        .countries()
        .map(|meta| Ok((meta.id.clone(), value_on(&derived_for(version, &meta.id)?, metric, date))))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|(ra, va), (rb, vb)| {
        let by_value = match (va, vb) {
            (Some(a), Some(b)) => b.total_cmp(a),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        by_value.then_with(|| ra.cmp(rb))
    });
    ranked.truncate(k);
    Ok(ranked)
}
