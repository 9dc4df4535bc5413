use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::region::RegionMeta;
use crate::series::{CumulativeSeries, Field};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedPoint {
    pub date: NaiveDate,
    pub confirmed: u64,
    pub cured: u64,
    pub deaths: u64,
    pub daily_confirmed: u64,
    pub daily_cured: u64,
    pub daily_deaths: u64,
    pub active: u64,
    /// Set when cured + deaths exceeded confirmed and `active` was clamped
    /// to zero. Rates on such a point can exceed 1.
    pub active_clamped: bool,
    pub mortality_rate: Option<f64>,
    pub cure_rate: Option<f64>,
    pub per_million: Option<f64>,
}

/// Per-day metrics over a repaired series. The first delta is the first
/// cumulative value; a delta after a gap spans the whole gap.
pub fn derive_series(series: &CumulativeSeries, meta: &RegionMeta) -> Result<Vec<DerivedPoint>> {
    let records = &series.repaired;
    for pair in records.windows(2) {
        if pair[1].date <= pair[0].date {
            return Err(Error::invalid(format!(
                "{}: dates not strictly increasing at {}",
                series.region, pair[1].date
            )));
        }
        if let Some(field) = Field::ALL.into_iter().find(|&f| pair[1].get(f) < pair[0].get(f)) {
            return Err(Error::invalid(format!(
                "{}: {field} decreases on {}; series is not repaired",
                series.region, pair[1].date
            )));
        }
    }

    let mut previous = (0, 0, 0);
    Ok(records
        .iter()
        .map(|r| {
            let (c, cu, d) = r.counts();
            let removed = cu + d;
            let rate = |num: u64| (c > 0).then(|| num as f64 / c as f64);
            let point = DerivedPoint {
                date: r.date,
                confirmed: c,
                cured: cu,
                deaths: d,
                daily_confirmed: c - previous.0,
                daily_cured: cu - previous.1,
                daily_deaths: d - previous.2,
                active: c.saturating_sub(removed),
                active_clamped: removed > c,
                mortality_rate: rate(d),
                cure_rate: rate(cu),
                per_million: meta.population.map(|p| c as f64 * 1e6 / p as f64),
            };
            previous = (c, cu, d);
            point
        })
        .collect())
}
