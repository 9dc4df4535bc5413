//! Derived quantities over a published version: daily deltas, active cases,
//! rates, per-million normalization, rollups, world totals, choropleth
//! buckets and multi-region comparisons.
//!
//! Everything here is a pure function of an immutable [`DatasetVersion`];
//! the same arguments against the same version give bit-identical results.
//!
//! [`DatasetVersion`]: crate::store::DatasetVersion

mod compare;
mod derive;
mod hierarchy;
mod rollup;
mod world;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

pub use compare::{compare, top_k, value_on, ComparisonTable, MAX_COMPARE_DAYS, MAX_COMPARE_REGIONS};
pub use derive::{derive_series, DerivedPoint};
pub use hierarchy::{hierarchy, HierarchyNode, NodeValues};
pub use rollup::{effective_series, rollup};
pub use world::{bucket, continent_groups, map_snapshot, world_summary, MapEntry, MapSnapshot, WorldSummary, BUCKETS};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    TotalConfirmed,
    Active,
    Deaths,
    Cured,
    DailyConfirmed,
    DailyDeaths,
    DailyCured,
    MortalityRate,
    CureRate,
    PerMillion,
}

impl Metric {
    pub const ALL: [Metric; 10] = [
        Metric::TotalConfirmed,
        Metric::Active,
        Metric::Deaths,
        Metric::Cured,
        Metric::DailyConfirmed,
        Metric::DailyDeaths,
        Metric::DailyCured,
        Metric::MortalityRate,
        Metric::CureRate,
        Metric::PerMillion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::TotalConfirmed => "total_confirmed",
            Metric::Active => "active",
            Metric::Deaths => "deaths",
            Metric::Cured => "cured",
            Metric::DailyConfirmed => "daily_confirmed",
            Metric::DailyDeaths => "daily_deaths",
            Metric::DailyCured => "daily_cured",
            Metric::MortalityRate => "mortality_rate",
            Metric::CureRate => "cure_rate",
            Metric::PerMillion => "per_million",
        }
    }

    /// Cumulative metrics carry their last value across days with no
    /// report; daily deltas and rates are absent on such days.
    pub fn carries_forward(self) -> bool {
        matches!(
            self,
            Metric::TotalConfirmed | Metric::Active | Metric::Deaths | Metric::Cured | Metric::PerMillion
        )
    }

    pub fn extract(self, p: &DerivedPoint) -> Option<MetricValue> {
        use MetricValue::{Count, Ratio};
        match self {
            Metric::TotalConfirmed => Some(Count(p.confirmed)),
            Metric::Active => Some(Count(p.active)),
            Metric::Deaths => Some(Count(p.deaths)),
            Metric::Cured => Some(Count(p.cured)),
            Metric::DailyConfirmed => Some(Count(p.daily_confirmed)),
            Metric::DailyDeaths => Some(Count(p.daily_deaths)),
            Metric::DailyCured => Some(Count(p.daily_cured)),
            Metric::MortalityRate => p.mortality_rate.map(Ratio),
            Metric::CureRate => p.cure_rate.map(Ratio),
            Metric::PerMillion => p.per_million.map(Ratio),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "confirmed" {
            return Ok(Metric::TotalConfirmed);
        }
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown metric {s:?}")))
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Integer counts stay integers on the wire; rates and per-million values
/// are reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricValue {
    Count(u64),
    Ratio(f64),
}

impl MetricValue {
    pub fn as_f64(self) -> f64 {
        match self {
            MetricValue::Count(c) => c as f64,
            MetricValue::Ratio(r) => r,
        }
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (MetricValue::Count(a), MetricValue::Count(b)) => a.cmp(b),
            _ => self.as_f64().total_cmp(&other.as_f64()),
        }
    }
}

impl fmt::Display for MetricValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricValue::Count(c) => write!(f, "{c}"),
            MetricValue::Ratio(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for MetricValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MetricValue::Count(c) => s.serialize_u64(*c),
            MetricValue::Ratio(r) => s.serialize_f64(*r),
        }
    }
}
