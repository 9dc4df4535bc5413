use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::Serialize;

use super::rollup::effective_series;
use crate::error::Result;
use crate::region::{Continent, RegionId};
use crate::store::DatasetVersion;

pub const BUCKETS: u8 = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct WorldSummary {
    pub countries_affected: usize,
    pub total_confirmed: u64,
    pub total_cured: u64,
    pub total_deaths: u64,
    /// Sum of each country's clamped active count.
    pub total_active: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MapEntry {
    pub region: RegionId,
    pub display_name: String,
    pub confirmed: u64,
    pub bucket: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MapSnapshot {
    pub date: NaiveDate,
    /// Sorted by country code.
    pub entries: Vec<MapEntry>,
    pub totals: WorldSummary,
}

/// 0 for no cases, otherwise the decimal digit count clamped to 7.
pub fn bucket(confirmed: u64) -> u8 {
    let mut digits = 0u8;
    let mut n = confirmed;
    while n > 0 && digits < BUCKETS - 1 {
        digits += 1;
        n /= 10;
    }
    digits
}

type CountryRow = (RegionId, String, (u64, u64, u64));

/// Carry-forward (confirmed, cured, deaths) of every non-quarantine country
/// as of `date`, in country-code order. Countries with no record yet read
/// as zero.
fn country_values(version: &DatasetVersion, date: NaiveDate) -> Result<Vec<CountryRow>> {
    version
        .countries()
        .map(|meta| {
            let series = effective_series(version, &meta.id)?;
            let counts = series.carry_forward(date).map_or((0, 0, 0), |r| r.counts());
            Ok((meta.id.clone(), meta.display_name.clone(), counts))
        })
        .collect()
}

fn summarize(values: &[(RegionId, String, (u64, u64, u64))]) -> WorldSummary {
    values.iter().fold(WorldSummary::default(), |mut s, (_, _, (c, cu, d))| {
        s.countries_affected += usize::from(*c > 0);
        s.total_confirmed += c;
        s.total_cured += cu;
        s.total_deaths += d;
        s.total_active += c.saturating_sub(cu + d);
        s
    })
}

/// World totals on `date`; all zero before any data.
pub fn world_summary(version: &DatasetVersion, date: NaiveDate) -> Result<WorldSummary> {
    Ok(summarize(&country_values(version, date)?))
}

pub fn map_snapshot(version: &DatasetVersion, date: NaiveDate) -> Result<MapSnapshot> {
    let values = country_values(version, date)?;
    let totals = summarize(&values);
    let entries = values
        .into_iter()
        .map(|(region, display_name, (confirmed, _, _))| MapEntry {
            region,
            display_name,
            confirmed,
            bucket: bucket(confirmed),
        })
        .collect();
    Ok(MapSnapshot { date, entries, totals })
}

/// Every registered country under its continent; quarantine excluded.
/// Continents without countries are omitted.
pub fn continent_groups(version: &DatasetVersion) -> BTreeMap<Continent, Vec<RegionId>> {
    let mut groups: BTreeMap<Continent, Vec<RegionId>> = BTreeMap::new();
    for meta in version.countries() {
        groups.entry(meta.continent).or_default().push(meta.id.clone());
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // oracle: 1 + floor(log10(c)), clamped to [1, 7]
    fn log_bucket(c: u64) -> u8 {
        if c == 0 {
            0
        } else {
            (1.0 + (c as f64).log10().floor()).clamp(1.0, 7.0) as u8
        }
    }

    #[test]
    fn bucket_edges() {
        assert_eq!(bucket(0), 0);
        assert_eq!(bucket(1), 1);
        assert_eq!(bucket(9), 1);
        assert_eq!(bucket(10), 2);
        assert_eq!(bucket(999_999), 6);
        assert_eq!(bucket(1_000_000), 7);
        assert_eq!(bucket(2_000_000), 7);
        assert_eq!(bucket(u64::MAX), 7);
        for p in 0..7 {
            let c = 10u64.pow(p);
            assert_eq!(bucket(c), log_bucket(c));
            assert_eq!(bucket(c - 1), log_bucket(c - 1));
        }
    }

    #[test]
    fn empty_version_is_all_zero() {
        let v = DatasetVersion::empty(chrono::Utc::now());
        let d = NaiveDate::from_ymd_opt(2020, 4, 10).unwrap();
        assert_eq!(world_summary(&v, d).unwrap(), WorldSummary::default());
        assert!(map_snapshot(&v, d).unwrap().entries.is_empty());
        assert!(continent_groups(&v).is_empty());
    }

    proptest! {
        #[test]
        fn bucket_matches_log_oracle(c in 0u64..100_000_000) {
            prop_assert_eq!(bucket(c), log_bucket(c));
        }

        #[test]
        fn bucket_is_monotonic(a in any::<u64>(), b in any::<u64>()) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(bucket(lo) <= bucket(hi));
            prop_assert!(bucket(hi) < BUCKETS);
            prop_assert_eq!(bucket(a) == 0, a == 0);
        }
    }
}
