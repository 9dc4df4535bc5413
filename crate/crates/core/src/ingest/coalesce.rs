use std::collections::BTreeMap;
use std::collections::btree_map::Entry;

use chrono::{DateTime, NaiveDate, Utc};

use crate::region::RegionId;
use crate::series::DailyRecord;

/// A normalized observation: counts attributed to a canonical region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub region: RegionId,
    pub observed_at: DateTime<Utc>,
    pub confirmed: u64,
    pub cured: u64,
    pub deaths: u64,
}

impl Observation {
    fn rank(&self) -> (DateTime<Utc>, u64, u64, u64) {
        (self.observed_at, self.confirmed, self.cured, self.deaths)
    }

    pub fn from_record(region: RegionId, rec: &DailyRecord) -> Self {
        Observation {
            region,
            observed_at: rec.observed_at,
            confirmed: rec.confirmed,
            cured: rec.cured,
            deaths: rec.deaths,
        }
    }
}

/// Keeps one record per (region, UTC day): the latest observation, with ties
/// going to the larger confirmed, then cured, then deaths count. The winner
/// is the maximum of a total order, so input order does not matter.
pub fn coalesce_daily(
    rows: impl IntoIterator<Item = Observation>,
) -> BTreeMap<(RegionId, NaiveDate), DailyRecord> {
    let mut best: BTreeMap<(RegionId, NaiveDate), Observation> = BTreeMap::new();
    for row in rows {
        let key = (row.region.clone(), row.observed_at.date_naive());
        match best.entry(key) {
            Entry::Vacant(v) => {
                v.insert(row);
            }
            Entry::Occupied(mut o) => {
                if row.rank() > o.get().rank() {
                    o.insert(row);
                }
            }
        }
    }
    best.into_iter()
        .map(|(key, obs)| {
            let rec = DailyRecord {
                date: key.1,
                observed_at: obs.observed_at,
                confirmed: obs.confirmed,
                cured: obs.cured,
                deaths: obs.deaths,
            };
            (key, rec)
        })
        .collect()
}
