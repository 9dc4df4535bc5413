use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::RegionId;

/// One calendar day of cumulative counts for one region. `observed_at` is the
/// timestamp of the upstream report that won the daily coalescing; it is kept
/// so later re-ingests can apply the same latest-wins rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DailyRecord {
    pub date: NaiveDate,
    pub observed_at: DateTime<Utc>,
    pub confirmed: u64,
    pub cured: u64,
    pub deaths: u64,
}

impl DailyRecord {
    pub fn get(&self, field: Field) -> u64 {
        match field {
            Field::Confirmed => self.confirmed,
            Field::Cured => self.cured,
            Field::Deaths => self.deaths,
        }
    }

    pub fn set(&mut self, field: Field, value: u64) {
        match field {
            Field::Confirmed => self.confirmed = value,
            Field::Cured => self.cured = value,
            Field::Deaths => self.deaths = value,
        }
    }

    pub fn counts(&self) -> (u64, u64, u64) {
        (self.confirmed, self.cured, self.deaths)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Confirmed,
    Cured,
    Deaths,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::Confirmed, Field::Cured, Field::Deaths];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Confirmed => "confirmed",
            Field::Cured => "cured",
            Field::Deaths => "deaths",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Field::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown field {s:?}")))
    }
}

/// A raw value that the monotonicity repair had to raise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnomalyFlag {
    pub date: NaiveDate,
    pub field: Field,
    pub raw_value: u64,
    pub repaired_value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CumulativeSeries {
    pub region: RegionId,
    pub raw: Vec<DailyRecord>,
    pub repaired: Vec<DailyRecord>,
    pub anomalies: Vec<AnomalyFlag>,
}

impl CumulativeSeries {
    /// A series whose raw data needed no repair.
    pub fn clean(region: RegionId, records: Vec<DailyRecord>) -> Self {
        CumulativeSeries {
            region,
            raw: records.clone(),
            repaired: records,
            anomalies: Vec::new(),
        }
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.repaired.first().map(|r| r.date)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.repaired.last().map(|r| r.date)
    }

    pub fn latest(&self) -> Option<&DailyRecord> {
        self.repaired.last()
    }

    /// Repaired record on `date`, or the last one before it.
    pub fn carry_forward(&self, date: NaiveDate) -> Option<&DailyRecord> {
        let idx = self.repaired.partition_point(|r| r.date <= date);
        idx.checked_sub(1).map(|i| &self.repaired[i])
    }

    /// Checks every stored-series invariant: strictly increasing raw dates,
    /// identical repaired date set, repaired equal to the running maximum of
    /// raw, and an anomaly list that is exactly the set of raised cells.
    pub fn validate(&self) -> Result<()> {
        let fail = |date: Option<NaiveDate>, field: Option<Field>, reason: String| Error::Validation {
            region: self.region.clone(),
            date,
            field,
            reason,
        };
        for pair in self.raw.windows(2) {
            if pair[1].date <= pair[0].date {
                return Err(fail(
                    Some(pair[1].date),
                    None,
                    format!("dates not strictly increasing (follows {})", pair[0].date),
                ));
            }
        }
        if self.raw.len() != self.repaired.len() {
            return Err(fail(
                None,
                None,
                format!("raw has {} records, repaired has {}", self.raw.len(), self.repaired.len()),
            ));
        }
        let mut expected_anomalies = Vec::new();
        let mut running = [0u64; 3];
        for (raw, rep) in self.raw.iter().zip(&self.repaired) {
            if raw.date != rep.date {
                return Err(fail(Some(raw.date), None, format!("repaired date {} differs", rep.date)));
            }
            for (slot, field) in running.iter_mut().zip(Field::ALL) {
                *slot = (*slot).max(raw.get(field));
                if rep.get(field) != *slot {
                    return Err(fail(
                        Some(raw.date),
                        Some(field),
                        format!("repaired value {} is not the running maximum {}", rep.get(field), slot),
                    ));
                }
                if raw.get(field) != *slot {
                    expected_anomalies.push(AnomalyFlag {
                        date: raw.date,
                        field,
                        raw_value: raw.get(field),
                        repaired_value: *slot,
                    });
                }
            }
        }
        let mut actual = self.anomalies.clone();
        actual.sort();
        expected_anomalies.sort();
        if actual != expected_anomalies {
            let bad = actual
                .iter()
                .find(|a| !expected_anomalies.contains(a))
                .or_else(|| expected_anomalies.iter().find(|a| !actual.contains(a)));
            return Err(fail(
                bad.map(|a| a.date),
                bad.map(|a| a.field),
                "anomaly list does not match the repaired cells".into(),
            ));
        }
        Ok(())
    }
}
