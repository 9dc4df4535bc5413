use std::borrow::Cow;
use std::collections::BTreeSet;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::region::RegionId;
use crate::series::{CumulativeSeries, DailyRecord};
use crate::store::DatasetVersion;

/// Sums child series onto the union of their dates. A child without a
/// record on some date contributes its carried-forward value, or nothing
/// before its first record. Sums of repaired series are non-decreasing, so
/// the result needs no repair.
pub fn rollup(parent: RegionId, children: &[&CumulativeSeries]) -> Result<CumulativeSeries> {
    if children.is_empty() {
        return Err(Error::invalid(format!("rollup of {parent} needs at least one child")));
    }
    let dates: BTreeSet<NaiveDate> = children
        .iter()
        .flat_map(|c| c.repaired.iter().map(|r| r.date))
        .collect();
    let mut cursors = vec![0usize; children.len()];
    let records = dates
        .into_iter()
        .map(|date| {
            let mut total: Option<DailyRecord> = None;
            for (child, cursor) in children.iter().zip(cursors.iter_mut()) {
                while *cursor < child.repaired.len() && child.repaired[*cursor].date <= date {
                    *cursor += 1;
                }
                let Some(rec) = cursor.checked_sub(1).map(|i| &child.repaired[i]) else {
                    continue;
                };
                let t = total.get_or_insert(DailyRecord {
                    date,
                    observed_at: rec.observed_at,
                    confirmed: 0,
                    cured: 0,
                    deaths: 0,
                });
                t.observed_at = t.observed_at.max(rec.observed_at);
                t.confirmed += rec.confirmed;
                t.cured += rec.cured;
                t.deaths += rec.deaths;
            }
            total.expect("every union date has at least one contributing child")
        })
        .collect();
    Ok(CumulativeSeries::clean(parent, records))
}

/// The region's own series if it has one, otherwise the rollup of its
/// children's effective series. NotFound if neither exists.
pub fn effective_series<'a>(version: &'a DatasetVersion, id: &RegionId) -> Result<Cow<'a, CumulativeSeries>> {
    if let Some(own) = version.series().get(id) {
        return Ok(Cow::Borrowed(own));
    }
    let mut parts = Vec::new();
    for child in version.children(id)? {
        match effective_series(version, &child) {
            Ok(s) => parts.push(s),
            Err(Error::NotFound(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if parts.is_empty() {
        return Err(Error::not_found(format!("no data for region {id}")));
    }
    let refs: Vec<&CumulativeSeries> = parts.iter().map(|c| c.as_ref()).collect();
    rollup(id.clone(), &refs).map(Cow::Owned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 3, 1).unwrap() + chrono::Days::new(d as u64)
    }

    fn series(name: &str, rows: &[(u32, u64)]) -> CumulativeSeries {
        let recs = rows
            .iter()
            .map(|&(d, c)| DailyRecord {
                date: day(d),
                observed_at: day(d).and_hms_opt(12, 0, 0).unwrap().and_utc(),
                confirmed: c,
                cured: c / 2,
                deaths: c / 10,
            })
            .collect();
        CumulativeSeries::clean(RegionId::province("CN", name).unwrap(), recs)
    }

    #[test]
    fn carries_children_forward() {
        let a = series("A", &[(0, 10), (2, 30)]);
        let b = series("B", &[(1, 5), (3, 6)]);
        let r = rollup(RegionId::country("CN").unwrap(), &[&a, &b]).unwrap();
        let got: Vec<_> = r.repaired.iter().map(|x| (x.date, x.confirmed)).collect();
        assert_eq!(got, vec![(day(0), 10), (day(1), 15), (day(2), 35), (day(3), 36)]);
    }

    #[test]
    fn empty_children_is_invalid() {
        assert!(matches!(rollup(RegionId::country("CN").unwrap(), &[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn single_child_is_identity() {
        let a = series("A", &[(0, 10), (2, 30)]);
        assert_eq!(rollup(RegionId::country("CN").unwrap(), &[&a]).unwrap().repaired, a.repaired);
    }

    fn arb_series(name: &'static str) -> impl Strategy<Value = CumulativeSeries> {
        proptest::collection::btree_map(0u32..40, 0u64..1000, 0..15).prop_map(move |m| {
            let mut acc = 0;
            let rows: Vec<(u32, u64)> = m
                .into_iter()
                .map(|(d, inc)| {
                    acc += inc;
                    (d, acc)
                })
                .collect();
            series(name, &rows)
        })
    }

    proptest! {
        #[test]
        fn rollup_is_carry_forward_sum(a in arb_series("A"), b in arb_series("B"), c in arb_series("C")) {
            let children = [&a, &b, &c];
            let r = rollup(RegionId::country("CN").unwrap(), &children).unwrap();
            r.validate().unwrap();
            for d in 0..45 {
                // oracle: linear scan for the last record on or before each date
                let expect: u64 = children
                    .iter()
                    .filter_map(|s| s.repaired.iter().rfind(|x| x.date <= day(d)))
                    .map(|x| x.confirmed)
                    .sum();
                let got = r.carry_forward(day(d)).map_or(0, |x| x.confirmed);
                prop_assert_eq!(got, expect);
            }
        }
    }
}
