mod common;

use common::*;
use epitrack_core::metrics::{
    compare, continent_groups, derive_series, effective_series, hierarchy, map_snapshot, rollup, top_k,
    world_summary, Metric, MetricValue,
};
use epitrack_core::{Continent, CumulativeSeries, RegionId};

#[test]
fn world_summary_matches_rollup_on_every_date() {
    let (_, v, _) = world_store();
    let countries: Vec<_> = v
        .countries()
        .map(|m| effective_series(&v, &m.id).unwrap().into_owned())
        .collect();
    let refs: Vec<&CumulativeSeries> = countries.iter().collect();
    let world = rollup(RegionId::country("XW").unwrap(), &refs).unwrap();
    let (first, last) = v.date_range().unwrap();
    let mut d = first.pred_opt().unwrap();
    while d <= last {
        let s = world_summary(&v, d).unwrap();
        let r = world.carry_forward(d).map_or((0, 0, 0), |r| r.counts());
        assert_eq!((s.total_confirmed, s.total_cured, s.total_deaths), r, "{d}");
        d = d.succ_opt().unwrap();
    }
}

#[test]
fn quarantine_is_excluded_from_totals() {
    let (_, v, _) = world_store();
    let d = date("2020-04-10");
    let s = world_summary(&v, d).unwrap();
    // oracle: plain sum over country-level regions other than XX
    let mut expect = 0;
    for meta in v.registry().values() {
        if meta.id.is_country() && meta.id.country_code() != "XX" {
            expect += effective_series(&v, &meta.id).unwrap().carry_forward(d).map_or(0, |r| r.confirmed);
        }
    }
    assert_eq!(s.total_confirmed, expect);
    let groups = continent_groups(&v);
    let all: Vec<&RegionId> = groups.values().flatten().collect();
    assert!(all.iter().all(|id| !id.is_quarantine()));
    assert_eq!(all.len(), v.countries().count());
    assert!(groups[&Continent::Europe].contains(&RegionId::country("IT").unwrap()));
    assert!(groups[&Continent::Asia].contains(&RegionId::country("CN").unwrap()));
}

#[test]
fn map_entries_follow_summary() {
    let (_, v, _) = world_store();
    let d = date("2020-04-10");
    let m = map_snapshot(&v, d).unwrap();
    assert_eq!(m.totals, world_summary(&v, d).unwrap());
    assert!(m.entries.windows(2).all(|w| w[0].region < w[1].region));
    assert!(m.entries.iter().all(|e| e.bucket <= 7 && (e.bucket == 0) == (e.confirmed == 0)));
    let it = m.entries.iter().find(|e| e.region.country_code() == "IT").unwrap();
    assert_eq!((it.confirmed, it.bucket), (147577, 6));
}

#[test]
fn daily_deltas_sum_back_to_cumulative_everywhere() {
    let (_, v, _) = world_store();
    for (id, series) in v.series() {
        let pts = derive_series(series, v.meta(id).unwrap()).unwrap();
        let mut acc = (0u64, 0u64, 0u64);
        for (p, r) in pts.iter().zip(&series.repaired) {
            acc.0 += p.daily_confirmed;
            acc.1 += p.daily_cured;
            acc.2 += p.daily_deaths;
            assert_eq!(acc, r.counts(), "{id} {}", p.date);
        }
    }
}

#[test]
fn rates_are_exact_quotients() {
    let (_, v, _) = world_store();
    for (id, series) in v.series() {
        for p in derive_series(series, v.meta(id).unwrap()).unwrap() {
            if let Some(r) = p.mortality_rate {
                assert_eq!(r, p.deaths as f64 / p.confirmed as f64);
                assert!(p.active_clamped || r <= 1.0);
            }
            if let Some(r) = p.cure_rate {
                assert_eq!(r, p.cured as f64 / p.confirmed as f64);
            }
            assert_eq!(p.mortality_rate.is_none(), p.confirmed == 0);
        }
    }
}

#[test]
fn compare_single_cell() {
    let (_, v, _) = world_store();
    let it = RegionId::country("IT").unwrap();
    let d = date("2020-04-09");
    let t = compare(&v, std::slice::from_ref(&it), Metric::TotalConfirmed, d, d).unwrap();
    assert_eq!(t.dates, vec![d]);
    let expect = v.get_series(&it).unwrap().carry_forward(d).unwrap().confirmed;
    assert_eq!(t.values, vec![vec![Some(MetricValue::Count(expect))]]);
}

#[test]
fn compare_mortality_is_pointwise_quotient() {
    let (_, v, _) = world_store();
    let ids: Vec<RegionId> = ["IT", "ES", "US"].iter().map(|c| RegionId::country(c).unwrap()).collect();
    let t = compare(&v, &ids, Metric::MortalityRate, date("2020-03-28"), date("2020-04-10")).unwrap();
    assert_eq!(t.regions, ids);
    assert_eq!(t.dates.len(), 14);
    for (id, row) in ids.iter().zip(&t.values) {
        let s = v.get_series(id).unwrap();
        for (d, cell) in t.dates.iter().zip(row) {
            let expect = s
                .repaired
                .iter()
                .find(|r| r.date == *d)
                .filter(|r| r.confirmed > 0)
                .map(|r| MetricValue::Ratio(r.deaths as f64 / r.confirmed as f64));
            assert_eq!(*cell, expect, "{id} {d}");
        }
    }
}

#[test]
fn compare_per_million_matches_derive() {
    let (_, v, _) = world_store();
    let ids = [RegionId::country("IT").unwrap(), RegionId::country("DE").unwrap()];
    let t = compare(&v, &ids, Metric::PerMillion, date("2020-03-28"), date("2020-04-10")).unwrap();
    for (id, row) in ids.iter().zip(&t.values) {
        let pts = derive_series(v.get_series(id).unwrap(), v.meta(id).unwrap()).unwrap();
        for (d, cell) in t.dates.iter().zip(row) {
            let p = pts.iter().find(|p| p.date == *d).unwrap();
            assert_eq!(*cell, p.per_million.map(MetricValue::Ratio));
            assert!(cell.is_some());
        }
    }
}

#[test]
fn compare_gap_days() {
    let (_, v, _) = world_store();
    // AO has no records on some days of the fixture range
    let ao = RegionId::country("AO").unwrap();
    let s = v.get_series(&ao).unwrap();
    let present: Vec<_> = s.repaired.iter().map(|r| r.date).collect();
    let from = date("2020-03-28");
    let to = date("2020-04-10");
    let gap = from.iter_days().take(14).find(|d| !present.contains(d) && *d > present[0]).unwrap();
    let cum = compare(&v, std::slice::from_ref(&ao), Metric::TotalConfirmed, from, to).unwrap();
    let daily = compare(&v, std::slice::from_ref(&ao), Metric::DailyConfirmed, from, to).unwrap();
    let i = cum.dates.iter().position(|d| *d == gap).unwrap();
    assert_eq!(
        cum.values[0][i],
        Some(MetricValue::Count(s.carry_forward(gap).unwrap().confirmed))
    );
    assert_eq!(daily.values[0][i], None);
}

#[test]
fn top_k_orders_by_value() {
    let (_, v, _) = world_store();
    let d = date("2020-04-10");
    let top = top_k(&v, Metric::TotalConfirmed, d, 5).unwrap();
    assert_eq!(top.len(), 5);
    assert!(top.windows(2).all(|w| w[0].1.unwrap().as_f64() >= w[1].1.unwrap().as_f64()));
    assert_eq!(top[0].0, RegionId::country("US").unwrap());
    let all = top_k(&v, Metric::TotalConfirmed, d, 10_000).unwrap();
    assert_eq!(all.len(), v.countries().count());
}

#[test]
fn hierarchy_of_china() {
    let (_, v, _) = world_store();
    let cn = RegionId::country("CN").unwrap();
    let tree = hierarchy(&v, &cn).unwrap();
    let hubei = tree
        .children
        .iter()
        .find(|n| n.region == RegionId::province("CN", "Hubei").unwrap())
        .unwrap();
    assert!(hubei.children.iter().any(|c| c.display_name == "Wuhan"));
    assert_eq!(tree.children[0].region, hubei.region);
    assert!(tree
        .children
        .windows(2)
        .all(|w| w[0].latest.unwrap().confirmed >= w[1].latest.unwrap().confirmed));

    // CN has no own series, so its values are the rollup of its provinces
    assert!(v.get_series(&cn).is_err());
    let provinces: Vec<_> = v.children(&cn).unwrap();
    let parts: Vec<_> = provinces.iter().map(|p| v.get_series(p).unwrap()).collect();
    let r = rollup(cn.clone(), &parts).unwrap();
    let latest = tree.latest.unwrap();
    assert_eq!((latest.confirmed, latest.cured, latest.deaths), r.latest().unwrap().counts());

    // Hubei has its own series, which wins over its partial city coverage
    let own = v.get_series(&hubei.region).unwrap().latest().unwrap();
    assert_eq!(hubei.latest.unwrap().confirmed, own.confirmed);

    let it = hierarchy(&v, &RegionId::country("IT").unwrap()).unwrap();
    assert!(it.children.is_empty());
    assert!(hierarchy(&v, &RegionId::country("QQ").unwrap()).is_err());
}
