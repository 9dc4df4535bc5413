//! Immutable dataset versions and the store that publishes them.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, NaiveDate, Utc};
use serde::Serialize;

use crate::canonical;
use crate::error::{Error, Result};
use crate::persist::{self, VersionLog};
use crate::region::{RegionId, RegionMeta};
use crate::series::{CumulativeSeries, DailyRecord};
use crate::tables::Tables;

pub const MAX_SEARCH_RESULTS: usize = 20;

/// A published, immutable snapshot of every series and the region registry.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetVersion {
    version_id: u64,
    as_of: DateTime<Utc>,
    series: BTreeMap<RegionId, CumulativeSeries>,
    registry: BTreeMap<RegionId, RegionMeta>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Exact,
    Prefix,
    Substring,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchHit {
    pub id: RegionId,
    pub display_name: String,
    pub match_kind: MatchKind,
}

impl DatasetVersion {
    /// Version 0: nothing ingested yet.
    pub fn empty(as_of: DateTime<Utc>) -> Self {
        DatasetVersion {
            version_id: 0,
            as_of,
            series: BTreeMap::new(),
            registry: BTreeMap::new(),
        }
    }

    pub fn version_id(&self) -> u64 {
        self.version_id
    }

    pub fn as_of(&self) -> DateTime<Utc> {
        self.as_of
    }

    pub fn series(&self) -> &BTreeMap<RegionId, CumulativeSeries> {
        &self.series
    }

    pub fn registry(&self) -> &BTreeMap<RegionId, RegionMeta> {
        &self.registry
    }

    pub fn get_series(&self, id: &RegionId) -> Result<&CumulativeSeries> {
        self.series
            .get(id)
            .ok_or_else(|| Error::not_found(format!("no series for region {id}")))
    }

    pub fn meta(&self, id: &RegionId) -> Result<&RegionMeta> {
        self.registry
            .get(id)
            .ok_or_else(|| Error::not_found(format!("unknown region {id}")))
    }

    /// Direct children in lexicographic order: a country's provinces or a
    /// province's cities. Cities have none.
    pub fn children(&self, id: &RegionId) -> Result<Vec<RegionId>> {
        self.meta(id)?;
        Ok(self
            .registry
            .range(id.clone()..)
            .skip(1)
            .take_while(|(k, _)| k.country_code() == id.country_code())
            .filter(|(k, _)| k.is_child_of(id))
            .map(|(k, _)| k.clone())
            .collect())
    }

    /// Country-level regions, quarantine excluded.
    pub fn countries(&self) -> impl Iterator<Item = &RegionMeta> {
        self.registry
            .values()
            .filter(|m| m.id.is_country() && !m.id.is_quarantine())
    }

    /// Earliest and latest date of any stored record.
    pub fn date_range(&self) -> Option<(NaiveDate, NaiveDate)> {
        let first = self.series.values().filter_map(|s| s.first_date()).min()?;
        let last = self.series.values().filter_map(|s| s.last_date()).max()?;
        Some((first, last))
    }

    /// Latest cumulative confirmed count: the region's own series if it has
    /// one, otherwise the sum over its children.
    pub fn latest_confirmed(&self, id: &RegionId) -> u64 {
        if let Some(s) = self.series.get(id) {
            return s.latest().map_or(0, |r| r.confirmed);
        }
        self.children(id)
            .unwrap_or_default()
            .iter()
            .map(|c| self.latest_confirmed(c))
            .sum()
    }

    /// Case-insensitive search over display names and aliases. Exact matches
    /// rank before prefix matches before substring matches; ties go to the
    /// larger latest confirmed count, then to the smaller region id.
    pub fn resolve_region(&self, query: &str) -> Result<Vec<SearchHit>> {
        let needle = query.trim().to_lowercase();
        if needle.is_empty() {
            return Err(Error::invalid("search query is empty"));
        }
        let classify = |name: &str| {
            let hay = name.to_lowercase();
            if hay == needle {
                Some(MatchKind::Exact)
            } else if hay.starts_with(&needle) {
                Some(MatchKind::Prefix)
            } else if hay.contains(&needle) {
                Some(MatchKind::Substring)
            } else {
                None
            }
        };
        let mut hits: Vec<(MatchKind, u64, &RegionMeta)> = self
            .registry
            .values()
            .filter_map(|meta| {
                std::iter::once(meta.display_name.as_str())
                    .chain(meta.aliases.iter().map(String::as_str))
                    .filter_map(classify)
                    .min()
                    .map(|kind| (kind, self.latest_confirmed(&meta.id), meta))
            })
            .collect();
        hits.sort_by(|a, b| (a.0, Reverse(a.1), &a.2.id).cmp(&(b.0, Reverse(b.1), &b.2.id)));
        Ok(hits
            .into_iter()
            .take(MAX_SEARCH_RESULTS)
            .map(|(kind, _, meta)| SearchHit {
                id: meta.id.clone(),
                display_name: meta.display_name.clone(),
                match_kind: kind,
            })
            .collect())
    }

    /// Canonical CSV of every repaired record, ordered by region then date.
    pub fn to_canonical_csv(&self) -> String {
        canonical::write_canonical_csv(
            self.series
                .iter()
                .flat_map(|(id, s)| s.repaired.iter().map(move |r| (id, r))),
        )
    }
}

/// Staging area for the next version.
#[derive(Debug, Clone, Default)]
pub struct VersionBuilder {
    parent_version: u64,
    series: BTreeMap<RegionId, CumulativeSeries>,
    registry: BTreeMap<RegionId, RegionMeta>,
}

impl VersionBuilder {
    /// Stages changes against `parent`; publication fails if another version
    /// was published in the meantime.
    pub fn on(parent: &DatasetVersion) -> Self {
        VersionBuilder {
            parent_version: parent.version_id,
            series: BTreeMap::new(),
            registry: BTreeMap::new(),
        }
    }

    pub fn parent_version(&self) -> u64 {
        self.parent_version
    }

    pub fn insert_series(&mut self, series: CumulativeSeries) {
        self.series.insert(series.region.clone(), series);
    }

    pub fn insert_meta(&mut self, meta: RegionMeta) {
        self.registry.insert(meta.id.clone(), meta);
    }

    pub fn series(&self) -> &BTreeMap<RegionId, CumulativeSeries> {
        &self.series
    }

    /// Adds registry entries (from the reference tables) for every staged
    /// series and all of its ancestors that are not registered yet.
    pub fn fill_registry(&mut self, tables: &Tables) {
        let ids: Vec<RegionId> = self
            .series
            .keys()
            .flat_map(|id| std::iter::once(id.clone()).chain(id.ancestors()))
            .collect();
        for id in ids {
            if let std::collections::btree_map::Entry::Vacant(e) = self.registry.entry(id) {
                let meta = tables.meta_for(e.key());
                e.insert(meta);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (id, series) in &self.series {
            let fail = |reason: String| Error::Validation {
                region: id.clone(),
                date: None,
                field: None,
                reason,
            };
            if &series.region != id {
                return Err(fail(format!("keyed under {id} but series is for {}", series.region)));
            }
            series.validate()?;
            for required in std::iter::once(id.clone()).chain(id.ancestors()) {
                if !self.registry.contains_key(&required) {
                    return Err(Error::Validation {
                        region: id.clone(),
                        date: series.first_date(),
                        field: None,
                        reason: format!("registry has no entry for {required}"),
                    });
                }
            }
        }
        for (id, meta) in &self.registry {
            if &meta.id != id || meta.display_name.trim().is_empty() {
                return Err(Error::Validation {
                    region: id.clone(),
                    date: None,
                    field: None,
                    reason: "registry entry is inconsistent or has an empty display name".into(),
                });
            }
        }
        Ok(())
    }
}

/// Holds the current version. One writer publishes; any number of readers
/// take cheap `Arc` snapshots that never change underneath them.
pub struct Store {
    current: RwLock<Arc<DatasetVersion>>,
    log: Mutex<Option<VersionLog>>,
    tables: Arc<Tables>,
}

impl Store {
    pub fn in_memory(tables: Tables) -> Self {
        Store {
            current: RwLock::new(Arc::new(DatasetVersion::empty(Utc::now()))),
            log: Mutex::new(None),
            tables: Arc::new(tables),
        }
    }

    /// Opens (creating if needed) the version log in `data_dir` and replays
    /// it. The last complete block becomes the current version.
    pub fn open(data_dir: &Path, tables: Tables) -> Result<Self> {
        let path = data_dir.join(persist::LOG_FILE);
        let (log, blocks) = VersionLog::open(&path)?;
        let store = Store {
            current: RwLock::new(Arc::new(DatasetVersion::empty(Utc::now()))),
            log: Mutex::new(Some(log)),
            tables: Arc::new(tables),
        };
        let mut last = None;
        for (expected, block) in (1..).zip(blocks) {
            if block.version_id != expected {
                return Err(Error::Persist(format!(
                    "version log out of sequence: expected {expected}, found {}",
                    block.version_id
                )));
            }
            last = Some(block);
        }
        if let Some(block) = last {
            let version = store.rebuild(block)?;
            *store.current.write().expect("lock poisoned") = Arc::new(version);
        }
        Ok(store)
    }

    fn rebuild(&self, block: persist::Block) -> Result<DatasetVersion> {
        let rows = canonical::parse_canonical_csv(block.csv.as_bytes())?;
        let mut by_region: BTreeMap<RegionId, Vec<DailyRecord>> = BTreeMap::new();
        for row in rows {
            let id = RegionId::new(row.raw_country, row.raw_province, row.raw_city)?;
            by_region.entry(id).or_default().push(DailyRecord {
                date: row.observed_at.date_naive(),
                observed_at: row.observed_at,
                confirmed: row.confirmed,
                cured: row.cured,
                deaths: row.deaths,
            });
        }
        let mut builder = VersionBuilder::default();
        for (id, mut records) in by_region {
            records.sort_by_key(|r| r.date);
            builder.insert_series(CumulativeSeries::clean(id, records));
        }
        builder.fill_registry(&self.tables);
        builder.validate()?;
        Ok(DatasetVersion {
            version_id: block.version_id,
            as_of: block.as_of,
            series: builder.series,
            registry: builder.registry,
        })
    }

    pub fn tables(&self) -> &Tables {
        &self.tables
    }

    pub fn current(&self) -> Arc<DatasetVersion> {
        self.current.read().expect("lock poisoned").clone()
    }

    /// Validates the staged data, appends it to the version log (if any) and
    /// swaps it in as the default version.
    pub fn publish(&self, builder: VersionBuilder) -> Result<Arc<DatasetVersion>> {
        let mut log = self.log.lock().expect("lock poisoned");
        let previous = self.current();
        if builder.parent_version != previous.version_id {
            return Err(Error::Conflict {
                staged: builder.parent_version,
                current: previous.version_id,
            });
        }
        builder.validate()?;
        let version = Arc::new(DatasetVersion {
            version_id: previous.version_id + 1,
            as_of: Utc::now().max(previous.as_of),
            series: builder.series,
            registry: builder.registry,
        });
        if let Some(log) = log.as_mut() {
            log.append(version.version_id, &version.as_of, &version.to_canonical_csv())?;
        }
        *self.current.write().expect("lock poisoned") = version.clone();
        Ok(version)
    }
}
