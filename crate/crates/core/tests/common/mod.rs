#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use chrono::NaiveDate;
use epitrack_core::ingest::{ingest_snapshot, IngestReport, SourceDescriptor, SourceKind};
use epitrack_core::{DatasetVersion, Store, Tables};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn world_source() -> SourceDescriptor {
    SourceDescriptor::new(
        SourceKind::CanonicalCsv,
        fixture("world_2020-04-10.csv").to_str().unwrap(),
    )
    .unwrap()
}

pub fn dxy_source() -> SourceDescriptor {
    SourceDescriptor::new(SourceKind::DxyJson, fixture("dxy_2020-04-10.json").to_str().unwrap()).unwrap()
}

pub fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

pub fn ingest(store: &Store, sources: &[SourceDescriptor]) -> (Arc<DatasetVersion>, IngestReport) {
    tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .unwrap()
        .block_on(ingest_snapshot(store, sources))
        .unwrap()
}

pub fn world_store() -> (Store, Arc<DatasetVersion>, IngestReport) {
    let store = Store::in_memory(Tables::bundled());
    let (v, r) = ingest(&store, &[world_source()]);
    (store, v, r)
}
