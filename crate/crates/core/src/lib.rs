//! Core of the epitrack platform: hierarchical region identities, the
//! versioned cumulative case-count store, the ingest pipeline that feeds it,
//! and the metrics engine that reads from it.
//!
//! The store is single-writer, many-reader. Readers hold an
//! `Arc<DatasetVersion>` which never changes after publication; the ingest
//! pipeline stages a [`store::VersionBuilder`] and publishes it atomically.

pub mod canonical;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod persist;
pub mod region;
pub mod series;
pub mod store;
pub mod tables;

pub use error::{Error, Result};
pub use region::{Continent, RegionId, RegionMeta, QUARANTINE_COUNTRY};
pub use series::{AnomalyFlag, CumulativeSeries, DailyRecord, Field};
pub use store::{DatasetVersion, Store, VersionBuilder};
pub use tables::Tables;
