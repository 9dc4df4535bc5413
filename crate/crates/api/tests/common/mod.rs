#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{HeaderMap, Request, StatusCode};
use axum::Router;
use epitrack_core::ingest::{ingest_snapshot, SourceDescriptor, SourceKind};
use epitrack_core::{Store, Tables};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

pub async fn fixture_store() -> Arc<Store> {
    let store = Arc::new(Store::in_memory(Tables::bundled()));
    let world = SourceDescriptor::new(SourceKind::CanonicalCsv, fixture("world_2020-04-10.csv")).unwrap();
    ingest_snapshot(&store, &[world]).await.unwrap();
    store
}

pub async fn fixture_app() -> (Arc<Store>, Router) {
    let store = fixture_store().await;
    let app = epitrack_api::router(store.clone(), None);
    (store, app)
}

pub async fn get_raw(app: &Router, uri: &str) -> (StatusCode, HeaderMap, Vec<u8>) {
    let req = Request::get(uri).header("origin", "http://example.test").body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, headers, body)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, _, body) = get_raw(app, uri).await;
    let value = serde_json::from_slice(&body)
        .unwrap_or_else(|e| panic!("{uri}: non-JSON body ({e}): {}", String::from_utf8_lossy(&body)));
    (status, value)
}

pub fn assert_error(status: StatusCode, body: &Value, expect: u16, code: &str) {
    assert_eq!(status.as_u16(), expect, "{body}");
    assert_eq!(body["status"], expect);
    assert_eq!(body["code"], code);
    assert!(body["message"].is_string());
}
