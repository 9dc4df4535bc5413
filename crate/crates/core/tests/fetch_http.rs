use axum::response::Redirect;
use axum::routing::get;
use axum::Router;
use epitrack_core::ingest::fetch_source;
use epitrack_core::Error;

const BODY: &[u8] = b"observed_at,country,province,city,confirmed,cured,deaths\n";

async fn stub() -> String {
    let app = Router::new()
        .route("/data.csv", get(|| async { BODY }))
        .route("/moved", get(|| async { Redirect::temporary("/data.csv") }))
        .route("/loop", get(|| async { Redirect::temporary("/loop") }))
        .route(
            "/broken",
            get(|| async { (axum::http::StatusCode::INTERNAL_SERVER_ERROR, "down") }),
        );
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    format!("http://{addr}")
}

#[tokio::test]
async fn follows_one_redirect() {
    let base = stub().await;
    let body = fetch_source(&format!("{base}/moved")).await.unwrap();
    assert_eq!(body.len(), BODY.len());
    assert_eq!(fetch_source(&format!("{base}/data.csv")).await.unwrap(), BODY);
}

#[tokio::test]
async fn http_errors_are_source_errors() {
    let base = stub().await;
    for path in ["/missing", "/broken", "/loop"] {
        let err = fetch_source(&format!("{base}{path}")).await.unwrap_err();
        assert!(matches!(err, Error::Source { .. }), "{path}: {err:?}");
        assert!(!err.is_retryable());
    }
}

#[tokio::test]
async fn refused_connection_is_transient() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let err = fetch_source(&format!("http://{addr}/x.csv")).await.unwrap_err();
    assert!(matches!(err, Error::TransientFetch { .. }), "{err:?}");
    assert!(err.is_retryable());
}
