//! Read-only HTTP JSON API over an epitrack [`Store`].
//!
//! Every handler pins the store's current version once and computes its
//! whole response from it, so a response never mixes two versions.

mod error;
pub mod handlers;

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;

use axum::routing::get;
use axum::Router;
use epitrack_core::Store;
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub use error::ApiError;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
}

pub fn router(store: Arc<Store>, asset_dir: Option<PathBuf>) -> Router {
    use handlers::*;

    let api = Router::new()
        .route("/healthz", get(healthz))
        .route("/api/v1/summary", get(summary))
        .route("/api/v1/map", get(map))
        .route("/api/v1/regions", get(search))
        .route("/api/v1/regions/{country}/series", get(series))
        .route("/api/v1/regions/{country}/{province}/series", get(series))
        .route("/api/v1/regions/{country}/{province}/{city}/series", get(series))
        .route("/api/v1/compare", get(compare))
        .route("/api/v1/hierarchy/{country}", get(hierarchy))
        .route("/api/v1/top", get(top))
        .route("/api/v1/continents", get(continents))
        .route("/api/v1/meta", get(meta))
        .route("/api/v1/{*rest}", get(fallback))
        .with_state(AppState { store });

    let app = match asset_dir.filter(|d| d.is_dir()) {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(fallback),
    };
    app.layer(CorsLayer::permissive())
}

/// Serves `app` on `listener` until `shutdown` resolves, then stops
/// accepting connections and waits for in-flight requests to finish.
pub async fn serve<F>(listener: TcpListener, app: Router, shutdown: F) -> std::io::Result<()>
where
    F: Future<Output = ()> + Send + 'static,
{
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}

/// Resolves on SIGINT (and SIGTERM on Unix).
pub async fn shutdown_signal() {
    let ctrl_c = async {
        if let Err(e) = tokio::signal::ctrl_c().await {
            tracing::error!(error = %e, "cannot listen for SIGINT");
            std::future::pending::<()>().await;
        }
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
    tracing::info!("shutdown requested");
}
