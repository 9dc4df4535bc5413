use std::time::Duration;

use reqwest::redirect::Policy;

use crate::error::{Error, Result};

pub const MAX_REDIRECTS: usize = 5;
pub const CONNECT_TIMEOUT: Duration = Duration::from_secs(10);
pub const TOTAL_TIMEOUT: Duration = Duration::from_secs(60);

pub fn is_url(location: &str) -> bool {
    location.starts_with("http://") || location.starts_with("https://")
}

/// Reads a local file or downloads an HTTP(S) URL.
///
/// Connection failures and timeouts are transient; a 4xx/5xx response, a
/// redirect loop or a missing file is a source error that needs an operator.
pub async fn fetch_source(location: &str) -> Result<Vec<u8>> {
    if is_url(location) {
        fetch_http(location).await
    } else {
        let path = location.strip_prefix("file://").unwrap_or(location);
        std::fs::read(path).map_err(|e| Error::Source {
            location: location.to_owned(),
            message: e.to_string(),
        })
    }
}

async fn fetch_http(url: &str) -> Result<Vec<u8>> {
    let client = reqwest::Client::builder()
        .redirect(Policy::limited(MAX_REDIRECTS))
        .connect_timeout(CONNECT_TIMEOUT)
        .timeout(TOTAL_TIMEOUT)
        .build()
        .map_err(|e| Error::Source {
            location: url.to_owned(),
            message: e.to_string(),
        })?;
    let classify = |e: reqwest::Error| {
        if e.is_timeout() || e.is_connect() || (e.is_request() && !e.is_redirect()) || e.is_body() {
            Error::TransientFetch {
                location: url.to_owned(),
                message: e.to_string(),
            }
        } else {
            Error::Source {
                location: url.to_owned(),
                message: e.to_string(),
            }
        }
    };
    let response = client.get(url).send().await.map_err(classify)?;
    let status = response.status();
    if status.as_u16() >= 400 {
        return Err(Error::Source {
            location: url.to_owned(),
            message: format!("HTTP status {status}"),
        });
    }
    Ok(response.bytes().await.map_err(classify)?.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[tokio::test]
    async fn local_file_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, b"abc\xff").unwrap();
        assert_eq!(fetch_source(path.to_str().unwrap()).await.unwrap(), b"abc\xff");
    }

    #[tokio::test]
    async fn missing_file_is_source_error() {
        let err = fetch_source("/definitely/not/here.csv").await.unwrap_err();
        assert!(matches!(err, Error::Source { .. }));
        assert!(!err.is_retryable());
    }
}
