//! Bounded HTTP fetching for article URLs.

use std::time::Duration;

use reqwest::redirect::Policy;
use reqwest::Url;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub timeout: Duration,
    pub max_bytes: usize,
    pub max_redirects: usize,
}

impl Default for FetchConfig {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(10),
            max_bytes: 5 * 1024 * 1024,
            max_redirects: 5,
        }
    }
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("only http and https URLs are supported, got {0:?}")]
    UnsupportedScheme(String),
    #[error("fetch timed out")]
    Timeout,
    #[error("upstream answered with status {0}")]
    Status(u16),
    #[error("response exceeds {limit} bytes")]
    TooLarge { limit: usize },
    #[error("fetch failed: {0}")]
    Network(String),
}

pub fn check_scheme(url: &Url) -> Result<(), FetchError> {
    match url.scheme() {
        "http" | "https" => Ok(()),
        other => Err(FetchError::UnsupportedScheme(other.to_string())),
    }
}

#[derive(Debug, Clone)]
pub struct Fetcher {
    client: reqwest::Client,
    cfg: FetchConfig,
}

impl Fetcher {
    pub fn new(cfg: FetchConfig) -> Result<Self, FetchError> {
        let max = cfg.max_redirects;
        let policy = Policy::custom(move |attempt| {
            if attempt.previous().len() > max {
                attempt.error(format!("more than {max} redirects"))
            } else if !matches!(attempt.url().scheme(), "http" | "https") {
                let scheme = attempt.url().scheme().to_string();
                attempt.error(format!("redirect to unsupported scheme {scheme:?}"))
            } else {
                attempt.follow()
            }
        });
        let client = reqwest::Client::builder()
            .timeout(cfg.timeout)
            .redirect(policy)
            .user_agent(concat!("polarcascade/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| FetchError::Network(e.to_string()))?;
        Ok(Self { client, cfg })
    }

    pub fn config(&self) -> &FetchConfig {
        &self.cfg
    }

    /// Body bytes of a successful response. Reading stops as soon as the cap
    /// would be exceeded, so oversized bodies are never buffered whole.
    pub async fn fetch(&self, url: &Url) -> Result<Vec<u8>, FetchError> {
        check_scheme(url)?;
        let limit = self.cfg.max_bytes;
        let mut resp = self.client.get(url.clone()).send().await.map_err(classify)?;
        if !resp.status().is_success() {
            return Err(FetchError::Status(resp.status().as_u16()));
        }
        if resp.content_length().is_some_and(|n| n > limit as u64) {
            return Err(FetchError::TooLarge { limit });
        }
        let mut body = Vec::new();
        while let Some(chunk) = resp.chunk().await.map_err(classify)? {
            if body.len() + chunk.len() > limit {
                return Err(FetchError::TooLarge { limit });
            }
            body.extend_from_slice(&chunk);
        }
        Ok(body)
    }
}

fn classify(e: reqwest::Error) -> FetchError {
    if e.is_timeout() {
        FetchError::Timeout
    } else {
        // Walk the source chain so redirect-policy messages survive.
        let mut msg = e.to_string();
        let mut src = std::error::Error::source(&e);
        while let Some(s) = src {
            msg = format!("{msg}: {s}");
            src = s.source();
        }
        FetchError::Network(msg)
    }
}
