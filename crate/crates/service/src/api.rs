//! HTTP surface: request/response records, the error taxonomy and handlers.

use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{header, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use polarcascade::cascade::{CascadeError, CascadeVerdict, Verdict};
use reqwest::Url;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tower_http::cors::{Any, CorsLayer};

use crate::cache::{CacheConfig, ResponseCache};
use crate::extract::{extract_article_text, ExtractError};
use crate::fetch::{check_scheme, FetchConfig, FetchError, Fetcher};
use crate::registry::{ModelRegistry, RegistryHandle};

/// Largest accepted `text` field, in bytes.
pub const MAX_TEXT_BYTES: usize = 1024 * 1024;

#[derive(Debug, Clone, Default, Deserialize)]
pub struct PredictRequest {
    pub text: Option<String>,
    pub url: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PredictInput {
    Text(String),
    Url(Url),
}

impl PredictRequest {
    /// Exactly one of `text` and `url`, with `url` absolute http(s).
    pub fn validate(self, max_text_bytes: usize) -> Result<PredictInput, ApiError> {
        match (self.text, self.url) {
            (Some(_), Some(_)) => Err(ApiError::bad_request("give either \"text\" or \"url\", not both")),
            (None, None) => Err(ApiError::bad_request("one of \"text\" or \"url\" is required")),
            (Some(text), None) if text.len() > max_text_bytes => Err(ApiError::too_large(max_text_bytes)),
            (Some(text), None) => Ok(PredictInput::Text(text)),
            (None, Some(raw)) => {
                let url = Url::parse(&raw).map_err(|e| ApiError::bad_request(format!("invalid url: {e}")))?;
                check_scheme(&url).map_err(|e| ApiError::bad_request(e.to_string()))?;
                Ok(PredictInput::Url(url))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceReport {
    pub index: usize,
    /// SHA-256 of the sentence text; the text itself is never echoed.
    pub text_hash: String,
    pub neutral_probability: f64,
    pub kept: bool,
    pub no_signal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    /// In [-1, 1]; null exactly when `all_neutral`.
    pub score: Option<f64>,
    /// One of the five bucket names, or "all_neutral".
    pub bucket: String,
    pub all_neutral: bool,
    pub kept_count: usize,
    pub dropped_count: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sentences: Option<Vec<SentenceReport>>,
    pub model_id: String,
    pub elapsed_ms: u64,
}

impl PredictResponse {
    pub fn from_verdict(v: &CascadeVerdict, model_id: &str, detail: bool) -> Self {
        let (score, bucket) = match &v.verdict {
            Verdict::Score(s) => (Some(s.score), s.bucket.as_str().to_string()),
            Verdict::AllNeutral => (None, "all_neutral".to_string()),
        };
        let sentences = detail.then(|| {
            let mut rows: Vec<SentenceReport> = v
                .kept
                .iter()
                .map(|a| (a, true))
                .chain(v.dropped.iter().map(|a| (a, false)))
                .map(|(a, kept)| SentenceReport {
                    index: a.index,
                    text_hash: hex::encode(Sha256::digest(a.sentence.as_bytes())),
                    neutral_probability: a.neutral_probability,
                    kept,
                    no_signal: a.no_signal,
                })
                .collect();
            rows.sort_by_key(|r| r.index);
            rows
        });
        Self {
            all_neutral: score.is_none(),
            score,
            bucket,
            kept_count: v.kept.len(),
            dropped_count: v.dropped.len(),
            sentences,
            model_id: model_id.to_string(),
            elapsed_ms: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthReport {
    /// "ok" or "degraded".
    pub status: String,
    pub model_id: Option<String>,
    pub vocab_size: Option<usize>,
    pub uptime_seconds: f64,
}

/// Every failure the API can report. `code` is the stable machine-readable
/// identifier; `status` the HTTP status it travels with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: String,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn too_large(limit: usize) -> Self {
        Self::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "payload_too_large",
            format!("text exceeds {limit} bytes"),
        )
    }

    pub fn model_unavailable() -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "model_unavailable", "no model is loaded")
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<FetchError> for ApiError {
    fn from(e: FetchError) -> Self {
        let code = match e {
            FetchError::UnsupportedScheme(_) => return Self::bad_request(e.to_string()),
            FetchError::Timeout => "fetch_timeout",
            FetchError::TooLarge { .. } => "fetch_too_large",
            FetchError::Status(_) | FetchError::Network(_) => "fetch_failed",
        };
        Self::new(StatusCode::BAD_GATEWAY, code, e.to_string())
    }
}

impl From<ExtractError> for ApiError {
    fn from(e: ExtractError) -> Self {
        let code = match e {
            ExtractError::NoContent => "no_content",
            ExtractError::Undecodable => "undecodable_content",
        };
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string())
    }
}

impl From<CascadeError> for ApiError {
    fn from(e: CascadeError) -> Self {
        match e {
            CascadeError::EmptyInput => Self::bad_request("text is empty"),
            other => Self::internal(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: ErrorDetail {
                code: self.code.to_string(),
                message: self.message,
            },
        };
        (self.status, Json(body)).into_response()
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub fetch: FetchConfig,
    pub max_text_bytes: usize,
    pub cache: Option<CacheConfig>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            fetch: FetchConfig::default(),
            max_text_bytes: MAX_TEXT_BYTES,
            cache: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppState {
    pub registry: RegistryHandle,
    fetcher: Fetcher,
    cache: Option<ResponseCache>,
    max_text_bytes: usize,
    started: Instant,
}

impl AppState {
    pub fn new(registry: RegistryHandle, cfg: ServiceConfig) -> Result<Self, crate::ServiceError> {
        let cache = cfg.cache.map(ResponseCache::open).transpose()?;
        Ok(Self {
            registry,
            fetcher: Fetcher::new(cfg.fetch)?,
            cache,
            max_text_bytes: cfg.max_text_bytes,
            started: Instant::now(),
        })
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct PredictQuery {
    pub detail: Option<String>,
    pub url: Option<String>,
}

impl PredictQuery {
    fn detail(&self) -> bool {
        matches!(self.detail.as_deref(), Some("1" | "true"))
    }
}

pub fn router(state: AppState) -> Router {
    // JSON escaping can more than double a text's size; the field limit is
    // enforced after parsing so oversized text still gets a JSON 413.
    let body_limit = state.max_text_bytes.saturating_mul(6).max(64 * 1024);
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/api/v1/predict", get(predict_get).post(predict_post))
        .route("/healthz", get(health))
        .layer(DefaultBodyLimit::max(body_limit))
        .layer(cors)
        .with_state(state)
}

async fn predict_post(
    State(state): State<AppState>,
    Query(query): Query<PredictQuery>,
    body: Result<Bytes, BytesRejection>,
) -> Response {
    let started = Instant::now();
    let result = async {
        let body = body.map_err(|r| {
            if r.status() == StatusCode::PAYLOAD_TOO_LARGE {
                ApiError::too_large(state.max_text_bytes)
            } else {
                ApiError::bad_request(r.body_text())
            }
        })?;
        let req: PredictRequest =
            serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))?;
        run_predict(&state, req, query.detail()).await
    }
    .await;
    finish(result, started)
}

async fn predict_get(State(state): State<AppState>, Query(query): Query<PredictQuery>) -> Response {
    let started = Instant::now();
    let req = PredictRequest {
        text: None,
        url: query.url.clone(),
    };
    let result = match req.url {
        Some(_) => run_predict(&state, req, query.detail()).await,
        None => Err(ApiError::bad_request("query parameter \"url\" is required")),
    };
    finish(result, started)
}

fn finish(result: Result<PredictResponse, ApiError>, started: Instant) -> Response {
    let elapsed_ms = started.elapsed().as_millis() as u64;
    match result {
        Ok(mut resp) => {
            resp.elapsed_ms = elapsed_ms;
            log::info!("predict ok elapsed_ms={elapsed_ms}");
            Json(resp).into_response()
        }
        Err(e) => {
            log::info!("predict error code={} elapsed_ms={elapsed_ms}", e.code);
            e.into_response()
        }
    }
}

async fn run_predict(state: &AppState, req: PredictRequest, detail: bool) -> Result<PredictResponse, ApiError> {
    let registry = state.registry.current().ok_or_else(ApiError::model_unavailable)?;
    let text = match req.validate(state.max_text_bytes)? {
        PredictInput::Text(t) => t,
        PredictInput::Url(url) => {
            let html = state.fetcher.fetch(&url).await?;
            extract_article_text(&html)?
        }
    };
    let key = state
        .cache
        .as_ref()
        .map(|_| ResponseCache::key(registry.model_id(), &text, detail));
    if let (Some(cache), Some(key)) = (&state.cache, &key) {
        if let Some(hit) = cache.get(key) {
            return Ok(hit);
        }
    }
    let resp = predict_blocking(registry, text, detail).await?;
    if let (Some(cache), Some(key)) = (&state.cache, &key) {
        if let Err(e) = cache.put(key, &resp) {
            log::warn!("cache write failed: {e}");
        }
    }
    Ok(resp)
}

async fn predict_blocking(
    registry: Arc<ModelRegistry>,
    text: String,
    detail: bool,
) -> Result<PredictResponse, ApiError> {
    tokio::task::spawn_blocking(move || {
        let verdict = registry.predict(&text)?;
        Ok(PredictResponse::from_verdict(&verdict, registry.model_id(), detail))
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn health(State(state): State<AppState>) -> Response {
    let uptime_seconds = state.started.elapsed().as_secs_f64();
    match state.registry.current() {
        Some(r) => Json(HealthReport {
            status: "ok".into(),
            model_id: Some(r.model_id().to_string()),
            vocab_size: Some(r.table.vocab_size()),
            uptime_seconds,
        })
        .into_response(),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(HealthReport {
                status: "degraded".into(),
                model_id: None,
                vocab_size: None,
                uptime_seconds,
            }),
        )
            .into_response(),
    }
}
