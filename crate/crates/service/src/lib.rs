//! HTTP inference service for the two-step polarity cascade.
//!
//! Routes:
//! - `POST /api/v1/predict` with `{"text": ...}` or `{"url": ...}`; `?detail=1`
//!   adds a per-sentence audit.
//! - `GET /api/v1/predict?url=...`, the same prediction for a URL.
//! - `GET /healthz`.

pub mod api;
pub mod cache;
pub mod extract;
pub mod fetch;
pub mod registry;

use std::future::Future;
use std::net::SocketAddr;

use thiserror::Error;
use tokio::net::TcpListener;

pub use api::{router, AppState, PredictRequest, PredictResponse, ServiceConfig};
pub use cache::CacheConfig;
pub use fetch::FetchConfig;
pub use registry::{ModelPaths, ModelRegistry, RegistryHandle};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Fetch(#[from] fetch::FetchError),
    #[error(transparent)]
    Registry(#[from] registry::RegistryError),
}

/// Serves on an already bound listener until `shutdown` resolves, then lets
/// in-flight requests finish.
pub async fn serve_on<F>(listener: TcpListener, state: AppState, shutdown: F) -> Result<(), ServiceError>
where
    F: Future<Output = ()> + Send + 'static,
{
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}

pub async fn serve<F>(addr: SocketAddr, state: AppState, shutdown: F) -> Result<(), ServiceError>
where
    F: Future<Output = ()> + Send + 'static,
{
    let listener = TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    serve_on(listener, state, shutdown).await
}
