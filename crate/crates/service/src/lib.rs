//! HTTP service exposing editor sessions.
//!
//! | Method | Path | Purpose |
//! |---|---|---|
//! | `POST` | `/sessions` | create a session |
//! | `GET` | `/sessions/{id}` | session file, metadata and digest |
//! | `POST` | `/sessions/{id}/commands` | submit a batch of commands |
//! | `GET` | `/sessions/{id}/events?from=N` | newline-delimited event stream |
//! | `GET` | `/sessions/{id}/render?kind=&format=` | snapshot, color or tactile render |
//! | `PUT` | `/sessions/{id}/settings` | change canvas settings |
//! | `GET` | `/healthz` | liveness |
//!
//! Commands for one session are applied one at a time in arrival order, or
//! in `client_seq` order when the client numbers its batches. Backend work
//! runs on worker threads and its result is applied as a further command.

pub mod error;
pub mod routes;
pub mod sessions;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use altcanvas_core::genai::RemoteConfig;
use altcanvas_core::store::{DirStore, ImageStore, MemoryStore};

pub use error::ApiError;
pub use routes::router;
pub use sessions::Registry;

pub const ENV_DATA_DIR: &str = "ALTCANVAS_DATA_DIR";
pub const ENV_BIND: &str = "ALTCANVAS_BIND";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const HEARTBEAT: Duration = Duration::from_secs(15);

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Where sessions and images are saved. `None` keeps everything in memory.
    pub data_dir: Option<PathBuf>,
    pub bind: SocketAddr,
    pub remote: Option<RemoteConfig>,
    pub heartbeat: Duration,
}

impl ServiceConfig {
    /// Reads the data directory, bind address and remote backend settings
    /// from the environment.
    pub fn from_env() -> Result<Self, String> {
        let bind = std::env::var(ENV_BIND).unwrap_or_else(|_| DEFAULT_BIND.to_string());
        Ok(ServiceConfig {
            data_dir: std::env::var_os(ENV_DATA_DIR).map(PathBuf::from),
            bind: bind.parse().map_err(|e| format!("bad {ENV_BIND} `{bind}`: {e}"))?,
            remote: RemoteConfig::from_env(),
            heartbeat: HEARTBEAT,
        })
    }
}

#[derive(Clone)]
pub struct AppState {
    pub registry: Arc<Registry>,
    pub heartbeat: Duration,
}

impl AppState {
    pub fn open(config: &ServiceConfig) -> std::io::Result<AppState> {
        let store: Arc<dyn ImageStore> = match &config.data_dir {
            Some(dir) => Arc::new(DirStore::open(dir.join("images"))?),
            None => Arc::new(MemoryStore::new()),
        };
        Ok(AppState {
            registry: Registry::open(config.data_dir.clone(), store, config.remote.clone())?,
            heartbeat: config.heartbeat,
        })
    }
}

/// Binds and serves until the process is stopped.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let state = AppState::open(&config)?;
    state.registry.resume_pending().await;
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
