//! Session registry, per-session command queue and file persistence.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use altcanvas_core::engine::{run_job, Command, Job, SessionState};
use altcanvas_core::feedback::StreamRecord;
use altcanvas_core::genai::{BackendKind, GenBackend, MockBackend, RemoteBackend, RemoteConfig};
use altcanvas_core::persist;
use altcanvas_core::scene::CanvasConfig;
use altcanvas_core::store::ImageStore;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tokio::sync::{watch, Mutex};

use crate::error::ApiError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub backend: BackendKind,
    /// Next client sequence number the session will accept.
    #[serde(default)]
    pub next_client_seq: u64,
}

pub struct SessionData {
    pub state: SessionState,
    pub meta: SessionMeta,
    pub records: Vec<StreamRecord>,
    /// Batches that arrived ahead of their client sequence number.
    held: BTreeMap<u64, Vec<Command>>,
    /// Request id most recently handed to a worker.
    dispatched: Option<u64>,
}

impl SessionData {
    fn new(state: SessionState, meta: SessionMeta) -> Self {
        let mut data = SessionData {
            state,
            meta,
            records: Vec::new(),
            held: BTreeMap::new(),
            dispatched: None,
        };
        data.rebuild_records();
        data
    }

    fn rebuild_records(&mut self) {
        self.records.clear();
        for entry in &self.state.event_log {
            for event in &entry.events {
                self.records.push(StreamRecord {
                    seq: self.records.len() as u64,
                    command_seq: entry.seq,
                    event: event.clone(),
                });
            }
        }
    }

    fn apply(&mut self, cmd: Command) -> Vec<StreamRecord> {
        let command_seq = self.state.next_seq();
        let events = self.state.apply(cmd);
        let start = self.records.len();
        for event in events {
            self.records.push(StreamRecord {
                seq: self.records.len() as u64,
                command_seq,
                event,
            });
        }
        self.records[start..].to_vec()
    }

    pub fn digest(&self) -> String {
        persist::digest(&self.state)
    }
}

pub struct Session {
    pub id: String,
    pub data: Mutex<SessionData>,
    backend: Arc<dyn GenBackend>,
    /// Number of stream records, published after every change.
    changed: watch::Sender<u64>,
}

impl Session {
    pub fn subscribe(&self) -> watch::Receiver<u64> {
        self.changed.subscribe()
    }
}

/// Outcome of a command submission.
pub struct Submitted {
    pub records: Vec<StreamRecord>,
    pub digest: String,
    pub pending: bool,
    pub queued: bool,
}

pub struct Registry {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    data_dir: Option<PathBuf>,
    store: Arc<dyn ImageStore>,
    remote: Option<RemoteConfig>,
}

fn session_path(dir: &Path, id: &str) -> PathBuf {
    dir.join("sessions").join(format!("{id}.json"))
}

fn meta_path(dir: &Path, id: &str) -> PathBuf {
    dir.join("sessions").join(format!("{id}.meta.json"))
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
}

impl Registry {
    /// Opens the registry, loading every session saved under `data_dir`.
    pub fn open(
        data_dir: Option<PathBuf>,
        store: Arc<dyn ImageStore>,
        remote: Option<RemoteConfig>,
    ) -> std::io::Result<Arc<Registry>> {
        let registry = Arc::new(Registry {
            sessions: RwLock::new(HashMap::new()),
            data_dir,
            store,
            remote,
        });
        if let Some(dir) = &registry.data_dir {
            let sessions_dir = dir.join("sessions");
            std::fs::create_dir_all(&sessions_dir)?;
            let mut entries: Vec<_> = std::fs::read_dir(&sessions_dir)?
                .filter_map(Result::ok)
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|x| x == "json") && !p.to_string_lossy().ends_with(".meta.json"))
                .collect();
            entries.sort();
            for path in entries {
                let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
                match registry.load_one(dir, &id) {
                    Ok(session) => {
                        registry.sessions.write().expect("registry lock").insert(id, session);
                    }
                    Err(e) => tracing::warn!("skipping session {}: {e}", path.display()),
                }
            }
        }
        Ok(registry)
    }

    fn load_one(&self, dir: &Path, id: &str) -> Result<Arc<Session>, String> {
        let state = persist::load(&session_path(dir, id)).map_err(|e| e.to_string())?;
        let meta: SessionMeta = std::fs::read(meta_path(dir, id))
            .map_err(|e| e.to_string())
            .and_then(|b| serde_json::from_slice(&b).map_err(|e| e.to_string()))?;
        let backend = self.backend_for(meta.backend, state.seed).map_err(|e| e.to_string())?;
        Ok(self.wrap(id.to_string(), SessionData::new(state, meta), backend))
    }

    fn wrap(&self, id: String, data: SessionData, backend: Arc<dyn GenBackend>) -> Arc<Session> {
        let (changed, _) = watch::channel(data.records.len() as u64);
        Arc::new(Session {
            id,
            data: Mutex::new(data),
            backend,
            changed,
        })
    }

    fn backend_for(&self, kind: BackendKind, seed: u64) -> Result<Arc<dyn GenBackend>, ApiError> {
        match kind {
            BackendKind::Mock => Ok(Arc::new(MockBackend::new(seed))),
            BackendKind::Remote => {
                let config = self
                    .remote
                    .clone()
                    .ok_or_else(|| ApiError::BadRequest("the remote backend is not configured on this server".into()))?;
                Ok(Arc::new(
                    RemoteBackend::new(config).map_err(|e| ApiError::Internal(e.to_string()))?,
                ))
            }
        }
    }

    pub fn store(&self) -> &Arc<dyn ImageStore> {
        &self.store
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("registry lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.sessions
            .read()
            .expect("registry lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::UnknownSession(id.to_string()))
    }

    pub fn create(
        self: &Arc<Self>,
        config: CanvasConfig,
        backend: BackendKind,
        seed: u64,
    ) -> Result<Arc<Session>, ApiError> {
        config.validate().map_err(|e| ApiError::InvalidConfig(e.to_string()))?;
        let gen = self.backend_for(backend, seed)?;
        let now = Utc::now();
        let meta = SessionMeta {
            created_at: now,
            updated_at: now,
            backend,
            next_client_seq: 0,
        };
        let id = uuid::Uuid::new_v4().simple().to_string();
        let data = SessionData::new(SessionState::new(config, seed), meta);
        self.persist(&id, &data)?;
        let session = self.wrap(id.clone(), data, gen);
        self.sessions.write().expect("registry lock").insert(id, session.clone());
        Ok(session)
    }

    fn persist(&self, id: &str, data: &SessionData) -> Result<(), ApiError> {
        let Some(dir) = &self.data_dir else {
            return Ok(());
        };
        if !valid_id(id) {
            return Err(ApiError::Internal(format!("refusing to write session id `{id}`")));
        }
        persist::save(&data.state, &session_path(dir, id))?;
        let meta = serde_json::to_vec_pretty(&data.meta).map_err(|e| ApiError::Internal(e.to_string()))?;
        let tmp = meta_path(dir, id).with_extension("tmp");
        std::fs::write(&tmp, meta).map_err(|e| ApiError::Internal(e.to_string()))?;
        std::fs::rename(&tmp, meta_path(dir, id)).map_err(|e| ApiError::Internal(e.to_string()))?;
        Ok(())
    }

    /// Applies a batch in client order. A batch carrying a client sequence
    /// number ahead of the expected one is held until the gap is filled.
    pub async fn submit(
        self: &Arc<Self>,
        session: &Arc<Session>,
        client_seq: Option<u64>,
        commands: Vec<Command>,
    ) -> Result<Submitted, ApiError> {
        if let Some(bad) = commands.iter().find(|c| c.is_backend_result()) {
            return Err(ApiError::MalformedCommand(format!(
                "{bad:?} is produced by the backend and cannot be submitted"
            )));
        }
        let mut data = session.data.lock().await;
        let mut queued = false;
        let mut records = Vec::new();
        match client_seq {
            None => {
                for cmd in commands {
                    records.extend(data.apply(cmd));
                }
            }
            Some(n) if n < data.meta.next_client_seq || data.held.contains_key(&n) => {
                return Err(ApiError::Conflict(format!(
                    "client sequence number {n} was already used (next is {})",
                    data.meta.next_client_seq
                )));
            }
            Some(n) if n > data.meta.next_client_seq => {
                data.held.insert(n, commands);
                queued = true;
            }
            Some(_) => {
                let mut batch = Some(commands);
                while let Some(cmds) = batch.take() {
                    for cmd in cmds {
                        records.extend(data.apply(cmd));
                    }
                    data.meta.next_client_seq += 1;
                    let next = data.meta.next_client_seq;
                    batch = data.held.remove(&next);
                }
            }
        }
        if !records.is_empty() || !queued {
            data.meta.updated_at = Utc::now();
            self.persist(&session.id, &data)?;
        }
        let _ = session.changed.send(data.records.len() as u64);
        self.dispatch(session, &mut data);
        Ok(Submitted {
            records,
            digest: data.digest(),
            pending: data.state.pending_request().is_some(),
            queued,
        })
    }

    /// Starts the pending backend request, if it has not been started yet.
    /// The result re-enters through the session lock like any command.
    pub fn dispatch(self: &Arc<Self>, session: &Arc<Session>, data: &mut SessionData) {
        let Some(job) = Job::pending(&data.state) else {
            return;
        };
        if data.dispatched == Some(job.request) {
            return;
        }
        data.dispatched = Some(job.request);
        let registry = Arc::clone(self);
        let session = Arc::clone(session);
        tokio::spawn(async move {
            let backend = Arc::clone(&session.backend);
            let store = Arc::clone(&registry.store);
            let result = tokio::task::spawn_blocking(move || run_job(&job, backend.as_ref(), store.as_ref())).await;
            let cmd = match result {
                Ok(cmd) => cmd,
                Err(e) => {
                    tracing::error!("backend worker for session {} failed: {e}", session.id);
                    return;
                }
            };
            let mut data = session.data.lock().await;
            data.apply(cmd);
            data.meta.updated_at = Utc::now();
            if let Err(e) = registry.persist(&session.id, &data) {
                tracing::error!("saving session {}: {e}", session.id);
            }
            let _ = session.changed.send(data.records.len() as u64);
            registry.dispatch(&session, &mut data);
        });
    }

    /// Restarts backend requests that were in flight when the sessions were
    /// last saved.
    pub async fn resume_pending(self: &Arc<Self>) {
        let sessions: Vec<Arc<Session>> = self.sessions.read().expect("registry lock").values().cloned().collect();
        for session in sessions {
            let mut data = session.data.lock().await;
            self.dispatch(&session, &mut data);
        }
    }

    /// Validates and applies new canvas settings through the command log.
    pub async fn update_settings(
        self: &Arc<Self>,
        session: &Arc<Session>,
        config: CanvasConfig,
    ) -> Result<Submitted, ApiError> {
        let mut data = session.data.lock().await;
        let mut probe = data.state.scene.clone();
        probe
            .set_config(config)
            .map_err(|e| ApiError::InvalidConfig(e.to_string()))?;
        if data.state.mode != altcanvas_core::engine::Mode::Navigate {
            return Err(ApiError::Conflict("settings can only change while navigating tiles".into()));
        }
        let records = data.apply(Command::UpdateSettings { config });
        data.meta.updated_at = Utc::now();
        self.persist(&session.id, &data)?;
        let _ = session.changed.send(data.records.len() as u64);
        Ok(Submitted {
            records,
            digest: data.digest(),
            pending: false,
            queued: false,
        })
    }

    pub fn backend_of(session: &Session) -> Arc<dyn GenBackend> {
        Arc::clone(&session.backend)
    }
}
