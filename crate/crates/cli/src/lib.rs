//! Headless entry point for AltCanvas sessions.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 assertion failure,
//! 4 backend failure.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use altcanvas_core::engine::checks::{run_checks, CheckOutcome};
use altcanvas_core::engine::script::Script;
use altcanvas_core::engine::{Command, Editor, LogEntry, SessionState};
use altcanvas_core::genai::{BackendKind, GenBackend, MockBackend, RemoteBackend, RemoteConfig};
use altcanvas_core::persist;
use altcanvas_core::render::{self, EdgeAlgorithm, ExportFormat, RenderKind, RenderRequest};
use altcanvas_core::store::{DirStore, ImageStore};
use altcanvas_core::{CanvasConfig, ImageStyle};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{failed} of {total} checks failed")]
    Assertion { failed: usize, total: usize },
    #[error("backend failure: {0}")]
    Backend(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Assertion { .. } => 3,
            CliError::Backend(_) => 4,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "altcanvas", version, about = "Create, replay, render and serve AltCanvas sessions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Create an empty session file.
    New(NewArgs),
    /// Run a command script from a fresh session and print its event log.
    Replay(ReplayArgs),
    /// Export a snapshot, color or tactile render of a saved session.
    Render(RenderArgs),
    /// Start the HTTP session service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StyleArg {
    Tactile,
    Color,
}

impl From<StyleArg> for ImageStyle {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::Tactile => ImageStyle::Tactile,
            StyleArg::Color => ImageStyle::Color,
        }
    }
}

/// Optional settings file for `new`; flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub width: Option<i64>,
    pub height: Option<i64>,
    pub image_style: Option<ImageStyle>,
    pub speech_rate: Option<u8>,
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct NewArgs {
    /// Canvas width in pixels [default: 600, minimum 100]
    #[arg(long)]
    pub width: Option<i64>,
    /// Canvas height in pixels [default: 600, minimum 100]
    #[arg(long)]
    pub height: Option<i64>,
    /// Image style for generated objects [default: tactile]
    #[arg(long, value_enum)]
    pub style: Option<StyleArg>,
    /// Speech rate, 1 (slow) to 3 (fast) [default: 2]
    #[arg(long)]
    pub rate: Option<u8>,
    /// Seed for the mock backend [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON settings file with width, height, image_style, speech_rate and seed
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Where to write the session
    #[arg(long, short, default_value = "session.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Command script to run
    pub script: PathBuf,
    /// Check file evaluated against the final scene
    #[arg(long = "assert", value_name = "CHECKS")]
    pub checks: Option<PathBuf>,
    /// Permit scripts that use the remote backend
    #[arg(long)]
    pub allow_network: bool,
    /// Where to write the final session; images go to an `images` directory
    /// next to it
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Snapshot,
    Color,
    Tactile,
}

impl From<KindArg> for RenderKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Snapshot => RenderKind::Snapshot,
            KindArg::Color => RenderKind::Color,
            KindArg::Tactile => RenderKind::Tactile,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Png,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EdgesArg {
    Sobel,
    Canny,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Session file to render
    pub session: PathBuf,
    #[arg(long, value_enum, default_value = "snapshot")]
    pub kind: KindArg,
    /// Output format [default: svg for tactile, png otherwise]
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Edge detector for tactile renders [default: canny]
    #[arg(long, value_enum)]
    pub edges: Option<EdgesArg>,
    /// Sobel binarization threshold, 0 to 255 [default: 64]
    #[arg(long)]
    pub threshold: Option<u8>,
    /// Canny low hysteresis threshold [default: 50]
    #[arg(long)]
    pub low: Option<u8>,
    /// Canny high hysteresis threshold [default: 100]
    #[arg(long)]
    pub high: Option<u8>,
    /// Gaussian blur sigma before Canny [default: 1.4]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Background instruction for color renders
    #[arg(long)]
    pub instruction: Option<String>,
    /// Image directory [default: `images` next to the session file]
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// Use the remote backend for color renders
    #[arg(long)]
    pub allow_network: bool,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Address to listen on [default: $ALTCANVAS_BIND or 127.0.0.1:8080]
    #[arg(long)]
    pub bind: Option<SocketAddr>,
    /// Directory for sessions and images [default: $ALTCANVAS_DATA_DIR, or memory only]
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Cmd::New(a) => cmd_new(a, stdout),
        Cmd::Replay(a) => cmd_replay(a, stdout).map(|_| ()),
        Cmd::Render(a) => cmd_render(a, stdout),
        Cmd::Serve(a) => cmd_serve(a),
    }
}

pub fn cmd_new(args: NewArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file: ConfigFile = match &args.config {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            serde_json::from_slice(&bytes).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    let defaults = CanvasConfig::default();
    let config = CanvasConfig {
        width: args.width.or(file.width).unwrap_or(defaults.width),
        height: args.height.or(file.height).unwrap_or(defaults.height),
        image_style: args.style.map(Into::into).or(file.image_style).unwrap_or(defaults.image_style),
        speech_rate: args.rate.or(file.speech_rate).unwrap_or(defaults.speech_rate),
    };
    config.validate().map_err(usage)?;
    let state = SessionState::new(config, args.seed.or(file.seed).unwrap_or(0));
    persist::save(&state, &args.out).map_err(|e| usage(format!("{}: {e}", args.out.display())))?;
    writeln!(stdout, "{}", args.out.display()).map_err(usage)?;
    Ok(())
}

fn backend(kind: BackendKind, seed: u64, allow_network: bool) -> Result<Arc<dyn GenBackend>, CliError> {
    match kind {
        BackendKind::Mock => Ok(Arc::new(MockBackend::new(seed))),
        BackendKind::Remote if !allow_network => {
            Err(usage("the remote backend needs --allow-network"))
        }
        BackendKind::Remote => {
            let config = RemoteConfig::from_env()
                .ok_or_else(|| usage(format!("set {} to use the remote backend", altcanvas_core::genai::remote::ENV_URL)))?;
            Ok(Arc::new(RemoteBackend::new(config).map_err(|e| CliError::Backend(e.to_string()))?))
        }
    }
}

fn images_dir(session: &Path) -> PathBuf {
    session.parent().unwrap_or(Path::new(".")).join("images")
}

/// One compact JSON line per logged command, the same records the session
/// file embeds under `event_log`.
pub fn event_log_lines(log: &[LogEntry]) -> String {
    log.iter()
        .map(|e| serde_json::to_string(e).expect("log entries always serialize") + "\n")
        .collect()
}

/// Outcome of a replay: the final state and, if requested, the check results.
pub struct ReplayOutcome {
    pub state: SessionState,
    pub checks: Option<Vec<CheckOutcome>>,
}

pub fn cmd_replay(args: ReplayArgs, stdout: &mut dyn Write) -> Result<ReplayOutcome, CliError> {
    let text = std::fs::read_to_string(&args.script).map_err(|e| usage(format!("{}: {e}", args.script.display())))?;
    let script = Script::parse(&text).map_err(|e| usage(format!("{}: {e}", args.script.display())))?;
    let checks_text = match &args.checks {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let gen = backend(script.backend, script.seed, args.allow_network)?;
    let store: Arc<dyn ImageStore> = match &args.out {
        Some(out) => Arc::new(DirStore::open(images_dir(out)).map_err(usage)?),
        None => Arc::new(altcanvas_core::store::MemoryStore::new()),
    };
    let mut editor = Editor::fresh(script.config, script.seed, gen, store);
    for cmd in script.commands {
        editor.submit(cmd);
    }
    let state = editor.into_state();
    if let Some(out) = &args.out {
        persist::save(&state, out).map_err(|e| usage(format!("{}: {e}", out.display())))?;
    }
    stdout.write_all(event_log_lines(&state.event_log).as_bytes()).map_err(usage)?;

    let failures: Vec<String> = state
        .event_log
        .iter()
        .filter_map(|e| match &e.command {
            Command::GenerationArrived { error: Some(err), .. } => Some(err.clone()),
            _ => None,
        })
        .collect();
    if let Some(first) = failures.first() {
        return Err(CliError::Backend(first.clone()));
    }

    let checks = match checks_text {
        Some(text) => {
            let outcomes = run_checks(&text, &state.scene).map_err(usage)?;
            let failed = outcomes.iter().filter(|o| !o.passed()).count();
            for o in &outcomes {
                match &o.failure {
                    None => eprintln!("ok    line {}: {}", o.line, o.check),
                    Some(why) => eprintln!("FAIL  line {}: {}: {why}", o.line, o.check),
                }
            }
            if failed > 0 {
                return Err(CliError::Assertion {
                    failed,
                    total: outcomes.len(),
                });
            }
            Some(outcomes)
        }
        None => None,
    };
    Ok(ReplayOutcome { state, checks })
}

pub fn render_request(args: &RenderArgs) -> RenderRequest {
    let mut req = RenderRequest::new(args.kind.into());
    req.format = args.format.map(|f| match f {
        FormatArg::Png => ExportFormat::Png,
        FormatArg::Svg => ExportFormat::Svg,
    });
    if let Some(e) = args.edges {
        req.edges.algorithm = match e {
            EdgesArg::Sobel => EdgeAlgorithm::Sobel,
            EdgesArg::Canny => EdgeAlgorithm::Canny,
        };
    }
    if let Some(t) = args.threshold {
        req.edges.threshold = t;
    }
    if let Some(v) = args.low {
        req.edges.canny_low = v;
    }
    if let Some(v) = args.high {
        req.edges.canny_high = v;
    }
    if let Some(s) = args.sigma {
        req.edges.gaussian_sigma = s;
    }
    if let Some(i) = args.instruction.as_ref().filter(|i| !i.trim().is_empty()) {
        req.instruction = i.clone();
    }
    req
}

pub fn cmd_render(args: RenderArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let req = render_request(&args);
    req.edges.validate().map_err(usage)?;
    let state = persist::load(&args.session).map_err(|e| usage(format!("{}: {e}", args.session.display())))?;
    let dir = args.images.clone().unwrap_or_else(|| images_dir(&args.session));
    let store = DirStore::open(&dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let kind = if args.allow_network && RemoteConfig::from_env().is_some() {
        BackendKind::Remote
    } else {
        BackendKind::Mock
    };
    let gen = backend(kind, state.seed, args.allow_network)?;
    let out = render::render(&state.scene, &store, gen.as_ref(), &req).map_err(usage)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    std::fs::write(&args.out, &out.bytes).map_err(|e| usage(format!("{}: {e}", args.out.display())))?;
    writeln!(stdout, "{} ({})", args.out.display(), out.format.media_type()).map_err(usage)?;
    Ok(())
}

pub fn cmd_serve(args: ServeArgs) -> Result<(), CliError> {
    let mut config = altcanvas_service::ServiceConfig::from_env().map_err(usage)?;
    if let Some(bind) = args.bind {
        config.bind = bind;
    }
    if args.data_dir.is_some() {
        config.data_dir = args.data_dir;
    }
    let _ = tracing_subscriber::fmt().try_init();
    let runtime = tokio::runtime::Runtime::new().map_err(usage)?;
    runtime.block_on(altcanvas_service::serve(config)).map_err(usage)
}
