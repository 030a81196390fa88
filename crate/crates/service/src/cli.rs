//! Command-line entry points. Each command returns a JSON value for stdout
//! or a [`CliError`] that `main` prints as JSON on stderr.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use alias_core::compare::{compare_dose, CompareError};
use alias_core::events::{EventPayload, SessionEvent};
use alias_core::llm::{AdapterError, LlmAdapter, OfflineAdapter, StubAdapter, StubScript};
use alias_core::morphology::packs::pack;
use alias_core::morphology::{Lexicon, MorphError};
use alias_core::orchestrator::Resources;
use alias_core::replay::{log_dose_report, read_log, replay, write_log, ReplayError};
use alias_core::sim::{run_simulation, SimConfig, SimError};
use alias_core::transcript::{load_transcript, TranscriptError};
use alias_core::Language;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::api::{router, AppState};
use crate::hub::{AdapterFactory, Hub, HubConfig};
use crate::live::{LiveAdapter, LiveConfig};

#[derive(Debug, Parser)]
#[command(name = "alias", version, about = "Word-retrieval game engine: simulate, analyze, compare, replay, serve")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulated session and write its event log.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// `stub:PATH`, `live` or `offline`.
        #[arg(long, default_value = "offline")]
        llm: LlmSpec,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dose report for the robot speech in a log.
    Analyze {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        target: String,
        /// Lexicon file replacing the bundled one for the log's language.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Robot log against an educator transcript.
    Compare {
        #[arg(long)]
        robot: PathBuf,
        #[arg(long)]
        educator: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        speaker: String,
    },
    /// Rebuild the final state and dose report from a log.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8787")]
        addr: SocketAddr,
        /// Facilitator token; falls back to ALIAS_TOKEN.
        #[arg(long, env = "ALIAS_TOKEN", hide_env_values = true)]
        token: String,
        #[arg(long)]
        log_dir: Option<PathBuf>,
        #[arg(long, default_value = "offline")]
        llm: LlmSpec,
        #[arg(long, default_value_t = 200)]
        tick_ms: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LlmSpec {
    Stub(PathBuf),
    Live,
    Offline,
}

impl FromStr for LlmSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(LlmSpec::Live),
            "offline" => Ok(LlmSpec::Offline),
            _ => match s.strip_prefix("stub:") {
                Some(path) if !path.is_empty() => Ok(LlmSpec::Stub(PathBuf::from(path))),
                _ => Err(format!("expected stub:PATH, live or offline, got '{s}'")),
            },
        }
    }
}

impl LlmSpec {
    /// A factory that gives every session a fresh adapter.
    pub fn factory(&self) -> Result<AdapterFactory, CliError> {
        Ok(match self {
            LlmSpec::Stub(path) => {
                let script = StubScript::load(path)?;
                Arc::new(move || Box::new(StubAdapter::new(script.clone())) as Box<dyn LlmAdapter>)
            }
            LlmSpec::Live => {
                let cfg = LiveConfig::from_env().map_err(CliError::Usage)?;
                Arc::new(move || Box::new(LiveAdapter::new(cfg.clone())) as Box<dyn LlmAdapter>)
            }
            LlmSpec::Offline => Arc::new(|| Box::new(OfflineAdapter::default()) as Box<dyn LlmAdapter>),
        })
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Adapter(#[from] AdapterError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error(transparent)]
    Compare(#[from] CompareError),
    #[error(transparent)]
    Morph(#[from] MorphError),
    #[error("server: {0}")]
    Server(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Adapter(_) => "adapter",
            CliError::Sim(_) => "simulation",
            CliError::Replay(ReplayError::CorruptLog { .. }) => "corrupt_log",
            CliError::Replay(_) => "log",
            CliError::Transcript(_) => "transcript",
            CliError::Compare(_) => "compare",
            CliError::Morph(_) => "morphology",
            CliError::Server(_) => "server",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut error = json!({ "kind": self.kind(), "message": self.to_string() });
        if let CliError::Replay(ReplayError::CorruptLog { seq, .. }) = self {
            error["seq"] = json!(seq);
        }
        json!({ "error": error })
    }
}

fn to_value(v: impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

pub fn run(command: Command) -> Result<Value, CliError> {
    match command {
        Command::Simulate { config, seed, llm, out } => simulate(&config, seed, &llm, &out),
        Command::Analyze { log, target, lexicon } => analyze(&log, &target, lexicon.as_deref()),
        Command::Compare { robot, educator, target, speaker } => compare(&robot, &educator, &target, &speaker),
        Command::Replay { log } => {
            let r = replay(&read_log(&log)?)?;
            Ok(json!({ "session": r.session, "report": r.report }))
        }
        Command::Serve { addr, token, log_dir, llm, tick_ms } => {
            if token.trim().is_empty() {
                return Err(CliError::Usage("the facilitator token must not be empty".into()));
            }
            let config = HubConfig { tick: Duration::from_millis(tick_ms.max(1)), log_dir, adapters: llm.factory()? };
            if let Some(dir) = &config.log_dir {
                std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
            }
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Server(e.to_string()))?;
            rt.block_on(serve(addr, token, config))?;
            Ok(json!({ "status": "stopped" }))
        }
    }
}

pub fn simulate(config: &Path, seed: Option<u64>, llm: &LlmSpec, out: &Path) -> Result<Value, CliError> {
    let mut cfg = SimConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.session.seed = seed;
    }
    let resources = Arc::new(Resources::bundled(cfg.session.language, &cfg.session.target)?);
    let adapter = (llm.factory()?)();
    let outcome = run_simulation(&cfg, resources, adapter)?;
    std::fs::write(out, write_log(&outcome.events)).map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
    let end = outcome.events.last().map(|e| &e.payload);
    let reason = match end {
        Some(EventPayload::SessionEnded { reason, .. }) => Some(*reason),
        _ => None,
    };
    Ok(json!({
        "session_id": outcome.session.id,
        "events": outcome.events.len(),
        "end_reason": reason,
        "log": out,
        "report": outcome.report,
    }))
}

fn log_language(events: &[SessionEvent]) -> Result<Language, CliError> {
    match events.first().map(|e| &e.payload) {
        Some(EventPayload::SessionCreated { config, .. }) => Ok(config.language),
        _ => Err(ReplayError::CorruptLog { seq: 0, reason: "log does not start with session_created".into() }.into()),
    }
}

pub fn analyze(log: &Path, target: &str, lexicon: Option<&Path>) -> Result<Value, CliError> {
    let events = read_log(log)?;
    let language = log_language(&events)?;
    let p = pack(language);
    let target = p.target(target)?;
    let custom = match lexicon {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
            let lex = Lexicon::parse(&text)?;
            if lex.language() != language {
                return Err(CliError::Usage(format!("lexicon is {}, log is {language}", lex.language())));
            }
            Some(lex)
        }
        None => None,
    };
    let report = log_dose_report(&events, target, custom.as_ref().unwrap_or(&p.lexicon))?;
    Ok(to_value(report))
}

pub fn compare(robot: &Path, educator: &Path, target: &str, speaker: &str) -> Result<Value, CliError> {
    let events = read_log(robot)?;
    let p = pack(log_language(&events)?);
    let transcript = load_transcript(educator)?;
    Ok(to_value(compare_dose(&events, &transcript, speaker, p.target(target)?, &p.lexicon)?))
}

pub async fn serve(addr: SocketAddr, token: String, config: HubConfig) -> Result<(), CliError> {
    let state = AppState { hub: Arc::new(Hub::new(config)), token: token.into() };
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| CliError::Server(format!("bind {addr}: {e}")))?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| CliError::Server(e.to_string()))
}
