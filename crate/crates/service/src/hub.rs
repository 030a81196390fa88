//! Session registry and per-session workers.
//!
//! Each session is owned by one worker thread that applies commands in
//! arrival order. Events are appended to a shared log before the command
//! is acknowledged, so any reader that sees the acknowledgment can already
//! stream the events it caused.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::mpsc::{self, RecvTimeoutError};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use alias_core::events::{EventPayload, SessionEvent};
use alias_core::game::{InterventionKind, Phase, Player, SessionConfig};
use alias_core::llm::LlmAdapter;
use alias_core::morphology::DoseReport;
use alias_core::orchestrator::{Orchestrator, Resources, WallClock};
use alias_core::sim::pick_words;
use alias_core::WordItem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tokio::sync::{oneshot, watch};

use crate::error::ApiError;

pub const FACILITATOR: &str = "facilitator";

pub type AdapterFactory = Arc<dyn Fn() -> Box<dyn LlmAdapter> + Send + Sync>;

#[derive(Clone)]
pub struct HubConfig {
    /// How often an idle worker checks whether time is up.
    pub tick: Duration,
    /// One `<session id>.jsonl` file per session when set.
    pub log_dir: Option<PathBuf>,
    pub adapters: AdapterFactory,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub config: SessionConfig,
    /// Lemmas to play, in order. Defaults to the bundled bank for the
    /// config's category, shuffled by the config seed.
    #[serde(default)]
    pub words: Option<Vec<String>>,
}

/// What the facilitator sees. The current word is included on purpose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    #[serde(flatten)]
    pub phase: Phase,
    pub players: Vec<Player>,
    pub guesser: Option<Player>,
    pub current_word: Option<String>,
    pub words_remaining: usize,
    pub words_presented: usize,
    pub hint_level: u32,
    pub clock_ms: u64,
    pub running_dose: usize,
    pub last_seq: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandReply {
    pub events: Vec<SessionEvent>,
    pub state: SessionView,
}

/// Append-only event history shared between a worker and its readers.
pub struct EventLog {
    events: RwLock<Vec<SessionEvent>>,
    len: watch::Sender<usize>,
}

impl EventLog {
    fn new() -> Self {
        Self { events: RwLock::new(Vec::new()), len: watch::channel(0).0 }
    }

    fn append(&self, batch: &[SessionEvent]) {
        if batch.is_empty() {
            return;
        }
        let mut events = self.events.write().expect("event log lock");
        events.extend_from_slice(batch);
        self.len.send_replace(events.len());
    }

    pub fn len(&self) -> usize {
        self.events.read().expect("event log lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, seq: usize) -> Option<SessionEvent> {
        self.events.read().expect("event log lock").get(seq).cloned()
    }

    pub fn snapshot(&self) -> Vec<SessionEvent> {
        self.events.read().expect("event log lock").clone()
    }

    pub fn is_closed(&self) -> bool {
        self.events
            .read()
            .expect("event log lock")
            .last()
            .is_some_and(|e| matches!(e.payload, EventPayload::SessionEnded { .. }))
    }

    pub fn subscribe(&self) -> watch::Receiver<usize> {
        self.len.subscribe()
    }
}

type Job = Box<dyn FnOnce(&mut Worker) + Send>;

#[derive(Clone)]
pub struct SessionHandle {
    id: String,
    jobs: mpsc::Sender<Job>,
    log: Arc<EventLog>,
}

impl SessionHandle {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn log(&self) -> &Arc<EventLog> {
        &self.log
    }

    async fn call<R: Send + 'static>(
        &self,
        f: impl FnOnce(&mut Worker) -> Result<R, ApiError> + Send + 'static,
    ) -> Result<R, ApiError> {
        let (tx, rx) = oneshot::channel();
        self.jobs
            .send(Box::new(move |w| {
                let _ = tx.send(f(w));
            }))
            .map_err(|_| ApiError::Internal("session worker stopped".into()))?;
        rx.await.map_err(|_| ApiError::Internal("session worker stopped".into()))?
    }

    pub async fn view(&self) -> Result<SessionView, ApiError> {
        self.call(|w| Ok(w.view())).await
    }

    pub async fn report(&self) -> Result<DoseReport, ApiError> {
        self.call(|w| w.orch.dose_report().map_err(|e| ApiError::Internal(e.to_string()))).await
    }

    pub async fn add_player(&self, pseudonym: String) -> Result<CommandReply, ApiError> {
        self.call(move |w| w.run(|o| o.add_player(&pseudonym))).await
    }

    pub async fn start(&self) -> Result<CommandReply, ApiError> {
        self.call(|w| w.run(|o| o.start())).await
    }

    pub async fn utterance(&self, player_id: String, transcript: String) -> Result<CommandReply, ApiError> {
        self.call(move |w| w.run(|o| o.submit(&player_id, &transcript))).await
    }

    pub async fn intervene(&self, kind: InterventionKind) -> Result<CommandReply, ApiError> {
        self.call(move |w| w.run(|o| o.intervene(kind, FACILITATOR))).await
    }
}

type Orch = Orchestrator<Box<dyn LlmAdapter>, WallClock>;

struct Worker {
    orch: Orch,
    log: Arc<EventLog>,
    file: Option<BufWriter<File>>,
    published: usize,
}

// Guards against a clue loop that never leaves AwaitingClue.
const MAX_CLUE_ROUNDS: usize = 64;

impl Worker {
    fn view(&self) -> SessionView {
        let s = self.orch.session();
        SessionView {
            session_id: s.id.clone(),
            phase: s.phase,
            players: s.players.clone(),
            guesser: s.guesser().cloned(),
            current_word: s.current_word.as_ref().map(|w| w.lemma.clone()),
            words_remaining: s.word_queue.len(),
            words_presented: s.words_presented,
            hint_level: s.hint_level,
            clock_ms: s.clock_ms,
            running_dose: self.orch.running_dose(),
            last_seq: self.orch.events().last().map(|e| e.seq),
        }
    }

    /// Apply one command, let the robot take its next turn, publish.
    fn run<T>(
        &mut self,
        command: impl FnOnce(&mut Orch) -> Result<T, alias_core::orchestrator::OrchestratorError>,
    ) -> Result<CommandReply, ApiError> {
        let before = self.published;
        let result = command(&mut self.orch);
        if result.is_ok() {
            self.settle();
        }
        self.publish();
        result?;
        Ok(CommandReply { events: self.orch.events()[before..].to_vec(), state: self.view() })
    }

    /// End on time, then give clues until a guess is awaited.
    fn settle(&mut self) {
        if let Err(e) = self.orch.check_time() {
            tracing::error!(session = %self.orch.session().id, error = %e, "time check failed");
        }
        for _ in 0..MAX_CLUE_ROUNDS {
            if self.orch.session().phase != Phase::AwaitingClue {
                return;
            }
            if let Err(e) = self.orch.present_clue() {
                tracing::error!(session = %self.orch.session().id, error = %e, "could not present a clue");
                return;
            }
        }
    }

    fn tick(&mut self) {
        if !self.orch.session().is_ended() {
            self.settle();
            self.publish();
        }
    }

    fn publish(&mut self) {
        let fresh = &self.orch.events()[self.published..];
        if fresh.is_empty() {
            return;
        }
        if let Some(file) = &mut self.file {
            let written = fresh.iter().try_for_each(|e| writeln!(file, "{}", e.to_json_line())).and_then(|_| file.flush());
            if let Err(e) = written {
                tracing::error!(session = %self.orch.session().id, error = %e, "log write failed");
            }
        }
        self.log.append(fresh);
        self.published = self.orch.events().len();
    }
}

pub struct Hub {
    config: HubConfig,
    sessions: RwLock<BTreeMap<String, SessionHandle>>,
}

impl Hub {
    pub fn new(config: HubConfig) -> Self {
        Self { config, sessions: RwLock::new(BTreeMap::new()) }
    }

    pub fn get(&self, id: &str) -> Result<SessionHandle, ApiError> {
        self.sessions
            .read()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::SessionNotFound(id.to_string()))
    }

    pub fn ids(&self) -> Vec<String> {
        self.sessions.read().expect("session table lock").keys().cloned().collect()
    }

    pub fn create(&self, req: CreateSession) -> Result<(SessionHandle, SessionView), ApiError> {
        req.config.validate().map_err(alias_core::orchestrator::OrchestratorError::from)?;
        let resources = Arc::new(
            Resources::bundled(req.config.language, &req.config.target)
                .map_err(|e| ApiError::BadRequest(e.to_string()))?,
        );
        let words = match &req.words {
            Some(lemmas) => lemmas
                .iter()
                .map(|l| {
                    let category = resources.bank.get(l).map_or(req.config.category.as_str(), |b| b.category.as_str());
                    WordItem::new(l, category, &resources.lexicon)
                })
                .collect(),
            None => {
                let pool = resources.words(Some(&req.config.category));
                pick_words(&pool, pool.len(), &mut ChaCha8Rng::seed_from_u64(req.config.seed))
            }
        };
        let id = uuid::Uuid::new_v4().simple().to_string();
        let orch = Orchestrator::new(&id, req.config, words, resources, (self.config.adapters)(), WallClock::new())?;
        let file = match &self.config.log_dir {
            Some(dir) => Some(BufWriter::new(
                File::create(dir.join(format!("{id}.jsonl"))).map_err(|e| ApiError::Internal(format!("log file: {e}")))?,
            )),
            None => None,
        };
        let log = Arc::new(EventLog::new());
        let mut worker = Worker { orch, log: log.clone(), file, published: 0 };
        worker.publish();
        let view = worker.view();

        let (jobs, rx) = mpsc::channel::<Job>();
        let tick = self.config.tick;
        std::thread::Builder::new()
            .name(format!("session-{id}"))
            .spawn(move || loop {
                match rx.recv_timeout(tick) {
                    Ok(job) => job(&mut worker),
                    Err(RecvTimeoutError::Timeout) => worker.tick(),
                    Err(RecvTimeoutError::Disconnected) => break,
                }
            })
            .map_err(|e| ApiError::Internal(format!("spawn worker: {e}")))?;

        let handle = SessionHandle { id: id.clone(), jobs, log };
        self.sessions.write().expect("session table lock").insert(id, handle.clone());
        Ok((handle, view))
    }
}
