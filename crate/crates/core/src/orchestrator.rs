//! Drives the state machine with a language-model adapter and a clock,
//! writing the event log and the live dose tally as it goes.

use std::collections::VecDeque;
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::adjudication::{adjudicate, OutcomeKind};
use crate::clue::feedback::FeedbackRequest;
use crate::clue::{
    bank_clue, generate_clue, generate_feedback, Clue, ClueError, ClueRequest, ClueRules, ExplicitPolicy,
    FeedbackSituation, WordBank,
};
use crate::events::{EventPayload, SessionEvent};
use crate::game::{self, GameError, Intervention, InterventionKind, Phase, Resolution, Session, SessionConfig};
use crate::language::Language;
use crate::llm::LlmAdapter;
use crate::morphology::packs::pack;
use crate::morphology::{dose_count, word_count, DoseReport, DoseTally, Lexicon, MorphError, MorphTarget};
use crate::protocol::{AnnotatedUtterance, TokenRegistry};
use crate::replay::tally_event;
use crate::word::WordItem;

pub const DEFAULT_MS_PER_WORD: u64 = 400;
const CONTEXT_WINDOW: usize = 6;
/// Issuer recorded on interventions the engine makes itself.
pub const ENGINE: &str = "engine";

pub trait Clock: Send {
    fn now_ms(&self) -> u64;
    /// The robot spoke `words` words.
    fn speak(&mut self, words: usize);
    fn wait(&mut self, ms: u64);
}

/// Simulated time: speech takes a fixed time per word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualClock {
    now: u64,
    ms_per_word: u64,
}

impl VirtualClock {
    pub fn new(ms_per_word: u64) -> Self {
        Self { now: 0, ms_per_word }
    }
}

impl Default for VirtualClock {
    fn default() -> Self {
        Self::new(DEFAULT_MS_PER_WORD)
    }
}

impl Clock for VirtualClock {
    fn now_ms(&self) -> u64 {
        self.now
    }

    fn speak(&mut self, words: usize) {
        self.now += words as u64 * self.ms_per_word;
    }

    fn wait(&mut self, ms: u64) {
        self.now += ms;
    }
}

/// Real elapsed time since the session was opened.
#[derive(Debug, Clone)]
pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        Self { start: Instant::now() }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now_ms(&self) -> u64 {
        self.start.elapsed().as_millis() as u64
    }

    fn speak(&mut self, _words: usize) {}

    fn wait(&mut self, _ms: u64) {}
}

/// Everything a session needs besides its config.
#[derive(Debug, Clone)]
pub struct Resources {
    pub lexicon: Lexicon,
    pub target: MorphTarget,
    pub registry: TokenRegistry,
    pub bank: WordBank,
}

impl Resources {
    pub fn bundled(language: Language, target: &str) -> Result<Self, MorphError> {
        let p = pack(language);
        Ok(Self {
            lexicon: p.lexicon.clone(),
            target: p.target(target)?.clone(),
            registry: TokenRegistry::default(),
            bank: WordBank::bundled(language).clone(),
        })
    }

    /// Bank words that have a fallback clue for the target.
    pub fn words(&self, category: Option<&str>) -> Vec<WordItem> {
        self.bank.word_items(&self.target.id, category, &self.lexicon)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrchestratorError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Clue(#[from] ClueError),
    #[error(transparent)]
    Morph(#[from] MorphError),
    #[error("config is for {config} target '{config_target}', resources are for {resources} '{resources_target}'")]
    ResourceMismatch { config: Language, config_target: String, resources: Language, resources_target: String },
}

pub struct Orchestrator<A, C> {
    session: Session,
    resources: Arc<Resources>,
    adapter: A,
    clock: C,
    log: Vec<SessionEvent>,
    tally: DoseTally,
    context: VecDeque<String>,
    last_clue: Option<String>,
}

impl<A: LlmAdapter, C: Clock> Orchestrator<A, C> {
    pub fn new(
        id: &str,
        config: SessionConfig,
        words: Vec<WordItem>,
        resources: Arc<Resources>,
        adapter: A,
        clock: C,
    ) -> Result<Self, OrchestratorError> {
        if config.language != resources.target.language || config.target != resources.target.id {
            return Err(OrchestratorError::ResourceMismatch {
                config: config.language,
                config_target: config.target.clone(),
                resources: resources.target.language,
                resources_target: resources.target.id.clone(),
            });
        }
        let t = game::create_session(id, config, words)?;
        let mut orch = Self {
            session: t.session.clone(),
            resources,
            adapter,
            clock,
            log: Vec::new(),
            tally: DoseTally::new(),
            context: VecDeque::new(),
            last_clue: None,
        };
        orch.emit(t.events, 0)?;
        Ok(orch)
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.log
    }

    pub fn adapter(&self) -> &A {
        &self.adapter
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    pub fn clock_mut(&mut self) -> &mut C {
        &mut self.clock
    }

    pub fn resources(&self) -> &Resources {
        &self.resources
    }

    /// Live dose report over the robot speech logged so far. The duration
    /// runs to the last event.
    pub fn dose_report(&self) -> Result<DoseReport, MorphError> {
        let end = self.log.last().map_or(0, |e| e.t_ms);
        self.tally.report(&self.resources.target, end)
    }

    pub fn running_dose(&self) -> usize {
        self.tally.total()
    }

    fn now(&self) -> u64 {
        self.clock.now_ms().max(self.session.clock_ms)
    }

    fn emit(&mut self, payloads: Vec<EventPayload>, t_ms: u64) -> Result<Vec<SessionEvent>, MorphError> {
        let t_ms = t_ms.max(self.log.last().map_or(0, |e| e.t_ms));
        let mut out = Vec::with_capacity(payloads.len());
        for payload in payloads {
            let event = SessionEvent { seq: self.log.len() as u64, t_ms, payload };
            tally_event(&mut self.tally, &event, &self.resources.target, &self.resources.lexicon)?;
            self.log.push(event.clone());
            out.push(event);
        }
        Ok(out)
    }

    fn remember(&mut self, line: &str) {
        self.context.push_back(line.to_string());
        while self.context.len() > CONTEXT_WINDOW {
            self.context.pop_front();
        }
    }

    fn context(&self) -> Vec<String> {
        self.context.iter().cloned().collect()
    }

    pub fn add_player(&mut self, pseudonym: &str) -> Result<Vec<SessionEvent>, OrchestratorError> {
        let t = game::add_player(&self.session, pseudonym, self.now())?;
        self.commit(t)
    }

    pub fn start(&mut self) -> Result<Vec<SessionEvent>, OrchestratorError> {
        let t = game::start_session(&self.session, self.now())?;
        self.commit(t)
    }

    fn commit(&mut self, t: game::Transition) -> Result<Vec<SessionEvent>, OrchestratorError> {
        self.session = t.session;
        let at = self.session.clock_ms;
        Ok(self.emit(t.events, at)?)
    }

    fn explicit_clue(&self) -> bool {
        let cfg = &self.session.config;
        match cfg.clue.explicit_policy {
            ExplicitPolicy::EveryKWords { k } if cfg.explicit_instruction => {
                self.session.words_presented.saturating_sub(1).is_multiple_of(k.max(1) as usize)
            }
            _ => false,
        }
    }

    /// Generate, validate and speak a clue for the word in play. Falls back to
    /// the bank clue when generation fails, and skips the word when there is
    /// no usable bank clue either.
    pub fn present_clue(&mut self) -> Result<Vec<SessionEvent>, OrchestratorError> {
        if self.session.phase != Phase::AwaitingClue {
            return Err(GameError::WrongPhase { op: "present_clue", phase: self.session.phase }.into());
        }
        let word = self.session.current_word.clone().expect("word in play while awaiting a clue");
        let context = self.context();
        let res = Arc::clone(&self.resources);
        let req = ClueRequest {
            word: &word,
            target: &res.target,
            lexicon: &res.lexicon,
            registry: &res.registry,
            rules: ClueRules::new(self.session.config.dose_k, &self.session.config.clue),
            explicit: self.explicit_clue(),
            context: &context,
        };
        let mut out = Vec::new();
        let clue = match generate_clue(&mut self.adapter, &req) {
            Ok(clue) => Some(clue),
            Err(e @ (ClueError::GenerationExhausted { .. } | ClueError::AdapterUnavailable(_))) => {
                tracing::info!(lemma = %word.lemma, error = %e, "serving bank clue");
                let fallback = match res.bank.fallback_clue(&word.lemma, &res.target.id) {
                    Some(text) => bank_clue(text, &req),
                    None => Err(ClueError::NoBankClue { lemma: word.lemma.clone(), target: res.target.id.clone() }),
                };
                let reason = match &fallback {
                    Ok(_) => e.to_string(),
                    Err(bank) => format!("{e}; {bank}"),
                };
                let now = self.now();
                out.extend(self.emit(vec![EventPayload::GenerationFallback { lemma: word.lemma.clone(), reason }], now)?);
                fallback.ok()
            }
            Err(e) => return Err(e.into()),
        };
        match clue {
            Some(clue) => out.extend(self.speak_clue(&clue)?),
            None => out.extend(self.intervene(InterventionKind::SkipWord, ENGINE)?),
        }
        Ok(out)
    }

    /// Speak a clue obtained elsewhere.
    pub fn speak_clue(&mut self, clue: &Clue) -> Result<Vec<SessionEvent>, OrchestratorError> {
        let t = game::present_clue(&self.session, clue, self.now())?;
        let out = self.commit(t)?;
        self.last_clue = Some(clue.utterance.clean_text.clone());
        self.remember(&clue.utterance.clean_text);
        self.clock.speak(word_count(&clue.utterance.clean_text));
        Ok(out)
    }

    /// Judge a guess from the current guesser and answer it.
    pub fn submit(&mut self, player_id: &str, transcript: &str) -> Result<Vec<SessionEvent>, OrchestratorError> {
        let word = self.session.current_word.clone();
        let context = self.context();
        let now = self.now();
        let cfg = self.session.config.matching;
        let clue = self.last_clue.clone();
        let adapter = &mut self.adapter;
        let (t, outcome) = game::submit_utterance(&self.session, player_id, transcript, now, |text, w| {
            let judged = adjudicate(text, w, clue.as_deref(), &context, &cfg, adapter);
            if let Some(e) = &judged.arbiter_error {
                tracing::warn!(error = %e, "arbitration degraded to local verdict");
            }
            judged.outcome
        })?;
        let word = word.expect("word in play while awaiting a guess");
        let resolution = t.events.iter().find_map(|e| match e {
            EventPayload::Outcome { resolution, .. } => Some(*resolution),
            _ => None,
        });
        let situation = match (resolution, &outcome.kind) {
            (Some(Resolution::Advance), OutcomeKind::Exact) => FeedbackSituation::Praise,
            (Some(Resolution::Advance), _) => FeedbackSituation::Correction,
            (Some(Resolution::Hint { level }), _) => FeedbackSituation::Hint { level },
            (Some(Resolution::Reveal), _) => FeedbackSituation::Reveal,
            _ => FeedbackSituation::Redirect,
        };
        let feedback = self.feedback(situation, &word)?;
        let mut events = t.events;
        let at = events
            .iter()
            .position(|e| matches!(e, EventPayload::TurnAdvanced { .. }))
            .unwrap_or(events.len());
        events.insert(at, feedback);
        self.session = t.session;
        Ok(self.emit(events, now)?)
    }

    fn feedback(&mut self, situation: FeedbackSituation, word: &WordItem) -> Result<EventPayload, MorphError> {
        let cfg = &self.session.config;
        let res = Arc::clone(&self.resources);
        let explicit_line = (cfg.explicit_instruction
            && cfg.clue.explicit_policy == ExplicitPolicy::OnNear
            && situation == FeedbackSituation::Correction)
            .then_some(res.target.explicit_rule.as_str())
            .filter(|l| !l.is_empty());
        let context = self.context();
        let req = FeedbackRequest {
            situation,
            word,
            target: &res.target,
            registry: &res.registry,
            context: &context,
            explicit_line,
        };
        let fb = generate_feedback(&mut self.adapter, &req);
        let AnnotatedUtterance { clean_text, tokens, .. } = fb.utterance;
        let dose = dose_count(&clean_text, &res.target, &res.lexicon)?;
        self.remember(&clean_text);
        self.clock.speak(word_count(&clean_text));
        Ok(EventPayload::FeedbackSpoken { situation, dose, clean_text, tokens, source: fb.source })
    }

    pub fn intervene(&mut self, kind: InterventionKind, issued_by: &str) -> Result<Vec<SessionEvent>, OrchestratorError> {
        let now = self.now();
        let intervention = Intervention { kind, issued_by: issued_by.to_string(), at_ms: now };
        let word = self.session.current_word.clone();
        let t = game::apply_intervention(&self.session, &intervention)?;
        let mut events = t.events;
        if kind == InterventionKind::ExtraHint {
            let level = t.session.hint_level;
            let word = word.expect("word in play while awaiting a guess");
            events.push(self.feedback(FeedbackSituation::Hint { level }, &word)?);
        }
        self.session = t.session;
        Ok(self.emit(events, now)?)
    }

    /// End the session if its time is up. Returns the events written.
    pub fn check_time(&mut self) -> Result<Vec<SessionEvent>, OrchestratorError> {
        let now = self.now();
        if self.session.is_ended() || now < self.session.config.session_duration_ms {
            return Ok(Vec::new());
        }
        let t = game::expire(&self.session, now)?;
        self.commit(t)
    }
}
