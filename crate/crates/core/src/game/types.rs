use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::error::GameError;
use crate::adjudication::MatchConfig;
use crate::clue::ClueSettings;
use crate::language::Language;
use crate::word::WordItem;

pub const DEFAULT_SESSION_MS: u64 = 900_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub language: Language,
    /// Morphological target id, e.g. `third_person_s`.
    pub target: String,
    #[serde(default = "default_dose_k")]
    pub dose_k: usize,
    #[serde(default = "default_duration")]
    pub session_duration_ms: u64,
    #[serde(default = "default_max_hints")]
    pub max_hints: u32,
    #[serde(default = "default_category")]
    pub category: String,
    #[serde(default)]
    pub explicit_instruction: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub clue: ClueSettings,
    #[serde(default)]
    pub matching: MatchConfig,
}

fn default_dose_k() -> usize {
    3
}

fn default_duration() -> u64 {
    DEFAULT_SESSION_MS
}

fn default_max_hints() -> u32 {
    2
}

fn default_category() -> String {
    "any".to_string()
}

impl SessionConfig {
    pub fn new(language: Language, target: &str) -> Self {
        Self {
            language,
            target: target.to_string(),
            dose_k: default_dose_k(),
            session_duration_ms: DEFAULT_SESSION_MS,
            max_hints: default_max_hints(),
            category: default_category(),
            explicit_instruction: false,
            seed: 0,
            clue: ClueSettings::default(),
            matching: MatchConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let bad = |m: &str| Err(GameError::InvalidConfig(m.to_string()));
        if self.dose_k == 0 {
            return bad("dose_k must be at least 1");
        }
        if self.session_duration_ms == 0 {
            return bad("session_duration_ms must be positive");
        }
        if self.max_hints == 0 {
            return bad("max_hints must be at least 1");
        }
        if self.target.trim().is_empty() {
            return bad("target must not be empty");
        }
        if self.clue.max_clue_words == 0 {
            return bad("clue.max_clue_words must be positive");
        }
        if let crate::clue::ExplicitPolicy::EveryKWords { k: 0 } = self.clue.explicit_policy {
            return bad("clue.explicit_policy.k must be at least 1");
        }
        self.matching.validate().map_err(|e| GameError::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Player {
    pub id: String,
    pub pseudonym: String,
    pub turn_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivePhase {
    AwaitingClue,
    AwaitingGuess,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum Phase {
    Setup,
    AwaitingClue,
    AwaitingGuess,
    Paused { resume_to: ActivePhase },
    Ended,
}

impl Phase {
    pub fn active(self) -> Option<ActivePhase> {
        match self {
            Phase::AwaitingClue => Some(ActivePhase::AwaitingClue),
            Phase::AwaitingGuess => Some(ActivePhase::AwaitingGuess),
            _ => None,
        }
    }
}

impl From<ActivePhase> for Phase {
    fn from(p: ActivePhase) -> Self {
        match p {
            ActivePhase::AwaitingClue => Phase::AwaitingClue,
            ActivePhase::AwaitingGuess => Phase::AwaitingGuess,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterventionKind {
    SkipWord,
    ExtraHint,
    Pause,
    Resume,
    EndSession,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intervention {
    pub kind: InterventionKind,
    pub issued_by: String,
    pub at_ms: u64,
}

/// What follows a judged guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "next", rename_all = "snake_case")]
pub enum Resolution {
    /// Correct; the turn passes on.
    Advance,
    /// Miss with hints left; the same child tries again.
    Hint { level: u32 },
    /// Miss with no hints left; the word is told and the turn passes on.
    Reveal,
    /// Off-topic; the word and turn are kept.
    Redirect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdvanceReason {
    Guessed,
    Revealed,
    Skipped,
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    WordsExhausted,
    TimeUp,
    Facilitator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub config: SessionConfig,
    pub players: Vec<Player>,
    pub word_queue: VecDeque<WordItem>,
    pub current_word: Option<WordItem>,
    pub guesser_index: usize,
    pub phase: Phase,
    pub clock_ms: u64,
    pub hint_level: u32,
    /// Words that have been put in play, including the current one.
    pub words_presented: usize,
}

impl Session {
    pub fn guesser(&self) -> Option<&Player> {
        match self.phase {
            Phase::Setup | Phase::Ended => None,
            _ => self.players.get(self.guesser_index),
        }
    }

    pub fn player(&self, id: &str) -> Option<&Player> {
        self.players.iter().find(|p| p.id == id)
    }

    pub fn is_ended(&self) -> bool {
        self.phase == Phase::Ended
    }

    pub fn time_up(&self) -> bool {
        self.clock_ms >= self.config.session_duration_ms
    }
}
