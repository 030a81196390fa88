//! Session event records. A session log is one JSON object per line:
//! `{"seq":0,"t_ms":0,"kind":"session_created","payload":{...}}`.
//! `seq` is dense from 0 and `t_ms` never decreases. The `schema` field of
//! the `session_created` payload carries [`LOG_SCHEMA_VERSION`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::adjudication::GuessOutcome;
use crate::clue::{Clue, ClueSource, FeedbackSituation, FeedbackSource};
use crate::game::{AdvanceReason, EndReason, Intervention, Player, Resolution, SessionConfig};
use crate::protocol::ControlToken;
use crate::word::WordItem;

pub const LOG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventPayload {
    SessionCreated {
        schema: u32,
        session_id: String,
        config: SessionConfig,
        words: Vec<WordItem>,
    },
    PlayerAdded(Player),
    SessionStarted {
        players: Vec<String>,
    },
    WordPresented {
        lemma: String,
        category: String,
        guesser_index: usize,
        player_id: String,
        remaining: usize,
    },
    ClueSpoken {
        lemma: String,
        clean_text: String,
        tokens: Vec<ControlToken>,
        dose: usize,
        target_lemmas: BTreeSet<String>,
        attempt: u32,
        source: ClueSource,
    },
    GuessReceived {
        player_id: String,
        transcript: String,
    },
    Outcome {
        player_id: String,
        lemma: String,
        outcome: GuessOutcome,
        resolution: Resolution,
    },
    TurnAdvanced {
        reason: AdvanceReason,
        guesser_index: usize,
        player_id: String,
    },
    Intervention(Intervention),
    OffTopicRedirect {
        player_id: String,
    },
    GenerationFallback {
        lemma: String,
        reason: String,
    },
    FeedbackSpoken {
        situation: FeedbackSituation,
        clean_text: String,
        tokens: Vec<ControlToken>,
        dose: usize,
        source: FeedbackSource,
    },
    SessionEnded {
        reason: EndReason,
        words_presented: usize,
    },
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::SessionCreated { .. } => "session_created",
            EventPayload::PlayerAdded(_) => "player_added",
            EventPayload::SessionStarted { .. } => "session_started",
            EventPayload::WordPresented { .. } => "word_presented",
            EventPayload::ClueSpoken { .. } => "clue_spoken",
            EventPayload::GuessReceived { .. } => "guess_received",
            EventPayload::Outcome { .. } => "outcome",
            EventPayload::TurnAdvanced { .. } => "turn_advanced",
            EventPayload::Intervention(_) => "intervention",
            EventPayload::OffTopicRedirect { .. } => "off_topic_redirect",
            EventPayload::GenerationFallback { .. } => "generation_fallback",
            EventPayload::FeedbackSpoken { .. } => "feedback_spoken",
            EventPayload::SessionEnded { .. } => "session_ended",
        }
    }

    /// Events written by the orchestrator rather than the state machine.
    pub fn is_annotation(&self) -> bool {
        matches!(self, EventPayload::GenerationFallback { .. } | EventPayload::FeedbackSpoken { .. })
    }

    /// Robot speech carried by the event, if any.
    pub fn spoken_text(&self) -> Option<&str> {
        match self {
            EventPayload::ClueSpoken { clean_text, .. } | EventPayload::FeedbackSpoken { clean_text, .. } => {
                Some(clean_text)
            }
            _ => None,
        }
    }

    pub fn clue_spoken(clue: &Clue) -> Self {
        EventPayload::ClueSpoken {
            lemma: clue.word.lemma.clone(),
            clean_text: clue.utterance.clean_text.clone(),
            tokens: clue.utterance.tokens.clone(),
            dose: clue.dose,
            target_lemmas: clue.target_lemmas_used.clone(),
            attempt: clue.attempt,
            source: clue.source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub seq: u64,
    pub t_ms: u64,
    #[serde(flatten)]
    pub payload: EventPayload,
}

impl SessionEvent {
    pub fn kind(&self) -> &'static str {
        self.payload.kind()
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }
}
