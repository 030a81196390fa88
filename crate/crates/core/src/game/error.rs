use thiserror::Error;

use super::types::Phase;
use crate::language::Language;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("word list is empty")]
    EmptyWordList,
    #[error("word '{lemma}' is {found}, session is {expected}")]
    LanguageMismatch { lemma: String, expected: Language, found: Language },
    #[error("word '{0}' is malformed")]
    MalformedWord(String),
    #[error("{op} is not allowed in phase {phase:?}")]
    WrongPhase { op: &'static str, phase: Phase },
    #[error("pseudonym must not be empty")]
    EmptyPseudonym,
    #[error("pseudonym '{0}' is already taken")]
    DuplicatePseudonym(String),
    #[error("session has no players")]
    NoPlayers,
    #[error("unknown player '{0}'")]
    UnknownPlayer(String),
    #[error("it is {expected}'s turn, not {got}'s")]
    NotYourTurn { expected: String, got: String },
    #[error("invalid intervention: {0}")]
    InvalidIntervention(String),
    #[error("clue rejected: {0}")]
    ClueRejected(String),
    #[error("time went backwards: clock at {clock_ms} ms, command at {at_ms} ms")]
    ClockRegression { clock_ms: u64, at_ms: u64 },
}
