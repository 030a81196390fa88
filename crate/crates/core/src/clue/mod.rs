//! Prompt assembly, clue validation with bounded retry, feedback lines and
//! the bundled fallback clue bank.

pub mod bank;
pub mod feedback;
pub mod generate;
pub mod prompt;
pub mod validate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::language::Language;
use crate::llm::AdapterError;
use crate::morphology::MorphError;
use crate::protocol::AnnotatedUtterance;
use crate::word::WordItem;

pub use bank::{BankWord, WordBank};
pub use feedback::{generate_feedback, template_feedback, Feedback, FeedbackSituation, FeedbackSource};
pub use generate::{bank_clue, generate_clue, ClueRequest};
pub use prompt::{build_prompt, Prompt};
pub use validate::{validate_clue, ClueViolation, ValidatedClue, ViolationKind};

/// When meta-linguistic rule lines are spoken, if explicit instruction is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ExplicitPolicy {
    Never,
    /// Append the rule line to near-miss corrections.
    OnNear,
    /// Ask for the rule line in the clue of every k-th word.
    EveryKWords { k: u32 },
}

impl Default for ExplicitPolicy {
    fn default() -> Self {
        ExplicitPolicy::EveryKWords { k: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClueSettings {
    pub max_retries: u32,
    pub max_clue_words: usize,
    pub variety_floor: usize,
    pub explicit_policy: ExplicitPolicy,
}

impl Default for ClueSettings {
    fn default() -> Self {
        Self { max_retries: 3, max_clue_words: 60, variety_floor: 3, explicit_policy: ExplicitPolicy::default() }
    }
}

/// The limits a clue is validated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClueRules {
    pub dose_k: usize,
    pub max_clue_words: usize,
    pub variety_floor: usize,
    pub max_retries: u32,
}

impl ClueRules {
    pub fn new(dose_k: usize, settings: &ClueSettings) -> Self {
        Self {
            dose_k,
            max_clue_words: settings.max_clue_words,
            variety_floor: settings.variety_floor,
            max_retries: settings.max_retries,
        }
    }

    pub fn required_variety(&self) -> usize {
        self.dose_k.min(self.variety_floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClueSource {
    Generated,
    Bank,
}

/// A clue that passed validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clue {
    pub word: WordItem,
    pub utterance: AnnotatedUtterance,
    pub dose: usize,
    pub target_lemmas_used: BTreeSet<String>,
    pub attempt: u32,
    pub source: ClueSource,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClueError {
    #[error("language mismatch: word is {word}, target is {target}")]
    LanguageMismatch { word: Language, target: Language },
    #[error("no valid clue after {attempts} attempts")]
    GenerationExhausted { attempts: u32, last_violations: Vec<ClueViolation> },
    #[error(transparent)]
    AdapterUnavailable(#[from] AdapterError),
    #[error("no bank clue for '{lemma}' and target '{target}'")]
    NoBankClue { lemma: String, target: String },
    #[error("bank clue for '{lemma}' is invalid: {violations:?}")]
    InvalidBankClue { lemma: String, violations: Vec<ClueViolation> },
    #[error(transparent)]
    Morph(#[from] MorphError),
}
