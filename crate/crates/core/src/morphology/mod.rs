//! Target structures, occurrence tagging and dose measurement.

pub mod corpus;
pub mod dose;
pub mod lexicon;
pub mod packs;
pub mod tagger;
pub mod target;
pub mod tokenize;

use thiserror::Error;

use crate::language::Language;

pub use dose::{dose_report, dose_report_over, DoseReport, DoseTally, TimedUtterance, UtteranceDose, UtteranceKind};
pub use lexicon::{inflections, Analysis, Entry, Lexicon, Pos};
pub use tagger::{dose_count, tag_occurrences, Confidence, MorphMatch};
pub use target::{parse_targets, MorphTarget, TargetRule};
pub use tokenize::{tokenize, word_count, Token};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphError {
    #[error("lexicon line {line}: {message}")]
    LexiconFormat { line: usize, message: String },
    #[error("surface '{surface}' maps to two {pos} lemmas{}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    AmbiguousForm { surface: String, pos: Pos, line: Option<usize> },
    #[error("target '{id}': {message}")]
    InvalidTarget { id: String, message: String },
    #[error("target file: {0}")]
    TargetFormat(String),
    #[error("language mismatch: expected {expected}, found {found}")]
    LanguageMismatch { expected: Language, found: Language },
    #[error("no utterances to report on")]
    EmptyInput,
    #[error("corpus line {line}: {message}")]
    CorpusFormat { line: usize, message: String },
    #[error("unknown target '{id}' for {language}")]
    UnknownTarget { id: String, language: Language },
}
