//! Bundled word lists with pre-validated fallback clues.
//!
//! ```toml
//! language = "english"
//!
//! [[word]]
//! lemma = "tiger"
//! category = "animals"
//! [word.clues]
//! third_person_s = ["[happy] This big cat lives in the jungle. ..."]
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::language::Language;
use crate::morphology::Lexicon;
use crate::word::WordItem;

pub const WORDS_EN: &str = include_str!("../../data/words_en.toml");
pub const WORDS_SV: &str = include_str!("../../data/words_sv.toml");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BankError {
    #[error("word bank: {0}")]
    Format(String),
    #[error("word bank lists '{0}' twice")]
    Duplicate(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankWord {
    pub lemma: String,
    pub category: String,
    /// Target id -> annotated clue texts.
    #[serde(default)]
    pub clues: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordBank {
    pub language: Language,
    #[serde(rename = "word")]
    pub words: Vec<BankWord>,
}

static ENGLISH: LazyLock<WordBank> = LazyLock::new(|| WordBank::parse(WORDS_EN).expect("bundled English bank is valid"));
static SWEDISH: LazyLock<WordBank> = LazyLock::new(|| WordBank::parse(WORDS_SV).expect("bundled Swedish bank is valid"));

impl WordBank {
    pub fn parse(text: &str) -> Result<Self, BankError> {
        let bank: WordBank = toml::from_str(text).map_err(|e| BankError::Format(e.to_string()))?;
        let mut seen = std::collections::BTreeSet::new();
        for w in &bank.words {
            if !seen.insert(w.lemma.as_str()) {
                return Err(BankError::Duplicate(w.lemma.clone()));
            }
        }
        Ok(bank)
    }

    pub fn load(path: &Path) -> Result<Self, BankError> {
        let text = std::fs::read_to_string(path).map_err(|e| BankError::Format(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn bundled(language: Language) -> &'static WordBank {
        match language {
            Language::English => &ENGLISH,
            Language::Swedish => &SWEDISH,
        }
    }

    pub fn get(&self, lemma: &str) -> Option<&BankWord> {
        self.words.iter().find(|w| w.lemma == lemma)
    }

    /// First fallback clue for `lemma` under `target`.
    pub fn fallback_clue(&self, lemma: &str, target: &str) -> Option<&str> {
        self.get(lemma)?.clues.get(target)?.first().map(String::as_str)
    }

    /// Words that have a fallback clue for `target`, optionally restricted to
    /// one category, in bank order.
    pub fn word_items(&self, target: &str, category: Option<&str>, lexicon: &Lexicon) -> Vec<WordItem> {
        self.words
            .iter()
            .filter(|w| w.clues.get(target).is_some_and(|c| !c.is_empty()))
            .filter(|w| category.is_none_or(|c| c == "any" || w.category == c))
            .map(|w| WordItem::new(&w.lemma, &w.category, lexicon))
            .collect()
    }
}
