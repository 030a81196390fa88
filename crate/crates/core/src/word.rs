use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::language::Language;
use crate::morphology::{inflections, Lexicon};

/// A word to be guessed. `forbidden_forms` holds every inflection of the
/// lemma, lowercased; none may appear in a clue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordItem {
    pub lemma: String,
    pub language: Language,
    pub category: String,
    pub forbidden_forms: BTreeSet<String>,
}

impl WordItem {
    /// Forbidden forms come from the lexicon, or regular rules for unknown lemmas.
    pub fn new(lemma: &str, category: &str, lexicon: &Lexicon) -> Self {
        let lemma = lemma.trim().to_lowercase();
        let language = lexicon.language();
        Self {
            forbidden_forms: inflections(&lemma, language, None, lexicon),
            lemma,
            language,
            category: category.to_string(),
        }
    }

    pub fn is_well_formed(&self) -> bool {
        !self.lemma.is_empty()
            && self.forbidden_forms.contains(&self.lemma)
            && self.forbidden_forms.iter().all(|f| f.to_lowercase() == *f)
    }
}
