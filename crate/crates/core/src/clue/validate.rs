use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ClueRules;
use crate::morphology::{tag_occurrences, tokenize, Lexicon, MorphError, MorphMatch, MorphTarget};
use crate::word::WordItem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    ForbiddenForm { form: String },
    DoseTooLow { found: usize, required: usize },
    TooLong { words: usize, max: usize },
    LemmaRepetition { distinct: usize, required: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClueViolation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl ClueViolation {
    fn new(kind: ViolationKind, detail: String) -> Self {
        Self { kind, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedClue {
    pub dose: usize,
    pub target_lemmas_used: BTreeSet<String>,
    pub words: usize,
    pub matches: Vec<MorphMatch>,
}

/// Forbidden forms present in `text`, token-level and case-insensitive. A
/// trailing clitic or possessive `'s` is ignored when comparing.
pub fn forbidden_forms_in(text: &str, word: &WordItem) -> BTreeSet<String> {
    let mut found = BTreeSet::new();
    for token in tokenize(text) {
        let lower = token.lower.as_str();
        let bare = lower.strip_suffix("'s").or_else(|| lower.strip_suffix("’s")).unwrap_or(lower);
        for candidate in [lower, bare] {
            if word.forbidden_forms.contains(candidate) {
                found.insert(candidate.to_string());
            }
        }
    }
    found
}

/// Check a clue's clean text against the game and dose constraints.
pub fn validate_clue(
    clean_text: &str,
    word: &WordItem,
    target: &MorphTarget,
    rules: &ClueRules,
    lexicon: &Lexicon,
) -> Result<Result<ValidatedClue, Vec<ClueViolation>>, MorphError> {
    let matches = tag_occurrences(clean_text, target, lexicon)?;
    let dose = matches.len();
    let lemmas: BTreeSet<String> = matches.iter().map(|m| m.lemma.clone()).collect();
    let words = tokenize(clean_text).len();
    let mut violations = Vec::new();

    for form in forbidden_forms_in(clean_text, word) {
        violations.push(ClueViolation::new(
            ViolationKind::ForbiddenForm { form: form.clone() },
            format!("the clue says \"{form}\", which gives the answer away"),
        ));
    }
    if dose < rules.dose_k {
        violations.push(ClueViolation::new(
            ViolationKind::DoseTooLow { found: dose, required: rules.dose_k },
            format!("it has {dose} {} but needs at least {}", target.prompt_phrase, rules.dose_k),
        ));
    }
    if words > rules.max_clue_words {
        violations.push(ClueViolation::new(
            ViolationKind::TooLong { words, max: rules.max_clue_words },
            format!("it has {words} words; the limit is {}", rules.max_clue_words),
        ));
    }
    let required = rules.required_variety();
    if lemmas.len() < required && dose > lemmas.len() {
        violations.push(ClueViolation::new(
            ViolationKind::LemmaRepetition { distinct: lemmas.len(), required },
            format!("it repeats the same words; use at least {required} different ones"),
        ));
    }
    if violations.is_empty() {
        Ok(Ok(ValidatedClue { dose, target_lemmas_used: lemmas, words, matches }))
    } else {
        Ok(Err(violations))
    }
}
