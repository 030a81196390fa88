use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::lexicon::Pos;
use super::MorphError;
use crate::language::Language;

/// Regular realisation of a target: part of speech, the inflection feature
/// tags that count, and the suffix used for out-of-lexicon guesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetRule {
    pub pos: Pos,
    pub features: BTreeSet<String>,
    pub suffix: String,
}

/// A morphological structure whose occurrences make up the dose.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphTarget {
    pub id: String,
    pub language: Language,
    pub description: String,
    pub rule: TargetRule,
    /// surface -> lemma, consulted before the lexicon.
    #[serde(default)]
    pub irregular_forms: BTreeMap<String, String>,
    /// Surfaces never counted. Entries starting with an apostrophe match as
    /// suffixes, so `'s` covers every clitic or possessive `'s`.
    #[serde(default)]
    pub exclusions: BTreeSet<String>,
    /// Completes "use at least N different ..." in generation prompts.
    pub prompt_phrase: String,
    /// Meta-linguistic line describing the rule, for explicit instruction.
    pub explicit_rule: String,
}

impl MorphTarget {
    fn validate(&self) -> Result<(), MorphError> {
        let bad = |msg: &str| MorphError::InvalidTarget { id: self.id.clone(), message: msg.to_string() };
        if self.rule.suffix.is_empty() {
            return Err(bad("regular rule suffix is empty"));
        }
        if self.rule.features.is_empty() {
            return Err(bad("no inflection features"));
        }
        if self.irregular_forms.keys().any(|k| k.to_lowercase() != *k) {
            return Err(bad("irregular forms must be lowercase"));
        }
        Ok(())
    }

    pub fn is_excluded(&self, lower: &str) -> bool {
        self.exclusions.iter().any(|ex| {
            if ex.starts_with('\'') || ex.starts_with('’') {
                lower.ends_with(ex.as_str())
            } else {
                lower == ex
            }
        })
    }
}

#[derive(Deserialize)]
struct TargetFile {
    target: Vec<MorphTarget>,
}

/// Parse a target definition file (`[[target]]` tables).
pub fn parse_targets(text: &str) -> Result<Vec<MorphTarget>, MorphError> {
    let file: TargetFile = toml::from_str(text).map_err(|e| MorphError::TargetFormat(e.to_string()))?;
    let mut seen = BTreeSet::new();
    for target in &file.target {
        target.validate()?;
        if !seen.insert((target.language, target.id.clone())) {
            return Err(MorphError::InvalidTarget {
                id: target.id.clone(),
                message: format!("duplicate id for {}", target.language),
            });
        }
    }
    Ok(file.target)
}
