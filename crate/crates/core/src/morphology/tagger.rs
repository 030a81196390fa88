//! Occurrence tagging for a morphological target.
//!
//! Lexicon first: a surface is counted when one of its analyses carries the
//! target's part of speech and feature. Surfaces with readings in more than
//! one part of speech (`drives` as verb or plural noun) are resolved from the
//! preceding word. Surfaces the lexicon does not know are counted only when
//! they end in the target suffix and the preceding word is positive evidence
//! for the target part of speech; those matches are marked `Heuristic`.

use serde::{Deserialize, Serialize};

use super::lexicon::{Analysis, Lexicon, Pos};
use super::target::MorphTarget;
use super::tokenize::{tokenize, Token};
use super::MorphError;
use crate::language::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Lexicon,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphMatch {
    pub token_index: usize,
    pub surface: String,
    pub lemma: String,
    pub confidence: Confidence,
}

struct ClosedClass {
    subjects: &'static [&'static str],
    auxiliaries: &'static [&'static str],
    conjunctions: &'static [&'static str],
    plural_markers: &'static [&'static str],
}

const ENGLISH: ClosedClass = ClosedClass {
    subjects: &[
        "he", "she", "it", "this", "that", "who", "which", "what", "everyone", "everybody", "someone",
        "somebody", "nobody", "everything", "something", "nothing", "one",
    ],
    auxiliaries: &[
        "is", "are", "was", "were", "am", "be", "been", "being", "has", "have", "had", "do", "does",
        "did", "will", "would", "can", "could", "shall", "should", "may", "might", "must", "cannot",
    ],
    conjunctions: &["and", "or", "but", "then"],
    plural_markers: &[
        "these", "those", "many", "some", "all", "both", "few", "several", "two", "three", "four",
        "five", "six", "seven", "eight", "nine", "ten",
    ],
};

const SWEDISH: ClosedClass = ClosedClass {
    subjects: &[
        "han", "hon", "den", "det", "jag", "du", "vi", "ni", "de", "man", "som", "vem", "vad",
        "någon", "något", "ingen", "alla",
    ],
    auxiliaries: &[
        "är", "var", "har", "hade", "ska", "skulle", "kan", "kunde", "vill", "ville", "måste",
        "får", "fick", "blir", "blev",
    ],
    conjunctions: &["och", "eller", "men", "sedan"],
    plural_markers: &[
        "många", "några", "alla", "båda", "två", "tre", "fyra", "fem", "sex", "sju", "åtta", "nio",
        "tio", "de", "dessa",
    ],
};

fn closed_class(language: Language) -> &'static ClosedClass {
    match language {
        Language::English => &ENGLISH,
        Language::Swedish => &SWEDISH,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Word(Pos),
    Subject,
    Aux,
    Conj,
    Unknown,
}

/// What the preceding context predicts for an ambiguous word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Lean {
    Verb,
    Noun,
    Unclear,
}

struct Context<'t, 'a> {
    tokens: &'t [Token<'a>],
    roles: Vec<Role>,
}

impl Context<'_, '_> {
    fn prev(&self, i: usize) -> Option<usize> {
        let t = &self.tokens[i];
        (i > 0 && !t.sentence_start && self.tokens[i - 1].sentence == t.sentence).then(|| i - 1)
    }

    fn lean(&self, i: usize) -> Lean {
        let Some(p) = self.prev(i) else {
            return Lean::Noun;
        };
        match self.roles[p] {
            Role::Subject | Role::Word(Pos::Noun | Pos::Propn | Pos::Adv) => Lean::Verb,
            Role::Word(Pos::Det | Pos::Num | Pos::Adj | Pos::Prep | Pos::Verb | Pos::Pron) | Role::Aux => {
                Lean::Noun
            }
            Role::Conj => match self.prev(p).map(|pp| self.roles[pp]) {
                Some(Role::Word(Pos::Verb)) => Lean::Verb,
                Some(Role::Word(Pos::Noun)) => Lean::Noun,
                _ => Lean::Unclear,
            },
            _ => Lean::Unclear,
        }
    }

    /// Nearest preceding non-adverb in the sentence is an auxiliary.
    fn after_auxiliary(&self, i: usize) -> bool {
        let mut cur = i;
        while let Some(p) = self.prev(cur) {
            match self.roles[p] {
                Role::Word(Pos::Adv) => cur = p,
                Role::Aux => return true,
                _ => return false,
            }
        }
        false
    }

    fn after_plural_marker(&self, i: usize, words: &ClosedClass) -> bool {
        self.prev(i).is_some_and(|p| words.plural_markers.contains(&self.tokens[p].lower.as_str()))
    }
}

fn resolve_pos(analyses: &[Analysis], lean: Lean) -> Option<Pos> {
    let has = |pos: Pos| analyses.iter().any(|a| a.pos == pos);
    if has(Pos::Verb) && (has(Pos::Noun) || has(Pos::Adj)) {
        return Some(if lean == Lean::Verb {
            Pos::Verb
        } else if has(Pos::Noun) {
            Pos::Noun
        } else {
            Pos::Adj
        });
    }
    const PRIORITY: [Pos; 11] = [
        Pos::Verb,
        Pos::Noun,
        Pos::Adj,
        Pos::Adv,
        Pos::Pron,
        Pos::Det,
        Pos::Num,
        Pos::Prep,
        Pos::Conj,
        Pos::Interj,
        Pos::Propn,
    ];
    PRIORITY.into_iter().find(|p| has(*p))
}

fn base_role(token: &Token<'_>, words: &ClosedClass) -> Option<Role> {
    let w = token.lower.as_str();
    if words.subjects.contains(&w) {
        Some(Role::Subject)
    } else if words.auxiliaries.contains(&w) {
        Some(Role::Aux)
    } else if words.conjunctions.contains(&w) {
        Some(Role::Conj)
    } else {
        None
    }
}

fn heuristic_shape(lower: &str, suffix: &str, language: Language) -> bool {
    if !lower.chars().all(char::is_alphabetic) || !lower.ends_with(suffix) {
        return false;
    }
    let len = lower.chars().count();
    match (language, suffix) {
        (Language::English, "s") => len >= 4 && !["ss", "us", "is"].iter().any(|e| lower.ends_with(e)),
        (Language::English, "ed") => len >= 5 && !lower.ends_with("eed"),
        (Language::Swedish, "r") => {
            len >= 4 && ["ar", "er", "ir", "or", "ur", "yr", "är", "ör"].iter().any(|e| lower.ends_with(e))
        }
        _ => len > suffix.chars().count() + 2,
    }
}

fn guess_lemma(lower: &str, suffix: &str, language: Language) -> String {
    match (language, suffix) {
        (Language::English, "s") => {
            if let Some(stem) = lower.strip_suffix("ies") {
                format!("{stem}y")
            } else if ["ches", "shes", "sses", "xes", "zes", "oes"].iter().any(|e| lower.ends_with(e)) {
                lower[..lower.len() - 2].to_string()
            } else {
                lower[..lower.len() - 1].to_string()
            }
        }
        (Language::English, "ed") => {
            if let Some(stem) = lower.strip_suffix("ied") {
                format!("{stem}y")
            } else {
                lower[..lower.len() - 2].to_string()
            }
        }
        (Language::Swedish, "r") => {
            for ending in ["ar", "er", "or"] {
                if let Some(stem) = lower.strip_suffix(ending) {
                    return format!("{stem}a");
                }
            }
            lower.strip_suffix('r').unwrap_or(lower).to_string()
        }
        _ => lower.strip_suffix(suffix).unwrap_or(lower).to_string(),
    }
}

/// Every counted occurrence of `target` in `text`, in text order.
pub fn tag_occurrences(text: &str, target: &MorphTarget, lexicon: &Lexicon) -> Result<Vec<MorphMatch>, MorphError> {
    if lexicon.language() != target.language {
        return Err(MorphError::LanguageMismatch { expected: target.language, found: lexicon.language() });
    }
    let language = target.language;
    let words = closed_class(language);
    let rule = &target.rule;
    let tokens = tokenize(text);
    let mut ctx = Context { tokens: &tokens, roles: Vec::with_capacity(tokens.len()) };
    let mut matches = Vec::new();

    for (i, token) in tokens.iter().enumerate() {
        let lower = token.lower.as_str();
        let lean = ctx.lean(i);
        let analyses = lexicon.analyses(lower);
        let mut role = base_role(token, words).unwrap_or_else(|| match resolve_pos(analyses, lean) {
            Some(pos) => Role::Word(pos),
            None if token.capitalized() && !token.sentence_start => Role::Word(Pos::Propn),
            None => Role::Unknown,
        });

        let mut found: Option<(String, Confidence)> = None;
        if target.is_excluded(lower) {
            // never counted
        } else if let Some(lemma) = target.irregular_forms.get(lower) {
            found = Some((lemma.clone(), Confidence::Lexicon));
            role = Role::Word(rule.pos);
        } else if !analyses.is_empty() {
            let hit = analyses.iter().find(|a| a.pos == rule.pos && rule.features.contains(&a.feature));
            if let Some(hit) = hit {
                if role == Role::Word(rule.pos) && same_pos_reading_holds(&ctx, i, analyses, hit, words) {
                    found = Some((hit.lemma.clone(), Confidence::Lexicon));
                }
            }
        } else if heuristic_shape(lower, &rule.suffix, language) && role != Role::Word(Pos::Propn) {
            let wanted = match rule.pos {
                Pos::Verb => Lean::Verb,
                _ => Lean::Noun,
            };
            let participle = rule.features.contains("past") && ctx.after_auxiliary(i);
            if lean == wanted && !participle {
                found = Some((guess_lemma(lower, &rule.suffix, language), Confidence::Heuristic));
                role = Role::Word(rule.pos);
            }
        }

        ctx.roles.push(role);
        if let Some((lemma, confidence)) = found {
            matches.push(MorphMatch { token_index: i, surface: token.text.to_string(), lemma, confidence });
        }
    }
    Ok(matches)
}

// A surface can carry the target feature and another feature of the same
// part of speech: past vs participle (`walked`), singular vs plural for
// zero plurals (`sheep`, `barn`).
fn same_pos_reading_holds(
    ctx: &Context<'_, '_>,
    i: usize,
    analyses: &[Analysis],
    hit: &Analysis,
    words: &ClosedClass,
) -> bool {
    let rivals = analyses.iter().filter(|a| a.pos == hit.pos && a.lemma == hit.lemma && a.feature != hit.feature);
    for rival in rivals {
        match (hit.feature.as_str(), rival.feature.as_str()) {
            ("past", "pp" | "sup") if ctx.after_auxiliary(i) => return false,
            ("pl" | "defpl", "base" | "def") if !ctx.after_plural_marker(i, words) => return false,
            _ => {}
        }
    }
    true
}

/// Number of counted occurrences.
pub fn dose_count(text: &str, target: &MorphTarget, lexicon: &Lexicon) -> Result<usize, MorphError> {
    tag_occurrences(text, target, lexicon).map(|m| m.len())
}
