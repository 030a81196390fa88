//! Part-of-speech lexicon with inflection tables.
//!
//! File format, one lemma per line, whitespace separated:
//!
//! ```text
//! @language english
//! # lemma  pos   overrides...
//! run      verb  past=ran pp=run ing=running
//! mouse    noun  pl=mice
//! water    noun  pl=-
//! ```
//!
//! Inflections not listed are generated by the language's regular rules;
//! `feature=-` suppresses a form. Feature tags are `3sg past pp ing pl` for
//! English and `pres past sup pl def defpl` for Swedish.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MorphError;
use crate::language::Language;

pub const BASE: &str = "base";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Prep,
    Conj,
    Num,
    Interj,
    Propn,
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "noun" => Pos::Noun,
            "verb" => Pos::Verb,
            "adj" => Pos::Adj,
            "adv" => Pos::Adv,
            "pron" => Pos::Pron,
            "det" => Pos::Det,
            "prep" => Pos::Prep,
            "conj" => Pos::Conj,
            "num" => Pos::Num,
            "interj" => Pos::Interj,
            "propn" => Pos::Propn,
            other => return Err(format!("unknown part of speech '{other}'")),
        })
    }
}

impl Pos {
    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adj => "adj",
            Pos::Adv => "adv",
            Pos::Pron => "pron",
            Pos::Det => "det",
            Pos::Prep => "prep",
            Pos::Conj => "conj",
            Pos::Num => "num",
            Pos::Interj => "interj",
            Pos::Propn => "propn",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub lemma: String,
    pub pos: Pos,
    /// feature tag -> surface forms, always including `base`.
    pub forms: BTreeMap<String, Vec<String>>,
}

impl Entry {
    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.forms.values().flatten().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Analysis {
    pub lemma: String,
    pub pos: Pos,
    pub feature: String,
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    language: Language,
    entries: BTreeMap<String, Vec<Entry>>,
    analyses: HashMap<String, Vec<Analysis>>,
}

impl Lexicon {
    pub fn empty(language: Language) -> Self {
        Self { language, entries: BTreeMap::new(), analyses: HashMap::new() }
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self, MorphError> {
        let mut lexicon: Option<Lexicon> = None;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| MorphError::LexiconFormat { line: line_no, message: msg };
            if let Some(rest) = line.strip_prefix("@language") {
                let language = Language::from_str(rest.trim()).map_err(bad)?;
                if lexicon.is_some() {
                    return Err(bad("duplicate @language directive".into()));
                }
                lexicon = Some(Lexicon::empty(language));
                continue;
            }
            let lex = lexicon.as_mut().ok_or_else(|| bad("missing @language directive".into()))?;
            let mut fields = line.split_whitespace();
            let lemma = fields.next().ok_or_else(|| bad("missing lemma".into()))?.to_lowercase();
            let pos: Pos = fields
                .next()
                .ok_or_else(|| bad("missing part of speech".into()))?
                .parse()
                .map_err(bad)?;
            let mut overrides = BTreeMap::new();
            for field in fields {
                let (feature, forms) =
                    field.split_once('=').ok_or_else(|| bad(format!("expected feature=form, got '{field}'")))?;
                let forms: Vec<String> = if forms == "-" {
                    Vec::new()
                } else {
                    forms.split(',').map(str::to_lowercase).collect()
                };
                overrides.insert(feature.to_string(), forms);
            }
            let entry = build_entry(&lemma, pos, lex.language, overrides);
            lex.insert(entry).map_err(|e| match e {
                MorphError::AmbiguousForm { surface, pos, .. } => {
                    MorphError::AmbiguousForm { surface, pos, line: Some(line_no) }
                }
                other => other,
            })?;
        }
        lexicon.ok_or(MorphError::LexiconFormat { line: 0, message: "missing @language directive".into() })
    }

    pub fn insert(&mut self, entry: Entry) -> Result<(), MorphError> {
        // a surface maps to one lemma per part of speech
        for surface in entry.surfaces() {
            if let Some(existing) = self.analyses.get(surface) {
                if existing.iter().any(|a| a.pos == entry.pos && a.lemma != entry.lemma) {
                    return Err(MorphError::AmbiguousForm {
                        surface: surface.to_string(),
                        pos: entry.pos,
                        line: None,
                    });
                }
            }
        }
        for (feature, forms) in &entry.forms {
            for surface in forms {
                let analysis =
                    Analysis { lemma: entry.lemma.clone(), pos: entry.pos, feature: feature.clone() };
                let list = self.analyses.entry(surface.clone()).or_default();
                if !list.contains(&analysis) {
                    list.push(analysis);
                }
            }
        }
        self.entries.entry(entry.lemma.clone()).or_default().push(entry);
        Ok(())
    }

    /// All analyses of a lowercased surface form.
    pub fn analyses(&self, surface: &str) -> &[Analysis] {
        self.analyses.get(surface).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.analyses.contains_key(surface)
    }

    pub fn entries(&self, lemma: &str) -> &[Entry] {
        self.entries.get(lemma).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_pos(&self, surface: &str, pos: Pos) -> bool {
        self.analyses(surface).iter().any(|a| a.pos == pos)
    }
}

/// Every inflected surface form of `lemma`, the lemma included.
///
/// Lexicon entries win; unknown lemmas fall back to the regular rules for
/// `pos`, or to noun rules when no part of speech is given.
pub fn inflections(lemma: &str, language: Language, pos: Option<Pos>, lexicon: &Lexicon) -> BTreeSet<String> {
    let lemma = lemma.trim().to_lowercase();
    let mut out = BTreeSet::new();
    if lexicon.language() == language {
        for entry in lexicon.entries(&lemma) {
            if pos.is_none_or(|p| p == entry.pos) {
                out.extend(entry.surfaces().map(str::to_owned));
            }
        }
    }
    if out.is_empty() {
        let entry = build_entry(&lemma, pos.unwrap_or(Pos::Noun), language, BTreeMap::new());
        out.extend(entry.surfaces().map(str::to_owned));
    }
    out.insert(lemma);
    out
}

fn build_entry(lemma: &str, pos: Pos, language: Language, overrides: BTreeMap<String, Vec<String>>) -> Entry {
    let mut forms = regular_forms(lemma, pos, language);
    for (feature, surfaces) in overrides {
        if surfaces.is_empty() {
            forms.remove(&feature);
        } else {
            forms.insert(feature, surfaces);
        }
    }
    forms.insert(BASE.to_string(), vec![lemma.to_string()]);
    Entry { lemma: lemma.to_string(), pos, forms }
}

/// Regular inflection rules.
pub fn regular_forms(lemma: &str, pos: Pos, language: Language) -> BTreeMap<String, Vec<String>> {
    let mut forms = BTreeMap::new();
    let mut put = |feature: &str, form: String| {
        forms.insert(feature.to_string(), vec![form]);
    };
    match (language, pos) {
        (Language::English, Pos::Verb) => {
            let past = english_past(lemma);
            put("3sg", english_s(lemma, true));
            put("pp", past.clone());
            put("past", past);
            put("ing", english_ing(lemma));
        }
        (Language::English, Pos::Noun) => put("pl", english_s(lemma, false)),
        (Language::Swedish, Pos::Verb) => {
            if let Some(stem) = lemma.strip_suffix('a') {
                put("pres", format!("{stem}ar"));
                put("past", format!("{stem}ade"));
                put("sup", format!("{stem}at"));
            } else {
                put("pres", format!("{lemma}r"));
                put("past", format!("{lemma}dde"));
                put("sup", format!("{lemma}tt"));
            }
        }
        (Language::Swedish, Pos::Noun) => {
            let plural = if let Some(stem) = lemma.strip_suffix('a') {
                format!("{stem}or")
            } else if let Some(stem) = lemma.strip_suffix('e') {
                format!("{stem}ar")
            } else {
                format!("{lemma}ar")
            };
            let def = if lemma.ends_with(is_vowel) { format!("{lemma}n") } else { format!("{lemma}en") };
            put("defpl", format!("{plural}na"));
            put("pl", plural);
            put("def", def);
        }
        _ => {}
    }
    forms
}

fn is_vowel(c: char) -> bool {
    "aeiouyåäö".contains(c)
}

fn consonant_y(word: &str) -> Option<&str> {
    let stem = word.strip_suffix('y')?;
    match stem.chars().last() {
        Some(c) if !is_vowel(c) => Some(stem),
        _ => None,
    }
}

fn english_s(word: &str, verb: bool) -> String {
    if let Some(stem) = consonant_y(word) {
        return format!("{stem}ies");
    }
    let sibilant = ["s", "x", "z", "ch", "sh"].iter().any(|s| word.ends_with(s));
    if sibilant || (verb && word.ends_with('o')) {
        format!("{word}es")
    } else {
        format!("{word}s")
    }
}

fn english_past(word: &str) -> String {
    if word.ends_with('e') {
        format!("{word}d")
    } else if let Some(stem) = consonant_y(word) {
        format!("{stem}ied")
    } else {
        format!("{word}ed")
    }
}

fn english_ing(word: &str) -> String {
    if let Some(stem) = word.strip_suffix("ie") {
        format!("{stem}ying")
    } else if word.ends_with('e') && !["ee", "ye", "oe"].iter().any(|s| word.ends_with(s)) && word.len() > 2 {
        format!("{}ing", &word[..word.len() - 1])
    } else {
        format!("{word}ing")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn english_regular_rules() {
        assert_eq!(english_s("drive", true), "drives");
        assert_eq!(english_s("wash", true), "washes");
        assert_eq!(english_s("go", true), "goes");
        assert_eq!(english_s("cry", true), "cries");
        assert_eq!(english_s("play", true), "plays");
        assert_eq!(english_s("zoo", false), "zoos");
        assert_eq!(english_past("bake"), "baked");
        assert_eq!(english_past("cry"), "cried");
        assert_eq!(english_ing("bake"), "baking");
        assert_eq!(english_ing("lie"), "lying");
        assert_eq!(english_ing("see"), "seeing");
    }

    #[test]
    fn inflections_fall_back_to_regular_noun_rules() {
        let lex = Lexicon::empty(Language::English);
        assert_eq!(inflections("cat", Language::English, None, &lex), set(&["cat", "cats"]));
    }

    #[test]
    fn inflections_use_lexicon_entries() {
        let lex = Lexicon::parse(
            "@language english\nmouse noun pl=mice\nrun verb past=ran pp=run ing=running\n",
        )
        .unwrap();
        assert_eq!(inflections("mouse", Language::English, None, &lex), set(&["mouse", "mice"]));
        assert_eq!(
            inflections("run", Language::English, Some(Pos::Verb), &lex),
            set(&["run", "runs", "ran", "running"])
        );
    }

    #[test]
    fn suppressed_forms_are_dropped() {
        let lex = Lexicon::parse("@language english\nwater noun pl=-\n").unwrap();
        assert_eq!(inflections("water", Language::English, None, &lex), set(&["water"]));
    }

    #[test]
    fn swedish_regular_rules() {
        let lex = Lexicon::empty(Language::Swedish);
        assert_eq!(
            inflections("flicka", Language::Swedish, None, &lex),
            set(&["flicka", "flickor", "flickan", "flickorna"])
        );
        let verb = regular_forms("hoppa", Pos::Verb, Language::Swedish);
        assert_eq!(verb["pres"], vec!["hoppar".to_string()]);
    }

    #[test]
    fn same_pos_surface_must_have_one_lemma() {
        let err = Lexicon::parse("@language english\nfind verb past=found\nfound verb\n").unwrap_err();
        assert!(matches!(err, MorphError::AmbiguousForm { ref surface, line: Some(3), .. } if surface == "found"));
    }

    #[test]
    fn format_errors_carry_line_numbers() {
        let err = Lexicon::parse("@language english\ncat thing\n").unwrap_err();
        assert!(matches!(err, MorphError::LexiconFormat { line: 2, .. }));
        let err = Lexicon::parse("cat noun\n").unwrap_err();
        assert!(matches!(err, MorphError::LexiconFormat { line: 1, .. }));
    }
}
