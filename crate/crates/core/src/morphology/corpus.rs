//! Hand-annotated gold corpus.
//!
//! One sentence per line, tab separated: language code, target id, and the
//! sentence with every counted occurrence written as `{surface|lemma}`.
//! Blank lines and lines starting with `#` are ignored.
//!
//! ```text
//! en    third_person_s    The dog {runs|run} and {jumps|jump}.
//! ```

use serde::Serialize;

use super::lexicon::Lexicon;
use super::tagger::tag_occurrences;
use super::target::MorphTarget;
use super::MorphError;
use crate::language::Language;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldSentence {
    pub line: usize,
    pub language: Language,
    pub target: String,
    pub text: String,
    /// (surface, lemma) in text order.
    pub expected: Vec<(String, String)>,
}

pub fn parse_corpus(text: &str) -> Result<Vec<GoldSentence>, MorphError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let bad = |message: &str| MorphError::CorpusFormat { line, message: message.to_string() };
        let mut cols = raw.splitn(3, '\t');
        let (Some(lang), Some(target), Some(body)) = (cols.next(), cols.next(), cols.next()) else {
            return Err(bad("expected three tab-separated columns"));
        };
        let language: Language = lang.trim().parse().map_err(|e: String| bad(&e))?;
        let (text, expected) = strip_annotations(body).map_err(bad)?;
        out.push(GoldSentence { line, language, target: target.trim().to_string(), text, expected });
    }
    Ok(out)
}

type Stripped = (String, Vec<(String, String)>);

fn strip_annotations(body: &str) -> Result<Stripped, &'static str> {
    let mut text = String::with_capacity(body.len());
    let mut expected = Vec::new();
    let mut rest = body;
    while let Some(open) = rest.find('{') {
        text.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after.find('}').ok_or("unclosed annotation")?;
        let (surface, lemma) = after[..close].split_once('|').ok_or("annotation needs surface|lemma")?;
        if surface.is_empty() || lemma.is_empty() {
            return Err("empty annotation field");
        }
        text.push_str(surface);
        expected.push((surface.to_string(), lemma.to_string()));
        rest = &after[close + 1..];
    }
    if rest.contains('}') {
        return Err("stray closing brace");
    }
    text.push_str(rest);
    Ok((text.trim().to_string(), expected))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub line: usize,
    pub text: String,
    pub expected: Vec<(String, String)>,
    pub found: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Agreement {
    pub sentences: usize,
    pub agreeing: usize,
    pub disagreements: Vec<Disagreement>,
}

impl Agreement {
    pub fn is_perfect(&self) -> bool {
        self.disagreements.is_empty() && self.sentences > 0
    }
}

/// Tag each gold sentence and compare (surface, lemma) sequences.
pub fn evaluate<'a>(
    corpus: &[GoldSentence],
    resolve: impl Fn(Language, &str) -> Option<(&'a MorphTarget, &'a Lexicon)>,
) -> Result<Agreement, MorphError> {
    let mut agreement = Agreement::default();
    for gold in corpus {
        let (target, lexicon) = resolve(gold.language, &gold.target)
            .ok_or_else(|| MorphError::UnknownTarget { id: gold.target.clone(), language: gold.language })?;
        let found: Vec<(String, String)> = tag_occurrences(&gold.text, target, lexicon)?
            .into_iter()
            .map(|m| (m.surface, m.lemma))
            .collect();
        agreement.sentences += 1;
        if found == gold.expected {
            agreement.agreeing += 1;
        } else {
            agreement.disagreements.push(Disagreement {
                line: gold.line,
                text: gold.text.clone(),
                expected: gold.expected.clone(),
                found,
            });
        }
    }
    Ok(agreement)
}
