use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::lexicon::Lexicon;
use super::tagger::{tag_occurrences, MorphMatch};
use super::target::MorphTarget;
use super::tokenize::word_count;
use super::MorphError;

/// Below this a per-minute rate is not reported.
pub const MIN_RATE_DURATION_MS: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtteranceKind {
    Clue,
    Feedback,
    Speech,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedUtterance {
    pub t_ms: u64,
    pub kind: UtteranceKind,
    pub text: String,
}

impl TimedUtterance {
    pub fn new(t_ms: u64, kind: UtteranceKind, text: impl Into<String>) -> Self {
        Self { t_ms, kind, text: text.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceDose {
    pub t_ms: u64,
    pub kind: UtteranceKind,
    pub dose: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoseReport {
    pub target: String,
    pub total: usize,
    pub words: usize,
    pub duration_ms: u64,
    /// Absent when the duration is under one second.
    pub rate_per_min: Option<f64>,
    /// Absent when no words were spoken.
    pub rate_per_100_words: Option<f64>,
    pub per_utterance: Vec<UtteranceDose>,
    pub distinct_lemmas: usize,
    pub lemmas: BTreeSet<String>,
}

impl DoseReport {
    /// Doses of the clue utterances, in order.
    pub fn per_clue(&self) -> Vec<usize> {
        self.per_utterance.iter().filter(|u| u.kind == UtteranceKind::Clue).map(|u| u.dose).collect()
    }
}

/// Running dose accumulator. Live sessions and log replay both feed one of
/// these, so their reports agree exactly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DoseTally {
    total: usize,
    words: usize,
    per_utterance: Vec<UtteranceDose>,
    lemmas: BTreeSet<String>,
}

impl DoseTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.per_utterance.is_empty()
    }

    /// Record an utterance whose matches were already computed.
    pub fn record(&mut self, t_ms: u64, kind: UtteranceKind, text: &str, matches: &[MorphMatch]) {
        self.total += matches.len();
        self.words += word_count(text);
        self.lemmas.extend(matches.iter().map(|m| m.lemma.clone()));
        self.per_utterance.push(UtteranceDose { t_ms, kind, dose: matches.len() });
    }

    /// Tag and record an utterance; returns its dose.
    pub fn add(&mut self, utterance: &TimedUtterance, target: &MorphTarget, lexicon: &Lexicon) -> Result<usize, MorphError> {
        let matches = tag_occurrences(&utterance.text, target, lexicon)?;
        self.record(utterance.t_ms, utterance.kind, &utterance.text, &matches);
        Ok(matches.len())
    }

    /// An empty tally gives a zero report with no rates.
    pub fn report(&self, target: &MorphTarget, duration_ms: u64) -> Result<DoseReport, MorphError> {
        if self.per_utterance.is_empty() {
            return Ok(DoseReport {
                target: target.id.clone(),
                total: 0,
                words: 0,
                duration_ms,
                rate_per_min: None,
                rate_per_100_words: None,
                per_utterance: Vec::new(),
                distinct_lemmas: 0,
                lemmas: Default::default(),
            });
        }
        let rate_per_min = (duration_ms >= MIN_RATE_DURATION_MS)
            .then(|| self.total as f64 * 60_000.0 / duration_ms as f64);
        let rate_per_100_words = (self.words > 0).then(|| self.total as f64 * 100.0 / self.words as f64);
        Ok(DoseReport {
            target: target.id.clone(),
            total: self.total,
            words: self.words,
            duration_ms,
            rate_per_min,
            rate_per_100_words,
            per_utterance: self.per_utterance.clone(),
            distinct_lemmas: self.lemmas.len(),
            lemmas: self.lemmas.clone(),
        })
    }
}

/// Report over session-relative utterances; the duration runs from 0 to the
/// last timestamp.
pub fn dose_report(utterances: &[TimedUtterance], target: &MorphTarget, lexicon: &Lexicon) -> Result<DoseReport, MorphError> {
    let duration = utterances.last().map(|u| u.t_ms).ok_or(MorphError::EmptyInput)?;
    dose_report_over(utterances, duration, target, lexicon)
}

/// Report with an explicit session duration.
pub fn dose_report_over(
    utterances: &[TimedUtterance],
    duration_ms: u64,
    target: &MorphTarget,
    lexicon: &Lexicon,
) -> Result<DoseReport, MorphError> {
    let mut tally = DoseTally::new();
    for u in utterances {
        tally.add(u, target, lexicon)?;
    }
    tally.report(target, duration_ms)
}
