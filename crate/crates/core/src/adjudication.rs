//! Tiered guess matching: exact form, fuzzy edit distance, then an optional
//! model verdict for guesses the local matcher rejects.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{AdapterError, LlmAdapter, LlmRequest, Purpose};
use crate::word::WordItem;

pub const DEFAULT_NEAR_THRESHOLD: f64 = 0.34;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdjudicationError {
    #[error("near_threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("arbiter unavailable: {0}")]
    ArbiterUnavailable(#[from] AdapterError),
    #[error("unparseable arbiter verdict {0:?}")]
    UnparseableVerdict(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    pub near_threshold: f64,
    pub arbitration_enabled: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self { near_threshold: DEFAULT_NEAR_THRESHOLD, arbitration_enabled: true }
    }
}

impl MatchConfig {
    pub fn new(near_threshold: f64, arbitration_enabled: bool) -> Result<Self, AdjudicationError> {
        let cfg = Self { near_threshold, arbitration_enabled };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), AdjudicationError> {
        if self.near_threshold > 0.0 && self.near_threshold < 1.0 {
            Ok(())
        } else {
            Err(AdjudicationError::InvalidThreshold(self.near_threshold))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "corrected", rename_all = "snake_case")]
pub enum OutcomeKind {
    Exact,
    /// Carries the canonical target form.
    Near(String),
    Miss,
    OffTopic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Local,
    Arbitrated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuessOutcome {
    pub kind: OutcomeKind,
    pub tier: Tier,
}

impl GuessOutcome {
    pub fn local(kind: OutcomeKind) -> Self {
        Self { kind, tier: Tier::Local }
    }

    pub fn is_correct(&self) -> bool {
        matches!(self.kind, OutcomeKind::Exact | OutcomeKind::Near(_))
    }
}

/// Lowercase, drop apostrophes, turn other punctuation into spaces, collapse
/// whitespace. Diacritics are kept.
pub fn normalize(text: &str) -> String {
    let mapped: String = text
        .chars()
        .filter(|c| *c != '\'' && *c != '’')
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Levenshtein distance over Unicode scalar values.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Distance scaled by the longer string, in [0, 1].
pub fn relative_distance(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 0.0;
    }
    edit_distance(a, b) as f64 / longest as f64
}

/// Tokens and adjacent bigrams of a normalized transcript.
fn candidates(normalized: &str) -> Vec<String> {
    let tokens: Vec<&str> = normalized.split(' ').filter(|t| !t.is_empty()).collect();
    let mut out: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();
    out.extend(tokens.windows(2).map(|w| w.join(" ")));
    out
}

/// Best (lowest) relative distance between any candidate and any form.
pub fn best_score(transcript: &str, word: &WordItem) -> Option<f64> {
    let normalized = normalize(transcript);
    candidates(&normalized)
        .iter()
        .flat_map(|c| word.forbidden_forms.iter().map(move |f| relative_distance(c, f)))
        .min_by(f64::total_cmp)
}

pub fn local_adjudicate(transcript: &str, word: &WordItem, cfg: &MatchConfig) -> GuessOutcome {
    let normalized = normalize(transcript);
    let cands = candidates(&normalized);
    if cands.iter().any(|c| word.forbidden_forms.contains(c) || *c == word.lemma) {
        return GuessOutcome::local(OutcomeKind::Exact);
    }
    match best_score(transcript, word) {
        Some(score) if score <= cfg.near_threshold => GuessOutcome::local(OutcomeKind::Near(word.lemma.clone())),
        _ => GuessOutcome::local(OutcomeKind::Miss),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Near,
    Miss,
    OffTopic,
}

/// Strict keyword parse: the reply must be exactly one verdict keyword,
/// optionally quoted or followed by a full stop.
pub fn parse_verdict(reply: &str) -> Option<Verdict> {
    let word = reply.trim().trim_matches(|c: char| c == '"' || c == '\'' || c == '.' || c.is_whitespace());
    match word.to_lowercase().as_str() {
        "near" => Some(Verdict::Near),
        "miss" => Some(Verdict::Miss),
        "off_topic" => Some(Verdict::OffTopic),
        _ => None,
    }
}

pub const ARBITER_SYSTEM: &str = "You judge guesses in a children's word-guessing game. \
The child's words come from speech recognition and may be garbled. \
Decide whether the child meant the target word. \
Reply with exactly one word: near if the child most likely meant the target word, \
miss if the child guessed a different word, off_topic if the child is talking about something other than the game.";

pub fn arbitration_request(transcript: &str, word: &WordItem, clue: Option<&str>, context: &[String]) -> LlmRequest {
    let mut user = format!("Target word: {}\n", word.lemma);
    if let Some(clue) = clue {
        user.push_str(&format!("Clue given: {clue}\n"));
    }
    if !context.is_empty() {
        user.push_str("Recent robot lines:\n");
        for line in context {
            user.push_str(&format!("- {line}\n"));
        }
    }
    user.push_str(&format!("Child said: \"{transcript}\"\nVerdict:"));
    LlmRequest { purpose: Purpose::Arbitration, system: ARBITER_SYSTEM.to_string(), user }
}

/// Result of full adjudication; `arbiter_error` records a degraded call.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjudicated {
    pub outcome: GuessOutcome,
    pub arbiter_error: Option<AdjudicationError>,
}

/// Local match first; a local miss goes to the arbiter when enabled. Arbiter
/// failures and unparseable replies leave the local miss in place.
pub fn adjudicate(
    transcript: &str,
    word: &WordItem,
    clue: Option<&str>,
    context: &[String],
    cfg: &MatchConfig,
    arbiter: &mut dyn LlmAdapter,
) -> Adjudicated {
    let local = local_adjudicate(transcript, word, cfg);
    if local.kind != OutcomeKind::Miss || !cfg.arbitration_enabled {
        return Adjudicated { outcome: local, arbiter_error: None };
    }
    let request = arbitration_request(transcript, word, clue, context);
    let reply = match arbiter.complete(&request) {
        Ok(reply) => reply,
        Err(e) => {
            tracing::warn!(error = %e, "arbiter call failed; keeping local miss");
            return Adjudicated { outcome: local, arbiter_error: Some(e.into()) };
        }
    };
    let kind = match parse_verdict(&reply) {
        Some(Verdict::Near) => OutcomeKind::Near(word.lemma.clone()),
        Some(Verdict::Miss) => OutcomeKind::Miss,
        Some(Verdict::OffTopic) => OutcomeKind::OffTopic,
        None => {
            tracing::warn!(reply = %reply, "unparseable arbiter verdict; keeping local miss");
            return Adjudicated { outcome: local, arbiter_error: Some(AdjudicationError::UnparseableVerdict(reply)) };
        }
    };
    Adjudicated { outcome: GuessOutcome { kind, tier: Tier::Arbitrated }, arbiter_error: None }
}
