//! Language-model adapter contract and the scripted stub used by tests and
//! simulations.
//!
//! Stub script format (TOML). Each list is consumed in order by requests of
//! that purpose; with `cycle = true` a list restarts when exhausted.
//!
//! ```toml
//! cycle = false
//! clue = ["[happy] It runs, it jumps and it swims. [next_turn]"]
//! feedback = ["[excited] Yes! [next_turn]"]
//! arbitration = ["near", "miss"]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Clue,
    Feedback,
    Arbitration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub purpose: Purpose,
    pub system: String,
    pub user: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdapterError {
    #[error("adapter unavailable: {0}")]
    Unavailable(String),
    #[error("stub script has no more {0:?} responses")]
    ScriptExhausted(Purpose),
    #[error("adapter timed out")]
    Timeout,
    #[error("stub script: {0}")]
    Script(String),
}

/// Text-in, annotated-text-out completion.
pub trait LlmAdapter: Send {
    fn complete(&mut self, request: &LlmRequest) -> Result<String, AdapterError>;
}

impl<A: LlmAdapter + ?Sized> LlmAdapter for Box<A> {
    fn complete(&mut self, request: &LlmRequest) -> Result<String, AdapterError> {
        (**self).complete(request)
    }
}

impl<A: LlmAdapter + ?Sized> LlmAdapter for &mut A {
    fn complete(&mut self, request: &LlmRequest) -> Result<String, AdapterError> {
        (**self).complete(request)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubScript {
    #[serde(default)]
    pub cycle: bool,
    #[serde(default)]
    pub clue: Vec<String>,
    #[serde(default)]
    pub feedback: Vec<String>,
    #[serde(default)]
    pub arbitration: Vec<String>,
}

impl StubScript {
    pub fn from_toml_str(text: &str) -> Result<Self, AdapterError> {
        toml::from_str(text).map_err(|e| AdapterError::Script(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, AdapterError> {
        let text = std::fs::read_to_string(path).map_err(|e| AdapterError::Script(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn responses(&self, purpose: Purpose) -> &[String] {
        match purpose {
            Purpose::Clue => &self.clue,
            Purpose::Feedback => &self.feedback,
            Purpose::Arbitration => &self.arbitration,
        }
    }
}

/// Replays canned responses in order, per purpose. Records every request.
#[derive(Debug, Clone, Default)]
pub struct StubAdapter {
    script: StubScript,
    cursors: BTreeMap<Purpose, usize>,
    requests: Vec<LlmRequest>,
}

impl StubAdapter {
    pub fn new(script: StubScript) -> Self {
        Self { script, ..Self::default() }
    }

    pub fn clues<S: Into<String>>(clues: impl IntoIterator<Item = S>) -> Self {
        Self::new(StubScript { clue: clues.into_iter().map(Into::into).collect(), ..StubScript::default() })
    }

    pub fn verdicts<S: Into<String>>(verdicts: impl IntoIterator<Item = S>) -> Self {
        Self::new(StubScript { arbitration: verdicts.into_iter().map(Into::into).collect(), ..StubScript::default() })
    }

    pub fn calls(&self, purpose: Purpose) -> usize {
        self.requests.iter().filter(|r| r.purpose == purpose).count()
    }

    pub fn total_calls(&self) -> usize {
        self.requests.len()
    }

    pub fn requests(&self) -> &[LlmRequest] {
        &self.requests
    }
}

impl LlmAdapter for StubAdapter {
    fn complete(&mut self, request: &LlmRequest) -> Result<String, AdapterError> {
        self.requests.push(request.clone());
        let list = self.script.responses(request.purpose);
        let cursor = self.cursors.entry(request.purpose).or_default();
        if list.is_empty() || (*cursor >= list.len() && !self.script.cycle) {
            return Err(AdapterError::ScriptExhausted(request.purpose));
        }
        let response = list[*cursor % list.len()].clone();
        *cursor += 1;
        Ok(response)
    }
}

/// An adapter that is always down.
#[derive(Debug, Clone, Default)]
pub struct OfflineAdapter {
    pub calls: usize,
}

impl LlmAdapter for OfflineAdapter {
    fn complete(&mut self, _request: &LlmRequest) -> Result<String, AdapterError> {
        self.calls += 1;
        Err(AdapterError::Unavailable("offline".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(purpose: Purpose) -> LlmRequest {
        LlmRequest { purpose, system: String::new(), user: String::new() }
    }

    #[test]
    fn consumes_per_purpose_in_order() {
        let script = StubScript::from_toml_str(
            "clue = [\"a\", \"b\"]\narbitration = [\"near\"]\n",
        )
        .unwrap();
        let mut stub = StubAdapter::new(script);
        assert_eq!(stub.complete(&req(Purpose::Clue)).unwrap(), "a");
        assert_eq!(stub.complete(&req(Purpose::Arbitration)).unwrap(), "near");
        assert_eq!(stub.complete(&req(Purpose::Clue)).unwrap(), "b");
        assert_eq!(stub.complete(&req(Purpose::Clue)), Err(AdapterError::ScriptExhausted(Purpose::Clue)));
        assert_eq!(stub.complete(&req(Purpose::Feedback)), Err(AdapterError::ScriptExhausted(Purpose::Feedback)));
        assert_eq!(stub.calls(Purpose::Clue), 3);
        assert_eq!(stub.total_calls(), 5);
    }

    #[test]
    fn cycles_when_asked() {
        let mut stub = StubAdapter::new(StubScript { cycle: true, clue: vec!["x".into(), "y".into()], ..Default::default() });
        let got: Vec<_> = (0..5).map(|_| stub.complete(&req(Purpose::Clue)).unwrap()).collect();
        assert_eq!(got, ["x", "y", "x", "y", "x"]);
    }

    #[test]
    fn rejects_unknown_script_keys() {
        assert!(matches!(StubScript::from_toml_str("clues = []"), Err(AdapterError::Script(_))));
    }
}
