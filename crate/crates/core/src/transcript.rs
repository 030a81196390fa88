//! Educator session transcripts, one utterance per line:
//!
//! ```text
//! [00:12] EDU: The cat sleeps on the mat
//! [00:15] CHILD1: cat
//! ```
//!
//! Blank lines and lines starting with `#` are skipped.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morphology::{TimedUtterance, UtteranceKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranscriptError {
    #[error("transcript line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("transcript line {line}: timestamp goes backwards")]
    NonMonotoneTimestamps { line: usize },
    #[error("reading transcript: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub t_s: u64,
    pub speaker: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeakerTranscript {
    pub entries: Vec<TranscriptEntry>,
}

impl SpeakerTranscript {
    pub fn duration_s(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.t_s)
    }

    /// Utterances by `speaker` (case-insensitive), timed in milliseconds.
    pub fn utterances_by(&self, speaker: &str) -> Vec<TimedUtterance> {
        self.entries
            .iter()
            .filter(|e| e.speaker.eq_ignore_ascii_case(speaker))
            .map(|e| TimedUtterance::new(e.t_s * 1000, UtteranceKind::Speech, e.text.clone()))
            .collect()
    }
}

fn parse_line(raw: &str) -> Result<TranscriptEntry, String> {
    let rest = raw.trim().strip_prefix('[').ok_or("expected '[mm:ss]' at line start")?;
    let (stamp, rest) = rest.split_once(']').ok_or("unclosed timestamp")?;
    let (mm, ss) = stamp.split_once(':').ok_or("timestamp must be mm:ss")?;
    let field = |s: &str| -> Result<u64, String> {
        if s.is_empty() || !s.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad timestamp '{stamp}'"));
        }
        s.parse().map_err(|_| format!("bad timestamp '{stamp}'"))
    };
    let (mm, ss) = (field(mm)?, field(ss)?);
    if ss >= 60 || ss.to_string().len() > 2 {
        return Err(format!("bad timestamp '{stamp}'"));
    }
    let (speaker, text) = rest.split_once(':').ok_or("expected 'SPEAKER: text'")?;
    let speaker = speaker.trim();
    if speaker.is_empty() || speaker.contains(char::is_whitespace) {
        return Err("speaker label must be one non-empty word".into());
    }
    Ok(TranscriptEntry { t_s: mm * 60 + ss, speaker: speaker.to_string(), text: text.trim().to_string() })
}

pub fn parse_transcript(text: &str) -> Result<SpeakerTranscript, TranscriptError> {
    let mut entries: Vec<TranscriptEntry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let entry = parse_line(raw).map_err(|message| TranscriptError::Parse { line, message })?;
        if entries.last().is_some_and(|prev| entry.t_s < prev.t_s) {
            return Err(TranscriptError::NonMonotoneTimestamps { line });
        }
        entries.push(entry);
    }
    Ok(SpeakerTranscript { entries })
}

pub fn load_transcript(path: &Path) -> Result<SpeakerTranscript, TranscriptError> {
    let text = std::fs::read_to_string(path).map_err(|e| TranscriptError::Io(format!("{}: {e}", path.display())))?;
    parse_transcript(&text)
}
