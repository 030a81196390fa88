//! Inline control tokens in LLM output.
//!
//! The model annotates its replies with bracketed labels such as `[excited]`
//! or `[next_turn]`. This module splits such a reply into the text the robot
//! speaks and an ordered list of tokens anchored to character offsets in
//! that text, renders tokens back into annotated text, and lowers an
//! utterance into the robot action sequence (face gesture, speech, gaze).
//!
//! Token grammar: `[` `[a-z][a-z0-9_]*` `]`. Anything else in brackets
//! (`[Bad Name]`, `[ ]`, an unclosed `[`) is literal text.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("token position {position} is past the end of a {len}-character text")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("invalid token name '{0}'")]
    InvalidName(String),
    #[error("'{0}' is registered both as an emotion and as a command")]
    OverlappingName(String),
    #[error("registry file: {0}")]
    Io(String),
    #[error("registry file: {0}")]
    Format(String),
}

/// Game-control commands the engine understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    NextTurn,
    NewWord,
    Hint,
    EndSession,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Emotion,
    Command(CommandKind),
    Unknown,
}

/// A control token. `name` is the bracket content as written; for
/// emotions and unknown tokens it is also the payload.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ControlToken {
    pub name: String,
    pub kind: TokenKind,
    /// Character offset in the clean text where the token applies.
    pub position: usize,
}

impl ControlToken {
    pub fn emotion(name: &str, position: usize) -> Self {
        Self { name: name.to_string(), kind: TokenKind::Emotion, position }
    }

    pub fn command(kind: CommandKind, name: &str, position: usize) -> Self {
        Self { name: name.to_string(), kind: TokenKind::Command(kind), position }
    }

    pub fn is_unknown(&self) -> bool {
        self.kind == TokenKind::Unknown
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "diagnostic")]
pub enum Diagnostic {
    UnknownToken { name: String, position: usize },
    /// A literal `[` left in the clean text.
    MalformedBracket { offset: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedUtterance {
    pub raw: String,
    pub clean_text: String,
    pub tokens: Vec<ControlToken>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

impl AnnotatedUtterance {
    pub fn has_command(&self, kind: CommandKind) -> bool {
        self.tokens.iter().any(|t| t.kind == TokenKind::Command(kind))
    }

    pub fn has_emotion(&self) -> bool {
        self.tokens.iter().any(|t| t.kind == TokenKind::Emotion)
    }

    pub fn clean_len(&self) -> usize {
        self.clean_text.chars().count()
    }
}

/// Names the parser recognises. Loaded from configuration so the prompt and
/// the parser share one vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RegistryFile", into = "RegistryFile")]
pub struct TokenRegistry {
    emotions: BTreeSet<String>,
    commands: BTreeMap<String, CommandKind>,
}

#[derive(Serialize, Deserialize)]
struct RegistryFile {
    emotions: Vec<String>,
    commands: BTreeMap<String, CommandKind>,
}

impl TryFrom<RegistryFile> for TokenRegistry {
    type Error = ProtocolError;

    fn try_from(file: RegistryFile) -> Result<Self, Self::Error> {
        TokenRegistry::new(file.emotions, file.commands)
    }
}

impl From<TokenRegistry> for RegistryFile {
    fn from(reg: TokenRegistry) -> Self {
        RegistryFile { emotions: reg.emotions.into_iter().collect(), commands: reg.commands }
    }
}

impl Default for TokenRegistry {
    fn default() -> Self {
        let emotions = ["excited", "happy", "neutral", "encouraging", "surprised", "sad"];
        let commands = [
            ("next_turn", CommandKind::NextTurn),
            ("new_word", CommandKind::NewWord),
            ("hint", CommandKind::Hint),
            ("end_session", CommandKind::EndSession),
        ];
        Self {
            emotions: emotions.iter().map(|s| s.to_string()).collect(),
            commands: commands.iter().map(|(n, k)| (n.to_string(), *k)).collect(),
        }
    }
}

impl TokenRegistry {
    pub fn new(
        emotions: impl IntoIterator<Item = String>,
        commands: BTreeMap<String, CommandKind>,
    ) -> Result<Self, ProtocolError> {
        let emotions: BTreeSet<String> = emotions.into_iter().collect();
        for name in emotions.iter().chain(commands.keys()) {
            if !is_valid_name(name) {
                return Err(ProtocolError::InvalidName(name.clone()));
            }
        }
        if let Some(dup) = emotions.iter().find(|e| commands.contains_key(*e)) {
            return Err(ProtocolError::OverlappingName(dup.clone()));
        }
        Ok(Self { emotions, commands })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ProtocolError> {
        toml::from_str(text).map_err(|e| ProtocolError::Format(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ProtocolError> {
        let text = std::fs::read_to_string(path).map_err(|e| ProtocolError::Io(e.to_string()))?;
        Self::from_toml_str(&text)
    }

    pub fn emotions(&self) -> impl Iterator<Item = &str> {
        self.emotions.iter().map(String::as_str)
    }

    pub fn commands(&self) -> impl Iterator<Item = (&str, CommandKind)> {
        self.commands.iter().map(|(n, k)| (n.as_str(), *k))
    }

    /// Preferred bracket name for a command.
    pub fn command_name(&self, kind: CommandKind) -> Option<&str> {
        self.commands.iter().find(|(_, k)| **k == kind).map(|(n, _)| n.as_str())
    }

    pub fn has_emotion(&self, name: &str) -> bool {
        self.emotions.contains(name)
    }

    pub fn classify(&self, name: &str) -> TokenKind {
        if self.emotions.contains(name) {
            TokenKind::Emotion
        } else if let Some(kind) = self.commands.get(name) {
            TokenKind::Command(*kind)
        } else {
            TokenKind::Unknown
        }
    }
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_'
}

pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(is_name_char)
}

enum Item {
    Ch(char),
    Tok { name: String, raw_start: usize },
}

/// Split annotated LLM output into clean speech text and control tokens.
///
/// Total: never fails. Whitespace runs collapse to one space and the text is
/// trimmed. A token's position is the offset of the first clean character
/// that follows it, or the clean length when nothing follows. Removing a
/// token can bring a `[` and a later `name]` together; that pair is itself a
/// token, so the clean text never contains grammar-valid brackets.
pub fn parse_annotated(raw: &str, registry: &TokenRegistry) -> AnnotatedUtterance {
    let mut items: Vec<Item> = Vec::with_capacity(raw.len());
    let mut bracket_at: Vec<usize> = Vec::new();

    for (raw_idx, c) in raw.chars().enumerate() {
        if c == ']' {
            if let Some(tok) = close_token(&mut items, &mut bracket_at) {
                items.push(tok);
                continue;
            }
        }
        if c == '[' {
            bracket_at.push(raw_idx);
        }
        items.push(Item::Ch(c));
    }

    let mut clean = String::with_capacity(raw.len());
    let mut clean_len = 0usize;
    let mut pending_space = false;
    let mut pending: Vec<(String, usize)> = Vec::new();
    let mut placed: Vec<(usize, usize, String)> = Vec::new();

    for item in items {
        match item {
            Item::Tok { name, raw_start } => pending.push((name, raw_start)),
            Item::Ch(c) if c.is_whitespace() => {
                if clean_len > 0 {
                    pending_space = true;
                }
            }
            Item::Ch(c) => {
                if pending_space {
                    clean.push(' ');
                    clean_len += 1;
                    pending_space = false;
                }
                for (name, raw_start) in pending.drain(..) {
                    placed.push((clean_len, raw_start, name));
                }
                clean.push(c);
                clean_len += 1;
            }
        }
    }
    for (name, raw_start) in pending.drain(..) {
        placed.push((clean_len, raw_start, name));
    }
    placed.sort_by_key(|(pos, raw_start, _)| (*pos, *raw_start));

    let mut diagnostics = Vec::new();
    let tokens: Vec<ControlToken> = placed
        .into_iter()
        .map(|(position, _, name)| {
            let kind = registry.classify(&name);
            if kind == TokenKind::Unknown {
                diagnostics.push(Diagnostic::UnknownToken { name: name.clone(), position });
            }
            ControlToken { name, kind, position }
        })
        .collect();
    for (offset, c) in clean.chars().enumerate() {
        if c == '[' {
            diagnostics.push(Diagnostic::MalformedBracket { offset });
        }
    }

    AnnotatedUtterance { raw: raw.to_string(), clean_text: clean, tokens, diagnostics }
}

// On `]`: walk back over name characters (skipping tokens already closed in
// between) to the most recent `[`. Returns the new token if the span is a
// valid name.
fn close_token(items: &mut Vec<Item>, bracket_at: &mut Vec<usize>) -> Option<Item> {
    let mut name_rev = String::new();
    let mut open_idx = None;
    for (idx, item) in items.iter().enumerate().rev() {
        match item {
            Item::Tok { .. } => continue,
            Item::Ch('[') => {
                open_idx = Some(idx);
                break;
            }
            Item::Ch(c) if is_name_char(*c) => name_rev.push(*c),
            Item::Ch(_) => return None,
        }
    }
    let open_idx = open_idx?;
    let name: String = name_rev.chars().rev().collect();
    if !is_valid_name(&name) {
        return None;
    }
    let raw_start = bracket_at.pop().expect("every '[' item has a recorded raw offset");
    let tail = items.split_off(open_idx);
    items.extend(tail.into_iter().skip(1).filter(|it| matches!(it, Item::Tok { .. })));
    Some(Item::Tok { name, raw_start })
}

/// Render clean text and tokens back into annotated text.
///
/// Tokens at a word start are written `[name] word`, at the end `text [name]`,
/// and inside a word without spaces. Ties keep their given order.
pub fn serialize(clean_text: &str, tokens: &[ControlToken]) -> Result<String, ProtocolError> {
    let chars: Vec<char> = clean_text.chars().collect();
    let len = chars.len();
    if let Some(bad) = tokens.iter().find(|t| t.position > len) {
        return Err(ProtocolError::PositionOutOfRange { position: bad.position, len });
    }
    let mut ordered: Vec<&ControlToken> = tokens.iter().collect();
    ordered.sort_by_key(|t| t.position);

    let mut out = String::with_capacity(clean_text.len() + tokens.len() * 12);
    let mut next = 0;
    for pos in 0..=len {
        let start = next;
        while next < ordered.len() && ordered[next].position == pos {
            next += 1;
        }
        let group = &ordered[start..next];
        if !group.is_empty() {
            let at_word_start = pos == 0 || chars[pos - 1].is_whitespace();
            let at_end = pos == len;
            let joiner = if at_word_start || at_end { " " } else { "" };
            let rendered: Vec<String> = group.iter().map(|t| format!("[{}]", t.name)).collect();
            let rendered = rendered.join(joiner);
            if at_end && pos > 0 && !chars[pos - 1].is_whitespace() {
                out.push(' ');
                out.push_str(&rendered);
            } else if at_word_start && !at_end {
                out.push_str(&rendered);
                out.push(' ');
            } else {
                out.push_str(&rendered);
            }
        }
        if pos < len {
            out.push(chars[pos]);
        }
    }
    Ok(out)
}

/// One step of robot behaviour derived from an utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "action", content = "value")]
pub enum RobotAction {
    FaceGesture(String),
    Speak(String),
    /// Turn gaze and head towards the next guesser.
    GazeShift,
    /// Game-control signal other than a turn change.
    Cue(CommandKind),
}

/// Lower an utterance into robot actions in text order. Unknown tokens are
/// dropped and never spoken; the parser already recorded them as diagnostics.
pub fn speech_actions(utterance: &AnnotatedUtterance) -> Vec<RobotAction> {
    let chars: Vec<char> = utterance.clean_text.chars().collect();
    let mut ordered: Vec<&ControlToken> = utterance.tokens.iter().collect();
    ordered.sort_by_key(|t| t.position);

    let mut actions = Vec::new();
    let mut cursor = 0usize;
    let push_speech = |actions: &mut Vec<RobotAction>, from: usize, to: usize| {
        let segment: String = chars[from.min(chars.len())..to.min(chars.len())].iter().collect();
        let segment = segment.trim();
        if !segment.is_empty() {
            actions.push(RobotAction::Speak(segment.to_string()));
        }
    };
    for token in ordered {
        if token.position > cursor {
            push_speech(&mut actions, cursor, token.position);
            cursor = token.position;
        }
        match token.kind {
            TokenKind::Emotion => actions.push(RobotAction::FaceGesture(token.name.clone())),
            TokenKind::Command(CommandKind::NextTurn) => actions.push(RobotAction::GazeShift),
            TokenKind::Command(kind) => actions.push(RobotAction::Cue(kind)),
            TokenKind::Unknown => {
                tracing::warn!(token = %token.name, "dropping unknown control token");
            }
        }
    }
    push_speech(&mut actions, cursor, chars.len());
    actions
}

/// True if `text` contains any grammar-valid bracket token.
pub fn contains_token(text: &str) -> bool {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'[' {
            let mut j = i + 1;
            if j < bytes.len() && bytes[j].is_ascii_lowercase() {
                j += 1;
                while j < bytes.len()
                    && (bytes[j].is_ascii_lowercase() || bytes[j].is_ascii_digit() || bytes[j] == b'_')
                {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b']' {
                    return true;
                }
            }
        }
        i += 1;
    }
    false
}
