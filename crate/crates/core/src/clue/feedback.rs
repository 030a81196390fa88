use serde::{Deserialize, Serialize};

use super::prompt::system_rules;
use super::validate::forbidden_forms_in;
use crate::language::Language;
use crate::llm::{LlmAdapter, LlmRequest, Purpose};
use crate::morphology::{tokenize, MorphTarget};
use crate::protocol::{parse_annotated, serialize, AnnotatedUtterance, CommandKind, ControlToken, TokenKind, TokenRegistry};
use crate::word::WordItem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "situation", rename_all = "snake_case")]
pub enum FeedbackSituation {
    /// Exact guess.
    Praise,
    /// Near guess: say the corrected form.
    Correction,
    /// Miss with hints left.
    Hint { level: u32 },
    /// Miss with no hints left: tell the word.
    Reveal,
    /// Off-topic remark.
    Redirect,
}

impl FeedbackSituation {
    pub fn advances_turn(self) -> bool {
        matches!(self, Self::Praise | Self::Correction | Self::Reveal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackSource {
    Generated,
    Template,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub situation: FeedbackSituation,
    pub utterance: AnnotatedUtterance,
    pub source: FeedbackSource,
    /// Why a generated line was replaced by a template.
    pub problem: Option<String>,
}

pub struct FeedbackRequest<'a> {
    pub situation: FeedbackSituation,
    pub word: &'a WordItem,
    pub target: &'a MorphTarget,
    pub registry: &'a TokenRegistry,
    pub context: &'a [String],
    /// Rule line to append, when explicit instruction applies.
    pub explicit_line: Option<&'a str>,
}

fn redirect_line(language: Language) -> &'static str {
    match language {
        Language::English => "Let's get back to our game!",
        Language::Swedish => "Nu spelar vi vidare!",
    }
}

pub fn feedback_prompt(req: &FeedbackRequest<'_>) -> LlmRequest {
    let lemma = &req.word.lemma;
    let task = match req.situation {
        FeedbackSituation::Praise => format!(
            "The child guessed the secret word \"{lemma}\". Praise the child in one or two short sentences, \
then say it is the next player's turn."
        ),
        FeedbackSituation::Correction => format!(
            "The child almost said the secret word. Say it was almost correct and say the word \"{lemma}\" clearly, \
add one short fact about it, then say it is the next player's turn."
        ),
        FeedbackSituation::Hint { level } => format!(
            "The guess was wrong. Encourage the child and give hint number {level}: one more easy clue about the \
secret word \"{lemma}\" without saying it or any of its forms. The same child guesses again."
        ),
        FeedbackSituation::Reveal => format!(
            "The child could not guess it. Kindly say that the word was \"{lemma}\", then say it is the next player's turn."
        ),
        FeedbackSituation::Redirect => "The child is talking about something outside the game. Answer kindly in one \
short sentence and bring the conversation back to the game. The same child guesses again."
            .to_string(),
    };
    let mut user = String::new();
    if !req.context.is_empty() {
        user.push_str("Recent lines you said:\n");
        for line in req.context {
            user.push_str(&format!("- {line}\n"));
        }
        user.push('\n');
    }
    user.push_str(&task);
    user.push_str(&format!("\nWhere it sounds natural, use {}.", req.target.prompt_phrase));
    LlmRequest { purpose: Purpose::Feedback, system: system_rules(req.registry, req.word.language), user }
}

fn contains_word(text: &str, lemma: &str) -> bool {
    tokenize(text).iter().any(|t| t.lower == lemma)
}

fn pick_emotion<'r>(registry: &'r TokenRegistry, preferred: &[&str]) -> Option<&'r str> {
    preferred
        .iter()
        .find_map(|p| registry.emotions().find(|e| e == p))
        .or_else(|| registry.emotions().next())
}

/// Enforce the engine's rules on a feedback line: content checks reject it,
/// token problems are repaired.
fn check_and_repair(utt: AnnotatedUtterance, req: &FeedbackRequest<'_>) -> Result<AnnotatedUtterance, String> {
    let word = req.word;
    if utt.clean_text.trim().is_empty() {
        return Err("empty feedback".into());
    }
    if utt.clean_text.contains('[') || utt.clean_text.contains(']') {
        return Err("literal bracket text would be spoken".into());
    }
    match req.situation {
        FeedbackSituation::Correction | FeedbackSituation::Reveal if !contains_word(&utt.clean_text, &word.lemma) => {
            return Err(format!("feedback does not say \"{}\"", word.lemma));
        }
        FeedbackSituation::Hint { .. } | FeedbackSituation::Redirect => {
            if let Some(form) = forbidden_forms_in(&utt.clean_text, word).into_iter().next() {
                return Err(format!("feedback gives the answer away with \"{form}\""));
            }
        }
        _ => {}
    }
    Ok(finish(utt.clean_text, utt.tokens, req))
}

/// Normalise tokens and appended lines: an emotion up front, the turn command
/// last exactly when the turn advances, redirect and rule lines at the end.
fn finish(mut clean: String, mut tokens: Vec<ControlToken>, req: &FeedbackRequest<'_>) -> AnnotatedUtterance {
    let registry = req.registry;
    let next_turn = registry.command_name(CommandKind::NextTurn).map(str::to_owned);
    tokens.retain(|t| t.kind != TokenKind::Command(CommandKind::NextTurn));

    fn append(clean: &mut String, line: &str) {
        if !clean.trim_end().ends_with(line) {
            if !clean.is_empty() {
                clean.push(' ');
            }
            clean.push_str(line);
        }
    }
    if req.situation == FeedbackSituation::Redirect {
        append(&mut clean, redirect_line(req.word.language));
    }
    if let Some(line) = req.explicit_line {
        append(&mut clean, line);
    }
    if !tokens.iter().any(|t| t.kind == TokenKind::Emotion) {
        if let Some(e) = pick_emotion(registry, &["encouraging", "happy"]) {
            tokens.insert(0, ControlToken::emotion(e, 0));
        }
    }
    if req.situation.advances_turn() {
        if let Some(name) = next_turn {
            tokens.push(ControlToken::command(CommandKind::NextTurn, &name, clean.chars().count()));
        }
    }
    let raw = serialize(&clean, &tokens).unwrap_or_else(|_| clean.clone());
    parse_annotated(&raw, registry)
}

/// Fixed lines used when the adapter is down or its output is rejected.
pub fn template_feedback(req: &FeedbackRequest<'_>) -> AnnotatedUtterance {
    let lemma = &req.word.lemma;
    let (emotion, text) = match (req.word.language, req.situation) {
        (Language::English, FeedbackSituation::Praise) => ("excited", format!("Yes! The word is \"{lemma}\". Well done! Next player, your turn")),
        (Language::English, FeedbackSituation::Correction) => (
            "excited",
            format!("Almost correct! I think you mean \"{lemma}\". Good try! Next player, your turn"),
        ),
        (Language::English, FeedbackSituation::Hint { .. }) => ("encouraging", "Not quite. Listen to the clue again and try once more!".to_string()),
        (Language::English, FeedbackSituation::Reveal) => ("encouraging", format!("Good try! The word was \"{lemma}\". Next player, your turn")),
        (Language::English, FeedbackSituation::Redirect) => ("happy", "That sounds exciting!".to_string()),
        (Language::Swedish, FeedbackSituation::Praise) => ("excited", format!("Ja! Ordet är \"{lemma}\". Bra gjort! Nästa spelare, din tur")),
        (Language::Swedish, FeedbackSituation::Correction) => (
            "excited",
            format!("Nästan rätt! Jag tror du menar \"{lemma}\". Bra försök! Nästa spelare, din tur"),
        ),
        (Language::Swedish, FeedbackSituation::Hint { .. }) => ("encouraging", "Inte riktigt. Lyssna på ledtråden och försök igen!".to_string()),
        (Language::Swedish, FeedbackSituation::Reveal) => ("encouraging", format!("Bra försök! Ordet var \"{lemma}\". Nästa spelare, din tur")),
        (Language::Swedish, FeedbackSituation::Redirect) => ("happy", "Vad spännande!".to_string()),
    };
    let mut tokens = Vec::new();
    if let Some(e) = pick_emotion(req.registry, &[emotion]) {
        tokens.push(ControlToken::emotion(e, 0));
    }
    finish(text, tokens, req)
}

/// Ask the adapter for a feedback line; fall back to a template when the
/// call fails or the line breaks the rules.
pub fn generate_feedback(adapter: &mut dyn LlmAdapter, req: &FeedbackRequest<'_>) -> Feedback {
    let problem = match adapter.complete(&feedback_prompt(req)) {
        Ok(raw) => match check_and_repair(parse_annotated(&raw, req.registry), req) {
            Ok(utterance) => {
                return Feedback { situation: req.situation, utterance, source: FeedbackSource::Generated, problem: None };
            }
            Err(problem) => problem,
        },
        Err(e) => e.to_string(),
    };
    tracing::debug!(%problem, "using template feedback");
    Feedback { situation: req.situation, utterance: template_feedback(req), source: FeedbackSource::Template, problem: Some(problem) }
}
