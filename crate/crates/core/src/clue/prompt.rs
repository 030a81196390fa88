use serde::{Deserialize, Serialize};

use super::{ClueError, ClueRules, ClueViolation};
use crate::language::Language;
use crate::llm::{LlmRequest, Purpose};
use crate::morphology::MorphTarget;
use crate::protocol::TokenRegistry;
use crate::word::WordItem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system_rules: String,
    pub task: String,
    /// Recent robot lines, oldest first.
    pub context: Vec<String>,
}

impl Prompt {
    pub fn to_request(&self, purpose: Purpose) -> LlmRequest {
        let mut user = String::new();
        if !self.context.is_empty() {
            user.push_str("Recent lines you said:\n");
            for line in &self.context {
                user.push_str(&format!("- {line}\n"));
            }
            user.push('\n');
        }
        user.push_str(&self.task);
        LlmRequest { purpose, system: self.system_rules.clone(), user }
    }

    /// Append validator feedback for a retry.
    pub fn with_violations(&self, violations: &[ClueViolation]) -> Prompt {
        let mut task = self.task.clone();
        task.push_str("\n\nYour previous clue was rejected:\n");
        for v in violations {
            task.push_str(&format!("- {}\n", v.detail));
        }
        task.push_str("Write a new clue that fixes these problems.");
        Prompt { task, ..self.clone() }
    }
}

/// Game role, token protocol and redirect policy. Lists registry tokens only.
pub fn system_rules(registry: &TokenRegistry, language: Language) -> String {
    let emotions: Vec<String> = registry.emotions().map(|e| format!("[{e}]")).collect();
    let mut rules = String::from(
        "You are a friendly robot playing the word-guessing game Alias with a small group of young children. \
You give clues and the children take turns guessing.\n",
    );
    rules.push_str(&format!(
        "Start every reply with exactly one emotion label in square brackets, one of: {}.\n",
        emotions.join(", ")
    ));
    for (name, kind) in registry.commands() {
        let meaning = match kind {
            crate::protocol::CommandKind::NextTurn => "when it is the next child's turn, at the very end of your reply",
            crate::protocol::CommandKind::NewWord => "when moving on to a new word",
            crate::protocol::CommandKind::Hint => "when you give an extra hint",
            crate::protocol::CommandKind::EndSession => "when the game is over",
        };
        rules.push_str(&format!("Write [{name}] {meaning}.\n"));
    }
    rules.push_str("Never write any other words in square brackets.\n");
    rules.push_str("Use short, simple sentences a four-year-old understands.\n");
    rules.push_str("If a child talks about something else, answer kindly and bring the conversation back to the game.\n");
    rules.push_str(match language {
        Language::English => "Speak English.",
        Language::Swedish => "Speak Swedish.",
    });
    rules
}

/// Prompt for one clue. The lemma appears exactly once in the task text.
pub fn build_prompt(
    word: &WordItem,
    target: &MorphTarget,
    rules: &ClueRules,
    explicit: bool,
    context: &[String],
    registry: &TokenRegistry,
) -> Result<Prompt, ClueError> {
    if word.language != target.language {
        return Err(ClueError::LanguageMismatch { word: word.language, target: target.language });
    }
    let others: Vec<&str> =
        word.forbidden_forms.iter().map(String::as_str).filter(|f| *f != word.lemma).collect();
    let mut task = String::from("Give one clue for the next word in the game.\n");
    task.push_str(&format!("The secret word is \"{}\" (category: {}).\n", word.lemma, word.category));
    if others.is_empty() {
        task.push_str("Never say the secret word itself.\n");
    } else {
        task.push_str(&format!(
            "Never say the secret word or any of its forms: {}.\n",
            others.iter().map(|f| format!("\"{f}\"")).collect::<Vec<_>>().join(", ")
        ));
    }
    task.push_str(&format!("Use at least {} different {}.\n", rules.dose_k, target.prompt_phrase));
    task.push_str(&format!(
        "Use a variety of words: at least {} of them must be different words, not the same word repeated.\n",
        rules.required_variety()
    ));
    task.push_str(&format!(
        "Keep the clue under {} words and end it with a question such as \"What is it?\".\n",
        rules.max_clue_words
    ));
    if explicit {
        task.push_str(&format!(
            "After the clue, add one sentence that explains the grammar rule, like: \"{}\"\n",
            target.explicit_rule
        ));
    }
    if let Some(name) = registry.command_name(crate::protocol::CommandKind::NextTurn) {
        task.push_str(&format!("Do not write [{name}] in a clue."));
    }
    Ok(Prompt { system_rules: system_rules(registry, word.language), task, context: context.to_vec() })
}
