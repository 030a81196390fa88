use super::prompt::build_prompt;
use super::validate::validate_clue;
use super::{Clue, ClueError, ClueRules, ClueSource};
use crate::llm::{LlmAdapter, Purpose};
use crate::morphology::{Lexicon, MorphTarget};
use crate::protocol::{parse_annotated, AnnotatedUtterance, TokenRegistry};
use crate::word::WordItem;

pub struct ClueRequest<'a> {
    pub word: &'a WordItem,
    pub target: &'a MorphTarget,
    pub lexicon: &'a Lexicon,
    pub registry: &'a TokenRegistry,
    pub rules: ClueRules,
    pub explicit: bool,
    pub context: &'a [String],
}

/// Prompt, parse and validate up to `max_retries + 1` times, feeding the
/// violations of each rejected attempt into the next prompt.
pub fn generate_clue(adapter: &mut dyn LlmAdapter, req: &ClueRequest<'_>) -> Result<Clue, ClueError> {
    let base = build_prompt(req.word, req.target, &req.rules, req.explicit, req.context, req.registry)?;
    let mut prompt = base.clone();
    let mut last_violations = Vec::new();
    let attempts = req.rules.max_retries + 1;
    for attempt in 1..=attempts {
        let raw = adapter.complete(&prompt.to_request(Purpose::Clue))?;
        let utterance = parse_annotated(&raw, req.registry);
        match validate_clue(&utterance.clean_text, req.word, req.target, &req.rules, req.lexicon)? {
            Ok(valid) => {
                return Ok(Clue {
                    word: req.word.clone(),
                    utterance,
                    dose: valid.dose,
                    target_lemmas_used: valid.target_lemmas_used,
                    attempt,
                    source: ClueSource::Generated,
                });
            }
            Err(violations) => {
                tracing::debug!(attempt, ?violations, "clue rejected");
                prompt = base.with_violations(&violations);
                last_violations = violations;
            }
        }
    }
    Err(ClueError::GenerationExhausted { attempts, last_violations })
}

/// Validate a bank clue so the fallback path obeys the same guarantees.
pub fn bank_clue(text: &str, req: &ClueRequest<'_>) -> Result<Clue, ClueError> {
    let utterance: AnnotatedUtterance = parse_annotated(text, req.registry);
    match validate_clue(&utterance.clean_text, req.word, req.target, &req.rules, req.lexicon)? {
        Ok(valid) => Ok(Clue {
            word: req.word.clone(),
            utterance,
            dose: valid.dose,
            target_lemmas_used: valid.target_lemmas_used,
            attempt: 1,
            source: ClueSource::Bank,
        }),
        Err(violations) => Err(ClueError::InvalidBankClue { lemma: req.word.lemma.clone(), violations }),
    }
}
