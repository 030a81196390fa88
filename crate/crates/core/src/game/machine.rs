use super::error::GameError;
use super::types::{
    AdvanceReason, EndReason, Intervention, InterventionKind, Phase, Player, Resolution, Session,
    SessionConfig,
};
use crate::adjudication::{GuessOutcome, OutcomeKind};
use crate::clue::validate::forbidden_forms_in;
use crate::clue::Clue;
use crate::events::{EventPayload, LOG_SCHEMA_VERSION};
use crate::protocol::contains_token;
use crate::word::WordItem;

/// A new session snapshot and the events that produced it, in order. The
/// first event always identifies the command.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub session: Session,
    pub events: Vec<EventPayload>,
}

fn tick(s: &mut Session, at_ms: u64) -> Result<(), GameError> {
    if at_ms < s.clock_ms {
        return Err(GameError::ClockRegression { clock_ms: s.clock_ms, at_ms });
    }
    s.clock_ms = at_ms;
    Ok(())
}

fn wrong(op: &'static str, s: &Session) -> GameError {
    GameError::WrongPhase { op, phase: s.phase }
}

pub fn create_session(id: &str, config: SessionConfig, words: Vec<WordItem>) -> Result<Transition, GameError> {
    config.validate()?;
    if words.is_empty() {
        return Err(GameError::EmptyWordList);
    }
    for w in &words {
        if w.language != config.language {
            return Err(GameError::LanguageMismatch {
                lemma: w.lemma.clone(),
                expected: config.language,
                found: w.language,
            });
        }
        if !w.is_well_formed() {
            return Err(GameError::MalformedWord(w.lemma.clone()));
        }
    }
    let event = EventPayload::SessionCreated {
        schema: LOG_SCHEMA_VERSION,
        session_id: id.to_string(),
        config: config.clone(),
        words: words.clone(),
    };
    let session = Session {
        id: id.to_string(),
        config,
        players: Vec::new(),
        word_queue: words.into(),
        current_word: None,
        guesser_index: 0,
        phase: Phase::Setup,
        clock_ms: 0,
        hint_level: 0,
        words_presented: 0,
    };
    Ok(Transition { session, events: vec![event] })
}

pub fn add_player(s: &Session, pseudonym: &str, at_ms: u64) -> Result<Transition, GameError> {
    if s.phase != Phase::Setup {
        return Err(wrong("add_player", s));
    }
    let pseudonym = pseudonym.trim();
    if pseudonym.is_empty() {
        return Err(GameError::EmptyPseudonym);
    }
    if s.players.iter().any(|p| p.pseudonym.eq_ignore_ascii_case(pseudonym)) {
        return Err(GameError::DuplicatePseudonym(pseudonym.to_string()));
    }
    let mut next = s.clone();
    tick(&mut next, at_ms)?;
    let turn_index = next.players.len();
    let player = Player { id: format!("p{}", turn_index + 1), pseudonym: pseudonym.to_string(), turn_index };
    next.players.push(player.clone());
    Ok(Transition { session: next, events: vec![EventPayload::PlayerAdded(player)] })
}

pub fn start_session(s: &Session, at_ms: u64) -> Result<Transition, GameError> {
    if s.phase != Phase::Setup {
        return Err(wrong("start_session", s));
    }
    if s.players.is_empty() {
        return Err(GameError::NoPlayers);
    }
    let mut next = s.clone();
    tick(&mut next, at_ms)?;
    next.guesser_index = 0;
    let mut events = vec![EventPayload::SessionStarted { players: next.players.iter().map(|p| p.id.clone()).collect() }];
    next_word(&mut next, &mut events);
    Ok(Transition { session: next, events })
}

// Put the next word in play, or end the session.
fn next_word(s: &mut Session, events: &mut Vec<EventPayload>) {
    s.hint_level = 0;
    let reason = if s.word_queue.is_empty() {
        Some(EndReason::WordsExhausted)
    } else if s.time_up() {
        Some(EndReason::TimeUp)
    } else {
        None
    };
    if let Some(reason) = reason {
        end(s, reason, events);
        return;
    }
    let word = s.word_queue.pop_front().expect("queue checked non-empty");
    s.words_presented += 1;
    s.phase = Phase::AwaitingClue;
    let player = &s.players[s.guesser_index];
    events.push(EventPayload::WordPresented {
        lemma: word.lemma.clone(),
        category: word.category.clone(),
        guesser_index: s.guesser_index,
        player_id: player.id.clone(),
        remaining: s.word_queue.len(),
    });
    s.current_word = Some(word);
}

fn end(s: &mut Session, reason: EndReason, events: &mut Vec<EventPayload>) {
    s.phase = Phase::Ended;
    s.current_word = None;
    s.hint_level = 0;
    events.push(EventPayload::SessionEnded { reason, words_presented: s.words_presented });
}

fn advance(s: &mut Session, reason: AdvanceReason, events: &mut Vec<EventPayload>) {
    s.guesser_index = (s.guesser_index + 1) % s.players.len();
    events.push(EventPayload::TurnAdvanced {
        reason,
        guesser_index: s.guesser_index,
        player_id: s.players[s.guesser_index].id.clone(),
    });
    next_word(s, events);
}

pub fn advance_turn(s: &Session, at_ms: u64) -> Result<Transition, GameError> {
    if s.phase.active().is_none() {
        return Err(wrong("advance_turn", s));
    }
    let mut next = s.clone();
    tick(&mut next, at_ms)?;
    let mut events = Vec::new();
    advance(&mut next, AdvanceReason::Manual, &mut events);
    Ok(Transition { session: next, events })
}

/// Speak a validated clue for the current word. The dose and forbidden-form
/// limits are checked again here.
pub fn present_clue(s: &Session, clue: &Clue, at_ms: u64) -> Result<Transition, GameError> {
    if s.phase != Phase::AwaitingClue {
        return Err(wrong("present_clue", s));
    }
    let word = s.current_word.as_ref().expect("a word is in play while awaiting a clue");
    if clue.word.lemma != word.lemma {
        return Err(GameError::ClueRejected(format!("clue is for '{}', word in play is '{}'", clue.word.lemma, word.lemma)));
    }
    if clue.dose < s.config.dose_k {
        return Err(GameError::ClueRejected(format!("dose {} is below {}", clue.dose, s.config.dose_k)));
    }
    let leaked = forbidden_forms_in(&clue.utterance.clean_text, word);
    if !leaked.is_empty() {
        return Err(GameError::ClueRejected(format!("clue contains {leaked:?}")));
    }
    if contains_token(&clue.utterance.clean_text) {
        return Err(GameError::ClueRejected("clean text still contains a control token".into()));
    }
    let mut next = s.clone();
    tick(&mut next, at_ms)?;
    next.phase = Phase::AwaitingGuess;
    Ok(Transition { session: next, events: vec![EventPayload::clue_spoken(clue)] })
}

fn check_guesser(s: &Session, player_id: &str) -> Result<(), GameError> {
    if s.phase != Phase::AwaitingGuess {
        return Err(wrong("submit_utterance", s));
    }
    if s.player(player_id).is_none() {
        return Err(GameError::UnknownPlayer(player_id.to_string()));
    }
    let expected = &s.players[s.guesser_index].id;
    if expected != player_id {
        return Err(GameError::NotYourTurn { expected: expected.clone(), got: player_id.to_string() });
    }
    Ok(())
}

/// Apply an already adjudicated guess.
pub fn record_guess(
    s: &Session,
    player_id: &str,
    transcript: &str,
    outcome: GuessOutcome,
    at_ms: u64,
) -> Result<Transition, GameError> {
    check_guesser(s, player_id)?;
    let mut next = s.clone();
    tick(&mut next, at_ms)?;
    let lemma = next.current_word.as_ref().expect("word in play").lemma.clone();
    let resolution = match outcome.kind {
        OutcomeKind::Exact | OutcomeKind::Near(_) => Resolution::Advance,
        OutcomeKind::Miss if next.hint_level < next.config.max_hints => Resolution::Hint { level: next.hint_level + 1 },
        OutcomeKind::Miss => Resolution::Reveal,
        OutcomeKind::OffTopic => Resolution::Redirect,
    };
    let mut events = vec![
        EventPayload::GuessReceived { player_id: player_id.to_string(), transcript: transcript.to_string() },
        EventPayload::Outcome { player_id: player_id.to_string(), lemma, outcome, resolution },
    ];
    match resolution {
        Resolution::Advance => advance(&mut next, AdvanceReason::Guessed, &mut events),
        Resolution::Reveal => advance(&mut next, AdvanceReason::Revealed, &mut events),
        Resolution::Hint { level } => next.hint_level = level,
        Resolution::Redirect => events.push(EventPayload::OffTopicRedirect { player_id: player_id.to_string() }),
    }
    Ok(Transition { session: next, events })
}

/// Check the turn, adjudicate, then apply the outcome.
pub fn submit_utterance(
    s: &Session,
    player_id: &str,
    transcript: &str,
    at_ms: u64,
    adjudicator: impl FnOnce(&str, &WordItem) -> GuessOutcome,
) -> Result<(Transition, GuessOutcome), GameError> {
    check_guesser(s, player_id)?;
    if at_ms < s.clock_ms {
        return Err(GameError::ClockRegression { clock_ms: s.clock_ms, at_ms });
    }
    let outcome = adjudicator(transcript, s.current_word.as_ref().expect("word in play"));
    let t = record_guess(s, player_id, transcript, outcome.clone(), at_ms)?;
    Ok((t, outcome))
}

pub fn apply_intervention(s: &Session, intervention: &Intervention) -> Result<Transition, GameError> {
    let invalid = |m: String| Err(GameError::InvalidIntervention(m));
    let mut next = s.clone();
    let mut events = vec![EventPayload::Intervention(intervention.clone())];
    match (intervention.kind, s.phase) {
        (_, Phase::Ended) => return invalid("session has ended".into()),
        (_, Phase::Setup) => return invalid("session has not started".into()),
        (InterventionKind::EndSession, _) => {
            tick(&mut next, intervention.at_ms)?;
            end(&mut next, EndReason::Facilitator, &mut events);
        }
        (InterventionKind::SkipWord, Phase::AwaitingClue | Phase::AwaitingGuess) => {
            tick(&mut next, intervention.at_ms)?;
            advance(&mut next, AdvanceReason::Skipped, &mut events);
        }
        (InterventionKind::ExtraHint, Phase::AwaitingGuess) => {
            if s.hint_level >= s.config.max_hints {
                return invalid(format!("all {} hints already given", s.config.max_hints));
            }
            tick(&mut next, intervention.at_ms)?;
            next.hint_level += 1;
        }
        (InterventionKind::Pause, phase) if phase.active().is_some() => {
            tick(&mut next, intervention.at_ms)?;
            next.phase = Phase::Paused { resume_to: phase.active().expect("checked active") };
        }
        (InterventionKind::Resume, Phase::Paused { resume_to }) => {
            tick(&mut next, intervention.at_ms)?;
            next.phase = resume_to.into();
        }
        (kind, phase) => return invalid(format!("{kind:?} is not valid in phase {phase:?}")),
    }
    Ok(Transition { session: next, events })
}

/// End the session because its time ran out.
pub fn expire(s: &Session, at_ms: u64) -> Result<Transition, GameError> {
    if matches!(s.phase, Phase::Setup | Phase::Ended) {
        return Err(wrong("expire", s));
    }
    if at_ms < s.config.session_duration_ms {
        return Err(GameError::InvalidIntervention(format!(
            "session time is {} ms, {at_ms} ms have passed",
            s.config.session_duration_ms
        )));
    }
    let mut next = s.clone();
    tick(&mut next, at_ms)?;
    let mut events = Vec::new();
    end(&mut next, EndReason::TimeUp, &mut events);
    Ok(Transition { session: next, events })
}

