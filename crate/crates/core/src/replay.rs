//! Rebuild a session from its event log. Every state-machine event is
//! re-derived by re-running the machine, so a log that replays cleanly is
//! consistent with the rules; the dose report is recomputed from the robot
//! speech in the log with the same tally the live session used.

use std::path::Path;

use thiserror::Error;

use crate::clue::Clue;
use crate::events::{EventPayload, SessionEvent, LOG_SCHEMA_VERSION};
use crate::game::{self, Session, Transition};
use crate::morphology::packs::pack;
use crate::morphology::{dose_count, DoseReport, DoseTally, Lexicon, MorphError, MorphTarget, UtteranceKind};
use crate::protocol::{serialize, AnnotatedUtterance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReplayError {
    #[error("log line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("corrupt log at seq {seq}: {reason}")]
    CorruptLog { seq: u64, reason: String },
    #[error(transparent)]
    Morph(#[from] MorphError),
    #[error("reading log: {0}")]
    Io(String),
}

fn corrupt(seq: u64, reason: impl Into<String>) -> ReplayError {
    ReplayError::CorruptLog { seq, reason: reason.into() }
}

/// Parse a JSON-lines log. Blank lines are skipped.
pub fn parse_log(text: &str) -> Result<Vec<SessionEvent>, ReplayError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| ReplayError::Parse { line: i + 1, message: e.to_string() }))
        .collect()
}

pub fn read_log(path: &Path) -> Result<Vec<SessionEvent>, ReplayError> {
    let text = std::fs::read_to_string(path).map_err(|e| ReplayError::Io(format!("{}: {e}", path.display())))?;
    parse_log(&text)
}

pub fn write_log(events: &[SessionEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_json_line());
        out.push('\n');
    }
    out
}

/// Add the robot speech carried by `event`, if any, to `tally`.
pub fn tally_event(tally: &mut DoseTally, event: &SessionEvent, target: &MorphTarget, lexicon: &Lexicon) -> Result<(), MorphError> {
    let kind = match event.payload {
        EventPayload::ClueSpoken { .. } => UtteranceKind::Clue,
        EventPayload::FeedbackSpoken { .. } => UtteranceKind::Feedback,
        _ => return Ok(()),
    };
    let text = event.payload.spoken_text().expect("speech events carry text");
    let matches = crate::morphology::tag_occurrences(text, target, lexicon)?;
    tally.record(event.t_ms, kind, text, &matches);
    Ok(())
}

/// Dose report over the robot speech in a log, without replaying the game.
/// The duration runs to the last event.
pub fn log_dose_report(events: &[SessionEvent], target: &MorphTarget, lexicon: &Lexicon) -> Result<DoseReport, MorphError> {
    let mut tally = DoseTally::new();
    for e in events {
        tally_event(&mut tally, e, target, lexicon)?;
    }
    tally.report(target, events.last().map_or(0, |e| e.t_ms))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replayed {
    pub session: Session,
    pub report: DoseReport,
}

/// Replay with the bundled language pack named in the log's config.
pub fn replay(events: &[SessionEvent]) -> Result<Replayed, ReplayError> {
    let config = match events.first().map(|e| &e.payload) {
        Some(EventPayload::SessionCreated { config, .. }) => config,
        _ => return Err(corrupt(0, "log does not start with session_created")),
    };
    let p = pack(config.language);
    let target = p.target(&config.target)?;
    replay_with(events, target, &p.lexicon)
}

pub fn replay_with(events: &[SessionEvent], target: &MorphTarget, lexicon: &Lexicon) -> Result<Replayed, ReplayError> {
    let first = events.first().ok_or_else(|| corrupt(0, "empty log: no session_created"))?;
    check_order(events)?;
    let mut session = match &first.payload {
        EventPayload::SessionCreated { schema, session_id, config, words } => {
            if *schema != LOG_SCHEMA_VERSION {
                return Err(corrupt(0, format!("unsupported schema {schema}")));
            }
            if config.language != target.language || config.target != target.id {
                return Err(corrupt(0, format!("log target is {} '{}'", config.language, config.target)));
            }
            game::create_session(session_id, config.clone(), words.clone())
                .map_err(|e| corrupt(0, e.to_string()))?
                .session
        }
        _ => return Err(corrupt(first.seq, "log does not start with session_created")),
    };

    let mut tally = DoseTally::new();
    let mut pending: std::collections::VecDeque<EventPayload> = Default::default();
    let mut i = 1;
    while i < events.len() {
        let ev = &events[i];
        if let Some(text) = ev.payload.spoken_text() {
            let logged = match ev.payload {
                EventPayload::ClueSpoken { dose, .. } | EventPayload::FeedbackSpoken { dose, .. } => dose,
                _ => unreachable!(),
            };
            let found = dose_count(text, target, lexicon)?;
            if found != logged {
                return Err(corrupt(ev.seq, format!("logged dose {logged}, recomputed {found}")));
            }
        }
        tally_event(&mut tally, ev, target, lexicon)?;
        if ev.payload.is_annotation() {
            i += 1;
            continue;
        }
        if let Some(expected) = pending.pop_front() {
            if expected != ev.payload {
                return Err(corrupt(ev.seq, format!("expected {}, log has {}", expected.kind(), ev.kind())));
            }
            i += 1;
            continue;
        }
        let t = command(&session, events, i)?;
        let mut produced = t.events.into_iter();
        if produced.next().as_ref() != Some(&ev.payload) {
            return Err(corrupt(ev.seq, format!("{} does not follow from the session state", ev.kind())));
        }
        pending.extend(produced);
        session = t.session;
        i += 1;
    }
    if let Some(missing) = pending.front() {
        let seq = events.last().map_or(0, |e| e.seq + 1);
        return Err(corrupt(seq, format!("log ends before {}", missing.kind())));
    }
    let report = tally.report(target, events.last().map_or(0, |e| e.t_ms))?;
    Ok(Replayed { session, report })
}

fn check_order(events: &[SessionEvent]) -> Result<(), ReplayError> {
    let mut last_t = 0;
    for (i, e) in events.iter().enumerate() {
        let want = i as u64;
        if e.seq != want {
            return Err(corrupt(want, format!("seq jumps to {}", e.seq)));
        }
        if e.t_ms < last_t {
            return Err(corrupt(e.seq, format!("t_ms goes back from {last_t} to {}", e.t_ms)));
        }
        last_t = e.t_ms;
    }
    Ok(())
}

// Re-issue the command recorded at events[i].
fn command(s: &Session, events: &[SessionEvent], i: usize) -> Result<Transition, ReplayError> {
    let ev = &events[i];
    let t_ms = ev.t_ms;
    let fail = |e: game::GameError| corrupt(ev.seq, e.to_string());
    match &ev.payload {
        EventPayload::PlayerAdded(p) => game::add_player(s, &p.pseudonym, t_ms).map_err(fail),
        EventPayload::SessionStarted { .. } => game::start_session(s, t_ms).map_err(fail),
        EventPayload::ClueSpoken { lemma, clean_text, tokens, dose, target_lemmas, attempt, source } => {
            let word = s
                .current_word
                .clone()
                .filter(|w| &w.lemma == lemma)
                .ok_or_else(|| corrupt(ev.seq, format!("clue for '{lemma}' but that word is not in play")))?;
            let raw = serialize(clean_text, tokens).map_err(|e| corrupt(ev.seq, e.to_string()))?;
            let clue = Clue {
                word,
                utterance: AnnotatedUtterance { raw, clean_text: clean_text.clone(), tokens: tokens.clone(), diagnostics: vec![] },
                dose: *dose,
                target_lemmas_used: target_lemmas.clone(),
                attempt: *attempt,
                source: *source,
            };
            game::present_clue(s, &clue, t_ms).map_err(fail)
        }
        EventPayload::GuessReceived { player_id, transcript } => {
            let outcome = events[i + 1..]
                .iter()
                .find(|e| !e.payload.is_annotation())
                .and_then(|e| match &e.payload {
                    EventPayload::Outcome { outcome, .. } => Some(outcome.clone()),
                    _ => None,
                })
                .ok_or_else(|| corrupt(ev.seq + 1, "guess_received is not followed by its outcome"))?;
            game::record_guess(s, player_id, transcript, outcome, t_ms).map_err(fail)
        }
        EventPayload::Intervention(intervention) => game::apply_intervention(s, intervention).map_err(fail),
        EventPayload::TurnAdvanced { .. } => game::advance_turn(s, t_ms).map_err(fail),
        EventPayload::SessionEnded { .. } => game::expire(s, t_ms).map_err(fail),
        other => Err(corrupt(ev.seq, format!("unexpected {}", other.kind()))),
    }
}
