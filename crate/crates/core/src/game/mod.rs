//! Session state machine. Every operation is a pure function from a session
//! snapshot to a new snapshot plus the events it produced; the caller owns
//! the clock and all external calls.

mod error;
mod machine;
mod types;

pub use error::GameError;
pub use machine::{
    add_player, advance_turn, apply_intervention, create_session, expire, present_clue, record_guess, start_session,
    submit_utterance, Transition,
};
pub use types::{
    ActivePhase, AdvanceReason, EndReason, Intervention, InterventionKind, Phase, Player, Resolution, Session,
    SessionConfig,
};
