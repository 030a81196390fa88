//! Deterministic core of the Alias word-game engine: control-token protocol,
//! morphology and dose measurement, guess adjudication, the clue pipeline,
//! the session state machine, orchestration, logging and replay.

pub mod adjudication;
pub mod clue;
pub mod compare;
pub mod events;
pub mod game;
pub mod language;
pub mod llm;
pub mod morphology;
pub mod orchestrator;
pub mod protocol;
pub mod replay;
pub mod sim;
pub mod transcript;
pub mod word;

pub use language::Language;
pub use word::WordItem;
