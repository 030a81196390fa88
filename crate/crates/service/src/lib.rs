//! Session service for the alias game engine: HTTP API with a live event
//! stream, per-session workers, a live model adapter and the CLI commands.

pub mod api;
pub mod cli;
pub mod error;
pub mod hub;
pub mod live;
