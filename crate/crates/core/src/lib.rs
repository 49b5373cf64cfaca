//! Unit-verification harness for message-passing real-time tasks.
//!
//! A Task-Under-Test (TUT) runs inside a generated stub environment on a
//! deterministic millisecond clock. All interface traffic lands in a
//! `.tutlog` trace, which the analyzer checks against a `.tutsc` scenario
//! using per-expectation relevance and tolerance. Scenarios can be written
//! by hand or generated from a `.tutsm` state-chart model, and results are
//! rendered as a single-file HTML report or JUnit-style XML.

pub mod analyzer;
pub mod blocks;
pub mod cli;
pub mod ident;
pub mod model;
pub mod report;
pub mod runtime;
pub mod scenario;
pub mod trace;

pub use ident::{Endpoint, EndpointKind, Ident, IdentError};
pub use trace::{Direction, LogRecord, Payload, Relevance, Stamp, Status};

/// Version string stamped into reports.
pub const TOOL_VERSION: &str = concat!("tutharness ", env!("CARGO_PKG_VERSION"));

/// How parsers react to recoverable defects in their input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Any defect is an error.
    #[default]
    Strict,
    /// Recoverable defects become diagnostics and parsing continues.
    Lenient,
}
