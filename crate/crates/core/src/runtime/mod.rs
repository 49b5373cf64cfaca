//! Deterministic discrete-time host for the Task-Under-Test.
//!
//! The TUT sits inside a generated environment of stub tasks and a Common
//! Memory. Every message crossing the interface and every Common Memory
//! write becomes a [`LogRecord`](crate::trace::LogRecord) stamped with the
//! current tick.

pub mod behaviors;
mod env;
mod interface;
mod memory;
mod sim;

pub use env::{generate_environment, Environment, Stub};
pub use interface::{
    parse_interface, serialize_interface, ChannelDecl, CmSlotDecl, InterfaceFileError,
    InterfaceSpec, SpecError,
};
pub use memory::{cm_read, cm_write, CmError, CommonMemory};
pub use sim::{
    run_simulation, RunConfig, RuntimeError, TaskContext, Trace, TutBehavior,
    DEFAULT_LIVELOCK_CAP, DEFAULT_TIMER_PERIOD_MS,
};
