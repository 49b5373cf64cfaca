//! State-chart models of the TUT, their flattening into a labelled
//! transition system, exhaustive exploration and model-based test
//! generation.

mod behavior;
mod chart;
mod format;
mod lts;
mod testgen;

pub use behavior::LtsBehavior;
pub use chart::{ChartError, Output, Site, StateChart, StateDecl, Transition, Trigger};
pub use format::{parse_statechart, serialize_statechart, ChartFileError};
pub use lts::{explore, flatten, Edge, ExplorationReport, Lts, LtsError};
pub use testgen::{
    covered_edges, generate_tests, model_coverage, GeneratedSuite, TestgenError,
    DEFAULT_TEST_TICK_PERIOD_MS,
};
