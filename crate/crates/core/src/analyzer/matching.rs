use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::compare::{compare_payloads, Comparison};
use crate::runtime::InterfaceSpec;
use crate::scenario::{Expectation, Scenario};
use crate::trace::{Channel, Direction, LogRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Pass,
    Fail,
    Missing,
    /// Relevance-0 expectation; never affects the verdict.
    Info,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Missing => "MISSING",
            Outcome::Info => "INFO",
        }
    }

    pub fn is_relevant(self) -> bool {
        self != Outcome::Info
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PASS" => Ok(Outcome::Pass),
            "FAIL" => Ok(Outcome::Fail),
            "MISSING" => Ok(Outcome::Missing),
            "INFO" => Ok(Outcome::Info),
            _ => Err(format!("unknown outcome {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    /// Position of the expectation in script order.
    pub expectation_index: usize,
    pub expectation: Expectation,
    pub matched_record: Option<LogRecord>,
    pub outcome: Outcome,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchResult {
    pub checks: Vec<CheckResult>,
    /// Emitted records no expectation consumed, in trace order.
    pub unexpected: Vec<LogRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("record LOG_CNT {log_cnt} uses undeclared channel {channel}")]
    SpecMismatch { log_cnt: u64, channel: Channel },
}

/// Pairs expectations with trace records.
///
/// Records and expectations are grouped by channel `(SOURCE, DIRECTION,
/// NAME)`; within a channel the n-th expectation in script order takes the
/// n-th record in trace order. Leftover `OUT` records are unexpected;
/// leftover `IN` records are stimulus and are not reported.
pub fn match_trace(
    records: &[LogRecord],
    scenario: &Scenario,
    spec: &InterfaceSpec,
) -> Result<MatchResult, AnalysisError> {
    let mut by_channel: BTreeMap<Channel, VecDeque<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let channel = r.channel();
        if !spec.declares(&channel) {
            return Err(AnalysisError::SpecMismatch {
                log_cnt: r.log_cnt,
                channel,
            });
        }
        by_channel.entry(channel).or_default().push_back(i);
    }

    let mut consumed = vec![false; records.len()];
    let checks = scenario
        .expectations
        .iter()
        .enumerate()
        .map(|(index, exp)| {
            let hit = by_channel
                .get_mut(&exp.channel())
                .and_then(VecDeque::pop_front);
            if let Some(i) = hit {
                consumed[i] = true;
            }
            evaluate(index, exp, hit.map(|i| &records[i]))
        })
        .collect();

    let unexpected = records
        .iter()
        .zip(&consumed)
        .filter(|(r, used)| !**used && r.direction == Direction::Out)
        .map(|(r, _)| r.clone())
        .collect();

    Ok(MatchResult { checks, unexpected })
}

/// Outcome of one expectation against the record it consumed, if any.
pub fn evaluate(index: usize, exp: &Expectation, record: Option<&LogRecord>) -> CheckResult {
    let (outcome, detail) = match record {
        None => (
            Outcome::Missing,
            format!("no record on channel {}", exp.channel()),
        ),
        Some(r) if r.type_tag != exp.type_tag => (
            Outcome::Fail,
            format!("type {} instead of {}", r.type_tag, exp.type_tag),
        ),
        Some(r) => match &r.actual {
            None => (Outcome::Fail, "record has no ACTUAL payload".to_string()),
            Some(actual) => match compare_payloads(&exp.expected, actual, exp.tolerance) {
                Comparison::Match => (Outcome::Pass, String::new()),
                Comparison::Mismatch(m) => (Outcome::Fail, m.to_string()),
            },
        },
    };
    let (outcome, detail) = if exp.relevance.is_checked() {
        (outcome, detail)
    } else if detail.is_empty() {
        (Outcome::Info, "informational".to_string())
    } else {
        (Outcome::Info, format!("informational: {detail}"))
    };
    CheckResult {
        expectation_index: index,
        expectation: exp.clone(),
        matched_record: record.cloned(),
        outcome,
        detail,
    }
}
