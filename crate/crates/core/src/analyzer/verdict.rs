use std::collections::BTreeSet;
use std::fmt;

use super::matching::{CheckResult, Outcome};
use crate::runtime::InterfaceSpec;
use crate::trace::{Direction, LogRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overall {
    Pass,
    Fail,
}

impl fmt::Display for Overall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Overall::Pass => "PASS",
            Overall::Fail => "FAIL",
        })
    }
}

impl std::str::FromStr for Overall {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PASS" => Ok(Overall::Pass),
            "FAIL" => Ok(Overall::Fail),
            _ => Err(format!("unknown verdict {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub checks: Vec<CheckResult>,
    pub unexpected: Vec<LogRecord>,
    /// Whether unexpected records count as failures.
    pub strict: bool,
    pub overall: Overall,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.overall == Overall::Pass
    }
}

/// PASS iff every relevant check passed; in strict mode unexpected records
/// fail the run as well.
pub fn compute_verdict(checks: Vec<CheckResult>, unexpected: Vec<LogRecord>, strict: bool) -> Verdict {
    let checks_ok = checks
        .iter()
        .all(|c| !c.outcome.is_relevant() || c.outcome == Outcome::Pass);
    let overall = if checks_ok && !(strict && !unexpected.is_empty()) {
        Overall::Pass
    } else {
        Overall::Fail
    };
    Verdict {
        checks,
        unexpected,
        strict,
        overall,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageMetrics {
    /// Share of expectations that consumed a record.
    pub expectation_coverage: f64,
    /// Share of declared outbound channels seen at least once.
    pub channel_coverage: f64,
    /// Failed or missing relevant checks over all relevant checks.
    pub fail_rate: f64,
}

fn ratio(num: usize, den: usize, empty: f64) -> f64 {
    if den == 0 {
        empty
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_coverage(checks: &[CheckResult], records: &[LogRecord], spec: &InterfaceSpec) -> CoverageMetrics {
    let consumed = checks.iter().filter(|c| c.matched_record.is_some()).count();
    let declared = spec.outbound_channels();
    let seen: BTreeSet<_> = records
        .iter()
        .filter(|r| r.direction == Direction::Out)
        .map(|r| (&r.source, &r.name))
        .collect();
    let observed = declared
        .iter()
        .filter(|d| seen.contains(&(&d.endpoint, &d.name)))
        .count();
    let relevant = checks.iter().filter(|c| c.outcome.is_relevant()).count();
    let failed = checks
        .iter()
        .filter(|c| matches!(c.outcome, Outcome::Fail | Outcome::Missing))
        .count();
    CoverageMetrics {
        expectation_coverage: ratio(consumed, checks.len(), 1.0),
        channel_coverage: ratio(observed, declared.len(), 1.0),
        fail_rate: ratio(failed, relevant, 0.0),
    }
}
