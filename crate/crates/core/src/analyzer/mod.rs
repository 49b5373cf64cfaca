//! Expected-versus-actual evaluation of a trace against a scenario.

mod compare;
mod matching;
mod verdict;

pub use compare::{compare_payloads, Comparison, Mismatch};
pub use matching::{evaluate, match_trace, AnalysisError, CheckResult, MatchResult, Outcome};
pub use verdict::{compute_coverage, compute_verdict, CoverageMetrics, Overall, Verdict};

use crate::runtime::InterfaceSpec;
use crate::scenario::Scenario;
use crate::trace::{LogRecord, Stamp, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub verdict: Verdict,
    pub coverage: CoverageMetrics,
}

/// Match, judge and measure in one step.
pub fn analyze(
    records: &[LogRecord],
    scenario: &Scenario,
    spec: &InterfaceSpec,
    strict: bool,
) -> Result<Analysis, AnalysisError> {
    let m = match_trace(records, scenario, spec)?;
    let coverage = compute_coverage(&m.checks, records, spec);
    Ok(Analysis {
        verdict: compute_verdict(m.checks, m.unexpected, strict),
        coverage,
    })
}

/// Copies each check's expectation into the record it consumed and
/// appends one `MISSING` record per unmatched expectation, numbered after
/// the last record.
pub fn annotate(records: &[LogRecord], verdict: &Verdict, stamp: Stamp) -> Vec<LogRecord> {
    let mut out = records.to_vec();
    let mut next = records.iter().map(|r| r.log_cnt).max().unwrap_or(0) + 1;
    for check in &verdict.checks {
        let exp = &check.expectation;
        let status = match check.outcome {
            Outcome::Pass => Some(Status::Ok),
            Outcome::Fail => Some(Status::Fail),
            Outcome::Missing => Some(Status::Missing),
            Outcome::Info => None,
        };
        match &check.matched_record {
            Some(m) => {
                if let Some(r) = out.iter_mut().find(|r| r.log_cnt == m.log_cnt) {
                    r.expected = Some(exp.expected.clone());
                    r.relevance = exp.relevance;
                    r.tolerance = exp.tolerance;
                    if status.is_some() {
                        r.status = status;
                    }
                }
            }
            None => {
                out.push(LogRecord {
                    log_cnt: next,
                    time: stamp,
                    tick_ms: None,
                    source: exp.source.clone(),
                    direction: exp.direction,
                    name: exp.name.clone(),
                    type_tag: exp.type_tag.clone(),
                    relevance: exp.relevance,
                    tolerance: exp.tolerance,
                    expected: Some(exp.expected.clone()),
                    actual: None,
                    status,
                    info: None,
                });
                next += 1;
            }
        }
    }
    out
}
