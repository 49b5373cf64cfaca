//! `.tutres`: the analysis outcome as `KEY: VALUE` blocks.
//!
//! One `SUMMARY` block, one `CHECK` block per check (the consumed record's
//! fields prefixed with `MATCHED_`), and one `UNEXPECTED` block per
//! unexpected record.

use thiserror::Error;

use super::ReportBundle;
use crate::analyzer::{CheckResult, CoverageMetrics, Verdict};
use crate::blocks::{parse_kind_blocks, BlockWriter, KindBlock, Pair};
use crate::scenario::{Expectation, Fields};
use crate::trace::{record_from_pairs, LogRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct ResultsError {
    pub line: usize,
    pub reason: String,
}

const MATCHED: &str = "MATCHED_";

pub fn serialize_results(b: &ReportBundle) -> String {
    let v = &b.verdict;
    let mut w = BlockWriter::new();
    w.begin(Some("SUMMARY"))
        .pair("TITLE", &b.scenario_title)
        .pair("RUN_STAMP", b.run_stamp)
        .pair("TOOL_VERSION", &b.tool_version)
        .pair("OVERALL", v.overall)
        .pair("STRICT", if v.strict { "yes" } else { "no" })
        .pair("EXPECTATION_COVERAGE", b.coverage.expectation_coverage)
        .pair("CHANNEL_COVERAGE", b.coverage.channel_coverage)
        .pair("FAIL_RATE", b.coverage.fail_rate);
    for c in &v.checks {
        let e = &c.expectation;
        w.begin(Some("CHECK"))
            .pair("INDEX", c.expectation_index)
            .pair("OUTCOME", c.outcome)
            .pair("SOURCE", &e.source)
            .pair("DIRECTION", e.direction)
            .pair("NAME", &e.name)
            .pair("TYPE", &e.type_tag)
            .pair("RELEVANCE", e.relevance)
            .pair("TOLERANCE", e.tolerance)
            .pair("EXPECTED", &e.expected)
            .pair("DETAIL", &c.detail);
        if let Some(r) = &c.matched_record {
            for (k, val) in r.to_pairs() {
                w.pair(&format!("{MATCHED}{k}"), val);
            }
        }
    }
    for r in &v.unexpected {
        w.begin(Some("UNEXPECTED"));
        for (k, val) in r.to_pairs() {
            w.pair(k, val);
        }
    }
    w.finish()
}

fn record_of(b: &KindBlock, pairs: Vec<Pair>) -> Result<LogRecord, ResultsError> {
    let mut notes = Vec::new();
    let r = record_from_pairs(&pairs, &mut notes).map_err(|reason| ResultsError { line: b.line, reason })?;
    if let Some(n) = notes.first() {
        return Err(ResultsError {
            line: b.line,
            reason: n.clone(),
        });
    }
    Ok(r)
}

pub fn parse_results(text: &str) -> Result<ReportBundle, ResultsError> {
    let err = |(line, reason): (usize, String)| ResultsError { line, reason };
    let blocks = parse_kind_blocks(text).map_err(|e| ResultsError {
        line: e.line(),
        reason: e.to_string(),
    })?;
    let mut summary = None;
    let mut checks = Vec::new();
    let mut unexpected = Vec::new();
    for b in &blocks {
        match b.kind.as_str() {
            "SUMMARY" => {
                if summary.is_some() {
                    return Err(err((b.line, "second SUMMARY block".into())));
                }
                let f = Fields::new(
                    b,
                    &[
                        "TITLE",
                        "RUN_STAMP",
                        "TOOL_VERSION",
                        "OVERALL",
                        "STRICT",
                        "EXPECTATION_COVERAGE",
                        "CHANNEL_COVERAGE",
                        "FAIL_RATE",
                    ],
                )
                .map_err(err)?;
                let strict = match f.req("STRICT").map_err(err)? {
                    (_, "yes") => true,
                    (_, "no") => false,
                    (line, v) => return Err(err((line, format!("STRICT must be yes or no, found {v:?}")))),
                };
                let ratio = |key: &str| -> Result<f64, ResultsError> {
                    let x: f64 = f.parse(key).map_err(err)?;
                    if (0.0..=1.0).contains(&x) {
                        Ok(x)
                    } else {
                        Err(err((f.req(key).map_err(err)?.0, format!("{key} outside [0, 1]"))))
                    }
                };
                summary = Some((
                    f.req("TITLE").map_err(err)?.1.to_string(),
                    f.parse("RUN_STAMP").map_err(err)?,
                    f.req("TOOL_VERSION").map_err(err)?.1.to_string(),
                    f.parse("OVERALL").map_err(err)?,
                    strict,
                    CoverageMetrics {
                        expectation_coverage: ratio("EXPECTATION_COVERAGE")?,
                        channel_coverage: ratio("CHANNEL_COVERAGE")?,
                        fail_rate: ratio("FAIL_RATE")?,
                    },
                ));
            }
            "CHECK" => {
                let (matched, own): (Vec<Pair>, Vec<Pair>) =
                    b.pairs.iter().cloned().partition(|p| p.key.starts_with(MATCHED));
                let own_block = KindBlock {
                    pairs: own,
                    ..b.clone()
                };
                let f = Fields::new(
                    &own_block,
                    &[
                        "INDEX",
                        "OUTCOME",
                        "SOURCE",
                        "DIRECTION",
                        "NAME",
                        "TYPE",
                        "RELEVANCE",
                        "TOLERANCE",
                        "EXPECTED",
                        "DETAIL",
                    ],
                )
                .map_err(err)?;
                let matched_record = if matched.is_empty() {
                    None
                } else {
                    let pairs = matched
                        .into_iter()
                        .map(|p| Pair {
                            key: p.key[MATCHED.len()..].to_string(),
                            ..p
                        })
                        .collect();
                    Some(record_of(b, pairs)?)
                };
                checks.push(CheckResult {
                    expectation_index: f.u64("INDEX").map_err(err)? as usize,
                    expectation: Expectation {
                        source: f.parse("SOURCE").map_err(err)?,
                        direction: f.parse("DIRECTION").map_err(err)?,
                        name: f.parse("NAME").map_err(err)?,
                        type_tag: f.parse("TYPE").map_err(err)?,
                        relevance: f.parse("RELEVANCE").map_err(err)?,
                        tolerance: f.u64("TOLERANCE").map_err(err)?,
                        expected: f.payload("EXPECTED").map_err(err)?,
                    },
                    matched_record,
                    outcome: f.parse("OUTCOME").map_err(err)?,
                    detail: f.opt("DETAIL").map(|(_, d)| d.to_string()).unwrap_or_default(),
                });
            }
            "UNEXPECTED" => unexpected.push(record_of(b, b.pairs.clone())?),
            other => return Err(err((b.line, format!("unknown block type {other:?}")))),
        }
    }
    let (scenario_title, run_stamp, tool_version, overall, strict, coverage) =
        summary.ok_or(ResultsError {
            line: 1,
            reason: "missing SUMMARY block".into(),
        })?;
    Ok(ReportBundle {
        verdict: Verdict {
            checks,
            unexpected,
            strict,
            overall,
        },
        coverage,
        scenario_title,
        run_stamp,
        tool_version,
    })
}
