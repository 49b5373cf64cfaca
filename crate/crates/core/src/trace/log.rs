use std::collections::BTreeSet;

use thiserror::Error;

use super::payload::decode_payload;
use super::record::{Direction, LogRecord};
use crate::blocks::{split_blocks, tokenize_pairs, Pair};
use crate::ident::{Endpoint, Ident};
use crate::ParseMode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("record {record} (line {line}): {reason}")]
    MalformedRecord {
        record: usize,
        line: usize,
        reason: String,
    },
    #[error("record {record} (line {line}): LOG_CNT {found} does not follow {previous}")]
    NonMonotonicLogCnt {
        record: usize,
        line: usize,
        previous: u64,
        found: u64,
    },
}

/// A recoverable defect noticed while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub record: usize,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedLog {
    pub records: Vec<LogRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

const KNOWN_KEYS: [&str; 13] = [
    "LOG_CNT",
    "TIME",
    "TICK_MS",
    "SOURCE",
    "DIRECTION",
    "NAME",
    "STATUS",
    "INFO",
    "TYPE",
    "RELEVANCE",
    "TOLERANCE",
    "EXPECTED",
    "ACTUAL",
];

/// Parses a `.tutlog` text.
///
/// Records are separated by blank lines or by a repeated `LOG_CNT` key, so
/// lines holding several records side by side are accepted. In lenient mode
/// a malformed record is dropped and reported as a diagnostic.
pub fn parse_log(text: &str, mode: ParseMode) -> Result<ParsedLog, LogError> {
    let mut out = ParsedLog::default();
    let mut record_index = 0;
    let mut previous: Option<u64> = None;

    for lines in split_blocks(text) {
        let pairs = match tokenize_pairs(&lines) {
            Ok(p) => p,
            Err(e) => {
                let err = LogError::MalformedRecord {
                    record: record_index,
                    line: e.line(),
                    reason: e.to_string(),
                };
                record_index += 1;
                reject(&mut out, mode, err)?;
                continue;
            }
        };

        for group in split_records(&pairs) {
            let index = record_index;
            record_index += 1;
            let line = group[0].line;
            let mut notes = Vec::new();
            let record = match record_from_pairs(group, &mut notes) {
                Ok(r) => r,
                Err(reason) => {
                    let err = LogError::MalformedRecord {
                        record: index,
                        line,
                        reason,
                    };
                    reject(&mut out, mode, err)?;
                    continue;
                }
            };
            out.diagnostics.extend(notes.into_iter().map(|message| Diagnostic {
                record: index,
                line,
                message,
            }));
            if let Some(prev) = previous {
                if record.log_cnt <= prev {
                    let err = LogError::NonMonotonicLogCnt {
                        record: index,
                        line,
                        previous: prev,
                        found: record.log_cnt,
                    };
                    match mode {
                        ParseMode::Strict => return Err(err),
                        ParseMode::Lenient => out.diagnostics.push(Diagnostic {
                            record: index,
                            line,
                            message: err.to_string(),
                        }),
                    }
                }
            }
            previous = Some(record.log_cnt);
            out.records.push(record);
        }
    }
    Ok(out)
}

fn reject(out: &mut ParsedLog, mode: ParseMode, err: LogError) -> Result<(), LogError> {
    match mode {
        ParseMode::Strict => Err(err),
        ParseMode::Lenient => {
            let (record, line) = match &err {
                LogError::MalformedRecord { record, line, .. }
                | LogError::NonMonotonicLogCnt { record, line, .. } => (*record, *line),
            };
            out.diagnostics.push(Diagnostic {
                record,
                line,
                message: format!("skipped: {err}"),
            });
            Ok(())
        }
    }
}

fn split_records(pairs: &[Pair]) -> Vec<&[Pair]> {
    let mut groups = Vec::new();
    let mut start = 0;
    for (i, p) in pairs.iter().enumerate() {
        if p.key == "LOG_CNT" && i > start {
            groups.push(&pairs[start..i]);
            start = i;
        }
    }
    if start < pairs.len() {
        groups.push(&pairs[start..]);
    }
    groups
}

/// Builds a record from its pairs. Unknown keys are folded into INFO as
/// `KEY=value`; other recoverable oddities are pushed onto `notes`.
pub fn record_from_pairs(pairs: &[Pair], notes: &mut Vec<String>) -> Result<LogRecord, String> {
    let mut seen = BTreeSet::new();
    let mut unknown = Vec::new();
    for p in pairs {
        if KNOWN_KEYS.contains(&p.key.as_str()) {
            if !seen.insert(p.key.as_str()) {
                return Err(format!("duplicate key {}", p.key));
            }
        } else {
            unknown.push(format!("{}={}", p.key, p.value.replace(' ', "_")));
        }
    }
    let get = |key: &str| pairs.iter().find(|p| p.key == key).map(|p| p.value.as_str());
    let require = |key: &str| get(key).ok_or_else(|| format!("missing {key}"));
    let ident = |key: &str| -> Result<Ident, String> {
        Ident::new(require(key)?).map_err(|e| format!("{key}: {e}"))
    };

    let log_cnt: u64 = require("LOG_CNT")?
        .parse()
        .map_err(|_| format!("LOG_CNT: bad integer {:?}", get("LOG_CNT").unwrap_or_default()))?;
    if log_cnt == 0 {
        return Err("LOG_CNT must be positive".into());
    }
    let time = require("TIME")?.parse().map_err(|e| format!("TIME: {e}"))?;
    let tick_ms = get("TICK_MS")
        .map(|v| v.parse::<u64>().map_err(|_| format!("TICK_MS: bad integer {v:?}")))
        .transpose()?;
    let source = Endpoint::new(ident("SOURCE")?);
    let direction = match require("DIRECTION")? {
        // the published sample prints `ID` where `IN` is meant
        "ID" => {
            notes.push("DIRECTION `ID` read as IN".into());
            Direction::In
        }
        v => v.parse().map_err(|e| format!("DIRECTION: {e}"))?,
    };
    let name = ident("NAME")?;
    let type_tag = ident("TYPE")?;
    let relevance = require("RELEVANCE")?
        .parse()
        .map_err(|e| format!("RELEVANCE: {e}"))?;
    let tolerance = match get("TOLERANCE") {
        Some(v) => v
            .parse::<u64>()
            .map_err(|_| format!("TOLERANCE: bad integer {v:?}"))?,
        None => {
            notes.push("TOLERANCE missing, read as 0".into());
            0
        }
    };
    let payload = |key: &str| {
        get(key)
            .map(|v| decode_payload(v).map_err(|e| format!("{key}: {e}")))
            .transpose()
    };
    let expected = payload("EXPECTED")?;
    let actual = payload("ACTUAL")?;
    if expected.is_none() && actual.is_none() {
        return Err("neither EXPECTED nor ACTUAL present".into());
    }
    let status = get("STATUS")
        .map(|v| v.parse().map_err(|e| format!("STATUS: {e}")))
        .transpose()?;

    let mut info_parts: Vec<String> = Vec::new();
    if let Some(v) = get("INFO").filter(|v| !v.is_empty()) {
        info_parts.push(v.to_string());
    }
    if !unknown.is_empty() {
        notes.push(format!("unknown keys kept in INFO: {}", unknown.join(", ")));
        info_parts.extend(unknown);
    }
    let info = (!info_parts.is_empty()).then(|| info_parts.join("; "));

    Ok(LogRecord {
        log_cnt,
        time,
        tick_ms,
        source,
        direction,
        name,
        type_tag,
        relevance,
        tolerance,
        expected,
        actual,
        status,
        info,
    })
}
