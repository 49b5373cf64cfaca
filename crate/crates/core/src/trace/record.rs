use std::fmt;
use std::str::FromStr;

use chrono::NaiveDateTime;
use thiserror::Error;

use super::payload::Payload;
use crate::blocks::{is_key_token, BlockWriter};
use crate::ident::{Endpoint, Ident};

/// Orientation relative to the TUT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// Consumed by the TUT.
    In,
    /// Emitted by the TUT, including Common Memory writes.
    Out,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::In => "IN",
            Direction::Out => "OUT",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown direction {0:?}")]
pub struct DirectionError(pub String);

impl FromStr for Direction {
    type Err = DirectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "IN" => Ok(Direction::In),
            "OUT" => Ok(Direction::Out),
            _ => Err(DirectionError(s.to_string())),
        }
    }
}

/// Whether a check counts toward the verdict (1) or is informational (0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Relevance {
    #[default]
    Info,
    Check,
}

impl Relevance {
    pub fn as_u8(self) -> u8 {
        match self {
            Relevance::Info => 0,
            Relevance::Check => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Relevance::Info),
            1 => Some(Relevance::Check),
            _ => None,
        }
    }

    pub fn is_checked(self) -> bool {
        self == Relevance::Check
    }
}

impl fmt::Display for Relevance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("relevance must be 0 or 1, found {0:?}")]
pub struct RelevanceError(pub String);

impl FromStr for Relevance {
    type Err = RelevanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<u8>()
            .ok()
            .and_then(Relevance::from_u8)
            .ok_or_else(|| RelevanceError(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Ok,
    Fail,
    Missing,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "OK",
            Status::Fail => "FAIL",
            Status::Missing => "MISSING",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown status {0:?}")]
pub struct StatusError(pub String);

impl FromStr for Status {
    type Err = StatusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "OK" => Ok(Status::Ok),
            "FAIL" => Ok(Status::Fail),
            "MISSING" => Ok(Status::Missing),
            _ => Err(StatusError(s.to_string())),
        }
    }
}

pub const STAMP_FORMAT: &str = "%Y.%m.%d_%H:%M:%S";

/// Wall-clock time at second resolution, printed `YYYY.MM.DD_HH:MM:SS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stamp(NaiveDateTime);

impl Stamp {
    pub fn new(t: NaiveDateTime) -> Self {
        use chrono::Timelike;
        Self(t.with_nanosecond(0).unwrap_or(t))
    }

    pub fn now() -> Self {
        Self::new(chrono::Local::now().naive_local())
    }

    pub fn datetime(&self) -> NaiveDateTime {
        self.0
    }
}

impl fmt::Display for Stamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format(STAMP_FORMAT))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("time {0:?} is not in YYYY.MM.DD_HH:MM:SS form")]
pub struct StampError(pub String);

impl FromStr for Stamp {
    type Err = StampError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // chrono tolerates unpadded fields; the log format does not
        let shape_ok = s.len() == 19
            && s.bytes().enumerate().all(|(i, b)| match i {
                4 | 7 => b == b'.',
                10 => b == b'_',
                13 | 16 => b == b':',
                _ => b.is_ascii_digit(),
            });
        if !shape_ok {
            return Err(StampError(s.to_string()));
        }
        NaiveDateTime::parse_from_str(s, STAMP_FORMAT)
            .map(Stamp)
            .map_err(|_| StampError(s.to_string()))
    }
}

/// One inter-task communication event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub name: Ident,
    pub type_tag: Ident,
    pub payload: Payload,
    pub source: Endpoint,
    pub direction: Direction,
    pub tick_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("LOG_CNT must be positive")]
    ZeroLogCnt,
    #[error("record carries neither EXPECTED nor ACTUAL")]
    NoPayload,
    #[error("INFO must be non-empty single-spaced text without KEY: tokens, found {0:?}")]
    BadInfo(String),
}

/// One trace entry: an observed event and, once analyzed, its expectation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    pub log_cnt: u64,
    pub time: Stamp,
    /// Simulated milliseconds; absent in logs from external tools.
    pub tick_ms: Option<u64>,
    pub source: Endpoint,
    pub direction: Direction,
    pub name: Ident,
    pub type_tag: Ident,
    pub relevance: Relevance,
    pub tolerance: u64,
    pub expected: Option<Payload>,
    pub actual: Option<Payload>,
    pub status: Option<Status>,
    pub info: Option<String>,
}

impl LogRecord {
    pub fn validate(&self) -> Result<(), RecordError> {
        if self.log_cnt == 0 {
            return Err(RecordError::ZeroLogCnt);
        }
        if self.expected.is_none() && self.actual.is_none() {
            return Err(RecordError::NoPayload);
        }
        if let Some(info) = &self.info {
            if !is_valid_info(info) {
                return Err(RecordError::BadInfo(info.clone()));
            }
        }
        Ok(())
    }

    /// The `(SOURCE, DIRECTION, NAME)` triple expectations are matched on.
    pub fn channel(&self) -> Channel {
        Channel {
            endpoint: self.source.clone(),
            direction: self.direction,
            name: self.name.clone(),
        }
    }

    /// Key/value pairs in canonical order, optional fields omitted.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = vec![
            ("LOG_CNT", self.log_cnt.to_string()),
            ("TIME", self.time.to_string()),
        ];
        if let Some(t) = self.tick_ms {
            pairs.push(("TICK_MS", t.to_string()));
        }
        pairs.push(("SOURCE", self.source.to_string()));
        pairs.push(("DIRECTION", self.direction.to_string()));
        pairs.push(("NAME", self.name.to_string()));
        if let Some(s) = self.status {
            pairs.push(("STATUS", s.to_string()));
        }
        if let Some(i) = &self.info {
            pairs.push(("INFO", i.clone()));
        }
        pairs.push(("TYPE", self.type_tag.to_string()));
        pairs.push(("RELEVANCE", self.relevance.to_string()));
        pairs.push(("TOLERANCE", self.tolerance.to_string()));
        if let Some(p) = &self.expected {
            pairs.push(("EXPECTED", p.encode()));
        }
        if let Some(p) = &self.actual {
            pairs.push(("ACTUAL", p.encode()));
        }
        pairs
    }
}

/// Free text that survives a trip through the multi-pair tokenizer.
pub fn is_valid_info(s: &str) -> bool {
    !s.is_empty()
        && s.split_whitespace().collect::<Vec<_>>().join(" ") == s
        && !s.split_whitespace().any(is_key_token)
}

/// Interface channel: endpoint, direction and message name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Channel {
    pub endpoint: Endpoint,
    pub direction: Direction,
    pub name: Ident,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.endpoint, self.direction, self.name)
    }
}

/// Canonical block text for one record: one `KEY: VALUE` per line.
pub fn serialize_record(r: &LogRecord) -> String {
    let mut w = BlockWriter::new();
    w.begin(None);
    for (k, v) in r.to_pairs() {
        w.pair(k, v);
    }
    w.finish()
}

/// Records joined by one blank line.
pub fn serialize_log(records: &[LogRecord]) -> String {
    let mut w = BlockWriter::new();
    for r in records {
        w.begin(None);
        for (k, v) in r.to_pairs() {
            w.pair(k, v);
        }
    }
    w.finish()
}
