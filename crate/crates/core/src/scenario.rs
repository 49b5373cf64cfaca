//! Test scripts: timed injections into the TUT and ordered expectations on
//! what it emits, stored as `.tutsc` block files.
//!
//! ```text
//! CONFIG
//! TITLE: change button
//! DURATION_MS: 1000
//! TICK_PERIOD_MS: 250
//!
//! INJECT
//! TICK_MS: 5
//! TARGET: KEYPAD
//! NAME: D_CHANGE_BTN
//! TYPE: D_CHANGE_BTN
//! PAYLOAD: 02000000
//!
//! EXPECT
//! SOURCE: CM
//! DIRECTION: OUT
//! NAME: D_CHANGE_BTN
//! TYPE: D_CHANGE_BTN
//! RELEVANCE: 1
//! TOLERANCE: 0
//! EXPECTED: 02000000
//! ```

use std::fmt;

use thiserror::Error;

use crate::blocks::{parse_kind_blocks, BlockWriter, KindBlock};
use crate::ident::{Endpoint, Ident};
use crate::runtime::InterfaceSpec;
use crate::trace::{decode_payload, Channel, Direction, Payload, Relevance};
use crate::ParseMode;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Injection {
    pub tick_ms: u64,
    /// Inbound stub the message is sent from.
    pub target: Endpoint,
    pub name: Ident,
    pub type_tag: Ident,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub source: Endpoint,
    pub direction: Direction,
    pub name: Ident,
    pub type_tag: Ident,
    pub relevance: Relevance,
    pub tolerance: u64,
    pub expected: Payload,
}

impl Expectation {
    pub fn channel(&self) -> Channel {
        Channel {
            endpoint: self.source.clone(),
            direction: self.direction,
            name: self.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    /// Single line, no surrounding whitespace; empty when untitled.
    pub title: String,
    pub duration_ms: u64,
    /// Timer period for this run; the behavior's own period when absent.
    pub tick_period_ms: Option<u64>,
    pub injections: Vec<Injection>,
    pub expectations: Vec<Expectation>,
}

impl Scenario {
    /// Block index an injection occupies in the canonical file.
    pub fn injection_block(&self, i: usize) -> usize {
        1 + i
    }

    pub fn expectation_block(&self, i: usize) -> usize {
        1 + self.injections.len() + i
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("block {block} (line {line}): {reason}")]
    MalformedBlock {
        block: usize,
        line: usize,
        reason: String,
    },
    #[error("block {block} (line {line}): unknown block type {kind:?}")]
    UnknownBlockType {
        block: usize,
        line: usize,
        kind: String,
    },
    #[error("line {line}: CONFIG needs a positive DURATION_MS")]
    DurationMissing { line: usize },
    #[error("block {block} (line {line}): injection at {tick_ms} ms precedes one at {previous_ms} ms")]
    UnsortedInjections {
        block: usize,
        line: usize,
        tick_ms: u64,
        previous_ms: u64,
    },
}

/// Every error found in a scenario file, in file order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ScenarioErrors(pub Vec<ScenarioError>);

impl fmt::Display for ScenarioErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [] => f.write_str("invalid scenario"),
            [one] => one.fmt(f),
            [first, rest @ ..] => write!(f, "{first} (and {} more)", rest.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedScenario {
    pub scenario: Scenario,
    /// Defects repaired in lenient mode.
    pub warnings: Vec<ScenarioError>,
}

const CONFIG_KEYS: &[&str] = &["TITLE", "DURATION_MS", "TICK_PERIOD_MS"];
const INJECT_KEYS: &[&str] = &["TICK_MS", "TARGET", "NAME", "TYPE", "PAYLOAD"];
const EXPECT_KEYS: &[&str] = &[
    "SOURCE",
    "DIRECTION",
    "NAME",
    "TYPE",
    "RELEVANCE",
    "TOLERANCE",
    "EXPECTED",
];

/// Typed field access over a kind block, reporting located errors.
pub(crate) struct Fields<'a> {
    block: &'a KindBlock,
}

impl<'a> Fields<'a> {
    pub(crate) fn new(block: &'a KindBlock, allowed: &[&str]) -> Result<Self, (usize, String)> {
        for p in &block.pairs {
            if !allowed.contains(&p.key.as_str()) {
                return Err((p.line, format!("unexpected key {} in {}", p.key, block.kind)));
            }
            if block.count(&p.key) > 1 {
                return Err((p.line, format!("duplicate key {}", p.key)));
            }
        }
        Ok(Self { block })
    }

    pub(crate) fn opt(&self, key: &str) -> Option<(usize, &'a str)> {
        self.block.get(key).map(|p| (p.line, p.value.as_str()))
    }

    pub(crate) fn req(&self, key: &str) -> Result<(usize, &'a str), (usize, String)> {
        self.opt(key)
            .ok_or_else(|| (self.block.line, format!("{} block lacks {key}", self.block.kind)))
    }

    pub(crate) fn parse<T>(&self, key: &str) -> Result<T, (usize, String)>
    where
        T: std::str::FromStr,
        T::Err: fmt::Display,
    {
        let (line, v) = self.req(key)?;
        v.parse().map_err(|e| (line, format!("{key}: {e}")))
    }

    pub(crate) fn u64(&self, key: &str) -> Result<u64, (usize, String)> {
        let (line, v) = self.req(key)?;
        v.parse()
            .map_err(|_| (line, format!("{key}: bad non-negative integer {v:?}")))
    }

    pub(crate) fn payload(&self, key: &str) -> Result<Payload, (usize, String)> {
        let (line, v) = self.req(key)?;
        decode_payload(v).map_err(|e| (line, format!("{key}: {e}")))
    }
}

pub fn parse_scenario(text: &str, mode: ParseMode) -> Result<ParsedScenario, ScenarioErrors> {
    let blocks = parse_kind_blocks(text).map_err(|e| {
        ScenarioErrors(vec![ScenarioError::MalformedBlock {
            block: 0,
            line: e.line(),
            reason: e.to_string(),
        }])
    })?;

    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let mut config: Option<(usize, String, u64, Option<u64>)> = None;
    let mut injections: Vec<(usize, usize, Injection)> = Vec::new();
    let mut expectations = Vec::new();

    for b in &blocks {
        let malformed = |(line, reason): (usize, String)| ScenarioError::MalformedBlock {
            block: b.index,
            line,
            reason,
        };
        match b.kind.as_str() {
            "CONFIG" => match parse_config(b) {
                Ok(_) if config.is_some() => errors.push(malformed((b.line, "second CONFIG block".into()))),
                Ok((title, duration, period)) => config = Some((b.line, title, duration, period)),
                Err(e) => errors.push(e),
            },
            "INJECT" => match parse_injection(b) {
                Ok(inj) => injections.push((b.index, b.line, inj)),
                Err(e) => errors.push(malformed(e)),
            },
            "EXPECT" => match parse_expectation(b) {
                Ok(exp) => expectations.push(exp),
                Err(e) => errors.push(malformed(e)),
            },
            other => errors.push(ScenarioError::UnknownBlockType {
                block: b.index,
                line: b.line,
                kind: other.to_string(),
            }),
        }
    }

    let Some((config_line, title, duration_ms, tick_period_ms)) = config else {
        if !errors.iter().any(|e| matches!(e, ScenarioError::DurationMissing { .. })) {
            errors.push(ScenarioError::DurationMissing { line: 1 });
        }
        return Err(ScenarioErrors(errors));
    };

    let mut previous = 0;
    for &(block, line, ref inj) in &injections {
        if inj.tick_ms < previous {
            let e = ScenarioError::UnsortedInjections {
                block,
                line,
                tick_ms: inj.tick_ms,
                previous_ms: previous,
            };
            match mode {
                ParseMode::Strict => errors.push(e),
                ParseMode::Lenient => warnings.push(e),
            }
        }
        previous = previous.max(inj.tick_ms);
        if inj.tick_ms > duration_ms {
            errors.push(ScenarioError::MalformedBlock {
                block,
                line,
                reason: format!(
                    "injection at {} ms is after the {duration_ms} ms duration (CONFIG line {config_line})",
                    inj.tick_ms
                ),
            });
        }
    }

    if !errors.is_empty() {
        return Err(ScenarioErrors(errors));
    }
    let mut injections: Vec<Injection> = injections.into_iter().map(|(_, _, i)| i).collect();
    // stable: ties keep script order
    injections.sort_by_key(|i| i.tick_ms);
    Ok(ParsedScenario {
        scenario: Scenario {
            title,
            duration_ms,
            tick_period_ms,
            injections,
            expectations,
        },
        warnings,
    })
}

fn parse_config(b: &KindBlock) -> Result<(String, u64, Option<u64>), ScenarioError> {
    let malformed = |(line, reason): (usize, String)| ScenarioError::MalformedBlock {
        block: b.index,
        line,
        reason,
    };
    let f = Fields::new(b, CONFIG_KEYS).map_err(malformed)?;
    let title = f.opt("TITLE").map(|(_, v)| v.to_string()).unwrap_or_default();
    let duration = match f.opt("DURATION_MS") {
        None => return Err(ScenarioError::DurationMissing { line: b.line }),
        Some((line, v)) => match v.parse::<u64>() {
            Ok(0) => return Err(ScenarioError::DurationMissing { line }),
            Ok(d) => d,
            Err(_) => return Err(malformed((line, format!("DURATION_MS: bad integer {v:?}")))),
        },
    };
    let period = match f.opt("TICK_PERIOD_MS") {
        None => None,
        Some((line, v)) => match v.parse::<u64>() {
            Ok(p) if p > 0 => Some(p),
            _ => return Err(malformed((line, format!("TICK_PERIOD_MS must be a positive integer, found {v:?}")))),
        },
    };
    Ok((title, duration, period))
}

fn parse_injection(b: &KindBlock) -> Result<Injection, (usize, String)> {
    let f = Fields::new(b, INJECT_KEYS)?;
    Ok(Injection {
        tick_ms: f.u64("TICK_MS")?,
        target: f.parse("TARGET")?,
        name: f.parse("NAME")?,
        type_tag: f.parse("TYPE")?,
        payload: f.payload("PAYLOAD")?,
    })
}

fn parse_expectation(b: &KindBlock) -> Result<Expectation, (usize, String)> {
    let f = Fields::new(b, EXPECT_KEYS)?;
    Ok(Expectation {
        source: f.parse("SOURCE")?,
        direction: f.parse("DIRECTION")?,
        name: f.parse("NAME")?,
        type_tag: f.parse("TYPE")?,
        relevance: f.parse("RELEVANCE")?,
        tolerance: f.u64("TOLERANCE")?,
        expected: f.payload("EXPECTED")?,
    })
}

pub fn serialize_scenario(s: &Scenario) -> String {
    let mut w = BlockWriter::new();
    w.begin(Some("CONFIG"));
    if !s.title.is_empty() {
        w.pair("TITLE", &s.title);
    }
    w.pair("DURATION_MS", s.duration_ms);
    if let Some(p) = s.tick_period_ms {
        w.pair("TICK_PERIOD_MS", p);
    }
    for i in &s.injections {
        w.begin(Some("INJECT"))
            .pair("TICK_MS", i.tick_ms)
            .pair("TARGET", &i.target)
            .pair("NAME", &i.name)
            .pair("TYPE", &i.type_tag)
            .pair("PAYLOAD", &i.payload);
    }
    for e in &s.expectations {
        w.begin(Some("EXPECT"))
            .pair("SOURCE", &e.source)
            .pair("DIRECTION", e.direction)
            .pair("NAME", &e.name)
            .pair("TYPE", &e.type_tag)
            .pair("RELEVANCE", e.relevance)
            .pair("TOLERANCE", e.tolerance)
            .pair("EXPECTED", &e.expected);
    }
    w.finish()
}

/// A rule a scenario breaks with respect to an interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IssueKind {
    NonPositiveDuration,
    NonPositiveTickPeriod,
    BadTitle,
    UndeclaredTarget { target: Endpoint, name: Ident },
    InjectionTypeMismatch { declared: Ident, found: Ident },
    InjectionAfterEnd { tick_ms: u64, duration_ms: u64 },
    UnsortedInjection { tick_ms: u64, previous_ms: u64 },
    UndeclaredChannel { channel: Channel },
    ExpectationTypeMismatch { declared: Ident, found: Ident },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    /// Canonical block index: 0 is CONFIG, then injections, then expectations.
    pub block: usize,
    pub kind: IssueKind,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "block {}: ", self.block)?;
        match &self.kind {
            IssueKind::NonPositiveDuration => f.write_str("DURATION_MS must be positive"),
            IssueKind::NonPositiveTickPeriod => f.write_str("TICK_PERIOD_MS must be positive"),
            IssueKind::BadTitle => f.write_str("TITLE must be one trimmed line"),
            IssueKind::UndeclaredTarget { target, name } => {
                write!(f, "{target} does not inject {name} into the TUT")
            }
            IssueKind::InjectionTypeMismatch { declared, found } => {
                write!(f, "injection type {found} differs from declared {declared}")
            }
            IssueKind::InjectionAfterEnd {
                tick_ms,
                duration_ms,
            } => write!(f, "injection at {tick_ms} ms is after the {duration_ms} ms duration"),
            IssueKind::UnsortedInjection {
                tick_ms,
                previous_ms,
            } => write!(f, "injection at {tick_ms} ms precedes one at {previous_ms} ms"),
            IssueKind::UndeclaredChannel { channel } => {
                write!(f, "channel {channel} is not declared")
            }
            IssueKind::ExpectationTypeMismatch { declared, found } => {
                write!(f, "expected type {found} differs from declared {declared}")
            }
        }
    }
}

/// Checks a scenario against an interface; empty iff it is valid.
pub fn validate_scenario(s: &Scenario, spec: &InterfaceSpec) -> Vec<Issue> {
    let mut issues = Vec::new();
    if s.duration_ms == 0 {
        issues.push(Issue {
            block: 0,
            kind: IssueKind::NonPositiveDuration,
        });
    }
    if s.tick_period_ms == Some(0) {
        issues.push(Issue {
            block: 0,
            kind: IssueKind::NonPositiveTickPeriod,
        });
    }
    if s.title.contains(['\n', '\r']) || s.title.trim() != s.title {
        issues.push(Issue {
            block: 0,
            kind: IssueKind::BadTitle,
        });
    }

    let mut previous = 0;
    for (i, inj) in s.injections.iter().enumerate() {
        let block = s.injection_block(i);
        match spec.inbound_decl(&inj.target, &inj.name) {
            None => issues.push(Issue {
                block,
                kind: IssueKind::UndeclaredTarget {
                    target: inj.target.clone(),
                    name: inj.name.clone(),
                },
            }),
            Some(decl) if decl.type_tag != inj.type_tag => issues.push(Issue {
                block,
                kind: IssueKind::InjectionTypeMismatch {
                    declared: decl.type_tag.clone(),
                    found: inj.type_tag.clone(),
                },
            }),
            Some(_) => {}
        }
        if inj.tick_ms > s.duration_ms {
            issues.push(Issue {
                block,
                kind: IssueKind::InjectionAfterEnd {
                    tick_ms: inj.tick_ms,
                    duration_ms: s.duration_ms,
                },
            });
        }
        if inj.tick_ms < previous {
            issues.push(Issue {
                block,
                kind: IssueKind::UnsortedInjection {
                    tick_ms: inj.tick_ms,
                    previous_ms: previous,
                },
            });
        }
        previous = previous.max(inj.tick_ms);
    }

    for (i, e) in s.expectations.iter().enumerate() {
        let block = s.expectation_block(i);
        let channel = e.channel();
        match spec.channel_type(&channel) {
            None => issues.push(Issue {
                block,
                kind: IssueKind::UndeclaredChannel { channel },
            }),
            Some(declared) if *declared != e.type_tag => issues.push(Issue {
                block,
                kind: IssueKind::ExpectationTypeMismatch {
                    declared: declared.clone(),
                    found: e.type_tag.clone(),
                },
            }),
            Some(_) => {}
        }
    }
    issues
}
