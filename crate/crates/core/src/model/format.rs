//! `.tutsm` state-chart files.
//!
//! ```text
//! STATE
//! NAME: IDLE
//! INITIAL: yes
//!
//! TRANSITION
//! FROM: IDLE
//! TO: RUN
//! TRIGGER_NAME: START
//! TRIGGER_TYPE: D_CHANGE_BTN
//! TRIGGER_PAYLOAD: 01000000
//! OUTPUT_SOURCE: CM
//! OUTPUT_DIRECTION: OUT
//! OUTPUT_NAME: STATE
//! OUTPUT_TYPE: STATE
//! OUTPUT_PAYLOAD: 01
//! ```
//!
//! A transition may repeat the `OUTPUT_*` group; each `OUTPUT_SOURCE`
//! starts a new output and `OUTPUT_DIRECTION` defaults to `OUT`.

use thiserror::Error;

use super::chart::{ChartError, Output, Site, StateChart, StateDecl, Transition, Trigger};
use crate::blocks::{parse_kind_blocks, BlockWriter, KindBlock, Pair};
use crate::ident::{Endpoint, Ident};
use crate::scenario::Fields;
use crate::trace::{decode_payload, Direction, Payload};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChartFileError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: {error}")]
    Invalid { line: usize, error: ChartError },
}

impl ChartFileError {
    pub fn chart_error(&self) -> Option<&ChartError> {
        match self {
            ChartFileError::Invalid { error, .. } => Some(error),
            ChartFileError::Malformed { .. } => None,
        }
    }
}

const TRANSITION_KEYS: &[&str] = &["FROM", "TO", "TRIGGER_NAME", "TRIGGER_TYPE", "TRIGGER_PAYLOAD"];

pub fn parse_statechart(text: &str) -> Result<StateChart, ChartFileError> {
    let malformed = |(line, reason): (usize, String)| ChartFileError::Malformed { line, reason };
    let blocks = parse_kind_blocks(text).map_err(|e| ChartFileError::Malformed {
        line: e.line(),
        reason: e.to_string(),
    })?;
    let mut states = Vec::new();
    let mut state_lines = Vec::new();
    let mut transitions = Vec::new();
    let mut transition_lines = Vec::new();
    for b in &blocks {
        match b.kind.as_str() {
            "STATE" => {
                let f = Fields::new(b, &["NAME", "PARENT", "INITIAL"]).map_err(malformed)?;
                let initial = match f.opt("INITIAL") {
                    None | Some((_, "no")) => false,
                    Some((_, "yes")) => true,
                    Some((line, v)) => {
                        return Err(malformed((line, format!("INITIAL must be yes or no, found {v:?}"))))
                    }
                };
                let parent = match f.opt("PARENT") {
                    None => None,
                    Some((line, v)) => Some(
                        Ident::new(v).map_err(|e| malformed((line, format!("PARENT: {e}"))))?,
                    ),
                };
                states.push(StateDecl {
                    name: f.parse("NAME").map_err(malformed)?,
                    parent,
                    initial,
                });
                state_lines.push(b.line);
            }
            "TRANSITION" => {
                transitions.push(parse_transition(b).map_err(malformed)?);
                transition_lines.push(b.line);
            }
            other => return Err(malformed((b.line, format!("unknown block type {other:?}")))),
        }
    }
    StateChart::new(states, transitions).map_err(|error| {
        let line = match error.site() {
            Some(Site::State(i)) => state_lines[i],
            Some(Site::Transition(i)) => transition_lines[i],
            None => 1,
        };
        ChartFileError::Invalid { line, error }
    })
}

fn parse_transition(b: &KindBlock) -> Result<Transition, (usize, String)> {
    let head: Vec<Pair> = b
        .pairs
        .iter()
        .take_while(|p| !p.key.starts_with("OUTPUT_"))
        .cloned()
        .collect();
    let head_block = KindBlock {
        pairs: head,
        ..b.clone()
    };
    let f = Fields::new(&head_block, TRANSITION_KEYS)?;
    let mut outputs = Vec::new();
    let mut group: Vec<&Pair> = Vec::new();
    let rest = &b.pairs[head_block.pairs.len()..];
    for p in rest {
        if p.key == "OUTPUT_SOURCE" && !group.is_empty() {
            outputs.push(parse_output(&group)?);
            group.clear();
        }
        group.push(p);
    }
    if !group.is_empty() {
        outputs.push(parse_output(&group)?);
    }
    Ok(Transition {
        from: f.parse("FROM")?,
        to: f.parse("TO")?,
        trigger: Trigger {
            name: f.parse("TRIGGER_NAME")?,
            type_tag: f.parse("TRIGGER_TYPE")?,
            payload: f.payload("TRIGGER_PAYLOAD")?,
        },
        outputs,
    })
}

fn parse_output(group: &[&Pair]) -> Result<Output, (usize, String)> {
    let line = group[0].line;
    if group[0].key != "OUTPUT_SOURCE" {
        return Err((line, format!("{} before OUTPUT_SOURCE", group[0].key)));
    }
    let get = |key: &str| -> Result<Option<&Pair>, (usize, String)> {
        let mut hits = group.iter().filter(|p| p.key == key);
        let first = hits.next().copied();
        if let Some(dup) = hits.next() {
            return Err((dup.line, format!("duplicate key {key}")));
        }
        Ok(first)
    };
    for p in group {
        if !matches!(
            p.key.as_str(),
            "OUTPUT_SOURCE" | "OUTPUT_DIRECTION" | "OUTPUT_NAME" | "OUTPUT_TYPE" | "OUTPUT_PAYLOAD"
        ) {
            return Err((p.line, format!("unexpected key {} in TRANSITION", p.key)));
        }
    }
    let req = |key: &str| -> Result<&Pair, (usize, String)> {
        get(key)?.ok_or_else(|| (line, format!("output lacks {key}")))
    };
    let ident = |key: &str| -> Result<Ident, (usize, String)> {
        let p = req(key)?;
        Ident::new(p.value.as_str()).map_err(|e| (p.line, format!("{key}: {e}")))
    };
    let direction = match get("OUTPUT_DIRECTION")? {
        None => Direction::Out,
        Some(p) => p
            .value
            .parse()
            .map_err(|e| (p.line, format!("OUTPUT_DIRECTION: {e}")))?,
    };
    let payload_pair = req("OUTPUT_PAYLOAD")?;
    let payload: Payload = decode_payload(&payload_pair.value)
        .map_err(|e| (payload_pair.line, format!("OUTPUT_PAYLOAD: {e}")))?;
    Ok(Output {
        source: Endpoint::new(ident("OUTPUT_SOURCE")?),
        direction,
        name: ident("OUTPUT_NAME")?,
        type_tag: ident("OUTPUT_TYPE")?,
        payload,
    })
}

pub fn serialize_statechart(chart: &StateChart) -> String {
    let mut w = BlockWriter::new();
    for s in chart.states() {
        w.begin(Some("STATE")).pair("NAME", &s.name);
        if let Some(p) = &s.parent {
            w.pair("PARENT", p);
        }
        w.pair("INITIAL", if s.initial { "yes" } else { "no" });
    }
    for t in chart.transitions() {
        w.begin(Some("TRANSITION"))
            .pair("FROM", &t.from)
            .pair("TO", &t.to)
            .pair("TRIGGER_NAME", &t.trigger.name)
            .pair("TRIGGER_TYPE", &t.trigger.type_tag)
            .pair("TRIGGER_PAYLOAD", &t.trigger.payload);
        for o in &t.outputs {
            w.pair("OUTPUT_SOURCE", &o.source)
                .pair("OUTPUT_DIRECTION", o.direction)
                .pair("OUTPUT_NAME", &o.name)
                .pair("OUTPUT_TYPE", &o.type_tag)
                .pair("OUTPUT_PAYLOAD", &o.payload);
        }
    }
    w.finish()
}
