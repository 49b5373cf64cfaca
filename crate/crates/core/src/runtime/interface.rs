use std::collections::BTreeSet;

use thiserror::Error;

use crate::blocks::{parse_kind_blocks, BlockWriter};
use crate::ident::{Endpoint, Ident};
use crate::scenario::Fields;
use crate::trace::{Channel, Direction};

/// One message a neighbor exchanges with the TUT.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelDecl {
    pub endpoint: Endpoint,
    pub name: Ident,
    pub type_tag: Ident,
}

impl ChannelDecl {
    pub fn new(endpoint: Endpoint, name: Ident, type_tag: Ident) -> Self {
        Self {
            endpoint,
            name,
            type_tag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmSlotDecl {
    pub name: Ident,
    /// Largest payload the slot accepts; unbounded when absent.
    pub max_len: Option<usize>,
}

/// The TUT's interface: what it consumes, what it emits, and which Common
/// Memory slots it may write.
///
/// An outbound channel on `CM` implies a slot of the same name, and every
/// slot is an outbound `CM` channel, so the two lists need not repeat each
/// other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceSpec {
    pub tut_name: Ident,
    pub inbound: Vec<ChannelDecl>,
    pub outbound: Vec<ChannelDecl>,
    pub cm_slots: Vec<CmSlotDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("{direction} channel {endpoint}/{name} declared twice")]
    DuplicateEndpoint {
        direction: Direction,
        endpoint: Endpoint,
        name: Ident,
    },
    #[error("Common Memory slot {0} declared twice")]
    DuplicateSlot(Ident),
    #[error("interface declares no inbound and no outbound channel")]
    EmptyInterface,
    #[error("Common Memory cannot send to the TUT ({0})")]
    CmInbound(Ident),
}

impl InterfaceSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        for (direction, list) in [(Direction::In, &self.inbound), (Direction::Out, &self.outbound)] {
            let mut seen = BTreeSet::new();
            for d in list {
                if !seen.insert((&d.endpoint, &d.name)) {
                    return Err(SpecError::DuplicateEndpoint {
                        direction,
                        endpoint: d.endpoint.clone(),
                        name: d.name.clone(),
                    });
                }
            }
        }
        if let Some(d) = self.inbound.iter().find(|d| d.endpoint.is_common_memory()) {
            return Err(SpecError::CmInbound(d.name.clone()));
        }
        let mut seen = BTreeSet::new();
        for s in &self.cm_slots {
            if !seen.insert(&s.name) {
                return Err(SpecError::DuplicateSlot(s.name.clone()));
            }
        }
        if self.inbound.is_empty() && self.outbound.is_empty() && self.cm_slots.is_empty() {
            return Err(SpecError::EmptyInterface);
        }
        Ok(())
    }

    pub fn inbound_decl(&self, endpoint: &Endpoint, name: &Ident) -> Option<&ChannelDecl> {
        self.inbound
            .iter()
            .find(|d| &d.endpoint == endpoint && &d.name == name)
    }

    pub fn outbound_decl(&self, endpoint: &Endpoint, name: &Ident) -> Option<&ChannelDecl> {
        self.outbound
            .iter()
            .find(|d| &d.endpoint == endpoint && &d.name == name)
    }

    /// Outbound channels including implied Common Memory slots, in
    /// declaration order.
    pub fn outbound_channels(&self) -> Vec<ChannelDecl> {
        let mut out = self.outbound.clone();
        let cm = Endpoint::common_memory();
        for s in &self.cm_slots {
            if self.outbound_decl(&cm, &s.name).is_none() {
                out.push(ChannelDecl::new(cm.clone(), s.name.clone(), s.name.clone()));
            }
        }
        out
    }

    /// Every writable slot with its limit.
    pub fn effective_cm_slots(&self) -> Vec<CmSlotDecl> {
        let mut slots = self.cm_slots.clone();
        for d in &self.outbound {
            if d.endpoint.is_common_memory() && !slots.iter().any(|s| s.name == d.name) {
                slots.push(CmSlotDecl {
                    name: d.name.clone(),
                    max_len: None,
                });
            }
        }
        slots
    }

    /// Declared type tag of a channel, if the channel exists.
    pub fn channel_type(&self, channel: &Channel) -> Option<&Ident> {
        match channel.direction {
            Direction::In => self
                .inbound_decl(&channel.endpoint, &channel.name)
                .map(|d| &d.type_tag),
            Direction::Out => {
                if let Some(d) = self.outbound_decl(&channel.endpoint, &channel.name) {
                    Some(&d.type_tag)
                } else if channel.endpoint.is_common_memory() {
                    self.cm_slots
                        .iter()
                        .find(|s| s.name == channel.name)
                        .map(|s| &s.name)
                } else {
                    None
                }
            }
        }
    }

    pub fn declares(&self, channel: &Channel) -> bool {
        self.channel_type(channel).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterfaceFileError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Invalid(#[from] SpecError),
}

/// Parses a `.tutspec` file: one `TUT` block (`NAME`), then any number of
/// `INBOUND` (`SOURCE`, `NAME`, `TYPE`), `OUTBOUND` (`DEST`, `NAME`, `TYPE`)
/// and `CM_SLOT` (`NAME`, optional `MAX_LEN`) blocks.
pub fn parse_interface(text: &str) -> Result<InterfaceSpec, InterfaceFileError> {
    let malformed = |(line, reason): (usize, String)| InterfaceFileError::Malformed { line, reason };
    let blocks = parse_kind_blocks(text).map_err(|e| InterfaceFileError::Malformed {
        line: e.line(),
        reason: e.to_string(),
    })?;
    let mut tut_name = None;
    let (mut inbound, mut outbound, mut cm_slots) = (vec![], vec![], vec![]);
    for b in &blocks {
        match b.kind.as_str() {
            "TUT" => {
                let f = Fields::new(b, &["NAME"]).map_err(malformed)?;
                if tut_name.is_some() {
                    return Err(malformed((b.line, "second TUT block".into())));
                }
                tut_name = Some(f.parse::<Ident>("NAME").map_err(malformed)?);
            }
            "INBOUND" => {
                let f = Fields::new(b, &["SOURCE", "NAME", "TYPE"]).map_err(malformed)?;
                inbound.push(ChannelDecl::new(
                    f.parse("SOURCE").map_err(malformed)?,
                    f.parse("NAME").map_err(malformed)?,
                    f.parse("TYPE").map_err(malformed)?,
                ));
            }
            "OUTBOUND" => {
                let f = Fields::new(b, &["DEST", "NAME", "TYPE"]).map_err(malformed)?;
                outbound.push(ChannelDecl::new(
                    f.parse("DEST").map_err(malformed)?,
                    f.parse("NAME").map_err(malformed)?,
                    f.parse("TYPE").map_err(malformed)?,
                ));
            }
            "CM_SLOT" => {
                let f = Fields::new(b, &["NAME", "MAX_LEN"]).map_err(malformed)?;
                let max_len = match f.opt("MAX_LEN") {
                    None => None,
                    Some((line, v)) => Some(v.parse::<usize>().map_err(|_| {
                        InterfaceFileError::Malformed {
                            line,
                            reason: format!("MAX_LEN: bad integer {v:?}"),
                        }
                    })?),
                };
                cm_slots.push(CmSlotDecl {
                    name: f.parse("NAME").map_err(malformed)?,
                    max_len,
                });
            }
            other => {
                return Err(malformed((b.line, format!("unknown block type {other:?}"))));
            }
        }
    }
    let spec = InterfaceSpec {
        tut_name: tut_name.ok_or(InterfaceFileError::Malformed {
            line: 1,
            reason: "missing TUT block".into(),
        })?,
        inbound,
        outbound,
        cm_slots,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn serialize_interface(spec: &InterfaceSpec) -> String {
    let mut w = BlockWriter::new();
    w.begin(Some("TUT")).pair("NAME", &spec.tut_name);
    for d in &spec.inbound {
        w.begin(Some("INBOUND"))
            .pair("SOURCE", &d.endpoint)
            .pair("NAME", &d.name)
            .pair("TYPE", &d.type_tag);
    }
    for d in &spec.outbound {
        w.begin(Some("OUTBOUND"))
            .pair("DEST", &d.endpoint)
            .pair("NAME", &d.name)
            .pair("TYPE", &d.type_tag);
    }
    for s in &spec.cm_slots {
        w.begin(Some("CM_SLOT")).pair("NAME", &s.name);
        if let Some(m) = s.max_len {
            w.pair("MAX_LEN", m);
        }
    }
    w.finish()
}
