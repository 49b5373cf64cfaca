use std::collections::BTreeMap;

use thiserror::Error;

use super::interface::CmSlotDecl;
use crate::ident::Ident;
use crate::trace::Payload;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CmError {
    #[error("Common Memory slot {0} is not declared")]
    UndeclaredSlot(Ident),
    #[error("{len}-byte write exceeds the {max}-byte limit of slot {slot}")]
    CmOverflow { slot: Ident, len: usize, max: usize },
}

/// Shared slot store the TUT publishes into.
///
/// Only declared slots are writable and reads never touch the trace.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommonMemory {
    limits: BTreeMap<Ident, Option<usize>>,
    slots: BTreeMap<Ident, Payload>,
}

impl CommonMemory {
    pub fn new<'a>(decls: impl IntoIterator<Item = &'a CmSlotDecl>) -> Self {
        Self {
            limits: decls.into_iter().map(|d| (d.name.clone(), d.max_len)).collect(),
            slots: BTreeMap::new(),
        }
    }

    pub fn is_declared(&self, slot: &Ident) -> bool {
        self.limits.contains_key(slot)
    }

    pub fn write(&mut self, slot: &Ident, payload: Payload) -> Result<(), CmError> {
        let limit = self
            .limits
            .get(slot)
            .ok_or_else(|| CmError::UndeclaredSlot(slot.clone()))?;
        if let Some(max) = *limit {
            if payload.len() > max {
                return Err(CmError::CmOverflow {
                    slot: slot.clone(),
                    len: payload.len(),
                    max,
                });
            }
        }
        self.slots.insert(slot.clone(), payload);
        Ok(())
    }

    /// Last written value, `None` if the slot was never written.
    pub fn read(&self, slot: &Ident) -> Result<Option<&Payload>, CmError> {
        if !self.is_declared(slot) {
            return Err(CmError::UndeclaredSlot(slot.clone()));
        }
        Ok(self.slots.get(slot))
    }

    /// Written slots in name order.
    pub fn snapshot(&self) -> impl Iterator<Item = (&Ident, &Payload)> {
        self.slots.iter()
    }
}

/// Functional form of [`CommonMemory::write`].
pub fn cm_write(mut cm: CommonMemory, slot: &Ident, p: Payload) -> Result<CommonMemory, CmError> {
    cm.write(slot, p)?;
    Ok(cm)
}

pub fn cm_read<'a>(cm: &'a CommonMemory, slot: &Ident) -> Result<Option<&'a Payload>, CmError> {
    cm.read(slot)
}
