use super::chart::Trigger;
use super::lts::Lts;
use crate::runtime::{RuntimeError, TaskContext, TutBehavior};
use crate::trace::Message;

/// Runs the model itself as the TUT: each inbound message is looked up as
/// a trigger from the current node and the edge's outputs are emitted.
/// Messages with no edge are ignored.
#[derive(Debug, Clone)]
pub struct LtsBehavior {
    lts: Lts,
    node: usize,
}

impl LtsBehavior {
    pub fn new(lts: Lts) -> Self {
        let node = lts.initial();
        Self { lts, node }
    }

    pub fn current(&self) -> usize {
        self.node
    }
}

impl TutBehavior for LtsBehavior {
    fn on_message(&mut self, msg: &Message, ctx: &mut TaskContext<'_>) -> Result<(), RuntimeError> {
        let trigger = Trigger {
            name: msg.name.clone(),
            type_tag: msg.type_tag.clone(),
            payload: msg.payload.clone(),
        };
        let Some(e) = self.lts.step(self.node, &trigger) else {
            return Ok(());
        };
        let edge = &self.lts.edges()[e];
        for o in &edge.outputs {
            ctx.send(&o.source, &o.name, &o.type_tag, o.payload.clone())?;
        }
        self.node = edge.to;
        Ok(())
    }
}
