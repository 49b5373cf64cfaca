//! Built-in demonstration behaviors.

use super::interface::{ChannelDecl, InterfaceSpec};
use super::sim::{RuntimeError, TaskContext, TutBehavior, DEFAULT_TIMER_PERIOD_MS};
use crate::trace::{Message, Payload};

/// Writes every inbound message unchanged to the Common Memory slot of the
/// same name.
#[derive(Debug, Clone, Default)]
pub struct EchoToCm;

impl TutBehavior for EchoToCm {
    fn on_message(&mut self, msg: &Message, ctx: &mut TaskContext<'_>) -> Result<(), RuntimeError> {
        ctx.cm_write(&msg.name, msg.payload.clone())
    }
}

/// Emits one message per timer period carrying the beat count as a
/// little-endian `u32`. Ignores inbound traffic.
#[derive(Debug, Clone)]
pub struct TimerHeartbeat {
    pub channel: ChannelDecl,
    pub period_ms: u64,
    beats: u32,
}

impl TimerHeartbeat {
    pub fn new(channel: ChannelDecl, period_ms: u64) -> Self {
        Self {
            channel,
            period_ms,
            beats: 0,
        }
    }

    /// Uses the outbound channel named `HEARTBEAT`, else the first one.
    pub fn for_spec(spec: &InterfaceSpec) -> Option<Self> {
        let outs = spec.outbound_channels();
        let channel = outs
            .iter()
            .find(|d| d.name == "HEARTBEAT")
            .or_else(|| outs.first())?
            .clone();
        Some(Self::new(channel, DEFAULT_TIMER_PERIOD_MS))
    }
}

impl TutBehavior for TimerHeartbeat {
    fn timer_period_ms(&self) -> u64 {
        self.period_ms
    }

    fn on_message(&mut self, _msg: &Message, _ctx: &mut TaskContext<'_>) -> Result<(), RuntimeError> {
        Ok(())
    }

    fn on_timer(&mut self, _tick_ms: u64, ctx: &mut TaskContext<'_>) -> Result<(), RuntimeError> {
        self.beats += 1;
        let c = &self.channel;
        ctx.send(&c.endpoint, &c.name, &c.type_tag, Payload::new(self.beats.to_le_bytes()))
    }
}
