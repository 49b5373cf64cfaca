use std::collections::VecDeque;

use thiserror::Error;

use super::env::Environment;
use super::memory::{CmError, CommonMemory};
use crate::ident::{Endpoint, Ident};
use crate::scenario::Scenario;
use crate::trace::{serialize_log, Direction, LogRecord, Message, Payload, Relevance, Stamp, Status};

pub const DEFAULT_TIMER_PERIOD_MS: u64 = 250;
pub const DEFAULT_LIVELOCK_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("tick {tick_ms}: more than {cap} handler activations, TUT does not quiesce")]
    LivelockDetected { tick_ms: u64, cap: usize },
    #[error("{endpoint} has no channel named {name}")]
    UnknownTarget { endpoint: Endpoint, name: Ident },
    #[error(transparent)]
    Cm(#[from] CmError),
    #[error("timer period must be positive")]
    ZeroTimerPeriod,
    #[error("injection at {tick_ms} ms is after the {duration_ms} ms run")]
    InjectionAfterEnd { tick_ms: u64, duration_ms: u64 },
}

/// The code under test, as a pair of deterministic handlers.
pub trait TutBehavior {
    /// Period used when neither the scenario nor the caller sets one.
    fn timer_period_ms(&self) -> u64 {
        DEFAULT_TIMER_PERIOD_MS
    }

    fn on_message(&mut self, msg: &Message, ctx: &mut TaskContext<'_>) -> Result<(), RuntimeError>;

    fn on_timer(&mut self, _tick_ms: u64, _ctx: &mut TaskContext<'_>) -> Result<(), RuntimeError> {
        Ok(())
    }
}

struct Recorder {
    stamp: Stamp,
    records: Vec<LogRecord>,
}

impl Recorder {
    fn record(&mut self, tick_ms: u64, source: &Endpoint, direction: Direction, name: &Ident, type_tag: &Ident, payload: Payload, status: Option<Status>) {
        self.records.push(LogRecord {
            log_cnt: self.records.len() as u64 + 1,
            time: self.stamp,
            tick_ms: Some(tick_ms),
            source: source.clone(),
            direction,
            name: name.clone(),
            type_tag: type_tag.clone(),
            relevance: Relevance::Info,
            tolerance: 0,
            expected: None,
            actual: Some(payload),
            status,
            info: None,
        });
    }
}

/// What a handler may do while it runs.
pub struct TaskContext<'a> {
    tick_ms: u64,
    tut: &'a Endpoint,
    env: &'a Environment,
    cm: &'a mut CommonMemory,
    recorder: &'a mut Recorder,
    queue: &'a mut VecDeque<Message>,
}

impl TaskContext<'_> {
    pub fn tick_ms(&self) -> u64 {
        self.tick_ms
    }

    pub fn environment(&self) -> &Environment {
        self.env
    }

    /// Emits a message to a neighbor. Sending to `CM` writes the slot named
    /// `name`.
    pub fn send(&mut self, dest: &Endpoint, name: &Ident, type_tag: &Ident, payload: Payload) -> Result<(), RuntimeError> {
        if dest.is_common_memory() {
            self.cm.write(name, payload.clone())?;
        } else if self.env.spec().outbound_decl(dest, name).is_none() {
            return Err(RuntimeError::UnknownTarget {
                endpoint: dest.clone(),
                name: name.clone(),
            });
        }
        self.recorder
            .record(self.tick_ms, dest, Direction::Out, name, type_tag, payload, None);
        Ok(())
    }

    pub fn cm_write(&mut self, slot: &Ident, payload: Payload) -> Result<(), RuntimeError> {
        let cm = Endpoint::common_memory();
        let type_tag = self
            .env
            .spec()
            .outbound_decl(&cm, slot)
            .map_or_else(|| slot.clone(), |d| d.type_tag.clone());
        self.send(&cm, slot, &type_tag, payload)
    }

    /// Passive read; leaves no trace record.
    pub fn cm_read(&self, slot: &Ident) -> Result<Option<&Payload>, RuntimeError> {
        Ok(self.cm.read(slot)?)
    }

    /// Queues a message to the TUT itself, delivered later in this tick.
    pub fn post_self(&mut self, name: Ident, type_tag: Ident, payload: Payload) {
        self.queue.push_back(Message {
            name,
            type_tag,
            payload,
            source: self.tut.clone(),
            direction: Direction::In,
            tick_ms: self.tick_ms,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    /// Constant TIME stamped on every record of the run.
    pub run_stamp: Stamp,
    /// Overrides both the scenario's and the behavior's period.
    pub timer_period_ms: Option<u64>,
    pub livelock_cap: usize,
}

impl RunConfig {
    pub fn new(run_stamp: Stamp) -> Self {
        Self {
            run_stamp,
            timer_period_ms: None,
            livelock_cap: DEFAULT_LIVELOCK_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub records: Vec<LogRecord>,
    pub final_cm: CommonMemory,
    pub duration_ms: u64,
}

impl Trace {
    pub fn to_log_text(&self) -> String {
        serialize_log(&self.records)
    }
}

/// Runs one scenario on a 1 ms clock from 0 to `duration_ms` inclusive.
///
/// Each tick delivers the scenario's injections for that tick in script
/// order, then fires the timer handler when the tick is a positive multiple
/// of the period, then drains the TUT queue.
pub fn run_simulation(
    scenario: &Scenario,
    behavior: &mut dyn TutBehavior,
    env: &Environment,
    config: &RunConfig,
) -> Result<Trace, RuntimeError> {
    let period = config
        .timer_period_ms
        .or(scenario.tick_period_ms)
        .unwrap_or_else(|| behavior.timer_period_ms());
    if period == 0 {
        return Err(RuntimeError::ZeroTimerPeriod);
    }
    let mut injections: Vec<_> = scenario.injections.iter().collect();
    injections.sort_by_key(|i| i.tick_ms);
    if let Some(late) = injections.last().filter(|i| i.tick_ms > scenario.duration_ms) {
        return Err(RuntimeError::InjectionAfterEnd {
            tick_ms: late.tick_ms,
            duration_ms: scenario.duration_ms,
        });
    }

    let tut = Endpoint::task(env.spec().tut_name.clone());
    let mut cm = env.fresh_memory();
    let mut recorder = Recorder {
        stamp: config.run_stamp,
        records: Vec::new(),
    };
    let mut queue = VecDeque::new();
    let mut pending = injections.into_iter().peekable();

    for tick_ms in 0..=scenario.duration_ms {
        while let Some(inj) = pending.next_if(|i| i.tick_ms == tick_ms) {
            if env.spec().inbound_decl(&inj.target, &inj.name).is_none() {
                return Err(RuntimeError::UnknownTarget {
                    endpoint: inj.target.clone(),
                    name: inj.name.clone(),
                });
            }
            recorder.record(tick_ms, &inj.target, Direction::In, &inj.name, &inj.type_tag, inj.payload.clone(), Some(Status::Ok));
            queue.push_back(Message {
                name: inj.name.clone(),
                type_tag: inj.type_tag.clone(),
                payload: inj.payload.clone(),
                source: inj.target.clone(),
                direction: Direction::In,
                tick_ms,
            });
        }

        let mut ctx = TaskContext {
            tick_ms,
            tut: &tut,
            env,
            cm: &mut cm,
            recorder: &mut recorder,
            queue: &mut queue,
        };
        let mut activations = 0usize;
        if tick_ms > 0 && tick_ms % period == 0 {
            activations += 1;
            behavior.on_timer(tick_ms, &mut ctx)?;
        }
        while let Some(msg) = ctx.queue.pop_front() {
            activations += 1;
            if activations > config.livelock_cap {
                return Err(RuntimeError::LivelockDetected {
                    tick_ms,
                    cap: config.livelock_cap,
                });
            }
            behavior.on_message(&msg, &mut ctx)?;
        }
    }

    Ok(Trace {
        records: recorder.records,
        final_cm: cm,
        duration_ms: scenario.duration_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ident::{endpoint, ident};
    use crate::runtime::behaviors::{EchoToCm, TimerHeartbeat};
    use crate::runtime::{generate_environment, ChannelDecl, CmSlotDecl, InterfaceSpec};
    use crate::scenario::Injection;

    fn stamp() -> Stamp {
        "2013.09.02_12:28:39".parse().unwrap()
    }

    fn spec(max_len: Option<usize>) -> InterfaceSpec {
        InterfaceSpec {
            tut_name: ident("DSS"),
            inbound: vec![ChannelDecl::new(endpoint("KEYPAD"), ident("D_CHANGE_BTN"), ident("D_CHANGE_BTN"))],
            outbound: vec![ChannelDecl::new(endpoint("GUI"), ident("HEARTBEAT"), ident("T_BEAT"))],
            cm_slots: vec![CmSlotDecl {
                name: ident("D_CHANGE_BTN"),
                max_len,
            }],
        }
    }

    fn inject(tick_ms: u64, target: &str, payload: &str) -> Injection {
        Injection {
            tick_ms,
            target: endpoint(target),
            name: ident("D_CHANGE_BTN"),
            type_tag: ident("D_CHANGE_BTN"),
            payload: payload.parse().unwrap(),
        }
    }

    fn run(scenario: &Scenario, behavior: &mut dyn TutBehavior, spec: &InterfaceSpec) -> Result<Trace, RuntimeError> {
        let env = generate_environment(spec).unwrap();
        run_simulation(scenario, behavior, &env, &RunConfig::new(stamp()))
    }

    #[test]
    fn empty_scenario_empty_trace() {
        let trace = run(&Scenario::default(), &mut EchoToCm, &spec(None)).unwrap();
        assert!(trace.records.is_empty());
        assert_eq!(trace.to_log_text(), "");
    }

    #[test]
    fn echo_writes_cm() {
        let scenario = Scenario {
            duration_ms: 10,
            injections: vec![inject(5, "KEYPAD", "02000000")],
            ..Scenario::default()
        };
        let trace = run(&scenario, &mut EchoToCm, &spec(None)).unwrap();
        let outs: Vec<_> = trace.records.iter().filter(|r| r.direction == Direction::Out).collect();
        assert_eq!(outs.len(), 1);
        assert_eq!(outs[0].source, endpoint("CM"));
        assert_eq!(outs[0].tick_ms, Some(5));
        assert_eq!(outs[0].actual.as_ref().unwrap().to_string(), "02000000");
        assert_eq!(trace.records[0].status, Some(Status::Ok));
        assert_eq!(
            trace.final_cm.read(&ident("D_CHANGE_BTN")).unwrap().unwrap().bytes(),
            [2, 0, 0, 0]
        );
    }

    #[test]
    fn heartbeat_every_period() {
        let s = spec(None);
        let mut hb = TimerHeartbeat::for_spec(&s).unwrap();
        let scenario = Scenario {
            duration_ms: 1000,
            ..Scenario::default()
        };
        let trace = run(&scenario, &mut hb, &s).unwrap();
        let ticks: Vec<_> = trace.records.iter().map(|r| r.tick_ms.unwrap()).collect();
        assert_eq!(ticks, [250, 500, 750, 1000]);
        assert_eq!(trace.records[3].actual.as_ref().unwrap().bytes(), 4u32.to_le_bytes());
    }

    #[test]
    fn period_precedence() {
        let s = spec(None);
        let mut scenario = Scenario {
            duration_ms: 100,
            tick_period_ms: Some(10),
            ..Scenario::default()
        };
        let env = generate_environment(&s).unwrap();
        let mut config = RunConfig::new(stamp());
        let count = |sc: &Scenario, cfg: &RunConfig| {
            let mut hb = TimerHeartbeat::for_spec(&s).unwrap();
            run_simulation(sc, &mut hb, &env, cfg).unwrap().records.len()
        };
        assert_eq!(count(&scenario, &config), 10);
        config.timer_period_ms = Some(25);
        assert_eq!(count(&scenario, &config), 4);
        config.timer_period_ms = None;
        scenario.tick_period_ms = None;
        assert_eq!(count(&scenario, &config), 0);
        scenario.tick_period_ms = Some(0);
        let mut hb = TimerHeartbeat::for_spec(&s).unwrap();
        assert_eq!(
            run_simulation(&scenario, &mut hb, &env, &config),
            Err(RuntimeError::ZeroTimerPeriod)
        );
    }

    struct Bouncer;

    impl TutBehavior for Bouncer {
        fn on_message(&mut self, msg: &Message, ctx: &mut TaskContext<'_>) -> Result<(), RuntimeError> {
            ctx.post_self(msg.name.clone(), msg.type_tag.clone(), msg.payload.clone());
            Ok(())
        }
    }

    #[test]
    fn livelock_is_reported() {
        let scenario = Scenario {
            duration_ms: 3,
            injections: vec![inject(2, "KEYPAD", "00")],
            ..Scenario::default()
        };
        let env = generate_environment(&spec(None)).unwrap();
        let mut config = RunConfig::new(stamp());
        config.livelock_cap = 50;
        assert_eq!(
            run_simulation(&scenario, &mut Bouncer, &env, &config),
            Err(RuntimeError::LivelockDetected { tick_ms: 2, cap: 50 })
        );
    }

    #[test]
    fn unknown_target_and_overflow() {
        let scenario = Scenario {
            duration_ms: 3,
            injections: vec![inject(1, "NOBODY", "00")],
            ..Scenario::default()
        };
        assert!(matches!(
            run(&scenario, &mut EchoToCm, &spec(None)),
            Err(RuntimeError::UnknownTarget { .. })
        ));
        let scenario = Scenario {
            duration_ms: 3,
            injections: vec![inject(1, "KEYPAD", "0102")],
            ..Scenario::default()
        };
        assert_eq!(
            run(&scenario, &mut EchoToCm, &spec(Some(1))),
            Err(RuntimeError::Cm(CmError::CmOverflow {
                slot: ident("D_CHANGE_BTN"),
                len: 2,
                max: 1
            }))
        );
    }

    #[test]
    fn injection_after_end() {
        let scenario = Scenario {
            duration_ms: 3,
            injections: vec![inject(4, "KEYPAD", "00")],
            ..Scenario::default()
        };
        assert_eq!(
            run(&scenario, &mut EchoToCm, &spec(None)),
            Err(RuntimeError::InjectionAfterEnd { tick_ms: 4, duration_ms: 3 })
        );
    }
}
