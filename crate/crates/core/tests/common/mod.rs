//! Random generators and independent oracles shared by the integration
//! tests. Oracles here never call the library's own algorithm for the
//! property they check.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use tut_harness::analyzer::{compute_coverage, compute_verdict, CheckResult, CoverageMetrics, Outcome};
use tut_harness::ident::{endpoint, ident};
use tut_harness::model::{Edge, Lts, Output, StateChart, StateDecl, Transition, Trigger};
use tut_harness::report::ReportBundle;
use tut_harness::runtime::{ChannelDecl, CmSlotDecl, InterfaceSpec};
use tut_harness::scenario::{Expectation, Injection, Scenario};
use tut_harness::{Direction, Endpoint, LogRecord, Payload, Relevance, Stamp, Status};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixed_stamp() -> Stamp {
    "2013.09.02_12:28:39".parse().unwrap()
}

// ---- generators ----

pub fn payload(rng: &mut StdRng, max_len: usize) -> Payload {
    let len = rng.gen_range(0..=max_len);
    Payload::new((0..len).map(|_| rng.gen::<u8>()).collect::<Vec<u8>>())
}

pub fn stamp(rng: &mut StdRng) -> Stamp {
    let s = format!(
        "{:04}.{:02}.{:02}_{:02}:{:02}:{:02}",
        rng.gen_range(1990..2040),
        rng.gen_range(1..=12),
        rng.gen_range(1..=28),
        rng.gen_range(0..24),
        rng.gen_range(0..60),
        rng.gen_range(0..60)
    );
    s.parse().unwrap()
}

const ENDPOINTS: [&str; 5] = ["CM", "CSS", "KEYPAD", "DUMP_MERIT_SENDER", "PSS_2"];
const NAMES: [&str; 5] = ["D_CHANGE_BTN", "SEND", "D_PREP_PREV_BTN", "ACK", "X1"];
const WORDS: [&str; 6] = ["ok", "retry", "late", "x=1", "a;b", "n/a"];

fn pick<'a>(rng: &mut StdRng, from: &[&'a str]) -> &'a str {
    from.choose(rng).unwrap()
}

pub fn info_text(rng: &mut StdRng) -> String {
    let n = rng.gen_range(1..=3);
    (0..n).map(|_| pick(rng, &WORDS)).collect::<Vec<_>>().join(" ")
}

pub fn log_record(rng: &mut StdRng, log_cnt: u64, time: Stamp) -> LogRecord {
    let (expected, actual) = match rng.gen_range(0..3) {
        0 => (Some(payload(rng, 12)), None),
        1 => (None, Some(payload(rng, 12))),
        _ => (Some(payload(rng, 12)), Some(payload(rng, 12))),
    };
    LogRecord {
        log_cnt,
        time,
        tick_ms: rng.gen_bool(0.5).then(|| rng.gen_range(0..100_000)),
        source: endpoint(pick(rng, &ENDPOINTS)),
        direction: if rng.gen() { Direction::In } else { Direction::Out },
        name: ident(pick(rng, &NAMES)),
        type_tag: ident(pick(rng, &NAMES)),
        relevance: if rng.gen() { Relevance::Check } else { Relevance::Info },
        tolerance: if rng.gen() { 0 } else { rng.gen_range(0..1000) },
        expected,
        actual,
        status: [None, Some(Status::Ok), Some(Status::Fail), Some(Status::Missing)]
            .choose(rng)
            .unwrap()
            .clone(),
        info: rng.gen_bool(0.3).then(|| info_text(rng)),
    }
}

pub fn log(rng: &mut StdRng, max_records: usize) -> Vec<LogRecord> {
    let n = rng.gen_range(0..=max_records);
    let time = stamp(rng);
    let mut cnt = 0;
    (0..n)
        .map(|_| {
            cnt += rng.gen_range(1..4);
            log_record(rng, cnt, time)
        })
        .collect()
}

pub fn scenario(rng: &mut StdRng) -> Scenario {
    let duration_ms = rng.gen_range(1..5000);
    let mut ticks: Vec<u64> = (0..rng.gen_range(0..6)).map(|_| rng.gen_range(0..=duration_ms)).collect();
    ticks.sort();
    let title = match rng.gen_range(0..3) {
        0 => String::new(),
        1 => "button change".to_string(),
        _ => format!("path {}: A > B", rng.gen_range(1..99)),
    };
    Scenario {
        title,
        duration_ms,
        tick_period_ms: rng.gen_bool(0.5).then(|| rng.gen_range(1..500)),
        injections: ticks
            .into_iter()
            .map(|tick_ms| Injection {
                tick_ms,
                target: endpoint(pick(rng, &ENDPOINTS[1..])),
                name: ident(pick(rng, &NAMES)),
                type_tag: ident(pick(rng, &NAMES)),
                payload: payload(rng, 10),
            })
            .collect(),
        expectations: (0..rng.gen_range(0..6))
            .map(|_| Expectation {
                source: endpoint(pick(rng, &ENDPOINTS)),
                direction: if rng.gen() { Direction::In } else { Direction::Out },
                name: ident(pick(rng, &NAMES)),
                type_tag: ident(pick(rng, &NAMES)),
                relevance: if rng.gen() { Relevance::Check } else { Relevance::Info },
                tolerance: rng.gen_range(0..10),
                expected: payload(rng, 10),
            })
            .collect(),
    }
}

fn trigger(name: &str, payload: Payload) -> Trigger {
    Trigger {
        name: ident(name),
        type_tag: ident("T_KEY"),
        payload,
    }
}

const TRIGGERS: [&str; 3] = ["K_UP", "K_DOWN", "K_OK"];

fn small_payload(rng: &mut StdRng) -> Payload {
    Payload::new(vec![rng.gen_range(0..2u8)])
}

/// An output on a channel of [`demo_spec`].
pub fn output(rng: &mut StdRng) -> Output {
    let (source, name, type_tag) = *[("CM", "D_A", "D_A"), ("CM", "D_B", "D_B"), ("CSS", "ACK", "T_ACK")]
        .choose(rng)
        .unwrap();
    Output {
        source: endpoint(source),
        direction: Direction::Out,
        name: ident(name),
        type_tag: ident(type_tag),
        payload: payload(rng, 8),
    }
}

/// Interface every generated chart and LTS conforms to.
pub fn demo_spec() -> InterfaceSpec {
    InterfaceSpec {
        tut_name: ident("DSS"),
        inbound: TRIGGERS
            .iter()
            .map(|t| ChannelDecl::new(endpoint("KEYPAD"), ident(t), ident("T_KEY")))
            .collect(),
        outbound: vec![ChannelDecl::new(endpoint("CSS"), ident("ACK"), ident("T_ACK"))],
        cm_slots: vec![
            CmSlotDecl {
                name: ident("D_A"),
                max_len: None,
            },
            CmSlotDecl {
                name: ident("D_B"),
                max_len: None,
            },
        ],
    }
}

/// A valid OR-hierarchical chart with up to `max_states` states and
/// `max_transitions` transitions. Transitions that would make the chart
/// invalid are dropped.
pub fn statechart(rng: &mut StdRng, max_states: usize, max_transitions: usize) -> StateChart {
    let n = rng.gen_range(1..=max_states);
    let names: Vec<String> = (0..n).map(|i| format!("S{i}")).collect();
    let parents: Vec<Option<usize>> = (0..n)
        .map(|i| (i > 0 && rng.gen_bool(0.4)).then(|| rng.gen_range(0..i)))
        .collect();
    let mut initial = vec![false; n];
    let mut groups: BTreeMap<Option<usize>, Vec<usize>> = BTreeMap::new();
    for (i, p) in parents.iter().enumerate() {
        groups.entry(*p).or_default().push(i);
    }
    for members in groups.values() {
        initial[*members.choose(rng).unwrap()] = true;
    }
    let states: Vec<StateDecl> = (0..n)
        .map(|i| StateDecl {
            name: ident(&names[i]),
            parent: parents[i].map(|p| ident(&names[p])),
            initial: initial[i],
        })
        .collect();
    let mut chart = StateChart::new(states.clone(), vec![]).expect("generated hierarchy is valid");
    let mut transitions = Vec::new();
    for _ in 0..rng.gen_range(0..=max_transitions) {
        let t = Transition {
            from: ident(&names[rng.gen_range(0..n)]),
            to: ident(&names[rng.gen_range(0..n)]),
            trigger: trigger(pick(rng, &TRIGGERS), small_payload(rng)),
            outputs: (0..rng.gen_range(0..3)).map(|_| output(rng)).collect(),
        };
        transitions.push(t);
        match StateChart::new(states.clone(), transitions.clone()) {
            Ok(c) => chart = c,
            Err(_) => {
                transitions.pop();
            }
        }
    }
    chart
}

/// Random deterministic LTS; node 0 is initial.
pub fn lts(rng: &mut StdRng, max_nodes: usize) -> Lts {
    let n = rng.gen_range(1..=max_nodes);
    let mut edges = Vec::new();
    for from in 0..n {
        for t in TRIGGERS {
            for p in 0..2u8 {
                if rng.gen_bool(0.12) {
                    edges.push(Edge {
                        from,
                        trigger: trigger(t, Payload::new(vec![p])),
                        outputs: (0..rng.gen_range(0..3)).map(|_| output(rng)).collect(),
                        to: rng.gen_range(0..n),
                    });
                }
            }
        }
    }
    edges.shuffle(rng);
    Lts::new(node_names(n), 0, edges).unwrap()
}

fn node_names(n: usize) -> Vec<tut_harness::Ident> {
    (0..n).map(|i| ident(&format!("N{i}"))).collect()
}

/// Random deterministic LTS in which every node is reachable from node 0.
pub fn reachable_lts(rng: &mut StdRng, max_nodes: usize) -> Lts {
    let n = rng.gen_range(1..=max_nodes);
    let labels: Vec<(usize, u8)> = (0..TRIGGERS.len()).flat_map(|t| [(t, 0), (t, 1)]).collect();
    let mut free: Vec<Vec<(usize, u8)>> = (0..n)
        .map(|_| {
            let mut l = labels.clone();
            l.shuffle(rng);
            l
        })
        .collect();
    let mut edges = Vec::new();
    let mut add = |rng: &mut StdRng, free: &mut Vec<Vec<(usize, u8)>>, from: usize, to: usize| {
        if let Some((t, p)) = free[from].pop() {
            edges.push(Edge {
                from,
                trigger: trigger(TRIGGERS[t], Payload::new(vec![p])),
                outputs: (0..rng.gen_range(0..3)).map(|_| output(rng)).collect(),
                to,
            });
            true
        } else {
            false
        }
    };
    // spanning tree: each node hangs off an earlier one that still has a free label
    for to in 1..n {
        loop {
            let from = rng.gen_range(0..to);
            if add(rng, &mut free, from, to) {
                break;
            }
        }
    }
    for _ in 0..rng.gen_range(0..=2 * n) {
        let (from, to) = (rng.gen_range(0..n), rng.gen_range(0..n));
        add(rng, &mut free, from, to);
    }
    Lts::new(node_names(n), 0, edges).unwrap()
}

/// A flat chart whose flattening is exactly `lts`.
pub fn chart_of_lts(lts: &Lts) -> StateChart {
    let states = lts
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, name)| StateDecl {
            name: name.clone(),
            parent: None,
            initial: i == lts.initial(),
        })
        .collect();
    let transitions = lts
        .edges()
        .iter()
        .map(|e| Transition {
            from: lts.node_name(e.from).clone(),
            to: lts.node_name(e.to).clone(),
            trigger: e.trigger.clone(),
            outputs: e.outputs.clone(),
        })
        .collect();
    StateChart::new(states, transitions).unwrap()
}

pub fn random_word(rng: &mut StdRng, len: usize) -> Vec<Trigger> {
    (0..len).map(|_| trigger(pick(rng, &TRIGGERS), small_payload(rng))).collect()
}

/// Random check results with arbitrary outcomes, for report tests.
pub fn bundle(rng: &mut StdRng) -> ReportBundle {
    let n = rng.gen_range(0..8);
    let time = stamp(rng);
    let checks: Vec<CheckResult> = (0..n)
        .map(|i| {
            let outcome = *[Outcome::Pass, Outcome::Fail, Outcome::Missing, Outcome::Info]
                .choose(rng)
                .unwrap();
            let relevance = if outcome == Outcome::Info { Relevance::Info } else { Relevance::Check };
            let expectation = Expectation {
                source: endpoint(pick(rng, &ENDPOINTS)),
                direction: Direction::Out,
                name: ident(pick(rng, &NAMES)),
                type_tag: ident(pick(rng, &NAMES)),
                relevance,
                tolerance: rng.gen_range(0..3),
                expected: payload(rng, 8),
            };
            let matched_record = (outcome != Outcome::Missing).then(|| log_record(rng, i as u64 + 1, time));
            let detail = ["", "mismatch at byte 0: 03 instead of 02", "<b>&\"quoted\"</b>", "it's"]
                .choose(rng)
                .unwrap()
                .to_string();
            CheckResult {
                expectation_index: i,
                expectation,
                matched_record,
                outcome,
                detail,
            }
        })
        .collect();
    let unexpected: Vec<LogRecord> = (0..rng.gen_range(0..3)).map(|i| log_record(rng, 100 + i, time)).collect();
    let verdict = compute_verdict(checks, unexpected, rng.gen());
    let coverage = CoverageMetrics {
        expectation_coverage: rng.gen_range(0.0..=1.0),
        channel_coverage: rng.gen_range(0.0..=1.0),
        fail_rate: rng.gen_range(0.0..=1.0),
    };
    ReportBundle {
        verdict,
        coverage,
        scenario_title: ["", "a < b & c", "merit \"dump\""].choose(rng).unwrap().to_string(),
        run_stamp: time,
        tool_version: "tutharness test".into(),
    }
}

/// Interface for the echo behavior: every inbound key has a Common
/// Memory slot of the same name.
pub fn echo_spec() -> InterfaceSpec {
    InterfaceSpec {
        tut_name: ident("DSS"),
        inbound: TRIGGERS
            .iter()
            .map(|t| ChannelDecl::new(endpoint("KEYPAD"), ident(t), ident("T_KEY")))
            .collect(),
        outbound: vec![ChannelDecl::new(endpoint("GUI"), ident("HEARTBEAT"), ident("T_BEAT"))],
        cm_slots: TRIGGERS
            .iter()
            .map(|t| CmSlotDecl {
                name: ident(t),
                max_len: None,
            })
            .collect(),
    }
}

/// A scenario valid against [`echo_spec`].
pub fn echo_scenario(rng: &mut StdRng) -> Scenario {
    let duration_ms = rng.gen_range(0..2000);
    let mut ticks: Vec<u64> = (0..rng.gen_range(0..12)).map(|_| rng.gen_range(0..=duration_ms)).collect();
    ticks.sort();
    Scenario {
        title: "echo".into(),
        duration_ms,
        tick_period_ms: rng.gen_bool(0.5).then(|| rng.gen_range(1..400)),
        injections: ticks
            .into_iter()
            .map(|tick_ms| Injection {
                tick_ms,
                target: endpoint("KEYPAD"),
                name: ident(pick(rng, &TRIGGERS)),
                type_tag: ident("T_KEY"),
                payload: payload(rng, 12),
            })
            .collect(),
        expectations: vec![],
    }
}

/// Channels used by matching instances: (endpoint, direction, name, type).
pub const MATCH_CHANNELS: [(&str, Direction, &str, &str); 4] = [
    ("CM", Direction::Out, "D_A", "D_A"),
    ("CM", Direction::Out, "D_B", "D_B"),
    ("CSS", Direction::Out, "ACK", "T_ACK"),
    ("KEYPAD", Direction::In, "K_OK", "T_KEY"),
];

pub fn match_spec() -> InterfaceSpec {
    let decl = |(ep, _, name, ty): (&str, Direction, &str, &str)| ChannelDecl::new(endpoint(ep), ident(name), ident(ty));
    InterfaceSpec {
        tut_name: ident("DSS"),
        inbound: MATCH_CHANNELS.iter().filter(|c| c.1 == Direction::In).map(|c| decl(*c)).collect(),
        outbound: MATCH_CHANNELS.iter().filter(|c| c.1 == Direction::Out).map(|c| decl(*c)).collect(),
        cm_slots: vec![],
    }
}

const MATCH_PAYLOADS: [&[u8]; 5] = [&[0, 0, 0, 0], &[1, 0, 0, 0], &[5, 0, 0, 0], &[1, 0], &[0xFF, 0xFF, 0xFF, 0xFF, 7]];

pub fn match_record(channel: usize, log_cnt: u64, payload: &[u8], wrong_type: bool) -> LogRecord {
    let (ep, dir, name, ty) = MATCH_CHANNELS[channel];
    LogRecord {
        log_cnt,
        time: fixed_stamp(),
        tick_ms: Some(log_cnt),
        source: endpoint(ep),
        direction: dir,
        name: ident(name),
        type_tag: ident(if wrong_type { "T_ODD" } else { ty }),
        relevance: Relevance::Info,
        tolerance: 0,
        expected: None,
        actual: Some(Payload::new(payload.to_vec())),
        status: None,
        info: None,
    }
}

pub fn match_expectation(channel: usize, payload: &[u8], relevance: Relevance, tolerance: u64) -> Expectation {
    let (ep, dir, name, ty) = MATCH_CHANNELS[channel];
    Expectation {
        source: endpoint(ep),
        direction: dir,
        name: ident(name),
        type_tag: ident(ty),
        relevance,
        tolerance,
        expected: Payload::new(payload.to_vec()),
    }
}

/// Random trace and scenario over [`match_spec`].
pub fn match_instance(rng: &mut StdRng, max_exps: usize, max_records: usize) -> (Vec<LogRecord>, Scenario) {
    let channels = rng.gen_range(1..=MATCH_CHANNELS.len());
    let records = (0..rng.gen_range(0..=max_records))
        .map(|i| {
            let p = MATCH_PAYLOADS.choose(rng).unwrap();
            match_record(rng.gen_range(0..channels), i as u64 + 1, p, rng.gen_bool(0.1))
        })
        .collect();
    let expectations = (0..rng.gen_range(0..=max_exps))
        .map(|_| {
            let p = MATCH_PAYLOADS.choose(rng).unwrap();
            let relevance = if rng.gen_bool(0.8) { Relevance::Check } else { Relevance::Info };
            match_expectation(rng.gen_range(0..channels), p, relevance, rng.gen_range(0..6))
        })
        .collect();
    let scenario = Scenario {
        duration_ms: 1000,
        expectations,
        ..Scenario::default()
    };
    (records, scenario)
}

// ---- oracles ----

/// Tolerance semantics by direct little-endian decoding.
pub fn tolerance_oracle(expected: &[u8], actual: &[u8], tolerance: u64) -> bool {
    if expected.len() != actual.len() {
        return false;
    }
    if tolerance == 0 {
        return expected == actual;
    }
    let mut i = 0;
    while i < expected.len() {
        if i + 4 <= expected.len() {
            let e = u32::from_le_bytes(expected[i..i + 4].try_into().unwrap()) as i64;
            let a = u32::from_le_bytes(actual[i..i + 4].try_into().unwrap()) as i64;
            if (e - a).unsigned_abs() > tolerance {
                return false;
            }
        } else if expected[i..] != actual[i..] {
            return false;
        }
        i += 4;
    }
    true
}

/// What the brute-force matcher decides for one expectation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleCheck {
    pub log_cnt: Option<u64>,
    pub outcome: Outcome,
}

/// Scans the whole trace for each expectation in script order and takes
/// the first record on the same channel not yet taken.
pub fn brute_force_match(records: &[LogRecord], expectations: &[Expectation]) -> (Vec<OracleCheck>, Vec<u64>) {
    let mut taken = vec![false; records.len()];
    let mut checks = Vec::new();
    for e in expectations {
        let mut hit = None;
        for (i, r) in records.iter().enumerate() {
            if !taken[i] && r.source == e.source && r.direction == e.direction && r.name == e.name {
                taken[i] = true;
                hit = Some(i);
                break;
            }
        }
        let outcome = match hit.map(|i| &records[i]) {
            _ if e.relevance == Relevance::Info => Outcome::Info,
            None => Outcome::Missing,
            Some(r) if r.type_tag != e.type_tag => Outcome::Fail,
            Some(r) => match &r.actual {
                Some(a) if tolerance_oracle(e.expected.bytes(), a.bytes(), e.tolerance) => Outcome::Pass,
                _ => Outcome::Fail,
            },
        };
        checks.push(OracleCheck {
            log_cnt: hit.map(|i| records[i].log_cnt),
            outcome,
        });
    }
    let unexpected = records
        .iter()
        .zip(&taken)
        .filter(|(r, t)| !**t && r.direction == Direction::Out)
        .map(|(r, _)| r.log_cnt)
        .collect();
    (checks, unexpected)
}

/// Counting oracle for coverage metrics.
pub fn coverage_oracle(checks: &[CheckResult], records: &[LogRecord], spec: &InterfaceSpec) -> (f64, f64, f64) {
    let mut outbound: Vec<(Endpoint, tut_harness::Ident)> = spec
        .outbound
        .iter()
        .map(|d| (d.endpoint.clone(), d.name.clone()))
        .collect();
    for s in &spec.cm_slots {
        let key = (endpoint("CM"), s.name.clone());
        if !outbound.contains(&key) {
            outbound.push(key);
        }
    }
    let mut observed = 0;
    for (ep, name) in &outbound {
        if records.iter().any(|r| r.direction == Direction::Out && &r.source == ep && &r.name == name) {
            observed += 1;
        }
    }
    let mut consumed = 0;
    let mut relevant = 0;
    let mut failed = 0;
    for c in checks {
        if c.matched_record.is_some() {
            consumed += 1;
        }
        if c.outcome != Outcome::Info {
            relevant += 1;
        }
        if c.outcome == Outcome::Fail || c.outcome == Outcome::Missing {
            failed += 1;
        }
    }
    let div = |a: usize, b: usize, empty: f64| if b == 0 { empty } else { a as f64 / b as f64 };
    (
        div(consumed, checks.len(), 1.0),
        div(observed, outbound.len(), 1.0),
        div(failed, relevant, 0.0),
    )
}

pub fn coverage_matches(checks: &[CheckResult], records: &[LogRecord], spec: &InterfaceSpec) -> bool {
    let m = compute_coverage(checks, records, spec);
    (m.expectation_coverage, m.channel_coverage, m.fail_rate) == coverage_oracle(checks, records, spec)
}

/// Reachability by Warshall's transitive closure.
pub fn closure_oracle(lts: &Lts) -> (BTreeSet<usize>, BTreeSet<usize>, BTreeSet<usize>) {
    let n = lts.nodes().len();
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for e in lts.edges() {
        r[e.from][e.to] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    let init = lts.initial();
    let reachable: BTreeSet<usize> = (0..n).filter(|&j| r[init][j]).collect();
    let unreachable = (0..n).filter(|j| !reachable.contains(j)).collect();
    let deadlocks = reachable
        .iter()
        .copied()
        .filter(|&j| lts.edges().iter().all(|e| e.from != j))
        .collect();
    (reachable, unreachable, deadlocks)
}

/// Executes a chart directly on its hierarchy: a trigger fires the
/// transition declared on the current leaf or its nearest ancestor.
pub struct HierarchicalInterpreter<'a> {
    chart: &'a StateChart,
    parent: BTreeMap<String, Option<String>>,
    pub current: String,
}

impl<'a> HierarchicalInterpreter<'a> {
    pub fn new(chart: &'a StateChart) -> Self {
        let parent: BTreeMap<String, Option<String>> = chart
            .states()
            .iter()
            .map(|s| (s.name.to_string(), s.parent.as_ref().map(|p| p.to_string())))
            .collect();
        let root = chart
            .states()
            .iter()
            .find(|s| s.parent.is_none() && s.initial)
            .unwrap()
            .name
            .to_string();
        let mut me = Self {
            chart,
            parent,
            current: String::new(),
        };
        me.current = me.descend(root);
        me
    }

    fn descend(&self, mut state: String) -> String {
        loop {
            let child = self
                .chart
                .states()
                .iter()
                .find(|s| s.initial && s.parent.as_ref().map(|p| p.as_str()) == Some(state.as_str()));
            match child {
                Some(c) => state = c.name.to_string(),
                None => return state,
            }
        }
    }

    /// Fires `t`; returns the outputs, or `None` when nothing is enabled.
    pub fn fire(&mut self, t: &Trigger) -> Option<Vec<Output>> {
        let mut at = Some(self.current.clone());
        while let Some(s) = at {
            let enabled: Vec<&Transition> = self
                .chart
                .transitions()
                .iter()
                .filter(|tr| tr.from.as_str() == s && &tr.trigger == t)
                .collect();
            if let Some(tr) = enabled.first() {
                self.current = self.descend(tr.to.to_string());
                return Some(tr.outputs.clone());
            }
            at = self.parent[&s].clone();
        }
        None
    }
}

/// Leaf/output trace of an input word, using the hierarchy directly.
pub fn interpret_chart(chart: &StateChart, word: &[Trigger]) -> Vec<(String, Option<Vec<Output>>)> {
    let mut h = HierarchicalInterpreter::new(chart);
    word.iter()
        .map(|t| {
            let out = h.fire(t);
            (h.current.clone(), out)
        })
        .collect()
}

/// Leaf/output trace of an input word on a flat LTS.
pub fn run_lts(lts: &Lts, word: &[Trigger]) -> Vec<(String, Option<Vec<Output>>)> {
    let mut node = lts.initial();
    word.iter()
        .map(|t| {
            let out = lts.step(node, t).map(|e| {
                node = lts.edges()[e].to;
                lts.edges()[e].outputs.clone()
            });
            (lts.node_name(node).to_string(), out)
        })
        .collect()
}

/// Timer activations in (0, duration] by explicit iteration.
pub fn timer_count_oracle(duration_ms: u64, period_ms: u64) -> usize {
    let mut count = 0;
    let mut t = 1;
    while t <= duration_ms {
        if t % period_ms == 0 {
            count += 1;
        }
        t += 1;
    }
    count
}

/// Declared versus recounted numbers in a JUnit document.
#[derive(Debug, PartialEq, Eq)]
pub struct JunitCounts {
    pub tests: usize,
    pub failures: usize,
    pub skipped: usize,
}

fn attr_count(node: roxmltree::Node<'_, '_>, name: &str) -> usize {
    node.attribute(name).unwrap().parse().unwrap()
}

/// Returns (declared, recounted) for the root and each suite.
pub fn junit_recount(xml: &str) -> Vec<(JunitCounts, JunitCounts)> {
    let doc = roxmltree::Document::parse(xml).expect("well-formed XML");
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "testsuites");
    let count = |scope: roxmltree::Node<'_, '_>| {
        let cases: Vec<_> = scope
            .descendants()
            .filter(|n| n.has_tag_name("testcase"))
            .collect();
        let with = |tag: &str| cases.iter().filter(|c| c.children().any(|k| k.has_tag_name(tag))).count();
        JunitCounts {
            tests: cases.len(),
            failures: with("failure"),
            skipped: with("skipped"),
        }
    };
    let declared = |n: roxmltree::Node<'_, '_>| JunitCounts {
        tests: attr_count(n, "tests"),
        failures: attr_count(n, "failures"),
        skipped: attr_count(n, "skipped"),
    };
    std::iter::once(root)
        .chain(root.children().filter(|n| n.has_tag_name("testsuite")))
        .map(|n| (declared(n), count(n)))
        .collect()
}

const VOID: [&str; 4] = ["meta", "br", "hr", "img"];

/// Checks that every opened HTML element is closed in order.
pub fn tags_balanced(html: &str) -> bool {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = html;
    while let Some(start) = rest.find('<') {
        let Some(end) = rest[start..].find('>') else {
            return false;
        };
        let tag = &rest[start + 1..start + end];
        rest = &rest[start + end + 1..];
        if tag.starts_with('!') || tag.ends_with('/') {
            continue;
        }
        if let Some(name) = tag.strip_prefix('/') {
            if stack.pop().as_deref() != Some(name.trim()) {
                return false;
            }
        } else {
            let name = tag.split_whitespace().next().unwrap_or("").to_string();
            if !VOID.contains(&name.as_str()) {
                stack.push(name);
            }
        }
    }
    stack.is_empty()
}
