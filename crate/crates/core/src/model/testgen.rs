use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use super::chart::Trigger;
use super::lts::{explore, Lts};
use crate::ident::{Endpoint, Ident};
use crate::runtime::{InterfaceSpec, DEFAULT_TIMER_PERIOD_MS};
use crate::scenario::{Expectation, Injection, Scenario};
use crate::trace::{Channel, Direction, Relevance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TestgenError {
    #[error("edge {edge}: no inbound channel carries trigger {trigger}")]
    UndeclaredTrigger { edge: usize, trigger: Trigger },
    #[error("edge {edge}: trigger {trigger} is declared by several endpoints")]
    AmbiguousTrigger { edge: usize, trigger: Trigger },
    #[error("edge {edge}: output channel {channel} is not a declared outbound channel")]
    UndeclaredOutput { edge: usize, channel: Channel },
    #[error("tick period must be positive")]
    ZeroTickPeriod,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedSuite {
    pub scenarios: Vec<Scenario>,
    /// Edge sequence behind each scenario.
    pub paths: Vec<Vec<usize>>,
    /// Edges leaving unreachable nodes; no test can exercise them.
    pub uncoverable: Vec<usize>,
}

/// Builds scenarios achieving all-transitions coverage of the reachable
/// part of `lts`.
///
/// Each scenario is a walk from the initial node. The walk repeatedly
/// extends itself along the shortest route to the nearest uncovered edge
/// and ends when no uncovered edge is reachable from where it stands; a
/// new walk then starts from the initial node. The i-th edge of a walk
/// becomes an injection at tick `(i + 1) * tick_period_ms`, and its
/// outputs become relevance-1, tolerance-0 expectations in walk order.
pub fn generate_tests(lts: &Lts, spec: &InterfaceSpec, tick_period_ms: u64) -> Result<GeneratedSuite, TestgenError> {
    if tick_period_ms == 0 {
        return Err(TestgenError::ZeroTickPeriod);
    }
    let targets = resolve_channels(lts, spec)?;
    let report = explore(lts);
    let uncoverable: Vec<usize> = (0..lts.edges().len())
        .filter(|&i| !report.reachable.contains(&lts.edges()[i].from))
        .collect();
    let mut uncovered: BTreeSet<usize> = (0..lts.edges().len())
        .filter(|i| !uncoverable.contains(i))
        .collect();

    let mut paths = Vec::new();
    while !uncovered.is_empty() {
        let mut path = Vec::new();
        let mut at = lts.initial();
        while let Some(hop) = route_to_uncovered(lts, at, &uncovered) {
            for &e in &hop {
                uncovered.remove(&e);
            }
            at = lts.edges()[*hop.last().expect("non-empty route")].to;
            path.extend(hop);
        }
        assert!(!path.is_empty(), "uncovered edges are reachable by construction");
        paths.push(path);
    }

    let scenarios = paths
        .iter()
        .enumerate()
        .map(|(k, path)| path_scenario(lts, &targets, path, k, tick_period_ms))
        .collect();
    Ok(GeneratedSuite {
        scenarios,
        paths,
        uncoverable,
    })
}

/// Shortest edge sequence from `start` whose last edge is uncovered.
fn route_to_uncovered(lts: &Lts, start: usize, uncovered: &BTreeSet<usize>) -> Option<Vec<usize>> {
    let n = lts.nodes().len();
    let mut via: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for e in lts.outgoing(u) {
            if uncovered.contains(&e) {
                let mut route = vec![e];
                let mut node = u;
                while let Some(prev) = via[node] {
                    route.push(prev);
                    node = lts.edges()[prev].from;
                }
                route.reverse();
                return Some(route);
            }
            let v = lts.edges()[e].to;
            if !seen[v] {
                seen[v] = true;
                via[v] = Some(e);
                queue.push_back(v);
            }
        }
    }
    None
}

fn resolve_channels(lts: &Lts, spec: &InterfaceSpec) -> Result<Vec<Endpoint>, TestgenError> {
    lts.edges()
        .iter()
        .enumerate()
        .map(|(edge, e)| {
            for o in &e.outputs {
                let channel = Channel {
                    endpoint: o.source.clone(),
                    direction: o.direction,
                    name: o.name.clone(),
                };
                if o.direction != Direction::Out || !spec.declares(&channel) {
                    return Err(TestgenError::UndeclaredOutput { edge, channel });
                }
            }
            let mut senders = spec
                .inbound
                .iter()
                .filter(|d| d.name == e.trigger.name && d.type_tag == e.trigger.type_tag);
            match (senders.next(), senders.next()) {
                (Some(d), None) => Ok(d.endpoint.clone()),
                (None, _) => Err(TestgenError::UndeclaredTrigger {
                    edge,
                    trigger: e.trigger.clone(),
                }),
                (Some(_), Some(_)) => Err(TestgenError::AmbiguousTrigger {
                    edge,
                    trigger: e.trigger.clone(),
                }),
            }
        })
        .collect()
}

fn path_scenario(lts: &Lts, targets: &[Endpoint], path: &[usize], k: usize, period: u64) -> Scenario {
    let mut injections = Vec::with_capacity(path.len());
    let mut expectations = Vec::new();
    for (i, &e) in path.iter().enumerate() {
        let edge = &lts.edges()[e];
        injections.push(Injection {
            tick_ms: (i as u64 + 1) * period,
            target: targets[e].clone(),
            name: edge.trigger.name.clone(),
            type_tag: edge.trigger.type_tag.clone(),
            payload: edge.trigger.payload.clone(),
        });
        expectations.extend(edge.outputs.iter().map(|o| Expectation {
            source: o.source.clone(),
            direction: o.direction,
            name: o.name.clone(),
            type_tag: o.type_tag.clone(),
            relevance: Relevance::Check,
            tolerance: 0,
            expected: o.payload.clone(),
        }));
    }
    let mut visited: Vec<&Ident> = vec![lts.node_name(lts.initial())];
    visited.extend(path.iter().map(|&e| lts.node_name(lts.edges()[e].to)));
    Scenario {
        title: format!(
            "path {}: {}",
            k + 1,
            visited.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(" > ")
        ),
        duration_ms: (path.len() as u64 + 1) * period,
        tick_period_ms: Some(period),
        injections,
        expectations,
    }
}

/// Default spacing between generated injections.
pub const DEFAULT_TEST_TICK_PERIOD_MS: u64 = DEFAULT_TIMER_PERIOD_MS;

/// Edges exercised by replaying the scenarios' injections on the model.
pub fn covered_edges(scenarios: &[Scenario], lts: &Lts) -> BTreeSet<usize> {
    let mut covered = BTreeSet::new();
    for s in scenarios {
        let mut node = lts.initial();
        for inj in &s.injections {
            let trigger = Trigger {
                name: inj.name.clone(),
                type_tag: inj.type_tag.clone(),
                payload: inj.payload.clone(),
            };
            if let Some(e) = lts.step(node, &trigger) {
                covered.insert(e);
                node = lts.edges()[e].to;
            }
        }
    }
    covered
}

/// Covered reachable edges over all reachable edges; 1.0 when there are
/// no reachable edges.
pub fn model_coverage(scenarios: &[Scenario], lts: &Lts) -> f64 {
    let report = explore(lts);
    let reachable: BTreeSet<usize> = (0..lts.edges().len())
        .filter(|&i| report.reachable.contains(&lts.edges()[i].from))
        .collect();
    if reachable.is_empty() {
        return 1.0;
    }
    let covered = covered_edges(scenarios, lts);
    reachable.intersection(&covered).count() as f64 / reachable.len() as f64
}
