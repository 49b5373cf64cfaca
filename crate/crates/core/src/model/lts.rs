use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use super::chart::{ChartError, Output, Site, StateChart, Trigger};
use crate::ident::Ident;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub trigger: Trigger,
    pub outputs: Vec<Output>,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("node {0} declared twice")]
    DuplicateNode(Ident),
    #[error("edge {edge} refers to node {node}, which does not exist")]
    NoSuchNode { edge: usize, node: usize },
    #[error("initial node {0} does not exist")]
    NoInitial(usize),
    #[error("edges {first} and {second} leave the same node on {trigger}")]
    Nondeterministic {
        first: usize,
        second: usize,
        trigger: Trigger,
    },
}

/// Flat labelled transition system, deterministic per `(node, trigger)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    nodes: Vec<Ident>,
    initial: usize,
    edges: Vec<Edge>,
    lookup: BTreeMap<(usize, Trigger), usize>,
}

impl Lts {
    pub fn new(nodes: Vec<Ident>, initial: usize, edges: Vec<Edge>) -> Result<Self, LtsError> {
        let mut names = BTreeSet::new();
        for n in &nodes {
            if !names.insert(n) {
                return Err(LtsError::DuplicateNode(n.clone()));
            }
        }
        if initial >= nodes.len() {
            return Err(LtsError::NoInitial(initial));
        }
        let mut lookup = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            for node in [e.from, e.to] {
                if node >= nodes.len() {
                    return Err(LtsError::NoSuchNode { edge: i, node });
                }
            }
            if let Some(first) = lookup.insert((e.from, e.trigger.clone()), i) {
                return Err(LtsError::Nondeterministic {
                    first,
                    second: i,
                    trigger: e.trigger.clone(),
                });
            }
        }
        Ok(Self {
            nodes,
            initial,
            edges,
            lookup,
        })
    }

    pub fn nodes(&self) -> &[Ident] {
        &self.nodes
    }

    pub fn node_name(&self, node: usize) -> &Ident {
        &self.nodes[node]
    }

    pub fn node_index(&self, name: &Ident) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge taken from `node` on `trigger`, if any.
    pub fn step(&self, node: usize, trigger: &Trigger) -> Option<usize> {
        self.lookup.get(&(node, trigger.clone())).copied()
    }

    /// Outgoing edge indices of `node`, in index order.
    pub fn outgoing(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.from == node)
            .map(|(i, _)| i)
    }
}

/// Leaf-level LTS of a chart.
///
/// Nodes are the chart's leaves in declaration order. A transition leaving
/// a composite state yields one edge per leaf inside it, and a transition
/// entering a composite lands on its transitively initial leaf.
pub fn flatten(chart: &StateChart) -> Result<Lts, ChartError> {
    let leaves: Vec<Ident> = chart.leaves().cloned().collect();
    let node_of = |name: &Ident| leaves.iter().position(|l| l == name).expect("leaf");
    let mut edges = Vec::new();
    let mut origin = Vec::new();
    for (ti, t) in chart.transitions().iter().enumerate() {
        let to = node_of(chart.resolve_initial(&t.to));
        for (from, leaf) in leaves.iter().enumerate() {
            if chart.is_within(leaf, &t.from) {
                edges.push(Edge {
                    from,
                    trigger: t.trigger.clone(),
                    outputs: t.outputs.clone(),
                    to,
                });
                origin.push(ti);
            }
        }
    }
    let initial = node_of(chart.resolve_initial(chart.initial()));
    let sources: Vec<usize> = edges.iter().map(|e: &Edge| e.from).collect();
    Lts::new(leaves.clone(), initial, edges).map_err(|e| match e {
        LtsError::Nondeterministic { second, trigger, .. } => ChartError::NondeterministicTrigger {
            leaf: leaves[sources[second]].clone(),
            trigger,
            site: Site::Transition(origin[second]),
        },
        other => unreachable!("validated chart flattened to invalid LTS: {other}"),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplorationReport {
    pub reachable: BTreeSet<usize>,
    pub unreachable: BTreeSet<usize>,
    /// Reachable nodes without outgoing edges.
    pub deadlocks: BTreeSet<usize>,
    /// Edges leaving reachable nodes.
    pub edge_count: usize,
}

/// Breadth-first reachability from the initial node.
pub fn explore(lts: &Lts) -> ExplorationReport {
    let n = lts.nodes().len();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in lts.edges() {
        adjacency[e.from].push(e.to);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([lts.initial()]);
    seen[lts.initial()] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    let reachable: BTreeSet<usize> = (0..n).filter(|&i| seen[i]).collect();
    ExplorationReport {
        unreachable: (0..n).filter(|&i| !seen[i]).collect(),
        deadlocks: reachable.iter().copied().filter(|&i| adjacency[i].is_empty()).collect(),
        edge_count: lts.edges().iter().filter(|e| seen[e.from]).count(),
        reachable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ident::ident;
    use crate::model::chart::{StateDecl, Transition};
    use crate::trace::Payload;

    fn trig(n: &str) -> Trigger {
        Trigger {
            name: ident(n),
            type_tag: ident(n),
            payload: Payload::default(),
        }
    }

    fn edge(from: usize, t: &str, to: usize) -> Edge {
        Edge {
            from,
            trigger: trig(t),
            outputs: vec![],
            to,
        }
    }

    fn names(n: usize) -> Vec<Ident> {
        (0..n).map(|i| ident(&format!("N{i}"))).collect()
    }

    #[test]
    fn single_node() {
        let lts = Lts::new(names(1), 0, vec![]).unwrap();
        let r = explore(&lts);
        assert_eq!(r.reachable, BTreeSet::from([0]));
        assert_eq!(r.deadlocks, BTreeSet::from([0]));
        assert!(r.unreachable.is_empty());
    }

    #[test]
    fn chain() {
        let lts = Lts::new(names(4), 0, vec![edge(0, "A", 1), edge(1, "A", 2), edge(3, "A", 0)]).unwrap();
        let r = explore(&lts);
        assert_eq!(r.reachable, BTreeSet::from([0, 1, 2]));
        assert_eq!(r.unreachable, BTreeSet::from([3]));
        assert_eq!(r.deadlocks, BTreeSet::from([2]));
        assert_eq!(r.edge_count, 2);
    }

    #[test]
    fn rejects_nondeterminism() {
        let e = Lts::new(names(2), 0, vec![edge(0, "A", 1), edge(0, "A", 0)]).unwrap_err();
        assert!(matches!(e, LtsError::Nondeterministic { first: 0, second: 1, .. }));
        assert!(Lts::new(names(2), 0, vec![edge(0, "A", 1), edge(1, "A", 0)]).is_ok());
    }

    #[test]
    fn composite_source_expands_per_leaf() {
        let st = |n: &str, p: Option<&str>, i: bool| StateDecl {
            name: ident(n),
            parent: p.map(ident),
            initial: i,
        };
        let chart = StateChart::new(
            vec![st("A", None, true), st("A1", Some("A"), true), st("A2", Some("A"), false), st("B", None, false)],
            vec![
                Transition { from: ident("A"), to: ident("B"), trigger: trig("GO"), outputs: vec![] },
                Transition { from: ident("A1"), to: ident("A2"), trigger: trig("NEXT"), outputs: vec![] },
                Transition { from: ident("B"), to: ident("A"), trigger: trig("BACK"), outputs: vec![] },
            ],
        )
        .unwrap();
        let lts = flatten(&chart).unwrap();
        let named: Vec<_> = lts
            .edges()
            .iter()
            .map(|e| format!("{}-{}->{}", lts.node_name(e.from), e.trigger.name, lts.node_name(e.to)))
            .collect();
        assert_eq!(named, ["A1-GO->B", "A2-GO->B", "A1-NEXT->A2", "B-BACK->A1"]);
        assert_eq!(lts.node_name(lts.initial()), &ident("A1"));
    }
}
