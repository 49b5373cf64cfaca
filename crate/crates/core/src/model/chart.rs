use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ident::{Endpoint, Ident};
use crate::trace::{Direction, Payload};

/// Inbound message that fires a transition; matched exactly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trigger {
    pub name: Ident,
    pub type_tag: Ident,
    pub payload: Payload,
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}[{}]", self.name, self.type_tag, self.payload)
    }
}

/// Message the TUT is expected to emit when a transition fires.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Output {
    pub source: Endpoint,
    pub direction: Direction,
    pub name: Ident,
    pub type_tag: Ident,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDecl {
    pub name: Ident,
    /// Enclosing composite state.
    pub parent: Option<Ident>,
    /// Initial among its siblings.
    pub initial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: Ident,
    pub to: Ident,
    pub trigger: Trigger,
    pub outputs: Vec<Output>,
}

/// Where a chart element was declared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    State(usize),
    Transition(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChartError {
    #[error("state {state} declared twice")]
    DuplicateState { state: Ident, site: Site },
    #[error("unknown state {state}")]
    UnknownState { state: Ident, site: Site },
    #[error("parent chain of {state} is cyclic")]
    CyclicParent { state: Ident, site: Site },
    #[error("more than one initial state {}", scope(.parent))]
    MultipleInitial { parent: Option<Ident>, site: Site },
    #[error("no initial state {}", scope(.parent))]
    MissingInitial { parent: Option<Ident> },
    #[error("leaf {leaf} has two transitions on {trigger}")]
    NondeterministicTrigger {
        leaf: Ident,
        trigger: Trigger,
        site: Site,
    },
}

fn scope(parent: &Option<Ident>) -> String {
    match parent {
        Some(p) => format!("inside {p}"),
        None => "at top level".to_string(),
    }
}

impl ChartError {
    pub fn site(&self) -> Option<Site> {
        match self {
            ChartError::DuplicateState { site, .. }
            | ChartError::UnknownState { site, .. }
            | ChartError::CyclicParent { site, .. }
            | ChartError::MultipleInitial { site, .. }
            | ChartError::NondeterministicTrigger { site, .. } => Some(*site),
            ChartError::MissingInitial { .. } => None,
        }
    }
}

/// A hierarchical state machine with OR-composite states.
///
/// Constructed only through [`StateChart::new`], which enforces a forest
/// of states, one initial state per level and deterministic triggers once
/// composite transitions are inherited by their leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateChart {
    states: Vec<StateDecl>,
    transitions: Vec<Transition>,
    index: BTreeMap<Ident, usize>,
}

impl StateChart {
    pub fn new(states: Vec<StateDecl>, transitions: Vec<Transition>) -> Result<Self, ChartError> {
        let mut index = BTreeMap::new();
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.name.clone(), i).is_some() {
                return Err(ChartError::DuplicateState {
                    state: s.name.clone(),
                    site: Site::State(i),
                });
            }
        }
        for (i, s) in states.iter().enumerate() {
            if let Some(p) = &s.parent {
                if !index.contains_key(p) {
                    return Err(ChartError::UnknownState {
                        state: p.clone(),
                        site: Site::State(i),
                    });
                }
            }
        }
        for (i, s) in states.iter().enumerate() {
            let mut seen = BTreeSet::new();
            let mut cur = Some(&s.name);
            while let Some(name) = cur {
                if !seen.insert(name) {
                    return Err(ChartError::CyclicParent {
                        state: s.name.clone(),
                        site: Site::State(i),
                    });
                }
                cur = states[index[name]].parent.as_ref();
            }
        }

        let mut scopes: BTreeMap<Option<&Ident>, Vec<usize>> = BTreeMap::new();
        scopes.entry(None).or_default();
        for (i, s) in states.iter().enumerate() {
            scopes.entry(s.parent.as_ref()).or_default().push(i);
        }
        for (parent, members) in &scopes {
            let initials: Vec<usize> = members.iter().copied().filter(|&i| states[i].initial).collect();
            match initials.as_slice() {
                [] => {
                    return Err(ChartError::MissingInitial {
                        parent: parent.cloned(),
                    })
                }
                [_] => {}
                [_, second, ..] => {
                    return Err(ChartError::MultipleInitial {
                        parent: parent.cloned(),
                        site: Site::State(*second),
                    })
                }
            }
        }

        for (i, t) in transitions.iter().enumerate() {
            for s in [&t.from, &t.to] {
                if !index.contains_key(s) {
                    return Err(ChartError::UnknownState {
                        state: s.clone(),
                        site: Site::Transition(i),
                    });
                }
            }
        }

        let chart = Self {
            states,
            transitions,
            index,
        };
        chart.check_determinism()?;
        Ok(chart)
    }

    fn check_determinism(&self) -> Result<(), ChartError> {
        for leaf in self.leaves() {
            let mut seen: BTreeMap<&Trigger, usize> = BTreeMap::new();
            for (i, t) in self.transitions.iter().enumerate() {
                if self.is_within(leaf, &t.from) && seen.insert(&t.trigger, i).is_some() {
                    return Err(ChartError::NondeterministicTrigger {
                        leaf: leaf.clone(),
                        trigger: t.trigger.clone(),
                        site: Site::Transition(i),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn states(&self) -> &[StateDecl] {
        &self.states
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn state(&self, name: &Ident) -> Option<&StateDecl> {
        self.index.get(name).map(|&i| &self.states[i])
    }

    pub fn children<'a>(&'a self, name: &'a Ident) -> impl Iterator<Item = &'a StateDecl> + 'a {
        self.states
            .iter()
            .filter(move |s| s.parent.as_ref() == Some(name))
    }

    pub fn is_leaf(&self, name: &Ident) -> bool {
        self.children(name).next().is_none()
    }

    /// Leaf states in declaration order.
    pub fn leaves(&self) -> impl Iterator<Item = &Ident> {
        self.states
            .iter()
            .map(|s| &s.name)
            .filter(|n| self.is_leaf(n))
    }

    /// True if `state` is `ancestor` or nested (transitively) inside it.
    pub fn is_within(&self, state: &Ident, ancestor: &Ident) -> bool {
        let mut cur = Some(state);
        while let Some(s) = cur {
            if s == ancestor {
                return true;
            }
            cur = self.state(s).and_then(|d| d.parent.as_ref());
        }
        false
    }

    /// Top-level initial state.
    pub fn initial(&self) -> &Ident {
        &self
            .states
            .iter()
            .find(|s| s.parent.is_none() && s.initial)
            .expect("validated chart has a top-level initial state")
            .name
    }

    /// Follows initial children down to a leaf.
    pub fn resolve_initial<'a>(&'a self, mut state: &'a Ident) -> &'a Ident {
        while let Some(child) = self.children(state).find(|c| c.initial) {
            state = &child.name;
        }
        state
    }
}
