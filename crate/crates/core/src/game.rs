//! Flows, forwarding entries, updates and the game state they act on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::graph::{Edge, GraphSpec, LfaGraph, Node};
use crate::ratio::{format_ratio, positive_part, serde_ratio, Bandwidth};
use crate::LfaError;

pub type FlowId = u32;

/// An unsplittable flow `F_i = (i, f_i, r_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flow {
    pub id: FlowId,
    #[serde(with = "serde_ratio")]
    pub bandwidth: Bandwidth,
    pub first_hop: Node,
}

impl Flow {
    pub fn new(id: FlowId, bandwidth: Bandwidth, first_hop: Node) -> Self {
        Self { id, bandwidth, first_hop }
    }
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.id, format_ratio(&self.bandwidth), self.first_hop)
    }
}

/// Key of a forwarding entry: a flow at a node.
pub type EntryKey = (FlowId, Node);

/// The controller's forwarding function `R_con`.
///
/// Nodes with a single successor forward by default and need no entry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ForwardingFunction {
    entries: BTreeMap<EntryKey, Node>,
}

impl ForwardingFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, flow: FlowId, node: Node) -> Option<Node> {
        self.entries.get(&(flow, node)).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (EntryKey, Node)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries_of(&self, flow: FlowId) -> Vec<EntryKey> {
        self.entries.keys().filter(|(f, _)| *f == flow).copied().collect()
    }

    pub(crate) fn set(&mut self, key: EntryKey, next: Node) {
        self.entries.insert(key, next);
    }

    pub(crate) fn remove(&mut self, key: &EntryKey) -> Option<Node> {
        self.entries.remove(key)
    }
}

/// A set of entry assignments applied simultaneously.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Update {
    assignments: BTreeMap<EntryKey, Node>,
}

/// What kind of update an [`Update`] is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateKind {
    Reroute,
    /// Several entries across `k` distinct nodes. `k == 1` is a multi-entry change at a
    /// single switch, which that switch can apply atomically on its own.
    Swap { k: usize },
}

impl fmt::Display for UpdateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpdateKind::Reroute => write!(f, "reroute"),
            UpdateKind::Swap { k } => write!(f, "{k}-swap"),
        }
    }
}

impl Update {
    pub fn new(assignments: BTreeMap<EntryKey, Node>) -> Result<Self, LfaError> {
        if assignments.is_empty() {
            return Err(LfaError::EmptyUpdate);
        }
        Ok(Self { assignments })
    }

    pub fn from_pairs<I: IntoIterator<Item = (EntryKey, Node)>>(pairs: I) -> Result<Self, LfaError> {
        let mut assignments = BTreeMap::new();
        for (key, next) in pairs {
            if assignments.insert(key, next).is_some() {
                return Err(LfaError::InvalidUpdate(format!(
                    "entry ({}, {}) assigned twice",
                    key.0, key.1
                )));
            }
        }
        Self::new(assignments)
    }

    pub fn reroute(flow: FlowId, node: Node, next: Node) -> Self {
        Self { assignments: BTreeMap::from([((flow, node), next)]) }
    }

    pub fn assignments(&self) -> impl Iterator<Item = (EntryKey, Node)> + '_ {
        self.assignments.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn nodes(&self) -> BTreeSet<Node> {
        self.assignments.keys().map(|(_, node)| *node).collect()
    }

    pub fn classify(&self) -> UpdateKind {
        if self.assignments.len() == 1 {
            UpdateKind::Reroute
        } else {
            UpdateKind::Swap { k: self.nodes().len() }
        }
    }

    /// True for a swap touching at least two switches.
    pub fn is_swap(&self) -> bool {
        matches!(self.classify(), UpdateKind::Swap { k } if k >= 2)
    }
}

impl fmt::Display for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, ((flow, node), next)) in self.assignments.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "(F{flow},{node})->{next}")?;
        }
        write!(f, "}}")
    }
}

/// `classify_update`: reroute, or a swap with the number of distinct nodes touched.
pub fn classify_update(update: &Update) -> UpdateKind {
    update.classify()
}

/// Where a flow's entries lead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Route {
    /// A full path from `s` to `d`.
    Complete(Vec<Edge>),
    /// The walk stops at a node with several successors and no entry: not yet placed.
    Pending { at: Node },
}

/// The game position: graph, live flows and the forwarding function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    graph: LfaGraph,
    flows: BTreeMap<FlowId, Flow>,
    routing: ForwardingFunction,
}

impl GameState {
    pub fn new(graph: LfaGraph) -> Self {
        Self { graph, flows: BTreeMap::new(), routing: ForwardingFunction::new() }
    }

    pub fn graph(&self) -> &LfaGraph {
        &self.graph
    }

    pub fn flows(&self) -> impl Iterator<Item = &Flow> + '_ {
        self.flows.values()
    }

    pub fn flow(&self, id: FlowId) -> Option<&Flow> {
        self.flows.get(&id)
    }

    pub fn flow_count(&self) -> usize {
        self.flows.len()
    }

    pub fn routing(&self) -> &ForwardingFunction {
        &self.routing
    }

    pub fn total_demand(&self) -> Bandwidth {
        self.flows.values().map(|f| f.bandwidth).sum()
    }

    /// Adds a flow with no entries yet. The flow carries no load until routed.
    pub fn add_flow(&self, flow: Flow) -> Result<Self, LfaError> {
        let invalid = |reason: &str| LfaError::InvalidFlow { id: flow.id, reason: reason.to_string() };
        if self.flows.contains_key(&flow.id) {
            return Err(LfaError::DuplicateFlow(flow.id));
        }
        if flow.bandwidth <= Bandwidth::zero() {
            return Err(invalid("bandwidth must be positive"));
        }
        if flow.bandwidth > self.graph.capacity() {
            return Err(invalid("bandwidth exceeds edge capacity"));
        }
        if !matches!(flow.first_hop, Node::Hop(i) if (i as usize) < self.graph.first_hop_count()) {
            return Err(invalid("first hop is not a first-hop node"));
        }
        let mut next = self.clone();
        next.flows.insert(flow.id, flow);
        Ok(next)
    }

    /// Stops a flow. Its entries stay behind until [`GameState::delete_entries`].
    pub fn remove_flow(&self, id: FlowId) -> Result<Self, LfaError> {
        if !self.flows.contains_key(&id) {
            return Err(LfaError::UnknownFlow(id));
        }
        let mut next = self.clone();
        next.flows.remove(&id);
        Ok(next)
    }

    pub fn delete_entries(&self, keys: &[EntryKey]) -> Self {
        let mut next = self.clone();
        for key in keys {
            next.routing.remove(key);
        }
        next
    }

    /// Entries whose flow is no longer live.
    pub fn stale_entries(&self) -> Vec<EntryKey> {
        self.routing
            .entries()
            .map(|(k, _)| k)
            .filter(|(flow, _)| !self.flows.contains_key(flow))
            .collect()
    }

    fn next_hop(&self, flow: FlowId, node: Node) -> Option<Node> {
        self.routing.get(flow, node).or_else(|| self.graph.sole_successor(node))
    }

    pub fn route(&self, id: FlowId) -> Result<Route, LfaError> {
        let flow = self.flows.get(&id).ok_or(LfaError::UnknownFlow(id))?;
        let broken = |reason: String| LfaError::BrokenPath { flow: id, reason };
        let mut path = vec![Edge::new(Node::Source, flow.first_hop)];
        let mut seen = BTreeSet::from([Node::Source]);
        let mut node = flow.first_hop;
        while node != Node::Dest {
            if !seen.insert(node) {
                return Err(broken(format!("loop through {node}")));
            }
            let Some(next) = self.next_hop(id, node) else {
                if self.graph.successors(node).next().is_none() {
                    return Err(broken(format!("dead end at {node}")));
                }
                return Ok(Route::Pending { at: node });
            };
            let edge = Edge::new(node, next);
            if !self.graph.has_edge(&edge) {
                return Err(broken(format!("entry at {node} uses missing edge {edge}")));
            }
            path.push(edge);
            node = next;
        }
        Ok(Route::Complete(path))
    }

    /// The destination edge a flow currently uses, if routed.
    pub fn dest_edge_of(&self, id: FlowId) -> Result<Option<usize>, LfaError> {
        Ok(match self.route(id)? {
            Route::Complete(path) => path.last().and_then(Edge::dest_index),
            Route::Pending { .. } => None,
        })
    }

    pub fn is_complete(&self) -> Result<bool, LfaError> {
        for id in self.flows.keys() {
            if matches!(self.route(*id)?, Route::Pending { .. }) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Loads of every edge that carries traffic.
    pub fn loads(&self) -> Result<BTreeMap<Edge, Bandwidth>, LfaError> {
        let mut loads = BTreeMap::new();
        for flow in self.flows.values() {
            if let Route::Complete(path) = self.route(flow.id)? {
                for edge in path {
                    *loads.entry(edge).or_insert_with(Bandwidth::zero) += flow.bandwidth;
                }
            }
        }
        Ok(loads)
    }

    pub fn edge_load(&self, edge: &Edge) -> Result<Bandwidth, LfaError> {
        self.graph.edge_capacity(edge)?;
        Ok(self.loads()?.get(edge).copied().unwrap_or_else(Bandwidth::zero))
    }

    pub fn oversubscription(&self, edge: &Edge) -> Result<Bandwidth, LfaError> {
        let load = self.edge_load(edge)?;
        Ok(match self.graph.edge_capacity(edge)? {
            Some(cap) => positive_part(load - cap),
            None => Bandwidth::zero(),
        })
    }

    /// Largest oversubscription over all edges.
    pub fn peak_oversubscription(&self) -> Result<Bandwidth, LfaError> {
        let cap = self.graph.capacity();
        Ok(self
            .loads()?
            .into_iter()
            .filter(|(edge, _)| edge.from != Node::Source)
            .map(|(_, load)| positive_part(load - cap))
            .max()
            .unwrap_or_else(Bandwidth::zero))
    }

    pub fn validate_lossless(&self) -> Result<bool, LfaError> {
        Ok(self.peak_oversubscription()?.is_zero())
    }

    /// Applies every assignment at once. `self` is left untouched.
    pub fn apply_update(&self, update: &Update) -> Result<Self, LfaError> {
        let mut next = self.clone();
        let mut touched = BTreeSet::new();
        for ((flow, node), target) in update.assignments() {
            if !self.flows.contains_key(&flow) {
                return Err(LfaError::UnknownFlow(flow));
            }
            if !node.is_intermediate() {
                return Err(LfaError::InvalidUpdate(format!("entry at {node} is not at an intermediate node")));
            }
            let edge = Edge::new(node, target);
            if !self.graph.has_edge(&edge) {
                return Err(LfaError::UnknownEdge(edge));
            }
            next.routing.set((flow, node), target);
            touched.insert(flow);
        }
        for flow in touched {
            match next.route(flow)? {
                Route::Complete(_) => {}
                Route::Pending { at } => {
                    return Err(LfaError::BrokenPath {
                        flow,
                        reason: format!("path stops at {at} without reaching d"),
                    })
                }
            }
        }
        Ok(next)
    }

    /// Impact of a 2-swap: the smaller of the peak oversubscriptions reached by applying
    /// only one of its two entries.
    pub fn swap_impact(&self, update: &Update) -> Result<Bandwidth, LfaError> {
        if update.len() != 2 {
            return Err(LfaError::NotTwoSwap(update.len()));
        }
        let mut best: Option<Bandwidth> = None;
        for ((flow, node), next) in update.assignments() {
            let one_sided = self.apply_update(&Update::reroute(flow, node, next))?;
            let over = one_sided.peak_oversubscription()?;
            best = Some(best.map_or(over, |b| b.min(over)));
        }
        Ok(best.unwrap_or_else(Bandwidth::zero))
    }

    /// Smallest peak load over the two one-sided halves of a 2-swap.
    pub fn swap_transient_peak(&self, update: &Update) -> Result<Bandwidth, LfaError> {
        if update.len() != 2 {
            return Err(LfaError::NotTwoSwap(update.len()));
        }
        let mut best: Option<Bandwidth> = None;
        for ((flow, node), next) in update.assignments() {
            let one_sided = self.apply_update(&Update::reroute(flow, node, next))?;
            let peak = one_sided
                .loads()?
                .into_iter()
                .filter(|(edge, _)| edge.from != Node::Source)
                .map(|(_, load)| load)
                .max()
                .unwrap_or_else(Bandwidth::zero);
            best = Some(best.map_or(peak, |b| b.min(peak)));
        }
        Ok(best.unwrap_or_else(Bandwidth::zero))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StateDoc::from(self)).expect("state document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LfaError> {
        let doc: StateDoc = serde_json::from_str(text).map_err(|e| LfaError::Parse(e.to_string()))?;
        doc.into_state()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    flow: FlowId,
    node: Node,
    next: Node,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    graph: GraphSpec,
    flows: Vec<Flow>,
    entries: Vec<EntryDoc>,
}

impl From<&GameState> for StateDoc {
    fn from(state: &GameState) -> Self {
        Self {
            graph: state.graph.to_spec(),
            flows: state.flows.values().copied().collect(),
            entries: state
                .routing
                .entries()
                .map(|((flow, node), next)| EntryDoc { flow, node, next })
                .collect(),
        }
    }
}

impl StateDoc {
    fn into_state(self) -> Result<GameState, LfaError> {
        let mut state = GameState::new(LfaGraph::from_spec(self.graph)?);
        for flow in self.flows {
            state = state.add_flow(flow)?;
        }
        for entry in self.entries {
            if !state.graph.has_edge(&Edge::new(entry.node, entry.next)) {
                return Err(LfaError::UnknownEdge(Edge::new(entry.node, entry.next)));
            }
            state.routing.set((entry.flow, entry.node), entry.next);
        }
        for id in state.flows.keys() {
            state.route(*id)?;
        }
        Ok(state)
    }
}
