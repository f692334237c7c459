//! LFA topology: a DAG from the source `s` through first-hop nodes `o_1..o_n`
//! to the destination `d`, entered by `m` destination edges `e_1..e_m`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::ratio::{serde_ratio, Bandwidth};
use crate::LfaError;

/// A node of the LFA graph. Indices are zero-based; the textual form is one-based
/// (`o1` is the first first-hop node).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Source,
    /// First-hop node `o_{i+1}`.
    Hop(u32),
    /// Any other intermediate node.
    Mid(u32),
    /// Tail of destination edge `e_{j+1}`.
    Tail(u32),
    Dest,
}

impl Node {
    pub fn is_intermediate(&self) -> bool {
        matches!(self, Node::Hop(_) | Node::Mid(_) | Node::Tail(_))
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Source => write!(f, "s"),
            Node::Hop(i) => write!(f, "o{}", i + 1),
            Node::Mid(i) => write!(f, "v{}", i + 1),
            Node::Tail(j) => write!(f, "q{}", j + 1),
            Node::Dest => write!(f, "d"),
        }
    }
}

impl FromStr for Node {
    type Err = LfaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LfaError::BadNode(s.to_string());
        match s {
            "s" => return Ok(Node::Source),
            "d" => return Ok(Node::Dest),
            _ => {}
        }
        let (kind, index) = s.split_at(1.min(s.len()));
        let index: u32 = index.parse().map_err(|_| bad())?;
        if index == 0 {
            return Err(bad());
        }
        match kind {
            "o" => Ok(Node::Hop(index - 1)),
            "v" => Ok(Node::Mid(index - 1)),
            "q" => Ok(Node::Tail(index - 1)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Node {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// A directed edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: Node,
    pub to: Node,
}

impl Edge {
    pub fn new(from: Node, to: Node) -> Self {
        Self { from, to }
    }

    /// Destination edge `e_{j+1}`.
    pub fn dest(j: usize) -> Self {
        Self::new(Node::Tail(j as u32), Node::Dest)
    }

    /// Index `j` when this is destination edge `e_{j+1}`.
    pub fn dest_index(&self) -> Option<usize> {
        match (self.from, self.to) {
            (Node::Tail(j), Node::Dest) => Some(j as usize),
            _ => None,
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dest_index() {
            Some(j) => write!(f, "e{}", j + 1),
            None => write!(f, "{}->{}", self.from, self.to),
        }
    }
}

/// The LFA graph `G = (V, E, c)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfaGraph {
    first_hops: usize,
    dest_edges: usize,
    capacity: Bandwidth,
    adjacency: BTreeMap<Node, BTreeSet<Node>>,
}

impl LfaGraph {
    /// Validates and builds an arbitrary LFA graph. `adjacency` lists the successors of
    /// every intermediate node; the source edges `s -> o_i` are implicit.
    pub fn new(
        first_hops: usize,
        dest_edges: usize,
        capacity: Bandwidth,
        adjacency: BTreeMap<Node, BTreeSet<Node>>,
    ) -> Result<Self, LfaError> {
        let graph = Self { first_hops, dest_edges, capacity, adjacency };
        graph.validate()?;
        Ok(graph)
    }

    /// The layered shape where every first hop reaches the tail of every destination edge.
    pub fn canonical(first_hops: usize, dest_edges: usize, capacity: Bandwidth) -> Result<Self, LfaError> {
        let mut adjacency = BTreeMap::new();
        let tails: BTreeSet<Node> = (0..dest_edges as u32).map(Node::Tail).collect();
        for i in 0..first_hops as u32 {
            adjacency.insert(Node::Hop(i), tails.clone());
        }
        for j in 0..dest_edges as u32 {
            adjacency.insert(Node::Tail(j), BTreeSet::from([Node::Dest]));
        }
        Self::new(first_hops, dest_edges, capacity, adjacency)
    }

    fn validate(&self) -> Result<(), LfaError> {
        let invalid = |why: String| Err(LfaError::InvalidGraph(why));
        if self.first_hops == 0 || self.dest_edges == 0 {
            return invalid("need at least one first hop and one destination edge".into());
        }
        if self.capacity <= Bandwidth::zero() {
            return invalid("capacity must be positive".into());
        }
        for (node, succ) in &self.adjacency {
            if !node.is_intermediate() {
                return invalid(format!("{node} cannot have an adjacency list"));
            }
            if let Node::Hop(i) = node {
                if *i as usize >= self.first_hops {
                    return invalid(format!("{node} exceeds the first-hop count"));
                }
            }
            if let Node::Tail(j) = node {
                if *j as usize >= self.dest_edges {
                    return invalid(format!("{node} exceeds the destination-edge count"));
                }
            }
            for next in succ {
                if matches!(next, Node::Source | Node::Hop(_)) {
                    return invalid(format!("edge {node}->{next} points back into the first layer"));
                }
                if *next == Node::Dest && !matches!(node, Node::Tail(_)) {
                    return invalid(format!("only destination-edge tails may enter d, not {node}"));
                }
            }
        }
        for j in 0..self.dest_edges {
            if !self.has_edge(&Edge::dest(j)) {
                return invalid(format!("destination edge e{} is missing", j + 1));
            }
        }
        // Acyclicity by iterative DFS colouring.
        let mut state: BTreeMap<Node, u8> = BTreeMap::new();
        for start in self.adjacency.keys() {
            if state.contains_key(start) {
                continue;
            }
            let mut stack = vec![(*start, false)];
            while let Some((node, done)) = stack.pop() {
                if done {
                    state.insert(node, 2);
                    continue;
                }
                match state.get(&node) {
                    Some(2) => continue,
                    Some(1) => continue,
                    _ => {}
                }
                state.insert(node, 1);
                stack.push((node, true));
                for next in self.successors(node) {
                    match state.get(&next) {
                        Some(1) => return invalid(format!("cycle through {next}")),
                        Some(2) => {}
                        _ => stack.push((next, false)),
                    }
                }
            }
        }
        for i in 0..self.first_hops as u32 {
            if !self.reaches_dest(Node::Hop(i)) {
                return invalid(format!("{} has no path to d", Node::Hop(i)));
            }
        }
        Ok(())
    }

    fn reaches_dest(&self, from: Node) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(node) = stack.pop() {
            if node == Node::Dest {
                return true;
            }
            if seen.insert(node) {
                stack.extend(self.successors(node));
            }
        }
        false
    }

    pub fn first_hop_count(&self) -> usize {
        self.first_hops
    }

    pub fn dest_edge_count(&self) -> usize {
        self.dest_edges
    }

    pub fn capacity(&self) -> Bandwidth {
        self.capacity
    }

    pub fn successors(&self, node: Node) -> impl Iterator<Item = Node> + '_ {
        let implicit: Vec<Node> = if node == Node::Source {
            (0..self.first_hops as u32).map(Node::Hop).collect()
        } else {
            Vec::new()
        };
        implicit
            .into_iter()
            .chain(self.adjacency.get(&node).into_iter().flatten().copied())
    }

    /// The unique successor of `node`, when it has exactly one.
    pub fn sole_successor(&self, node: Node) -> Option<Node> {
        let set = self.adjacency.get(&node)?;
        if set.len() == 1 {
            set.iter().next().copied()
        } else {
            None
        }
    }

    pub fn has_edge(&self, edge: &Edge) -> bool {
        match edge.from {
            Node::Source => matches!(edge.to, Node::Hop(i) if (i as usize) < self.first_hops),
            from => self.adjacency.get(&from).is_some_and(|s| s.contains(&edge.to)),
        }
    }

    /// Capacity of `edge`; `None` for the infinite-capacity source edges.
    pub fn edge_capacity(&self, edge: &Edge) -> Result<Option<Bandwidth>, LfaError> {
        if !self.has_edge(edge) {
            return Err(LfaError::UnknownEdge(*edge));
        }
        Ok(if edge.from == Node::Source { None } else { Some(self.capacity) })
    }

    /// All edges with finite capacity, in a stable order.
    pub fn finite_edges(&self) -> Vec<Edge> {
        self.adjacency
            .iter()
            .flat_map(|(from, succ)| succ.iter().map(move |to| Edge::new(*from, *to)))
            .collect()
    }

    /// True when this is exactly the shape built by [`LfaGraph::canonical`].
    pub fn is_canonical(&self) -> bool {
        LfaGraph::canonical(self.first_hops, self.dest_edges, self.capacity)
            .is_ok_and(|c| c.adjacency == self.adjacency)
    }

    /// Same topology with another uniform capacity.
    pub fn with_capacity(&self, capacity: Bandwidth) -> Result<Self, LfaError> {
        Self::new(self.first_hops, self.dest_edges, capacity, self.adjacency.clone())
    }

    pub(crate) fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            first_hops: self.first_hops,
            dest_edges: self.dest_edges,
            capacity: self.capacity,
            adjacency: if self.is_canonical() {
                None
            } else {
                Some(
                    self.adjacency
                        .iter()
                        .map(|(k, v)| (k.to_string(), v.iter().copied().collect()))
                        .collect(),
                )
            },
        }
    }

    pub(crate) fn from_spec(spec: GraphSpec) -> Result<Self, LfaError> {
        match spec.adjacency {
            None => Self::canonical(spec.first_hops, spec.dest_edges, spec.capacity),
            Some(adj) => {
                let mut adjacency = BTreeMap::new();
                for (k, v) in adj {
                    adjacency.insert(k.parse()?, v.into_iter().collect());
                }
                Self::new(spec.first_hops, spec.dest_edges, spec.capacity, adjacency)
            }
        }
    }
}

/// Serialized graph dimensions (the adjacency is omitted for the canonical shape).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct GraphSpec {
    first_hops: usize,
    dest_edges: usize,
    #[serde(with = "serde_ratio")]
    capacity: Bandwidth,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    adjacency: Option<BTreeMap<String, Vec<Node>>>,
}
