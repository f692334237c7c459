//! Exhaustive controller oracle over the canonical topology.
//!
//! On the canonical shape a flow's route is fully described by the destination edge chosen
//! at its first hop, so a routing configuration is a vector of edge indices. Bandwidths are
//! scaled to integers by the common denominator, which keeps every comparison exact.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet, VecDeque};
use std::rc::Rc;

use num_integer::Integer;

use crate::controller::ControllerPlan;
use crate::game::{Flow, FlowId, GameState, Update};
use crate::graph::Node;
use crate::LfaError;

pub const MAX_FLOWS: usize = 16;
pub const MAX_DEST_EDGES: usize = 5;
pub const MAX_VISITED: usize = 2_000_000;

const UNPLACED: u8 = u8::MAX;

type Config = Vec<u8>;

/// Result of [`controller_search`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Plan(SearchPlan),
    Infeasible,
}

impl SearchOutcome {
    pub fn plan(&self) -> Option<&SearchPlan> {
        match self {
            SearchOutcome::Plan(p) => Some(p),
            SearchOutcome::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchPlan {
    pub plan: ControllerPlan,
    /// `None` when single reroutes suffice; otherwise the fewest switches some update of
    /// any lossless plan has to touch at once.
    pub min_k: Option<usize>,
}

/// How many switches one multi-entry update may touch. `None` means reroutes only.
type Level = Option<usize>;

#[derive(Debug, Clone)]
pub(crate) struct Instance {
    ids: Vec<FlowId>,
    hops: Vec<u32>,
    sizes: Vec<i64>,
    capacity: i64,
    dest_edges: usize,
    first_hops: usize,
    start: Config,
}

impl Instance {
    fn new(state: &GameState) -> Result<Self, LfaError> {
        let graph = state.graph();
        if !graph.is_canonical() {
            return Err(LfaError::NotCanonical);
        }
        if state.flow_count() > MAX_FLOWS {
            return Err(LfaError::GuardExceeded(format!(
                "{} flows (limit {MAX_FLOWS})",
                state.flow_count()
            )));
        }
        if graph.dest_edge_count() > MAX_DEST_EDGES {
            return Err(LfaError::GuardExceeded(format!(
                "{} destination edges (limit {MAX_DEST_EDGES})",
                graph.dest_edge_count()
            )));
        }
        let cap = graph.capacity();
        let denom = state.flows().fold(*cap.denom(), |acc, f| acc.lcm(f.bandwidth.denom()));
        let scale = |r: &crate::Bandwidth| r.numer() * (denom / r.denom());
        let mut inst = Instance {
            ids: Vec::new(),
            hops: Vec::new(),
            sizes: Vec::new(),
            capacity: scale(&cap),
            dest_edges: graph.dest_edge_count(),
            first_hops: graph.first_hop_count(),
            start: Vec::new(),
        };
        for flow in state.flows() {
            let Node::Hop(hop) = flow.first_hop else { unreachable!("flows start at first hops") };
            inst.ids.push(flow.id);
            inst.hops.push(hop);
            inst.sizes.push(scale(&flow.bandwidth));
            inst.start.push(match state.dest_edge_of(flow.id)? {
                Some(j) => j as u8,
                None => UNPLACED,
            });
        }
        Ok(inst)
    }

    fn loads(&self, config: &[u8]) -> Vec<i64> {
        let mut loads = vec![0; self.dest_edges];
        for (i, &e) in config.iter().enumerate() {
            if e != UNPLACED {
                loads[e as usize] += self.sizes[i];
            }
        }
        loads
    }

    fn lossless(&self, config: &[u8]) -> bool {
        self.loads(config).iter().all(|&l| l <= self.capacity)
    }

    fn complete(config: &[u8]) -> bool {
        config.iter().all(|&e| e != UNPLACED)
    }

    /// Relabels destination edges in order of first use. Uniform capacities make every
    /// question asked here invariant under that relabeling.
    pub(crate) fn canonical(&self, config: &[u8]) -> Config {
        let mut map = [UNPLACED; 256];
        let mut next = 0u8;
        config
            .iter()
            .map(|&e| {
                if e == UNPLACED {
                    return UNPLACED;
                }
                if map[e as usize] == UNPLACED {
                    map[e as usize] = next;
                    next += 1;
                }
                map[e as usize]
            })
            .collect()
    }

    pub(crate) fn to_state(&self, base: &GameState, config: &[u8]) -> Result<GameState, LfaError> {
        let mut state = base.clone();
        for (i, &e) in config.iter().enumerate() {
            if e != UNPLACED && self.start[i] != e {
                state = state.apply_update(&Update::reroute(
                    self.ids[i],
                    Node::Hop(self.hops[i]),
                    Node::Tail(e as u32),
                ))?;
            }
        }
        Ok(state)
    }

    fn update_between(&self, from: &[u8], to: &[u8]) -> Result<Update, LfaError> {
        Update::from_pairs(
            from.iter()
                .zip(to)
                .enumerate()
                .filter(|(_, (a, b))| a != b)
                .map(|(i, (_, &b))| ((self.ids[i], Node::Hop(self.hops[i])), Node::Tail(b as u32))),
        )
    }

    fn reroute_neighbors(&self, config: &[u8], out: &mut Vec<(Config, u32)>) {
        let loads = self.loads(config);
        for i in 0..config.len() {
            for j in 0..self.dest_edges as u8 {
                if config[i] == j || loads[j as usize] + self.sizes[i] > self.capacity {
                    continue;
                }
                let mut next = config.to_vec();
                next[i] = j;
                out.push((next, 1));
            }
        }
    }

    /// Switches that currently hold at least one routed flow.
    fn active_hops(&self, config: &[u8]) -> Vec<u32> {
        (0..self.first_hops as u32)
            .filter(|h| (0..config.len()).any(|i| self.hops[i] == *h && config[i] != UNPLACED))
            .collect()
    }

    fn subsets(&self, config: &[u8], k: usize) -> Vec<Vec<u32>> {
        let active = self.active_hops(config);
        (1..=k.min(active.len())).flat_map(|size| combinations(&active, size)).collect()
    }

    /// Multi-entry updates touching exactly the switches in `subset`: every way of moving
    /// routed flows at those switches that keeps all edges within capacity.
    fn subset_neighbors(&self, config: &[u8], subset: &[u32], max_entries: u32, out: &mut Vec<(Config, u32)>) {
        let movable: Vec<usize> = (0..config.len())
            .filter(|&i| config[i] != UNPLACED && subset.contains(&self.hops[i]))
            .collect();
        let mut base = self.loads(config);
        for &i in &movable {
            base[config[i] as usize] -= self.sizes[i];
        }
        let mut next = config.to_vec();
        let mut touched = vec![0usize; self.first_hops];
        let mut walk = MultiWalk { movable: &movable, subset, max_entries, out };
        self.multi_dfs(&mut walk, 0, &mut base, &mut next, &mut touched, 0);
    }

    fn neighbors(&self, config: &[u8], level: Level, max_entries: u32, out: &mut Vec<(Config, u32)>) {
        out.clear();
        self.reroute_neighbors(config, out);
        let Some(k) = level else { return };
        if max_entries < 2 {
            return;
        }
        for subset in self.subsets(config, k) {
            self.subset_neighbors(config, &subset, max_entries, out);
        }
    }

    /// `config` with the flows at `subset` blanked, plus which flows were unrouted before.
    fn masked(&self, config: &[u8], subset: &[u32]) -> (Config, u64) {
        let mut unrouted = 0u64;
        let mut masked = config.to_vec();
        for i in 0..config.len() {
            if config[i] == UNPLACED {
                unrouted |= 1 << i;
            } else if subset.contains(&self.hops[i]) {
                masked[i] = UNPLACED;
            }
        }
        (self.canonical(&masked), unrouted)
    }

    fn unrouted(config: &[u8]) -> u32 {
        config.iter().filter(|&&e| e == UNPLACED).count() as u32
    }

    fn multi_dfs(
        &self,
        walk: &mut MultiWalk<'_>,
        pos: usize,
        loads: &mut Vec<i64>,
        next: &mut Config,
        touched: &mut Vec<usize>,
        moved: u32,
    ) {
        if moved > walk.max_entries {
            return;
        }
        if pos == walk.movable.len() {
            if moved >= 2 && walk.subset.iter().all(|h| touched[*h as usize] > 0) {
                walk.out.push((next.clone(), moved));
            }
            return;
        }
        let i = walk.movable[pos];
        let original = next[i];
        for j in 0..self.dest_edges as u8 {
            if loads[j as usize] + self.sizes[i] > self.capacity {
                continue;
            }
            loads[j as usize] += self.sizes[i];
            next[i] = j;
            let changed = j != original;
            if changed {
                touched[self.hops[i] as usize] += 1;
            }
            self.multi_dfs(walk, pos + 1, loads, next, touched, moved + changed as u32);
            if changed {
                touched[self.hops[i] as usize] -= 1;
            }
            loads[j as usize] -= self.sizes[i];
        }
        next[i] = original;
    }
}

struct MultiWalk<'a> {
    movable: &'a [usize],
    subset: &'a [u32],
    max_entries: u32,
    out: &'a mut Vec<(Config, u32)>,
}

fn combinations(items: &[u32], size: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(items: &[u32], size: usize, start: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..items.len() {
            current.push(items[i]);
            rec(items, size, i + 1, current, out);
            current.pop();
        }
    }
    rec(items, size, 0, &mut current, &mut out);
    out
}

/// Whether any complete routing is reachable at `level`, ignoring plan cost.
///
/// The multi-entry moves out of a state through a set of switches depend only on where the
/// other flows sit, so each such (switch set, rest of the routing) pair is expanded once.
fn reachable(inst: &Instance, level: Level) -> Result<bool, LfaError> {
    let mut seen = HashSet::from([inst.canonical(&inst.start)]);
    let mut expanded: HashSet<(Vec<u32>, Config, u64)> = HashSet::new();
    let mut queue = VecDeque::from([inst.start.clone()]);
    let mut buf = Vec::new();
    while let Some(config) = queue.pop_front() {
        if Instance::complete(&config) {
            return Ok(true);
        }
        buf.clear();
        inst.reroute_neighbors(&config, &mut buf);
        if let Some(k) = level {
            for subset in inst.subsets(&config, k) {
                let (masked, unrouted) = inst.masked(&config, &subset);
                if expanded.insert((subset.clone(), masked, unrouted)) {
                    inst.subset_neighbors(&config, &subset, u32::MAX, &mut buf);
                }
            }
        }
        for (next, _) in buf.drain(..) {
            if Instance::complete(&next) {
                return Ok(true);
            }
            if seen.insert(inst.canonical(&next)) {
                if seen.len() > MAX_VISITED {
                    return Err(LfaError::GuardExceeded(format!("more than {MAX_VISITED} routing states")));
                }
                queue.push_back(next);
            }
        }
    }
    Ok(false)
}

struct Visit {
    config: Config,
    parent: Option<usize>,
}

type Cost = (u32, u32);

/// Cheapest plans at one level, by (updates, entries). Every update places at most one
/// unrouted flow, so the unrouted count is an admissible estimate of the remaining cost.
/// Returns the plan to one optimal goal and every goal reached at the optimal cost.
fn dijkstra(inst: &Instance, level: Level) -> Result<Option<(Vec<Config>, Vec<Config>)>, LfaError> {
    let estimate = |c: &[u8]| {
        let u = Instance::unrouted(c);
        (u, u)
    };
    let add = |a: Cost, b: Cost| (a.0 + b.0, a.1 + b.1);
    let mut visits: Vec<Visit> = vec![Visit { config: inst.start.clone(), parent: None }];
    let mut index: HashMap<Config, usize> = HashMap::from([(inst.canonical(&inst.start), 0)]);
    let mut best: Vec<Cost> = vec![(0, 0)];
    // Ordered by estimated total, then deeper first so goals surface early among ties.
    // Ordered by estimated total, then deeper first so goals surface early among ties. The
    // last field marks a deferred multi-entry expansion, queued at its own lower bound.
    let mut heap = BinaryHeap::from([Reverse((estimate(&inst.start), Reverse((0u32, 0u32)), 0usize, false))]);
    let mut settled = vec![false];
    let mut bound: Option<Cost> = None;
    let mut goals: Vec<usize> = Vec::new();
    let mut buf = Vec::new();

    while let Some(Reverse((f, Reverse(cost), at, multi))) = heap.pop() {
        if bound.is_some_and(|b| f > b) {
            break;
        }
        let config = visits[at].config.clone();
        let h = Instance::unrouted(&config);
        buf.clear();
        if multi {
            if cost != best[at] {
                continue;
            }
            let max_entries = match bound {
                Some(b) if cost.0 + 1 + h == b.0 => b.1.saturating_sub(cost.1 + h),
                _ => u32::MAX,
            };
            if max_entries < 2 {
                continue;
            }
            let k = level.expect("multi-entry expansion only with swaps allowed");
            for subset in inst.subsets(&config, k) {
                inst.subset_neighbors(&config, &subset, max_entries, &mut buf);
            }
        } else {
            if settled[at] || cost > best[at] {
                continue;
            }
            settled[at] = true;
            if h == 0 {
                bound = Some(cost);
                goals.push(at);
                continue;
            }
            inst.reroute_neighbors(&config, &mut buf);
            if level.is_some() {
                heap.push(Reverse(((cost.0 + 1 + h, cost.1 + 2 + h), Reverse(cost), at, true)));
            }
        }
        for (next, entries) in buf.drain(..) {
            let cost_next = (cost.0 + 1, cost.1 + entries);
            let f_next = add(cost_next, estimate(&next));
            if bound.is_some_and(|b| f_next > b) {
                continue;
            }
            let key = inst.canonical(&next);
            let id = match index.get(&key) {
                Some(&seen) => {
                    if settled[seen] || cost_next >= best[seen] {
                        continue;
                    }
                    best[seen] = cost_next;
                    visits[seen] = Visit { config: next, parent: Some(at) };
                    seen
                }
                None => {
                    if visits.len() >= MAX_VISITED {
                        return Err(LfaError::GuardExceeded(format!("more than {MAX_VISITED} routing states")));
                    }
                    visits.push(Visit { config: next, parent: Some(at) });
                    index.insert(key, visits.len() - 1);
                    best.push(cost_next);
                    settled.push(false);
                    visits.len() - 1
                }
            };
            heap.push(Reverse((f_next, Reverse(cost_next), id, false)));
        }
    }
    let Some(&first) = goals.first() else { return Ok(None) };
    let mut path = Vec::new();
    let mut cursor = Some(first);
    while let Some(at) = cursor {
        path.push(visits[at].config.clone());
        cursor = visits[at].parent;
    }
    path.reverse();
    Ok(Some((path, goals.into_iter().map(|g| visits[g].config.clone()).collect())))
}

/// Cheapest plans at the lowest level that has any.
fn search_levels(inst: &Instance, allow_swaps: bool) -> Result<Option<(Level, Vec<Config>, Vec<Config>)>, LfaError> {
    if let Some((path, goals)) = dijkstra(inst, None)? {
        return Ok(Some((None, path, goals)));
    }
    if !allow_swaps || !packable(inst) {
        return Ok(None);
    }
    for k in 1..=inst.first_hops {
        if !reachable(inst, Some(k))? {
            continue;
        }
        if let Some((path, goals)) = dijkstra(inst, Some(k))? {
            return Ok(Some((Some(k), path, goals)));
        }
    }
    Err(LfaError::Infeasible("packing exists but no plan reached it".into()))
}

fn plan_from_path(inst: &Instance, path: &[Config]) -> Result<ControllerPlan, LfaError> {
    let mut updates = Vec::new();
    for pair in path.windows(2) {
        updates.push(inst.update_between(&pair[0], &pair[1])?);
    }
    Ok(ControllerPlan { updates, deletions: Vec::new() })
}

fn prepare(state: &GameState, new_flow: Option<Flow>) -> Result<(GameState, Instance), LfaError> {
    let state = match new_flow {
        Some(flow) => state.add_flow(flow)?,
        None => state.clone(),
    };
    let inst = Instance::new(&state)?;
    if !inst.lossless(&inst.start) {
        return Err(LfaError::InvalidParameter("search must start from a lossless routing".into()));
    }
    Ok((state, inst))
}

/// True when some complete lossless routing of all flows exists at all.
fn packable(inst: &Instance) -> bool {
    fn rec(inst: &Instance, order: &[usize], pos: usize, loads: &mut [i64]) -> bool {
        if pos == order.len() {
            return true;
        }
        let i = order[pos];
        let mut tried_empty = false;
        for j in 0..loads.len() {
            if loads[j] == 0 {
                if tried_empty {
                    continue;
                }
                tried_empty = true;
            }
            if loads[j] + inst.sizes[i] <= inst.capacity {
                loads[j] += inst.sizes[i];
                let ok = rec(inst, order, pos + 1, loads);
                loads[j] -= inst.sizes[i];
                if ok {
                    return true;
                }
            }
        }
        false
    }
    let mut order: Vec<usize> = (0..inst.sizes.len()).collect();
    order.sort_by_key(|&i| Reverse(inst.sizes[i]));
    rec(inst, &order, 0, &mut vec![0; inst.dest_edges])
}

/// Searches for a lossless plan that routes every flow, including `new_flow` when given.
///
/// Without swaps only sequences of single reroutes are considered. With swaps the level is
/// raised one switch at a time, so the plan returned uses the smallest feasible swap size.
pub fn controller_search(
    state: &GameState,
    new_flow: Option<Flow>,
    allow_swaps: bool,
) -> Result<SearchOutcome, LfaError> {
    let (_, inst) = prepare(state, new_flow)?;
    Ok(match search_levels(&inst, allow_swaps)? {
        Some((min_k, path, _)) => SearchOutcome::Plan(SearchPlan { plan: plan_from_path(&inst, &path)?, min_k }),
        None => SearchOutcome::Infeasible,
    })
}

/// Final states of every optimal plan at the minimal level, with that level. Results are
/// shared between states that differ only by swapping flows
/// of equal size at the same switch or by relabeling destination edges.
#[derive(Default)]
pub(crate) struct OutcomeCache {
    entries: HashMap<(i64, usize, Vec<(u32, i64, u8)>), Option<(Level, Vec<Config>)>>,
}

/// A relabeling of edges and an ordering of flows that brings a configuration to its
/// symmetry representative.
struct Frame {
    edges: Vec<u8>,
    order: Vec<usize>,
    key: Vec<(u32, i64, u8)>,
}

impl Frame {
    fn of(inst: &Instance, config: &[u8]) -> Frame {
        let mut best: Option<Frame> = None;
        for edges in permutations(inst.dest_edges) {
            let image = |i: usize| if config[i] == UNPLACED { UNPLACED } else { edges[config[i] as usize] };
            let mut order: Vec<usize> = (0..config.len()).collect();
            order.sort_by_key(|&i| (inst.hops[i], inst.sizes[i], image(i)));
            let key: Vec<_> = order.iter().map(|&i| (inst.hops[i], inst.sizes[i], image(i))).collect();
            if best.as_ref().is_none_or(|b| key < b.key) {
                best = Some(Frame { edges, order, key });
            }
        }
        best.expect("at least one destination edge")
    }

    fn to_frame(&self, config: &[u8]) -> Config {
        self.order
            .iter()
            .map(|&i| if config[i] == UNPLACED { UNPLACED } else { self.edges[config[i] as usize] })
            .collect()
    }

    fn from_frame(&self, framed: &[u8]) -> Config {
        let mut inverse = vec![0u8; self.edges.len()];
        for (j, &e) in self.edges.iter().enumerate() {
            inverse[e as usize] = j as u8;
        }
        let mut config = vec![UNPLACED; framed.len()];
        for (p, &i) in self.order.iter().enumerate() {
            if framed[p] != UNPLACED {
                config[i] = inverse[framed[p] as usize];
            }
        }
        config
    }
}

fn permutations(n: usize) -> Vec<Vec<u8>> {
    fn rec(current: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<Vec<u8>>) {
        if current.len() == used.len() {
            out.push(current.clone());
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                current.push(j as u8);
                rec(current, used, out);
                current.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

impl OutcomeCache {
    pub(crate) fn outcomes(&mut self, state: &GameState) -> Result<Option<(Level, Vec<GameState>)>, LfaError> {
        let (state, inst) = prepare(state, None)?;
        let frame = Frame::of(&inst, &inst.start);
        let key = (inst.capacity, inst.dest_edges, frame.key.clone());
        if !self.entries.contains_key(&key) {
            let found = search_levels(&inst, true)?
                .map(|(level, _, goals)| (level, goals.iter().map(|g| frame.to_frame(g)).collect()));
            self.entries.insert(key.clone(), found);
        }
        let Some((level, goals)) = &self.entries[&key] else { return Ok(None) };
        let states = goals.iter().map(|g| inst.to_state(&state, &frame.from_frame(g))).collect::<Result<_, _>>()?;
        Ok(Some((*level, states)))
    }
}

/// Complete lossless routings reachable by single reroutes, shared by every position of
/// the same reroute-connected component.
#[derive(Default)]
pub(crate) struct CompletionCache {
    components: HashMap<(Vec<FlowId>, Config), Rc<Vec<Config>>>,
}

impl CompletionCache {
    /// Returns the instance view of `state` and the completions reachable from it, one per
    /// relabeling class.
    pub(crate) fn completions(&mut self, state: &GameState) -> Result<(Instance, Rc<Vec<Config>>), LfaError> {
        let (_, inst) = prepare(state, None)?;
        let start_key = inst.canonical(&inst.start);
        if let Some(found) = self.components.get(&(inst.ids.clone(), start_key.clone())) {
            return Ok((inst, found.clone()));
        }
        let mut seen = HashSet::from([start_key]);
        let mut queue = VecDeque::from([inst.start.clone()]);
        let mut complete = Vec::new();
        let mut buf = Vec::new();
        while let Some(config) = queue.pop_front() {
            if Instance::complete(&config) {
                complete.push(inst.canonical(&config));
            }
            inst.neighbors(&config, None, 0, &mut buf);
            for (next, _) in buf.drain(..) {
                if seen.insert(inst.canonical(&next)) {
                    if seen.len() > MAX_VISITED {
                        return Err(LfaError::GuardExceeded(format!("more than {MAX_VISITED} routing states")));
                    }
                    queue.push_back(next);
                }
            }
        }
        let shared = Rc::new(complete);
        for key in seen {
            self.components.insert((inst.ids.clone(), key), shared.clone());
        }
        Ok((inst, shared))
    }
}

/// Every complete lossless routing reachable from `state` by single reroutes, one per
/// relabeling class.
pub fn reroute_completions(state: &GameState) -> Result<Vec<GameState>, LfaError> {
    let (inst, configs) = CompletionCache::default().completions(state)?;
    configs.iter().map(|c| inst.to_state(state, c)).collect()
}

/// Canonical key of a state's routing, for deduplication by callers.
pub(crate) fn routing_key(state: &GameState) -> Result<Vec<u8>, LfaError> {
    let inst = Instance::new(state)?;
    Ok(inst.canonical(&inst.start))
}

/// All complete lossless routings of the state's flows, one per relabeling class.
pub fn enumerate_lossless(state: &GameState) -> Result<Vec<GameState>, LfaError> {
    let inst = Instance::new(state)?;
    let mut out = Vec::new();
    let mut config = vec![UNPLACED; inst.ids.len()];
    let mut loads = vec![0; inst.dest_edges];
    fn rec(inst: &Instance, pos: usize, used: u8, config: &mut Config, loads: &mut [i64], out: &mut Vec<Config>) {
        if pos == config.len() {
            out.push(config.clone());
            return;
        }
        let limit = (used + 1).min(inst.dest_edges as u8);
        for j in 0..limit {
            if loads[j as usize] + inst.sizes[pos] > inst.capacity {
                continue;
            }
            loads[j as usize] += inst.sizes[pos];
            config[pos] = j;
            rec(inst, pos + 1, used.max(j + 1), config, loads, out);
            loads[j as usize] -= inst.sizes[pos];
        }
        config[pos] = UNPLACED;
    }
    let mut configs = Vec::new();
    rec(&inst, 0, 0, &mut config, &mut loads, &mut configs);
    let cleared = state.delete_entries(&state.routing().entries().map(|(k, _)| k).collect::<Vec<_>>());
    let blank = Instance { start: vec![UNPLACED; inst.ids.len()], ..inst };
    for c in configs {
        out.push(blank.to_state(&cleared, &c)?);
    }
    Ok(out)
}

/// Destination-edge classes of a routing: which flows share an edge.
pub fn edge_groups(state: &GameState) -> Result<Vec<BTreeSet<FlowId>>, LfaError> {
    let mut groups: Vec<BTreeSet<FlowId>> = vec![BTreeSet::new(); state.graph().dest_edge_count()];
    for flow in state.flows() {
        if let Some(j) = state.dest_edge_of(flow.id)? {
            groups[j].insert(flow.id);
        }
    }
    groups.retain(|g| !g.is_empty());
    groups.sort();
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LfaGraph;
    use crate::ratio::parse_ratio;
    use crate::Bandwidth;
    use num_traits::One;

    fn state_with(flows: &[(FlowId, &str, u32, Option<u32>)], n: usize, m: usize) -> GameState {
        let mut s = GameState::new(LfaGraph::canonical(n, m, Bandwidth::one()).unwrap());
        for &(id, bw, hop, edge) in flows {
            s = s.add_flow(Flow::new(id, parse_ratio(bw).unwrap(), Node::Hop(hop))).unwrap();
            if let Some(e) = edge {
                s = s.apply_update(&Update::reroute(id, Node::Hop(hop), Node::Tail(e))).unwrap();
            }
        }
        s
    }

    #[test]
    fn symmetric_position_forces_a_two_swap() {
        let s = state_with(
            &[(1, "0.35", 0, Some(0)), (2, "0.35", 0, Some(1)), (3, "0.45", 1, Some(0)), (4, "0.45", 1, Some(1))],
            2,
            2,
        );
        let f5 = Flow::new(5, parse_ratio("0.3").unwrap(), Node::Hop(0));
        assert_eq!(controller_search(&s, Some(f5), false).unwrap(), SearchOutcome::Infeasible);
        let SearchOutcome::Plan(plan) = controller_search(&s, Some(f5), true).unwrap() else {
            panic!("swap plan expected")
        };
        assert_eq!(plan.min_k, Some(2));
        assert_eq!(plan.plan.updates.len(), 2);
        assert!(plan.plan.updates[0].is_swap());
        assert_eq!(plan.plan.updates[0].len(), 2);
    }

    #[test]
    fn reroutes_suffice_when_there_is_room() {
        let s = state_with(&[(1, "0.5", 0, Some(0))], 2, 2);
        let f = Flow::new(2, parse_ratio("0.5").unwrap(), Node::Hop(1));
        let plan = controller_search(&s, Some(f), false).unwrap();
        let p = plan.plan().unwrap();
        assert_eq!(p.min_k, None);
        assert_eq!(p.plan.updates.len(), 1);
    }

    #[test]
    fn overfull_demand_is_infeasible_even_with_swaps() {
        let s = state_with(&[(1, "0.6", 0, Some(0)), (2, "0.6", 1, Some(1))], 2, 2);
        let f = Flow::new(3, parse_ratio("0.6").unwrap(), Node::Hop(0));
        assert_eq!(controller_search(&s, Some(f), true).unwrap(), SearchOutcome::Infeasible);
    }

    #[test]
    fn guard_rejects_large_instances() {
        let flows: Vec<(FlowId, &str, u32, Option<u32>)> = (0..17).map(|i| (i, "1/20", 0, None)).collect();
        let s = state_with(&flows, 1, 2);
        assert!(matches!(controller_search(&s, None, true), Err(LfaError::GuardExceeded(_))));
        let s = GameState::new(LfaGraph::canonical(2, 6, Bandwidth::one()).unwrap());
        assert!(matches!(controller_search(&s, None, true), Err(LfaError::GuardExceeded(_))));
    }

    #[test]
    fn lossless_enumeration_counts_partitions() {
        // Three flows of 0.5 over two edges: {a,b}{c}, {a,c}{b}, {b,c}{a}.
        let s = state_with(&[(1, "0.5", 0, None), (2, "0.5", 0, None), (3, "0.5", 0, None)], 1, 2);
        assert_eq!(enumerate_lossless(&s).unwrap().len(), 3);
    }

    #[test]
    fn canonical_key_ignores_labels() {
        let a = state_with(&[(1, "0.5", 0, Some(0)), (2, "0.5", 0, Some(1))], 1, 2);
        let b = state_with(&[(1, "0.5", 0, Some(1)), (2, "0.5", 0, Some(0))], 1, 2);
        assert_eq!(routing_key(&a).unwrap(), routing_key(&b).unwrap());
    }
}
