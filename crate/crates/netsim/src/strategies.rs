//! Compiling a flow swap into a command plan for each update approach.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::Duration;

use num_traits::{One, Zero};
use time4_core::{GameState, LfaGraph, Node, Update};
use time4_wire::ToleranceConfig;

use crate::plan::{schedule_timed_update, Changes, Command, Plan, TimedUpdate};
use crate::{mbps, ClockRegistry, Fraction, Nanos, Rate, SimError, SimFlow, SimParams, World, NANOS_PER_MS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub flow: u32,
    pub switch: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapIntent {
    pub switches: usize,
    pub edges: usize,
    pub capacity: Rate,
    pub flows: Vec<SimFlow>,
    pub moves: Vec<Move>,
}

impl SwapIntent {
    /// The n-switch swap at impact 0.5 on 10 Mbps links: a 5 Mbps flow on e_1 trades places
    /// with n−1 flows of 5/(n−1) Mbps on e_2, next to a static 5 Mbps flow on each edge.
    pub fn flow_swap(n: usize) -> Result<Self, SimError> {
        if n < 2 {
            return Err(SimError::Intent("a flow swap needs at least two switches".into()));
        }
        let small = mbps(5) / Rate::from_integer(n as i64 - 1);
        let mut flows = vec![SimFlow { id: 1, rate: mbps(5), switch: 0, edge: 0 }];
        let mut moves = vec![Move { flow: 1, switch: 0, from: 0, to: 1 }];
        for i in 1..n {
            let id = i as u32 + 1;
            flows.push(SimFlow { id, rate: small, switch: i, edge: 1 });
            moves.push(Move { flow: id, switch: i, from: 1, to: 0 });
        }
        flows.push(SimFlow { id: n as u32 + 1, rate: mbps(5), switch: 0, edge: 0 });
        flows.push(SimFlow { id: n as u32 + 2, rate: mbps(5), switch: n - 1, edge: 1 });
        let intent = SwapIntent { switches: n, edges: 2, capacity: mbps(10), flows, moves };
        intent.validate()?;
        Ok(intent)
    }

    fn flow(&self, id: u32) -> Option<&SimFlow> {
        self.flows.iter().find(|f| f.id == id)
    }

    pub fn before_routes(&self) -> BTreeMap<u32, usize> {
        self.flows.iter().map(|f| (f.id, f.edge)).collect()
    }

    pub fn after_routes(&self) -> BTreeMap<u32, usize> {
        let mut routes = self.before_routes();
        for m in &self.moves {
            routes.insert(m.flow, m.to);
        }
        routes
    }

    /// The routing as an LFA game state with capacities normalised to 1.
    pub fn game_state(&self, routes: &BTreeMap<u32, usize>) -> Result<GameState, SimError> {
        let mut state = GameState::new(LfaGraph::canonical(self.switches, self.edges, time4_core::Bandwidth::one())?);
        for f in &self.flows {
            let hop = Node::Hop(f.switch as u32);
            state = state.add_flow(time4_core::Flow::new(f.id, f.rate / self.capacity, hop))?;
            state = state.apply_update(&Update::reroute(f.id, hop, Node::Tail(routes[&f.id] as u32)))?;
        }
        Ok(state)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let mut seen = BTreeSet::new();
        for m in &self.moves {
            let f = self.flow(m.flow).ok_or(SimError::UnknownFlow(m.flow))?;
            if f.switch != m.switch || f.edge != m.from || m.to >= self.edges || m.to == m.from {
                return Err(SimError::Intent(format!("move of flow {} does not match the flow", m.flow)));
            }
            if !seen.insert(m.flow) {
                return Err(SimError::Intent(format!("flow {} moves twice", m.flow)));
            }
        }
        if self.moves.is_empty() {
            return Err(SimError::Intent("nothing to move".into()));
        }
        for (label, routes) in [("before", self.before_routes()), ("after", self.after_routes())] {
            if !self.game_state(&routes)?.validate_lossless()? {
                return Err(SimError::Intent(format!("{label}-state is not lossless")));
            }
        }
        Ok(())
    }

    pub fn touched_edges(&self) -> BTreeSet<usize> {
        self.moves.iter().flat_map(|m| [m.from, m.to]).collect()
    }

    /// All rates multiplied by `factor`.
    pub fn scaled(&self, factor: Fraction) -> Self {
        let mut out = self.clone();
        for f in &mut out.flows {
            f.rate *= factor;
        }
        out
    }

    fn loads(&self, moved: impl Fn(usize) -> bool) -> Vec<Rate> {
        let mut loads = vec![Rate::zero(); self.edges];
        for f in &self.flows {
            loads[f.edge] += f.rate;
        }
        for (i, m) in self.moves.iter().enumerate() {
            if moved(i) {
                let r = self.flow(m.flow).expect("validated").rate;
                loads[m.from] -= r;
                loads[m.to] += r;
            }
        }
        loads
    }

    /// Least relative overload reachable by landing every move toward one edge before the
    /// others: the swap impact, generalised to groups of moves.
    pub fn impact(&self) -> Fraction {
        let targets: BTreeSet<usize> = self.moves.iter().map(|m| m.to).collect();
        targets
            .iter()
            .map(|&t| {
                let loads = self.loads(|i| self.moves[i].to == t);
                peak_over(&loads, self.capacity) / self.capacity
            })
            .min()
            .unwrap_or_else(Fraction::zero)
    }
}

fn peak_over(loads: &[Rate], cap: Rate) -> Rate {
    loads.iter().map(|l| (*l - cap).max(Rate::zero())).max().unwrap_or_else(Rate::zero)
}

fn total_over(loads: &[Rate], cap: Rate) -> Rate {
    loads.iter().map(|l| (*l - cap).max(Rate::zero())).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Time4,
    Untimed,
    Ordered,
    TwoPhase,
    Swan(Fraction),
    B4(Fraction),
    Time4Swan(Fraction),
    Time4B4(Fraction),
}

impl StrategyKind {
    pub fn label(&self) -> &'static str {
        match self {
            StrategyKind::Time4 => "time4",
            StrategyKind::Untimed => "untimed",
            StrategyKind::Ordered => "ordered",
            StrategyKind::TwoPhase => "two-phase",
            StrategyKind::Swan(_) => "swan",
            StrategyKind::B4(_) => "b4",
            StrategyKind::Time4Swan(_) => "time4+swan",
            StrategyKind::Time4B4(_) => "time4+b4",
        }
    }

    /// Scratch or reduction fraction; zero for the others.
    pub fn param(&self) -> Fraction {
        match self {
            StrategyKind::Swan(p) | StrategyKind::B4(p) | StrategyKind::Time4Swan(p) | StrategyKind::Time4B4(p) => *p,
            _ => Fraction::zero(),
        }
    }

    pub fn is_timed(&self) -> bool {
        matches!(self, StrategyKind::Time4 | StrategyKind::Time4Swan(_) | StrategyKind::Time4B4(_))
    }

    /// Parses `name` or `name:fraction`, e.g. `swan:0.1` or `time4+b4:1/20`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let (name, param) = match text.split_once(':') {
            Some((n, p)) => (n, Some(time4_core::parse_ratio(p).map_err(|e| e.to_string())?)),
            None => (text, None),
        };
        let p = || param.ok_or_else(|| format!("strategy {name} needs a fraction, e.g. {name}:0.1"));
        let kind = match name.trim().to_ascii_lowercase().as_str() {
            "time4" => StrategyKind::Time4,
            "untimed" | "naive" => StrategyKind::Untimed,
            "ordered" => StrategyKind::Ordered,
            "two-phase" | "twophase" => StrategyKind::TwoPhase,
            "swan" => StrategyKind::Swan(p()?),
            "b4" => StrategyKind::B4(p()?),
            "time4+swan" => StrategyKind::Time4Swan(p()?),
            "time4+b4" => StrategyKind::Time4B4(p()?),
            other => return Err(format!("unknown strategy {other:?}")),
        };
        let f = kind.param();
        if f < Fraction::zero() || f >= Fraction::one() {
            return Err(format!("fraction must lie in [0, 1), got {f}"));
        }
        Ok(kind)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::Swan(p) | StrategyKind::B4(p) | StrategyKind::Time4Swan(p) | StrategyKind::Time4B4(p) => {
                write!(f, "{}:{}", self.label(), p)
            }
            _ => f.write_str(self.label()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// How far past the last dispatch T_s is placed.
    pub schedule_advance: Nanos,
    /// When SWAN finds no congestion-free order, use the least congested one instead of failing.
    pub swan_fallback: bool,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind) -> Self {
        StrategyConfig { kind, schedule_advance: 100 * NANOS_PER_MS, swan_fallback: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub world: World,
    pub plan: Plan,
    /// Moves in the order they are dispatched.
    pub order: Vec<Move>,
}

/// Consecutive moves at the same switch share one command.
fn group_by_switch(order: &[Move]) -> Vec<(usize, Changes)> {
    let mut groups: Vec<(usize, Changes)> = Vec::new();
    for m in order {
        match groups.last_mut() {
            Some((s, changes)) if *s == m.switch => changes.push((m.flow, m.to)),
            _ => groups.push((m.switch, vec![(m.flow, m.to)])),
        }
    }
    groups
}

fn flow_mods(groups: &[(usize, Changes)], start: Nanos, gap: Nanos) -> Vec<Command> {
    groups
        .iter()
        .enumerate()
        .map(|(k, (s, changes))| Command::FlowMod { at: start + gap * k as Nanos, switch: *s, changes: changes.clone(), latency: None })
        .collect()
}

/// Builds the world and plan for one approach. The world's clocks start equal to the
/// controller's `estimates`; overwrite them to model estimation error.
pub fn compile(intent: &SwapIntent, cfg: &StrategyConfig, params: &SimParams, estimates: &ClockRegistry) -> Result<Compiled, SimError> {
    intent.validate()?;
    params.validate()?;
    let param = cfg.kind.param();
    if param < Fraction::zero() || param >= Fraction::one() {
        return Err(SimError::Params(format!("fraction {param} outside [0, 1)")));
    }
    let scratch = match cfg.kind {
        StrategyKind::Swan(s) | StrategyKind::Time4Swan(s) => s,
        _ => Fraction::zero(),
    };
    // Scratch ν: the network carries only (1 − ν) of each link's capacity in steady state.
    let intent = intent.scaled(Fraction::one() - scratch);
    let mut world = World::new(intent.switches, intent.edges, intent.capacity, intent.flows.clone());
    world.clocks = estimates.clone();

    let order: Vec<Move> = match cfg.kind {
        StrategyKind::Swan(_) => {
            let (idx, peak) = swan_order(&intent);
            if peak > Rate::zero() && !cfg.swan_fallback {
                return Err(SimError::Intent(format!("no congestion-free order; least peak overload {peak} b/s")));
            }
            idx.into_iter().map(|i| intent.moves[i]).collect()
        }
        _ => intent.moves.clone(),
    };
    let groups = group_by_switch(&order);
    let delta = params.delta;
    let last_dispatch = delta * (groups.len() as Nanos - 1);

    let reduction = match cfg.kind {
        StrategyKind::B4(r) | StrategyKind::Time4B4(r) => Some(r),
        _ => None,
    };
    let mut commands = Vec::new();
    if let Some(r) = reduction {
        let touched = intent.touched_edges();
        for f in intent.flows.iter().filter(|f| touched.contains(&f.edge)) {
            commands.push(Command::SetRate { at: 0, flow: f.id, rate: f.rate * (Fraction::one() - r) });
        }
    }

    let mut plan = Plan::default();
    let restore_at;
    if cfg.kind.is_timed() {
        let t_s = last_dispatch + cfg.schedule_advance;
        let updates: Vec<TimedUpdate> = groups.iter().map(|(s, c)| TimedUpdate { switch: *s, changes: c.clone() }).collect();
        let timed = schedule_timed_update(estimates, &updates, t_s, 0, delta)?;
        commands.extend(timed.commands);
        plan.all_or_none = true;
        let default_future = ToleranceConfig::default().sched_max_future;
        if Duration::from_nanos(t_s as u64) > default_future {
            plan.tolerance = Some(ToleranceConfig { sched_max_future: Duration::from_nanos(t_s as u64) + default_future, ..Default::default() });
        }
        restore_at = t_s + params.sched_error + delta;
    } else if cfg.kind == StrategyKind::TwoPhase {
        // First wave installs the new-version rules, second wave flips the ingress tags.
        let prepare: Vec<(usize, Changes)> = groups.iter().map(|(s, _)| (*s, Vec::new())).collect();
        commands.extend(flow_mods(&prepare, 0, delta));
        commands.extend(flow_mods(&groups, delta * groups.len() as Nanos, delta));
        restore_at = 2 * last_dispatch + delta + params.install_range + delta;
    } else {
        commands.extend(flow_mods(&groups, 0, delta));
        restore_at = last_dispatch + params.install_range + delta;
    }
    if reduction.is_some() {
        let touched = intent.touched_edges();
        for f in intent.flows.iter().filter(|f| touched.contains(&f.edge)) {
            commands.push(Command::SetRate { at: restore_at, flow: f.id, rate: f.rate });
        }
    }
    plan.commands = commands;
    Ok(Compiled { world, plan, order })
}

/// Dispatch order for a SWAN-style update: the least peak overload over all intermediate
/// states, then the least summed overload. Exhaustive up to 12 moves, greedy beyond.
/// Returns move indices and the peak overload in b/s (zero when congestion-free).
pub fn swan_order(intent: &SwapIntent) -> (Vec<usize>, Rate) {
    const EXHAUSTIVE: usize = 12;
    let k = intent.moves.len();
    let cap = intent.capacity;
    if k <= EXHAUSTIVE {
        let states = 1usize << k;
        let mut peak = Vec::with_capacity(states);
        let mut sum = Vec::with_capacity(states);
        for s in 0..states {
            let loads = intent.loads(|i| s >> i & 1 == 1);
            peak.push(peak_over(&loads, cap));
            sum.push(total_over(&loads, cap));
        }
        // Bottleneck over prefixes.
        let mut best = vec![Rate::zero(); states];
        for s in 1..states {
            best[s] = (0..k)
                .filter(|i| s >> i & 1 == 1)
                .map(|i| best[s & !(1 << i)].max(peak[s]))
                .min()
                .expect("non-empty set");
        }
        let bound = best[states - 1];
        // Least summed overload among orders that respect the bound.
        let mut cost: Vec<Option<Rate>> = vec![None; states];
        let mut last = vec![usize::MAX; states];
        cost[0] = Some(Rate::zero());
        for s in 1..states {
            if peak[s] > bound {
                continue;
            }
            for i in (0..k).filter(|i| s >> i & 1 == 1) {
                if let Some(c) = cost[s & !(1 << i)] {
                    let c = c + sum[s];
                    if cost[s].is_none_or(|cur| c < cur) {
                        cost[s] = Some(c);
                        last[s] = i;
                    }
                }
            }
        }
        let mut order = Vec::with_capacity(k);
        let mut s = states - 1;
        while s != 0 {
            let i = last[s];
            order.push(i);
            s &= !(1 << i);
        }
        order.reverse();
        (order, bound)
    } else {
        let mut moved = vec![false; k];
        let mut order = Vec::with_capacity(k);
        let mut bound = Rate::zero();
        for _ in 0..k {
            let (i, p) = (0..k)
                .filter(|&i| !moved[i])
                .map(|i| {
                    let loads = intent.loads(|j| moved[j] || j == i);
                    (i, peak_over(&loads, cap), total_over(&loads, cap))
                })
                .min_by(|a, b| (a.1, a.2, a.0).cmp(&(b.1, b.2, b.0)))
                .map(|(i, p, _)| (i, p))
                .expect("a move remains");
            moved[i] = true;
            order.push(i);
            bound = bound.max(p);
        }
        (order, bound)
    }
}
