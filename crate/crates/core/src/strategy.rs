//! Source strategies that force flow swaps.
//!
//! Every strategy is a resumable script. It emits a fixed prefix of moves, then looks at how
//! the controller grouped two marker flows and finishes with the matching tail.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

use crate::game::{Flow, FlowId, GameState};
use crate::graph::{LfaGraph, Node};
use crate::ratio::format_ratio;
use crate::{Bandwidth, LfaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceAction {
    Add,
    Remove,
}

/// One step of the source: `(a, F)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SourceMove {
    pub action: SourceAction,
    pub flow: Flow,
}

impl SourceMove {
    pub fn add(flow: Flow) -> Self {
        Self { action: SourceAction::Add, flow }
    }

    pub fn remove(flow: Flow) -> Self {
        Self { action: SourceAction::Remove, flow }
    }
}

impl fmt::Display for SourceMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verb = match self.action {
            SourceAction::Add => "add",
            SourceAction::Remove => "remove",
        };
        write!(f, "{verb} F{} = {}", self.flow.id, self.flow)
    }
}

impl GameState {
    pub fn apply_source_move(&self, mv: &SourceMove) -> Result<GameState, LfaError> {
        match mv.action {
            SourceAction::Add => self.add_flow(mv.flow),
            SourceAction::Remove => self.remove_flow(mv.flow.id),
        }
    }
}

/// Flow bandwidths `h` (type A) and `g` (total of type B, and of type C) for the n-swap
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NSwapParams {
    pub h: Bandwidth,
    pub g: Bandwidth,
    pub n: usize,
}

impl NSwapParams {
    /// Checks `1/3 < h < g < 1/2` and `g > (n² − n)(1 − 2h)`.
    pub fn validate(&self) -> Result<(), LfaError> {
        let third = Bandwidth::new(1, 3);
        let half = Bandwidth::new(1, 2);
        let k = (self.n * self.n - self.n) as i64;
        if !(third < self.h && self.h < self.g && self.g < half) {
            return Err(LfaError::InvalidParameter(format!(
                "need 1/3 < h < g < 1/2, got h={} g={}",
                format_ratio(&self.h),
                format_ratio(&self.g)
            )));
        }
        if self.g <= Bandwidth::from(k) * (Bandwidth::one() - self.h * 2) {
            return Err(LfaError::InvalidParameter(format!(
                "need g > (n^2-n)(1-2h) for n={}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Picks `(g, h)` for `n ≥ 3`.
///
/// First tries `g = 23/48` with `h` halfway between `1/2 − g/(2(n² − n))` and `g`. That
/// interval is empty once `n ≥ 4`; the fallback `g = 1/2 − 1/(16K)`, `h = 1/2 − 1/(8K)`
/// with `K = n² − n` satisfies both inequalities for every `n`.
pub fn choose_gh(n: usize) -> Result<NSwapParams, LfaError> {
    if n < 3 {
        return Err(LfaError::InvalidParameter(format!("n-swap construction needs n >= 3, got {n}")));
    }
    let half = Bandwidth::new(1, 2);
    let k = (n * n - n) as i64;
    let g = Bandwidth::new(23, 48);
    let h_min = half - g / Bandwidth::from(2 * k);
    let h = (h_min + g) / Bandwidth::from(2);
    let first = NSwapParams { h, g, n };
    if h_min < g && first.validate().is_ok() {
        return Ok(first);
    }
    let params = NSwapParams {
        g: half - Bandwidth::new(1, 16 * k),
        h: half - Bandwidth::new(1, 8 * k),
        n,
    };
    params.validate()?;
    Ok(params)
}

/// Which construction a [`Strategy`] runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    TwoSwap,
    MHalves,
    Impact { alpha: Bandwidth },
    Scratch { nu: Bandwidth, alpha: Bandwidth },
    NSwap(NSwapParams),
}

/// A scripted source strategy.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Strategy {
    kind: StrategyKind,
    first_hops: usize,
    dest_edges: usize,
    capacity: Bandwidth,
    prefix: Vec<SourceMove>,
    /// Flows whose grouping decides the tail.
    marker: Option<(FlowId, FlowId)>,
    if_together: Vec<SourceMove>,
    if_split: Vec<SourceMove>,
    together: Option<bool>,
    pos: usize,
}

const SATURATING_BASE: FlowId = 100;

fn add(id: FlowId, bandwidth: Bandwidth, hop: u32) -> SourceMove {
    SourceMove::add(Flow::new(id, bandwidth, Node::Hop(hop)))
}

fn saturate(count: usize, capacity: Bandwidth) -> Vec<SourceMove> {
    (0..count).map(|i| add(SATURATING_BASE + 1 + i as FlowId, capacity, 0)).collect()
}

fn check_dims(n: usize, min_n: usize, m: usize, min_m: usize) -> Result<(), LfaError> {
    if n < min_n {
        return Err(LfaError::InvalidParameter(format!("need n >= {min_n}, got {n}")));
    }
    if m < min_m {
        return Err(LfaError::InvalidParameter(format!("need m >= {min_m}, got {m}")));
    }
    Ok(())
}

impl Strategy {
    fn two_swap_family(
        kind: StrategyKind,
        n: usize,
        m: usize,
        capacity: Bandwidth,
        [f12, f34, f5, f67]: [Bandwidth; 4],
    ) -> Result<Self, LfaError> {
        check_dims(n, 2, m, 2)?;
        let mut prefix = saturate(m - 2, capacity);
        prefix.extend([add(1, f12, 0), add(2, f12, 0), add(3, f34, 1), add(4, f34, 1)]);
        Ok(Self {
            kind,
            first_hops: n,
            dest_edges: m,
            capacity,
            prefix,
            marker: Some((1, 2)),
            if_together: vec![add(6, f67, 0), add(7, f67, 0)],
            if_split: vec![add(5, f5, 0)],
            together: None,
            pos: 0,
        })
    }

    /// Forces a 2-swap: flows of 0.35, 0.35, 0.45, 0.45, then 0.3 or two of 0.2.
    pub fn two_swap(n: usize, m: usize) -> Result<Self, LfaError> {
        let r = Bandwidth::new;
        Self::two_swap_family(StrategyKind::TwoSwap, n, m, Bandwidth::one(), [r(7, 20), r(9, 20), r(3, 10), r(1, 5)])
    }

    /// Bandwidths of the impact-α variant for `0 < α < 1/2`, with `ε = 1/10 − α/5`.
    pub fn impact_bandwidths(alpha: Bandwidth) -> Result<[Bandwidth; 4], LfaError> {
        let half = Bandwidth::new(1, 2);
        if alpha <= Bandwidth::zero() || alpha >= half {
            return Err(LfaError::InvalidParameter(format!(
                "alpha must lie in (0, 1/2), got {}",
                format_ratio(&alpha)
            )));
        }
        let eps = Bandwidth::new(1, 10) - alpha / Bandwidth::from(5);
        Ok([half - eps * 2, half - eps, eps * 4, eps * 3])
    }

    /// Forces a 2-swap whose impact is exactly `alpha`.
    pub fn impact(alpha: Bandwidth, n: usize, m: usize) -> Result<Self, LfaError> {
        let bw = Self::impact_bandwidths(alpha)?;
        Self::two_swap_family(StrategyKind::Impact { alpha }, n, m, Bandwidth::one(), bw)
    }

    /// The α used against scratch capacity `nu`: midway between `ν/(1−ν)` and `1/2`.
    pub fn scratch_alpha(nu: Bandwidth) -> Result<Bandwidth, LfaError> {
        if nu <= Bandwidth::zero() || nu >= Bandwidth::new(1, 3) {
            return Err(LfaError::InvalidParameter(format!(
                "nu must lie in (0, 1/3), got {}",
                format_ratio(&nu)
            )));
        }
        let usable = Bandwidth::one() - nu;
        let alpha = (nu / usable + Bandwidth::new(1, 2)) / Bandwidth::from(2);
        if (Bandwidth::one() + alpha) * usable <= Bandwidth::one() {
            return Err(LfaError::InvalidParameter("no alpha below 1/2 beats this reserve".into()));
        }
        Ok(alpha)
    }

    /// Plays the impact-α script on edges of usable capacity `1 − ν`, so that the forced swap
    /// pushes some edge past its full capacity of 1.
    pub fn scratch(nu: Bandwidth, n: usize, m: usize) -> Result<Self, LfaError> {
        let alpha = Self::scratch_alpha(nu)?;
        let usable = Bandwidth::one() - nu;
        let bw = Self::impact_bandwidths(alpha)?.map(|b| b * usable);
        Self::two_swap_family(StrategyKind::Scratch { nu, alpha }, n, m, usable, bw)
    }

    /// Forces `⌊m/2⌋` 2-swaps.
    pub fn m_halves(n: usize, m: usize) -> Result<Self, LfaError> {
        check_dims(n, 2, m, 3)?;
        let r = Bandwidth::new;
        let mut prefix = Vec::new();
        if m % 2 == 1 {
            prefix.push(add(SATURATING_BASE, Bandwidth::one(), 0));
        }
        let pairs = (m / 2) * 2;
        let mut next_id = 1;
        let mut small = Vec::new();
        for (bw, hop) in [(r(7, 20), 0), (r(9, 20), 1), (r(1, 5), 0)] {
            for _ in 0..pairs {
                let mv = add(next_id, bw, hop);
                if bw == r(1, 5) {
                    small.push(mv.flow);
                }
                prefix.push(mv);
                next_id += 1;
            }
        }
        prefix.extend(small.into_iter().map(SourceMove::remove));
        for _ in 0..m / 2 {
            prefix.push(add(next_id, r(3, 10), 0));
            next_id += 1;
        }
        Ok(Self {
            kind: StrategyKind::MHalves,
            first_hops: n,
            dest_edges: m,
            capacity: Bandwidth::one(),
            prefix,
            marker: None,
            if_together: Vec::new(),
            if_split: Vec::new(),
            together: None,
            pos: 0,
        })
    }

    /// Forces an n-swap with three families of flows.
    pub fn n_swap(n: usize, m: usize) -> Result<Self, LfaError> {
        check_dims(n, 3, m, 2)?;
        let params = choose_gh(n)?;
        let (h, g) = (params.h, params.g);
        let mut prefix = saturate(m - 2, Bandwidth::one());
        prefix.push(add(1, h, 0));
        prefix.push(add(2, h, 0));
        let mut id = 3;
        for i in 0..n {
            prefix.push(add(id, g / Bandwidth::from(n as i64), i as u32));
            id += 1;
        }
        for i in 1..n {
            prefix.push(add(id, g / Bandwidth::from(n as i64 - 1), i as u32));
            id += 1;
        }
        let rest = Bandwidth::one() - h - g;
        Ok(Self {
            kind: StrategyKind::NSwap(params),
            first_hops: n,
            dest_edges: m,
            capacity: Bandwidth::one(),
            prefix,
            marker: Some((1, 2)),
            if_together: vec![add(id, rest, 0), add(id + 1, rest, 0)],
            if_split: vec![add(id, Bandwidth::one() - h * 2, 0)],
            together: None,
            pos: 0,
        })
    }

    pub fn kind(&self) -> &StrategyKind {
        &self.kind
    }

    /// The empty game this strategy starts from.
    pub fn initial_state(&self) -> Result<GameState, LfaError> {
        Ok(GameState::new(LfaGraph::canonical(self.first_hops, self.dest_edges, self.capacity)?))
    }

    /// Whether the marker flows were found on one edge, once the script has looked.
    pub fn observed_together(&self) -> Option<bool> {
        self.together
    }

    fn tail(&self) -> &[SourceMove] {
        match self.together {
            Some(true) => &self.if_together,
            Some(false) => &self.if_split,
            None => &[],
        }
    }

    fn emitted(&self) -> impl Iterator<Item = &SourceMove> + '_ {
        let from_prefix = self.pos.min(self.prefix.len());
        let from_tail = self.pos - from_prefix;
        self.prefix[..from_prefix].iter().chain(self.tail()[..from_tail].iter())
    }

    /// The next move, or `None` once the forcing position has been reached.
    pub fn next_move(&mut self, state: &GameState) -> Result<Option<SourceMove>, LfaError> {
        self.check_position(state)?;
        if self.pos < self.prefix.len() {
            self.pos += 1;
            return Ok(Some(self.prefix[self.pos - 1]));
        }
        if self.together.is_none() {
            let Some((a, b)) = self.marker else { return Ok(None) };
            let (ea, eb) = (state.dest_edge_of(a)?, state.dest_edge_of(b)?);
            self.together = Some(ea.is_some() && ea == eb);
        }
        let idx = self.pos - self.prefix.len();
        let mv = self.tail().get(idx).copied();
        if mv.is_some() {
            self.pos += 1;
        }
        Ok(mv)
    }

    fn check_position(&self, state: &GameState) -> Result<(), LfaError> {
        let fault = |why: String| Err(LfaError::ControllerFault(why));
        if !state.is_complete()? {
            return fault("a flow was left unrouted".into());
        }
        if !state.validate_lossless()? {
            return fault("the routing is lossy".into());
        }
        let mut live = BTreeSet::new();
        for mv in self.emitted() {
            match mv.action {
                SourceAction::Add => live.insert(mv.flow),
                SourceAction::Remove => live.remove(&mv.flow),
            };
        }
        let actual: BTreeSet<Flow> = state.flows().copied().collect();
        if live != actual {
            return fault("flow set differs from the script's".into());
        }
        Ok(())
    }

    /// Upper bound on what the script ever asks the network to carry at once.
    pub fn peak_demand(&self) -> Bandwidth {
        let mut best = Bandwidth::zero();
        for tail in [&self.if_together, &self.if_split] {
            let mut live = Bandwidth::zero();
            for mv in self.prefix.iter().chain(tail.iter()) {
                match mv.action {
                    SourceAction::Add => live += mv.flow.bandwidth,
                    SourceAction::Remove => live -= mv.flow.bandwidth,
                }
                best = best.max(live);
            }
        }
        best
    }

    pub fn dest_edges(&self) -> usize {
        self.dest_edges
    }

    pub fn first_hops(&self) -> usize {
        self.first_hops
    }

    pub fn capacity(&self) -> Bandwidth {
        self.capacity
    }
}
