//! Playing strategies against controllers and certifying forced swaps.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_traits::One;
use serde::Serialize;

use crate::controller::{Controller, ControllerPlan, FirstFit};
use crate::game::GameState;
use crate::ratio::format_ratio;
use crate::search::{controller_search, routing_key, CompletionCache, OutcomeCache, SearchOutcome};
use crate::strategy::{SourceAction, SourceMove, Strategy};
use crate::{Bandwidth, LfaError};

/// The five swap-forcing claims, with their parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Theorem {
    /// Some controller move is a forced 2-swap.
    TwoSwap { n: usize, m: usize },
    /// At least `⌊m/2⌋` forced 2-swaps.
    MHalves { n: usize, m: usize },
    /// A forced 2-swap of impact exactly `alpha`.
    Impact { alpha: Bandwidth, n: usize, m: usize },
    /// A forced swap whose one-sided execution exceeds full capacity despite reserve `nu`.
    Scratch { nu: Bandwidth, n: usize, m: usize },
    /// A forced swap touching all `n` first-hop switches.
    NSwap { n: usize, m: usize },
}

/// Instances up to this size are certified against every controller, not just first-fit.
pub const EXHAUSTIVE_MAX_N: usize = 4;
pub const EXHAUSTIVE_MAX_M: usize = 4;

impl Theorem {
    pub fn number(&self) -> u8 {
        match self {
            Theorem::TwoSwap { .. } => 1,
            Theorem::MHalves { .. } => 2,
            Theorem::Impact { .. } => 3,
            Theorem::Scratch { .. } => 4,
            Theorem::NSwap { .. } => 5,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match *self {
            Theorem::TwoSwap { n, m }
            | Theorem::MHalves { n, m }
            | Theorem::Impact { n, m, .. }
            | Theorem::Scratch { n, m, .. }
            | Theorem::NSwap { n, m } => (n, m),
        }
    }

    pub fn strategy(&self) -> Result<Strategy, LfaError> {
        match *self {
            Theorem::TwoSwap { n, m } => Strategy::two_swap(n, m),
            Theorem::MHalves { n, m } => Strategy::m_halves(n, m),
            Theorem::Impact { alpha, n, m } => Strategy::impact(alpha, n, m),
            Theorem::Scratch { nu, n, m } => Strategy::scratch(nu, n, m),
            Theorem::NSwap { n, m } => Strategy::n_swap(n, m),
        }
    }

    fn required_swaps(&self) -> usize {
        match self {
            Theorem::MHalves { m, .. } => m / 2,
            _ => 1,
        }
    }

    fn required_k(&self) -> usize {
        match self {
            Theorem::NSwap { n, .. } => *n,
            _ => 2,
        }
    }

    pub fn claim(&self) -> String {
        match self {
            Theorem::TwoSwap { .. } => "a 2-swap is forced".into(),
            Theorem::MHalves { m, .. } => format!("{} 2-swaps are forced", m / 2),
            Theorem::Impact { alpha, .. } => format!("a 2-swap of impact {} is forced", format_ratio(alpha)),
            Theorem::Scratch { nu, .. } => {
                format!("a swap overloading full capacity is forced despite scratch {}", format_ratio(nu))
            }
            Theorem::NSwap { n, .. } => format!("a {n}-swap is forced"),
        }
    }

    pub fn exhaustive_in_range(&self) -> bool {
        let (n, m) = self.dims();
        n <= EXHAUSTIVE_MAX_N && m <= EXHAUSTIVE_MAX_M
    }
}

/// One source move and the controller's answer.
#[derive(Debug, Clone)]
pub struct TranscriptStep {
    pub mv: SourceMove,
    pub plan: ControllerPlan,
    /// No sequence of single reroutes could absorb the move.
    pub forced: bool,
    /// Smallest swap size that works when forced.
    pub min_k: Option<usize>,
    /// Impact of the controller's 2-entry swap, if it made one.
    pub impact: Option<Bandwidth>,
    /// Smaller of the two one-sided peak loads of that swap.
    pub transient_peak: Option<Bandwidth>,
    pub loads_after: Vec<Bandwidth>,
}

#[derive(Debug, Clone)]
pub struct Transcript {
    pub controller: &'static str,
    pub steps: Vec<TranscriptStep>,
    pub final_state: GameState,
    pub together: Option<bool>,
}

impl Transcript {
    pub fn forced_steps(&self) -> impl Iterator<Item = &TranscriptStep> + '_ {
        self.steps.iter().filter(|s| s.forced)
    }
}

fn dest_loads(state: &GameState) -> Result<Vec<Bandwidth>, LfaError> {
    (0..state.graph().dest_edge_count())
        .map(|j| state.edge_load(&crate::graph::Edge::dest(j)))
        .collect()
}

/// Runs `strategy` against `controller` until the script ends.
pub fn play(mut strategy: Strategy, controller: &dyn Controller) -> Result<Transcript, LfaError> {
    let mut state = strategy.initial_state()?;
    let mut steps = Vec::new();
    while let Some(mv) = strategy.next_move(&state)? {
        let moved = state.apply_source_move(&mv)?;
        let plan = controller.respond(&moved, &mv)?;
        let trace = plan.trace(&moved)?;
        let (mut forced, mut min_k) = (false, None);
        let makes_swap = plan.updates.iter().any(|u| u.len() > 1);
        if mv.action == SourceAction::Add && makes_swap {
            forced = controller_search(&moved, None, false)? == SearchOutcome::Infeasible;
            if forced {
                min_k = match controller_search(&moved, None, true)? {
                    SearchOutcome::Plan(p) => p.min_k,
                    SearchOutcome::Infeasible => None,
                };
            }
        }
        let (mut impact, mut transient_peak) = (None, None);
        for (i, update) in plan.updates.iter().enumerate() {
            if update.is_swap() && update.len() == 2 {
                impact = Some(trace[i].swap_impact(update)?);
                transient_peak = Some(trace[i].swap_transient_peak(update)?);
                break;
            }
        }
        state = trace.into_iter().last().expect("trace is never empty");
        steps.push(TranscriptStep { mv, plan, forced, min_k, impact, transient_peak, loads_after: dest_loads(&state)? });
    }
    Ok(Transcript { controller: controller.name(), steps, final_state: state, together: strategy.observed_together() })
}

/// Outcome over every controller that answers unforced moves with any reroute sequence and
/// forced moves with any cheapest plan of the smallest swap size.
#[derive(Debug, Clone, Serialize)]
pub struct ExhaustiveSummary {
    pub positions: usize,
    pub leaves: usize,
    /// Fewest forced swaps of size ≥ 2 on any branch.
    pub min_forced_swaps: usize,
    /// Smallest, over branches, of the largest forced swap size on that branch.
    pub min_largest_k: usize,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Position {
    key: Vec<u8>,
    strategy: Strategy,
    forced_swaps: usize,
    largest_k: usize,
}

pub fn explore_all_controllers(strategy: &Strategy) -> Result<ExhaustiveSummary, LfaError> {
    let start = strategy.initial_state()?;
    let mut queue = VecDeque::from([(start, strategy.clone(), 0usize, 0usize)]);
    let mut seen = HashSet::new();
    let mut cache = CompletionCache::default();
    let mut outcomes = OutcomeCache::default();
    let mut summary = ExhaustiveSummary { positions: 0, leaves: 0, min_forced_swaps: usize::MAX, min_largest_k: usize::MAX };
    while let Some((state, mut strat, forced_swaps, largest_k)) = queue.pop_front() {
        let pos = Position { key: routing_key(&state)?, strategy: strat.clone(), forced_swaps, largest_k };
        if !seen.insert(pos) {
            continue;
        }
        summary.positions += 1;
        let Some(mv) = strat.next_move(&state)? else {
            summary.leaves += 1;
            summary.min_forced_swaps = summary.min_forced_swaps.min(forced_swaps);
            summary.min_largest_k = summary.min_largest_k.min(largest_k);
            continue;
        };
        let moved = state.apply_source_move(&mv)?;
        if mv.action == SourceAction::Remove {
            let next = moved.delete_entries(&moved.stale_entries());
            queue.push_back((next, strat, forced_swaps, largest_k));
            continue;
        }
        let (inst, completions) = cache.completions(&moved)?;
        if !completions.is_empty() {
            for config in completions.iter() {
                let pos = Position { key: config.clone(), strategy: strat.clone(), forced_swaps, largest_k };
                if !seen.contains(&pos) {
                    queue.push_back((inst.to_state(&moved, config)?, strat.clone(), forced_swaps, largest_k));
                }
            }
            continue;
        }
        let Some((level, goals)) = outcomes.outcomes(&moved)? else {
            return Err(LfaError::Infeasible(format!("no lossless routing after {mv}")));
        };
        let k = level.unwrap_or(0);
        let swaps = forced_swaps + usize::from(k >= 2);
        for next in goals {
            queue.push_back((next, strat.clone(), swaps, largest_k.max(k)));
        }
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Refuted(String),
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub theorem: Theorem,
    pub verdict: Verdict,
    pub transcript: Transcript,
    pub exhaustive: Option<ExhaustiveSummary>,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    /// The forced step the verdict rests on, for reporting.
    pub fn forced_step(&self) -> Option<&TranscriptStep> {
        self.transcript.forced_steps().last()
    }
}

fn check_transcript(theorem: &Theorem, t: &Transcript) -> Result<(), String> {
    let swaps: Vec<&TranscriptStep> = t.forced_steps().filter(|s| s.min_k.is_some_and(|k| k >= 2)).collect();
    if swaps.len() < theorem.required_swaps() {
        return Err(format!(
            "{} forced swap(s) against {}, need {}",
            swaps.len(),
            t.controller,
            theorem.required_swaps()
        ));
    }
    let largest = swaps.iter().filter_map(|s| s.min_k).max().unwrap_or(0);
    if largest < theorem.required_k() {
        return Err(format!("largest forced swap touches {largest} switches, need {}", theorem.required_k()));
    }
    match theorem {
        Theorem::Impact { alpha, .. } => {
            let impact = swaps.iter().find_map(|s| s.impact);
            if impact != Some(*alpha) {
                return Err(format!(
                    "forced swap impact is {}, expected {}",
                    impact.map_or("undefined".into(), |i| format_ratio(&i)),
                    format_ratio(alpha)
                ));
            }
        }
        Theorem::Scratch { .. } => {
            let peak = swaps.iter().find_map(|s| s.transient_peak);
            if !peak.is_some_and(|p| p > Bandwidth::one()) {
                return Err("forced swap does not exceed full capacity when serialized".into());
            }
        }
        _ => {}
    }
    Ok(())
}

/// Plays the theorem's strategy against first-fit and, within the exhaustive bounds,
/// against every minimal controller.
pub fn certify(theorem: &Theorem) -> Result<Certificate, LfaError> {
    let strategy = theorem.strategy()?;
    let transcript = play(strategy.clone(), &FirstFit)?;
    let mut verdict = match check_transcript(theorem, &transcript) {
        Ok(()) => Verdict::Certified,
        Err(why) => Verdict::Refuted(why),
    };
    let mut exhaustive = None;
    if theorem.exhaustive_in_range() {
        let summary = explore_all_controllers(&strategy)?;
        if verdict == Verdict::Certified {
            if summary.min_forced_swaps < theorem.required_swaps() {
                verdict = Verdict::Refuted(format!(
                    "some controller gets away with {} forced swap(s)",
                    summary.min_forced_swaps
                ));
            } else if summary.min_largest_k < theorem.required_k() {
                verdict = Verdict::Refuted(format!(
                    "some controller only needs a {}-swap",
                    summary.min_largest_k
                ));
            }
        }
        exhaustive = Some(summary);
    }
    Ok(Certificate { theorem: theorem.clone(), verdict, transcript, exhaustive })
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Certified => write!(f, "certified"),
            Verdict::Refuted(why) => write!(f, "refuted: {why}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::BestFit;

    #[test]
    fn first_fit_lands_in_the_symmetric_case() {
        let t = play(Strategy::two_swap(2, 2).unwrap(), &FirstFit).unwrap();
        assert_eq!(t.together, Some(false));
        let last = t.steps.last().unwrap();
        assert!(last.forced);
        assert_eq!(last.min_k, Some(2));
        assert_eq!(last.impact, Some(Bandwidth::new(3, 20)));
    }

    #[test]
    fn best_fit_lands_in_the_paired_case() {
        let t = play(Strategy::two_swap(2, 2).unwrap(), &BestFit).unwrap();
        assert_eq!(t.together, Some(true));
        assert_eq!(t.steps.len(), 6);
        assert!(t.steps[4].plan.updates.len() == 1 && !t.steps[4].forced);
        assert!(t.steps[5].forced);
        assert_eq!(t.steps[5].impact, Some(Bandwidth::new(1, 4)));
    }

    #[test]
    fn two_swap_certified_exhaustively() {
        let c = certify(&Theorem::TwoSwap { n: 2, m: 2 }).unwrap();
        assert!(c.is_certified(), "{}", c.verdict);
        let ex = c.exhaustive.unwrap();
        assert!(ex.leaves >= 2);
        assert!(ex.min_forced_swaps >= 1);
    }
}
