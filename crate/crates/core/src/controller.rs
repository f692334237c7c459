//! Controller plans and two greedy reference controllers.

use num_traits::Zero;

use crate::game::{EntryKey, GameState, Update};
use crate::graph::{Edge, Node};
use crate::search::{controller_search, SearchOutcome};
use crate::strategy::{SourceAction, SourceMove};
use crate::{Bandwidth, LfaError};

/// An ordered sequence of updates answering one source move, plus entries to delete.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ControllerPlan {
    pub updates: Vec<Update>,
    pub deletions: Vec<EntryKey>,
}

impl ControllerPlan {
    /// Runs the plan, checking that no edge exceeds capacity after any update and that every
    /// flow is routed at the end. Returns the state after each update, then the final state.
    pub fn trace(&self, state: &GameState) -> Result<Vec<GameState>, LfaError> {
        let mut states = vec![state.delete_entries(&self.deletions)];
        for (i, update) in self.updates.iter().enumerate() {
            let next = states[states.len() - 1].apply_update(update)?;
            if !next.validate_lossless()? {
                return Err(LfaError::InvalidUpdate(format!("update {} of the plan ({update}) is lossy", i + 1)));
            }
            states.push(next);
        }
        let last = &states[states.len() - 1];
        if !last.is_complete()? {
            return Err(LfaError::InvalidUpdate("plan leaves a flow unrouted".into()));
        }
        Ok(states)
    }

    pub fn execute(&self, state: &GameState) -> Result<GameState, LfaError> {
        Ok(self.trace(state)?.pop().expect("trace has the initial state"))
    }

    pub fn swaps(&self) -> impl Iterator<Item = &Update> + '_ {
        self.updates.iter().filter(|u| u.is_swap())
    }
}

/// A controller strategy. `state` already reflects the source move being answered.
pub trait Controller {
    fn name(&self) -> &'static str;
    fn respond(&self, state: &GameState, mv: &SourceMove) -> Result<ControllerPlan, LfaError>;
}

/// Picks a destination edge for `flow` by `better(candidate_load, best_load)`; falls back to
/// the search oracle when no edge has room.
fn greedy(
    state: &GameState,
    mv: &SourceMove,
    better: fn(&Bandwidth, &Bandwidth) -> bool,
) -> Result<ControllerPlan, LfaError> {
    if mv.action == SourceAction::Remove {
        return Ok(ControllerPlan { updates: Vec::new(), deletions: state.stale_entries() });
    }
    let graph = state.graph();
    if !graph.is_canonical() {
        return Err(LfaError::NotCanonical);
    }
    let flow = mv.flow;
    let mut choice: Option<(usize, Bandwidth)> = None;
    for j in 0..graph.dest_edge_count() {
        let load = state.edge_load(&Edge::dest(j))?;
        if load + flow.bandwidth > graph.capacity() {
            continue;
        }
        if choice.as_ref().is_none_or(|(_, best)| better(&load, best)) {
            choice = Some((j, load));
        }
    }
    if let Some((j, _)) = choice {
        return Ok(ControllerPlan {
            updates: vec![Update::reroute(flow.id, flow.first_hop, Node::Tail(j as u32))],
            deletions: Vec::new(),
        });
    }
    match controller_search(state, None, true)? {
        SearchOutcome::Plan(found) => Ok(found.plan),
        SearchOutcome::Infeasible => Err(LfaError::Infeasible(format!("cannot accommodate flow {}", flow.id))),
    }
}

/// Least-loaded feasible destination edge, ties to the lowest index. Never rearranges other
/// flows unless nothing fits.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstFit;

impl Controller for FirstFit {
    fn name(&self) -> &'static str {
        "first-fit"
    }

    fn respond(&self, state: &GameState, mv: &SourceMove) -> Result<ControllerPlan, LfaError> {
        greedy(state, mv, |load, best| load < best)
    }
}

/// Most-loaded feasible destination edge, ties to the lowest index.
#[derive(Debug, Clone, Copy, Default)]
pub struct BestFit;

impl Controller for BestFit {
    fn name(&self) -> &'static str {
        "best-fit"
    }

    fn respond(&self, state: &GameState, mv: &SourceMove) -> Result<ControllerPlan, LfaError> {
        greedy(state, mv, |load, best| load > best)
    }
}

/// Sum of loads on the destination edges.
pub fn carried(state: &GameState) -> Result<Bandwidth, LfaError> {
    let mut total = Bandwidth::zero();
    for j in 0..state.graph().dest_edge_count() {
        total += state.edge_load(&Edge::dest(j))?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Flow;
    use crate::graph::LfaGraph;
    use crate::ratio::parse_ratio;
    use num_traits::One;

    fn add(state: &GameState, id: u32, bw: &str, hop: u32) -> (GameState, SourceMove) {
        let mv = SourceMove::add(Flow::new(id, parse_ratio(bw).unwrap(), Node::Hop(hop)));
        (state.apply_source_move(&mv).unwrap(), mv)
    }

    #[test]
    fn first_fit_ties_to_lowest_index() {
        let s = GameState::new(LfaGraph::canonical(2, 2, Bandwidth::one()).unwrap());
        let (s, mv) = add(&s, 1, "0.35", 0);
        let plan = FirstFit.respond(&s, &mv).unwrap();
        assert_eq!(plan.updates, vec![Update::reroute(1, Node::Hop(0), Node::Tail(0))]);
        let s = plan.execute(&s).unwrap();
        let (s2, mv) = add(&s, 2, "0.35", 0);
        let plan = FirstFit.respond(&s2, &mv).unwrap();
        assert_eq!(plan.updates, vec![Update::reroute(2, Node::Hop(0), Node::Tail(1))]);
        let plan = BestFit.respond(&s2, &mv).unwrap();
        assert_eq!(plan.updates, vec![Update::reroute(2, Node::Hop(0), Node::Tail(0))]);
    }

    #[test]
    fn removal_only_deletes_entries() {
        let s = GameState::new(LfaGraph::canonical(2, 2, Bandwidth::one()).unwrap());
        let (s, mv) = add(&s, 1, "0.35", 0);
        let s = FirstFit.respond(&s, &mv).unwrap().execute(&s).unwrap();
        let mv = SourceMove::remove(*s.flow(1).unwrap());
        let s = s.apply_source_move(&mv).unwrap();
        let plan = FirstFit.respond(&s, &mv).unwrap();
        assert!(plan.updates.is_empty());
        assert_eq!(plan.deletions, vec![(1, Node::Hop(0))]);
        assert!(plan.execute(&s).unwrap().routing().is_empty());
    }

    #[test]
    fn lossy_plans_are_rejected() {
        let s = GameState::new(LfaGraph::canonical(2, 2, Bandwidth::one()).unwrap());
        let (s, _) = add(&s, 1, "0.6", 0);
        let (s, _) = add(&s, 2, "0.6", 1);
        let plan = ControllerPlan {
            updates: vec![
                Update::reroute(1, Node::Hop(0), Node::Tail(0)),
                Update::reroute(2, Node::Hop(1), Node::Tail(0)),
            ],
            deletions: Vec::new(),
        };
        assert!(plan.execute(&s).is_err());
    }
}
