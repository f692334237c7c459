use std::collections::BTreeMap;

use num_traits::{One, Zero};
use proptest::prelude::*;
use time4_core::{Bandwidth, Edge, Flow, GameState, LfaGraph, Node, Update};

/// A random canonical instance: dims and flows as (twentieths, first hop).
#[derive(Debug, Clone)]
struct Instance {
    n: usize,
    m: usize,
    flows: Vec<(i64, u32)>,
}

fn instance() -> impl Strategy<Value = Instance> {
    (2usize..=4, 2usize..=4).prop_flat_map(|(n, m)| {
        let flow = (1i64..=12, 0..n as u32);
        prop::collection::vec(flow, 1..=6).prop_map(move |flows| Instance { n, m, flows })
    })
}

fn twentieths(k: i64) -> Bandwidth {
    Bandwidth::new(k, 20)
}

/// Routes flow `i` on edge `choice[i] mod m`, lossless or not.
fn build(inst: &Instance, choice: &[usize]) -> (GameState, Vec<usize>) {
    let mut state = GameState::new(LfaGraph::canonical(inst.n, inst.m, Bandwidth::one()).unwrap());
    let mut edges = Vec::new();
    for (i, &(size, hop)) in inst.flows.iter().enumerate() {
        let id = i as u32 + 1;
        let j = choice.get(i).copied().unwrap_or(0) % inst.m;
        state = state.add_flow(Flow::new(id, twentieths(size), Node::Hop(hop))).unwrap();
        state = state.apply_update(&Update::reroute(id, Node::Hop(hop), Node::Tail(j as u32))).unwrap();
        edges.push(j);
    }
    (state, edges)
}

/// Edge loads computed from scratch, in twentieths.
fn oracle_loads(inst: &Instance, edges: &[usize]) -> Vec<i64> {
    let mut loads = vec![0; inst.m];
    for (i, &j) in edges.iter().enumerate() {
        loads[j] += inst.flows[i].0;
    }
    loads
}

fn oracle_peak_over(loads: &[i64]) -> i64 {
    loads.iter().map(|&l| (l - 20).max(0)).max().unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, max_global_rejects: 20_000, ..ProptestConfig::default() })]

    #[test]
    fn apply_update_is_pure(inst in instance(), choice in prop::collection::vec(0usize..8, 6), target in 0usize..8, pick in 0usize..6) {
        let (state, _) = build(&inst, &choice);
        let before = state.clone();
        let i = pick % inst.flows.len();
        let update = Update::reroute(i as u32 + 1, Node::Hop(inst.flows[i].1), Node::Tail((target % inst.m) as u32));
        let a = state.apply_update(&update).unwrap();
        let b = state.apply_update(&update).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&state, &before);
    }

    #[test]
    fn loads_conserve_total_demand(inst in instance(), choice in prop::collection::vec(0usize..8, 6)) {
        let (state, edges) = build(&inst, &choice);
        let mut sum = Bandwidth::zero();
        for j in 0..inst.m {
            let load = state.edge_load(&Edge::dest(j)).unwrap();
            prop_assert_eq!(load, twentieths(oracle_loads(&inst, &edges)[j]));
            sum += load;
        }
        prop_assert_eq!(sum, state.total_demand());
        let demand: i64 = inst.flows.iter().map(|f| f.0).sum();
        prop_assert_eq!(sum, twentieths(demand));
    }

    #[test]
    fn oversubscription_matches_losslessness(inst in instance(), choice in prop::collection::vec(0usize..8, 6)) {
        let (state, edges) = build(&inst, &choice);
        let loads = oracle_loads(&inst, &edges);
        let mut all_zero = true;
        for (j, load) in loads.iter().enumerate() {
            let over = state.oversubscription(&Edge::dest(j)).unwrap();
            prop_assert!(over >= Bandwidth::zero());
            prop_assert_eq!(over, twentieths((load - 20).max(0)));
            all_zero &= over.is_zero();
        }
        prop_assert_eq!(state.validate_lossless().unwrap(), all_zero);
    }

    #[test]
    fn impact_is_best_serialization_order(
        inst in instance(),
        choice in prop::collection::vec(0usize..8, 6),
        a in 0usize..6,
        b_offset in 0usize..6,
        ta in 0usize..8,
        tb in 0usize..8,
    ) {
        let (state, edges) = build(&inst, &choice);
        let k = inst.flows.len();
        prop_assume!(k >= 2);
        let a = a % k;
        let b = (a + 1 + b_offset % (k - 1)) % k;
        let ta = (edges[a] + 1 + ta % (inst.m - 1)) % inst.m;
        let tb = (edges[b] + 1 + tb % (inst.m - 1)) % inst.m;
        let mut after = edges.clone();
        after[a] = ta;
        after[b] = tb;
        prop_assume!(oracle_peak_over(&oracle_loads(&inst, &edges)) == 0);
        prop_assume!(oracle_peak_over(&oracle_loads(&inst, &after)) == 0);

        let update = Update::from_pairs([
            ((a as u32 + 1, Node::Hop(inst.flows[a].1)), Node::Tail(ta as u32)),
            ((b as u32 + 1, Node::Hop(inst.flows[b].1)), Node::Tail(tb as u32)),
        ]).unwrap();
        // Either order passes through exactly one one-sided state before the lossless end.
        let mut orders = Vec::new();
        for (first, target) in [(a, ta), (b, tb)] {
            let mut mid = edges.clone();
            mid[first] = target;
            orders.push(oracle_peak_over(&oracle_loads(&inst, &mid)));
        }
        let expected = twentieths(*orders.iter().min().unwrap());
        prop_assert_eq!(state.swap_impact(&update).unwrap(), expected);
        prop_assert!(state.apply_update(&update).unwrap().validate_lossless().unwrap());
    }

    #[test]
    fn json_round_trip(inst in instance(), choice in prop::collection::vec(0usize..8, 6)) {
        let (state, _) = build(&inst, &choice);
        prop_assert_eq!(GameState::from_json(&state.to_json()).unwrap(), state);
    }
}

#[test]
fn worked_loads() {
    let inst = Instance { n: 2, m: 2, flows: vec![(7, 0), (9, 1), (7, 0)] };
    let (state, _) = build(&inst, &[0, 0, 0]);
    assert_eq!(state.edge_load(&Edge::dest(0)).unwrap(), Bandwidth::new(23, 20));
    assert_eq!(state.oversubscription(&Edge::dest(0)).unwrap(), Bandwidth::new(3, 20));
    let (state, _) = build(&inst, &[0, 0, 1]);
    assert_eq!(state.edge_load(&Edge::dest(0)).unwrap(), Bandwidth::new(4, 5));
    assert_eq!(state.oversubscription(&Edge::dest(0)).unwrap(), Bandwidth::zero());
}

#[test]
fn swap_of_equal_flows_between_half_loaded_edges_has_no_impact() {
    let inst = Instance { n: 2, m: 2, flows: vec![(10, 0), (10, 1)] };
    let (state, _) = build(&inst, &[0, 1]);
    let update = Update::from_pairs([
        ((1, Node::Hop(0)), Node::Tail(1)),
        ((2, Node::Hop(1)), Node::Tail(0)),
    ])
    .unwrap();
    assert_eq!(state.swap_impact(&update).unwrap(), Bandwidth::zero());
}

#[test]
fn impact_needs_exactly_two_entries() {
    let inst = Instance { n: 3, m: 3, flows: vec![(5, 0), (5, 1), (5, 2)] };
    let (state, _) = build(&inst, &[0, 1, 2]);
    let three = Update::from_pairs([
        ((1, Node::Hop(0)), Node::Tail(1)),
        ((2, Node::Hop(1)), Node::Tail(2)),
        ((3, Node::Hop(2)), Node::Tail(0)),
    ])
    .unwrap();
    assert!(state.swap_impact(&three).is_err());
    assert!(state.swap_impact(&Update::reroute(1, Node::Hop(0), Node::Tail(1))).is_err());
    assert!(Update::from_pairs(BTreeMap::new()).is_err());
}
