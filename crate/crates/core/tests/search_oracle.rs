use std::collections::{HashSet, VecDeque};

use num_traits::One;
use proptest::prelude::*;
use time4_core::{controller_search, Bandwidth, Flow, GameState, LfaGraph, Node, SearchOutcome, Update};

/// Plain BFS over edge assignments by single reroutes, sizes in twentieths.
fn reroutes_suffice(m: usize, sizes: &[i64], start: Vec<Option<usize>>) -> bool {
    let fits = |cfg: &[Option<usize>]| {
        let mut loads = vec![0; m];
        for (i, e) in cfg.iter().enumerate() {
            if let Some(j) = e {
                loads[*j] += sizes[i];
            }
        }
        loads.iter().all(|&l| l <= 20)
    };
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(cfg) = queue.pop_front() {
        if cfg.iter().all(Option::is_some) {
            return true;
        }
        for i in 0..cfg.len() {
            for j in 0..m {
                if cfg[i] == Some(j) {
                    continue;
                }
                let mut next = cfg.clone();
                next[i] = Some(j);
                if fits(&next) && seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, max_global_rejects: 20_000, ..ProptestConfig::default() })]

    #[test]
    fn reroute_search_agrees_with_brute_force(
        m in 2usize..=3,
        flows in prop::collection::vec((1i64..=12, 0u32..2, 0usize..3), 1..=5),
        newcomer in (1i64..=14, 0u32..2),
    ) {
        let edges: Vec<usize> = flows.iter().map(|f| f.2 % m).collect();
        let mut loads = vec![0; m];
        for (f, &j) in flows.iter().zip(&edges) {
            loads[j] += f.0;
        }
        prop_assume!(loads.iter().all(|&l| l <= 20));

        let mut state = GameState::new(LfaGraph::canonical(2, m, Bandwidth::one()).unwrap());
        for (i, (f, &j)) in flows.iter().zip(&edges).enumerate() {
            let id = i as u32 + 1;
            state = state.add_flow(Flow::new(id, Bandwidth::new(f.0, 20), Node::Hop(f.1))).unwrap();
            state = state.apply_update(&Update::reroute(id, Node::Hop(f.1), Node::Tail(j as u32))).unwrap();
        }
        let new_flow = Flow::new(99, Bandwidth::new(newcomer.0, 20), Node::Hop(newcomer.1));

        let mut sizes: Vec<i64> = flows.iter().map(|f| f.0).collect();
        sizes.push(newcomer.0);
        let mut start: Vec<Option<usize>> = edges.iter().map(|&j| Some(j)).collect();
        start.push(None);
        let expected = reroutes_suffice(m, &sizes, start);

        let found = controller_search(&state, Some(new_flow), false).unwrap();
        prop_assert_eq!(matches!(found, SearchOutcome::Plan(_)), expected);
        if let SearchOutcome::Plan(plan) = found {
            prop_assert!(plan.min_k.is_none());
            prop_assert!(plan.plan.updates.iter().all(|u| u.len() == 1));
            let end = plan.plan.execute(&state.add_flow(new_flow).unwrap()).unwrap();
            prop_assert!(end.validate_lossless().unwrap());
        }
    }
}
