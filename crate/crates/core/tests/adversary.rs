use num_traits::{One, Zero};
use time4_core::certify::explore_all_controllers;
use time4_core::search::{edge_groups, enumerate_lossless};
use time4_core::{
    certify, choose_gh, controller_search, parse_ratio, play, BestFit, Bandwidth, Flow, FirstFit, GameState,
    LfaGraph, Node, SearchOutcome, SourceAction, Strategy, Theorem, UpdateKind,
};

fn r(s: &str) -> Bandwidth {
    parse_ratio(s).unwrap()
}

#[test]
fn two_swap_script_opens_as_published() {
    let mut strat = Strategy::two_swap(2, 2).unwrap();
    let state = strat.initial_state().unwrap();
    let mv = strat.next_move(&state).unwrap().unwrap();
    assert_eq!(mv.action, SourceAction::Add);
    assert_eq!((mv.flow.id, mv.flow.bandwidth, mv.flow.first_hop), (1, r("0.35"), Node::Hop(0)));
}

#[test]
fn case_a_adds_a_point_three_flow_and_case_b_two_point_twos() {
    let a = play(Strategy::two_swap(2, 2).unwrap(), &FirstFit).unwrap();
    assert_eq!(a.together, Some(false));
    let last = a.steps.last().unwrap();
    assert_eq!((last.mv.flow.id, last.mv.flow.bandwidth), (5, r("0.3")));
    assert!(last.forced);

    let b = play(Strategy::two_swap(2, 2).unwrap(), &BestFit).unwrap();
    assert_eq!(b.together, Some(true));
    let adds: Vec<_> = b.steps.iter().skip(4).map(|s| (s.mv.flow.id, s.mv.flow.bandwidth)).collect();
    assert_eq!(adds, vec![(6, r("0.2")), (7, r("0.2"))]);
    assert!(b.steps.last().unwrap().forced);
}

#[test]
fn forcing_position_has_no_reroute_plan_but_has_a_two_swap() {
    let t = play(Strategy::two_swap(2, 2).unwrap(), &FirstFit).unwrap();
    let forced = t.steps.last().unwrap();
    // Rebuild the position right after F5 arrives.
    let mut state = GameState::new(LfaGraph::canonical(2, 2, Bandwidth::one()).unwrap());
    for step in &t.steps[..t.steps.len() - 1] {
        state = state.apply_source_move(&step.mv).unwrap();
        state = step.plan.execute(&state).unwrap();
    }
    assert_eq!(controller_search(&state, Some(forced.mv.flow), false).unwrap(), SearchOutcome::Infeasible);
    let SearchOutcome::Plan(found) = controller_search(&state, Some(forced.mv.flow), true).unwrap() else {
        panic!("a swap plan exists");
    };
    assert_eq!(found.min_k, Some(2));
    assert!(found.plan.updates.iter().any(|u| u.classify() == UpdateKind::Swap { k: 2 }));
}

#[test]
fn impact_is_exactly_alpha_on_the_grid() {
    for alpha in ["1/10", "1/4", "2/5", "9/20", "1/20", "1/3", "49/100"] {
        let alpha = r(alpha);
        // ε from the construction, then the case-(a) one-sided overload 0.5 − 5ε.
        let eps = r("1/10") - alpha / Bandwidth::from(5);
        let expected = r("1/2") - eps * Bandwidth::from(5);
        assert_eq!(expected, alpha);
        let t = play(Strategy::impact(alpha, 2, 2).unwrap(), &FirstFit).unwrap();
        let step = t.forced_steps().next().expect("a forced step");
        assert_eq!(step.impact, Some(alpha), "alpha = {alpha}");
        let swap = step.plan.swaps().next().unwrap();
        assert_eq!(swap.len(), 2);
    }
}

#[test]
fn impact_rejects_out_of_range_alpha() {
    for alpha in ["0", "1/2", "3/5", "-1/10"] {
        assert!(Strategy::impact(r(alpha), 2, 2).is_err(), "{alpha}");
    }
}

#[test]
fn impact_bandwidths_at_alpha_two_fifths() {
    let [f1, f3, f5, f6] = Strategy::impact_bandwidths(r("2/5")).unwrap();
    assert_eq!((f1, f3, f5, f6), (r("0.46"), r("0.48"), r("0.08"), r("0.06")));
    let [_, _, f5, _] = Strategy::impact_bandwidths(r("1/4")).unwrap();
    assert_eq!(f5, r("0.2"));
}

#[test]
fn scratch_overloads_full_capacity() {
    for nu in ["1/10", "3/10", "1/4"] {
        let nu = r(nu);
        let alpha = Strategy::scratch_alpha(nu).unwrap();
        assert!(alpha < r("1/2"));
        assert!((Bandwidth::one() + alpha) * (Bandwidth::one() - nu) > Bandwidth::one());
        let cert = certify(&Theorem::Scratch { nu, n: 2, m: 2 }).unwrap();
        assert!(cert.is_certified(), "{}", cert.verdict);
        assert!(cert.forced_step().unwrap().transient_peak.unwrap() > Bandwidth::one());
    }
    assert!(Strategy::scratch(r("1/3"), 2, 2).is_err());
}

#[test]
fn choose_gh_satisfies_both_inequalities() {
    let started = std::time::Instant::now();
    for n in 3..=64usize {
        let p = choose_gh(n).unwrap();
        let k = Bandwidth::from((n * n - n) as i64);
        assert!(r("1/3") < p.h && p.h < p.g && p.g < r("1/2"), "n = {n}");
        assert!(p.g > k * (Bandwidth::one() - p.h * Bandwidth::from(2)), "n = {n}");
    }
    assert!(started.elapsed().as_secs_f64() < 1.0);
    assert_eq!(choose_gh(3).unwrap().g, r("23/48"));
    let h3 = choose_gh(3).unwrap().h;
    assert!(r("1/2") - r("23/576") < h3 && h3 < r("23/48"));
    assert!(choose_gh(2).is_err());
}

/// All lossless placements of the A/B/C families on two unit edges.
fn grouping(n: usize) -> Vec<(Vec<u32>, Vec<u32>)> {
    let p = choose_gh(n).unwrap();
    let mut state = GameState::new(LfaGraph::canonical(n, 2, Bandwidth::one()).unwrap());
    let mut b = Vec::new();
    let mut c = Vec::new();
    let mut id = 1;
    for _ in 0..2 {
        state = state.add_flow(Flow::new(id, p.h, Node::Hop(0))).unwrap();
        id += 1;
    }
    for i in 0..n {
        state = state.add_flow(Flow::new(id, p.g / Bandwidth::from(n as i64), Node::Hop(i as u32))).unwrap();
        b.push(id);
        id += 1;
    }
    for i in 1..n {
        state = state.add_flow(Flow::new(id, p.g / Bandwidth::from(n as i64 - 1), Node::Hop(i as u32))).unwrap();
        c.push(id);
        id += 1;
    }
    enumerate_lossless(&state)
        .unwrap()
        .iter()
        .map(|s| {
            let groups = edge_groups(s).unwrap();
            let side = |f: &u32| groups.iter().position(|g| g.contains(f)).unwrap() as u32;
            (b.iter().map(side).collect(), c.iter().map(side).collect())
        })
        .collect()
}

#[test]
fn type_b_and_type_c_flows_each_share_one_edge() {
    for n in [3, 4] {
        let placements = grouping(n);
        assert!(!placements.is_empty());
        for (b, c) in placements {
            assert!(b.windows(2).all(|w| w[0] == w[1]), "n = {n}: B split {b:?}");
            assert!(c.windows(2).all(|w| w[0] == w[1]), "n = {n}: C split {c:?}");
        }
    }
}

#[test]
fn n_swap_forces_a_swap_touching_every_first_hop() {
    for n in [3, 4] {
        let t = play(Strategy::n_swap(n, 2).unwrap(), &FirstFit).unwrap();
        let step = t.forced_steps().last().unwrap();
        assert_eq!(step.min_k, Some(n));
        assert!(step.plan.updates.iter().any(|u| u.classify() == UpdateKind::Swap { k: n }));
    }
    assert!(Strategy::n_swap(2, 2).is_err());
}

#[test]
fn m_halves_script() {
    assert!(Strategy::m_halves(2, 2).is_err());
    let mut s5 = Strategy::m_halves(2, 5).unwrap();
    let first = s5.next_move(&s5.initial_state().unwrap()).unwrap().unwrap();
    assert_eq!(first.flow.bandwidth, Bandwidth::one());

    let t = play(Strategy::m_halves(2, 4).unwrap(), &FirstFit).unwrap();
    let kinds: Vec<_> = t.steps.iter().map(|s| (s.mv.action, s.mv.flow.bandwidth)).collect();
    assert_eq!(kinds.len(), 12 + 4 + 2);
    assert!(kinds[12..16].iter().all(|k| *k == (SourceAction::Remove, r("0.2"))));
    assert!(kinds[16..].iter().all(|k| *k == (SourceAction::Add, r("0.3"))));
    let forced: Vec<_> = t.forced_steps().collect();
    assert_eq!(forced.len(), 2);
    assert!(forced.iter().all(|s| s.min_k == Some(2)));
}

#[test]
fn scripts_never_exceed_network_capacity() {
    let strategies = [
        Strategy::two_swap(3, 4).unwrap(),
        Strategy::m_halves(2, 5).unwrap(),
        Strategy::impact(r("2/5"), 2, 3).unwrap(),
        Strategy::scratch(r("3/10"), 2, 2).unwrap(),
        Strategy::n_swap(4, 3).unwrap(),
    ];
    for strat in strategies {
        let budget = strat.capacity() * Bandwidth::from(strat.dest_edges() as i64);
        assert!(strat.peak_demand() <= budget);
        for controller in [&FirstFit as &dyn time4_core::Controller, &BestFit] {
            let t = play(strat.clone(), controller).unwrap();
            for step in &t.steps {
                let demand: Bandwidth = step.loads_after.iter().copied().fold(Bandwidth::zero(), |a, b| a + b);
                assert!(demand <= budget);
            }
        }
    }
}

#[test]
fn every_minimal_controller_is_forced_at_small_scale() {
    let cases = [
        (Strategy::two_swap(2, 2).unwrap(), 1, 2),
        (Strategy::two_swap(3, 3).unwrap(), 1, 2),
        (Strategy::m_halves(2, 3).unwrap(), 1, 2),
        (Strategy::n_swap(3, 2).unwrap(), 1, 3),
    ];
    for (strat, swaps, k) in cases {
        let summary = explore_all_controllers(&strat).unwrap();
        assert!(summary.leaves > 0);
        assert!(summary.min_forced_swaps >= swaps);
        assert!(summary.min_largest_k >= k);
    }
}

#[test]
fn certification_grid() {
    let mut cases = Vec::new();
    for n in 2..=4 {
        for m in 2..=4 {
            cases.push(Theorem::TwoSwap { n, m });
        }
    }
    for m in 3..=5 {
        cases.push(Theorem::MHalves { n: 2, m });
    }
    for a in ["1/10", "1/4", "2/5", "9/20"] {
        cases.push(Theorem::Impact { alpha: r(a), n: 2, m: 2 });
    }
    for nu in ["1/10", "3/10"] {
        cases.push(Theorem::Scratch { nu: r(nu), n: 2, m: 2 });
    }
    cases.push(Theorem::NSwap { n: 3, m: 2 });
    cases.push(Theorem::NSwap { n: 4, m: 2 });
    for theorem in cases {
        let cert = certify(&theorem).unwrap();
        assert!(cert.is_certified(), "{theorem:?}: {}", cert.verdict);
    }
}
