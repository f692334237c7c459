use num_traits::Zero;
use proptest::prelude::*;
use time4_netsim::plan::{Command, Plan, TimedUpdate};
use time4_netsim::{
    compile, fluid_loss, mbps, run, schedule_timed_update, ClockRegistry, LoadTimeline, Nanos, Rate, SimFlow,
    SimParams, StrategyConfig, StrategyKind, SwapIntent, World, NANOS_PER_MS,
};
use time4_wire::OfpError;

const PACKET: u64 = 10_000;

fn two_swap_world() -> World {
    let intent = SwapIntent::flow_swap(2).unwrap();
    World::new(intent.switches, intent.edges, intent.capacity, intent.flows)
}

/// Big flow 1 at switch 0 moves 0 → 1, small flow 2 at switch 1 moves 1 → 0.
fn untimed_pair(gap: Nanos, l0: Nanos, l1: Nanos) -> Plan {
    Plan {
        commands: vec![
            Command::FlowMod { at: 0, switch: 0, changes: vec![(1, 1)], latency: Some(l0) },
            Command::FlowMod { at: gap, switch: 1, changes: vec![(2, 0)], latency: Some(l1) },
        ],
        ..Plan::default()
    }
}

#[test]
fn simultaneous_swap_loses_nothing() {
    let world = two_swap_world();
    let plan = Plan {
        commands: vec![
            Command::FlowMod { at: 0, switch: 0, changes: vec![(1, 1)], latency: Some(5 * NANOS_PER_MS) },
            Command::FlowMod { at: 0, switch: 1, changes: vec![(2, 0)], latency: Some(5 * NANOS_PER_MS) },
        ],
        ..Plan::default()
    };
    let report = run(&world, &plan, &SimParams::ideal(0)).unwrap();
    assert_eq!(report.lost_packets, 0.0);
    assert_eq!(report.final_routes[&1], 1);
    assert_eq!(report.final_routes[&2], 0);
}

#[test]
fn untimed_pair_matches_hand_integrated_loss() {
    // Flow 1 lands at l0, flow 2 leaves edge 1 at gap + l1. In between edge 1 carries
    // 5 + 5 + 5 Mbps on 10 Mbps: 5e6 b/s over (gap + l1 − l0), in 10 000-bit packets.
    let cases: [(Nanos, Nanos, Nanos); 5] = [
        (9_640_000, 0, 0),
        (9_640_000, 1_300_000, 200_000),
        (9_640_000, 100_000, 1_299_999),
        (1, 0, 0),
        (250_000_000, 3, 7),
    ];
    for (gap, l0, l1) in cases {
        let report = run(&two_swap_world(), &untimed_pair(gap, l0, l1), &SimParams::ideal(gap)).unwrap();
        let expected = 5e6 * ((gap + l1 - l0) as f64 / 1e9) / PACKET as f64;
        let rel = (report.lost_packets - expected).abs() / expected;
        assert!(rel <= 1e-9, "gap {gap}: {} vs {expected}", report.lost_packets);
    }
}

#[test]
fn fluid_oracle_for_reference_overload() {
    let mut t = LoadTimeline::default();
    t.push(0, 0, mbps(15));
    t.push(0, 100 * NANOS_PER_MS, mbps(10));
    t.end = 200 * NANOS_PER_MS;
    assert!((fluid_loss(&t, mbps(10), PACKET) - 50.0).abs() < 1e-12);
}

#[test]
fn untimed_duration_is_n_minus_one_gaps() {
    for n in [2usize, 3, 8, 32] {
        let params = SimParams { install_range: 0, ..SimParams::type_i(9) };
        let intent = SwapIntent::flow_swap(n).unwrap();
        let c = compile(&intent, &StrategyConfig::new(StrategyKind::Untimed), &params, &ClockRegistry::zero(n)).unwrap();
        let report = run(&c.world, &c.plan, &params).unwrap();
        assert_eq!(report.update_duration, (n as Nanos - 1) * params.delta, "n = {n}");
    }
}

#[test]
fn thirty_two_switches_take_about_three_hundred_ms() {
    let params = SimParams::type_i(4);
    let intent = SwapIntent::flow_swap(32).unwrap();
    let c = compile(&intent, &StrategyConfig::new(StrategyKind::Untimed), &params, &ClockRegistry::zero(32)).unwrap();
    let d = run(&c.world, &c.plan, &params).unwrap().update_duration as f64 / 1e6;
    // 31 × 9.64 ms, give or take one installation latency.
    assert!((d - 298.84).abs() <= 1.3, "{d}");
}

#[test]
fn one_rejection_discards_every_bundle() {
    let world = two_swap_world();
    let updates = [TimedUpdate { switch: 0, changes: vec![(1, 1)] }, TimedUpdate { switch: 1, changes: vec![(2, 0)] }];
    // 1.5 s ahead with the default 1 s future tolerance.
    let plan = schedule_timed_update(&world.clocks, &updates, 1_500 * NANOS_PER_MS, 0, 0).unwrap();
    let report = run(&world, &plan, &SimParams::type_i(2)).unwrap();
    assert!(report.aborted);
    assert_eq!(report.executed_bundles, 0);
    assert!(report.route_changes.is_empty());
    assert!(report.rejections.iter().all(|(_, e)| *e == OfpError::SCHED_FUTURE));
    assert_eq!(report.lost_packets, 0.0);
}

#[test]
fn late_rejection_still_cancels_the_earlier_bundle() {
    let mut world = two_swap_world();
    world.clocks = ClockRegistry::from_offsets([(0, 0), (1, 0)]);
    // The controller believes switch 1 runs 2 s behind: its corrected time lands too far out.
    let estimates = ClockRegistry::from_offsets([(0, 0), (1, 2_000 * NANOS_PER_MS)]);
    let updates = [TimedUpdate { switch: 0, changes: vec![(1, 1)] }, TimedUpdate { switch: 1, changes: vec![(2, 0)] }];
    let plan = schedule_timed_update(&estimates, &updates, 200 * NANOS_PER_MS, 0, 10 * NANOS_PER_MS).unwrap();
    let report = run(&world, &plan, &SimParams::type_i(2)).unwrap();
    assert_eq!(report.rejections.len(), 1);
    assert_eq!(report.rejections[0].0, 1);
    assert_eq!(report.executed_bundles, 0);
}

#[test]
fn past_schedule_is_refused() {
    let world = two_swap_world();
    let updates = [TimedUpdate { switch: 0, changes: vec![(1, 1)] }];
    let mut plan = schedule_timed_update(&world.clocks, &updates, 0, 0, 0).unwrap();
    let Command::Bundle { at, .. } = &mut plan.commands[0] else { unreachable!() };
    *at = 1_100 * NANOS_PER_MS;
    let report = run(&world, &plan, &SimParams::type_i(2)).unwrap();
    assert_eq!(report.rejections[0].1, OfpError::SCHED_PAST);
}

#[test]
fn reports_are_deterministic() {
    for kind in ["untimed", "time4", "swan:0.05", "time4+b4:0.1"] {
        let params = SimParams::type_i(77);
        let intent = SwapIntent::flow_swap(8).unwrap();
        let c = compile(&intent, &StrategyConfig::new(StrategyKind::parse(kind).unwrap()), &params, &ClockRegistry::zero(8)).unwrap();
        let a = run(&c.world, &c.plan, &params).unwrap();
        let b = run(&c.world, &c.plan, &params).unwrap();
        assert_eq!(a, b, "{kind}");
        assert_eq!(a.lost_packets.to_bits(), b.lost_packets.to_bits());
    }
}

#[test]
fn unknown_references_are_rejected() {
    let world = two_swap_world();
    let bad_switch = Plan {
        commands: vec![Command::FlowMod { at: 0, switch: 9, changes: vec![(1, 1)], latency: None }],
        ..Plan::default()
    };
    assert!(run(&world, &bad_switch, &SimParams::ideal(0)).is_err());
    let bad_rate = Plan { commands: vec![Command::SetRate { at: 0, flow: 1, rate: Rate::zero() - mbps(1) }], ..Plan::default() };
    assert!(run(&world, &bad_rate, &SimParams::ideal(0)).is_err());
}

fn strategy() -> impl Strategy<Value = StrategyKind> {
    prop_oneof![
        Just(StrategyKind::Untimed),
        Just(StrategyKind::Time4),
        Just(StrategyKind::TwoPhase),
        (0i64..10).prop_map(|k| StrategyKind::Swan(Rate::new(k, 40))),
        (0i64..10).prop_map(|k| StrategyKind::B4(Rate::new(k, 40))),
        (0i64..10).prop_map(|k| StrategyKind::Time4Swan(Rate::new(k, 40))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fluid_accounting_closes(n in 2usize..10, kind in strategy(), seed in any::<u64>()) {
        let params = SimParams::type_i(seed);
        let c = compile(&SwapIntent::flow_swap(n).unwrap(), &StrategyConfig::new(kind), &params, &ClockRegistry::zero(n)).unwrap();
        let r = run(&c.world, &c.plan, &params).unwrap();
        let per_flow: f64 = r.per_flow_loss.values().sum();
        prop_assert!((per_flow - r.lost_packets).abs() <= 1e-9 * r.offered_packets.max(1.0));
        prop_assert!((r.offered_packets - r.delivered_packets - r.lost_packets).abs() <= 1e-9 * r.offered_packets);
        prop_assert!(r.lost_packets >= 0.0);
    }

    #[test]
    fn compensated_offsets_do_not_change_loss(n in 2usize..10, seed in any::<u64>(), spread_ms in 1i64..500) {
        let params = SimParams::type_i(seed);
        let intent = SwapIntent::flow_swap(n).unwrap();
        let cfg = StrategyConfig::new(StrategyKind::Time4);
        let base = compile(&intent, &cfg, &params, &ClockRegistry::zero(n)).unwrap();
        let clocks = ClockRegistry::random(n, spread_ms * NANOS_PER_MS, seed);
        let shifted = compile(&intent, &cfg, &params, &clocks).unwrap();
        let a = run(&base.world, &base.plan, &params).unwrap();
        let b = run(&shifted.world, &shifted.plan, &params).unwrap();
        prop_assert_eq!(a.lost_packets.to_bits(), b.lost_packets.to_bits());
        prop_assert_eq!(a.route_changes, b.route_changes);
    }

    #[test]
    fn timed_swap_is_lossless_without_scheduling_error(n in 2usize..12, seed in any::<u64>()) {
        let params = SimParams { sched_error: 0, ..SimParams::type_i(seed) };
        let c = compile(&SwapIntent::flow_swap(n).unwrap(), &StrategyConfig::new(StrategyKind::Time4), &params, &ClockRegistry::random(n, NANOS_PER_MS * 50, seed)).unwrap();
        prop_assert_eq!(run(&c.world, &c.plan, &params).unwrap().lost_packets, 0.0);
    }
}

#[test]
fn link_delay_shifts_arrival() {
    let mut world = World::new(1, 1, mbps(10), vec![SimFlow { id: 1, rate: mbps(4), switch: 0, edge: 0 }]);
    world.link_delay = vec![5 * NANOS_PER_MS];
    let report = run(&world, &Plan::default(), &SimParams::ideal(0)).unwrap();
    assert_eq!(report.lost_packets, 0.0);
}
