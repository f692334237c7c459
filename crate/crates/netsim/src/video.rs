//! Two 10 Mbps streams through one switch, swapped by a single scheduled bundle.

use crate::plan::{Command, Plan};
use crate::{mbps, run, stream_seed, ClockRegistry, Nanos, SimError, SimFlow, SimParams, World, NANOS_PER_MS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VideoSample {
    /// Packets of stream A forwarded on the wrong side of T.
    pub misrouted_packets: f64,
    /// Misrouted packets over the stream's packet rate; negative when the swap fired early.
    pub error_ms: f64,
}

const STREAM_A: u32 = 1;
const STREAM_B: u32 = 2;

/// One swap scheduled `advance` after the controller sends it. `inject` replaces the random
/// scheduling error with a fixed execution offset, which may be negative.
pub fn video_swap(params: &SimParams, advance: Nanos, inject: Option<Nanos>) -> Result<VideoSample, SimError> {
    let rate = mbps(10);
    let flows = vec![
        SimFlow { id: STREAM_A, rate, switch: 0, edge: 0 },
        SimFlow { id: STREAM_B, rate, switch: 0, edge: 1 },
    ];
    let mut world = World::new(1, 2, mbps(10), flows);
    // An arbitrary true offset, known exactly to the controller.
    world.clocks = ClockRegistry::random(1, NANOS_PER_MS, stream_seed(params.seed, u64::MAX));
    let scheduled = world.clocks.switch_time(0, advance).ok_or_else(|| SimError::Params("offset out of range".into()))?;
    // A negative injection is modelled by scheduling early by that amount.
    let (scheduled, error) = match inject {
        Some(e) if e < 0 => (world.clocks.switch_time(0, advance + e).expect("in range"), Some(0)),
        Some(e) => (scheduled, Some(e)),
        None => (scheduled, None),
    };
    let plan = Plan {
        commands: vec![Command::Bundle {
            at: 0,
            switch: 0,
            bundle_id: 1,
            changes: vec![(STREAM_A, 1), (STREAM_B, 0)],
            scheduled: Some(scheduled),
            error,
        }],
        all_or_none: true,
        tolerance: None,
    };
    let report = run(&world, &plan, params)?;
    let fired = report
        .route_changes
        .iter()
        .find(|c| c.1 == STREAM_A)
        .map(|c| c.0)
        .ok_or_else(|| SimError::Plan("swap never executed".into()))?;
    let pps = World::packet_rate(&rate, params.packet_size);
    let offset_s = (fired - advance) as f64 / 1e9;
    let misrouted_packets = offset_s.abs() * pps;
    Ok(VideoSample { misrouted_packets, error_ms: offset_s.signum() * misrouted_packets / pps * 1e3 })
}

/// `runs` independent swaps, run `r` seeded from (seed, r).
pub fn video_samples(params: &SimParams, advance: Nanos, inject: Option<Nanos>, runs: usize) -> Result<Vec<VideoSample>, SimError> {
    (0..runs)
        .map(|r| video_swap(&params.with_seed(stream_seed(params.seed, r as u64)), advance, inject))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_scheduling_misroutes_nothing() {
        let p = SimParams { sched_error: 0, ..SimParams::type_i(3) };
        let s = video_swap(&p, 100 * NANOS_PER_MS, None).unwrap();
        assert_eq!(s.misrouted_packets, 0.0);
        assert_eq!(s.error_ms, 0.0);
    }

    #[test]
    fn injected_offsets_keep_their_sign() {
        let p = SimParams::type_i(3);
        let late = video_swap(&p, 100 * NANOS_PER_MS, Some(400_000)).unwrap();
        assert!((late.error_ms - 0.4).abs() < 1e-9);
        assert!((late.misrouted_packets - 0.4).abs() < 1e-9);
        let early = video_swap(&p, 100 * NANOS_PER_MS, Some(-250_000)).unwrap();
        assert!((early.error_ms + 0.25).abs() < 1e-9);
    }
}
