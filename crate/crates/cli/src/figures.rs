//! Presets reproducing each evaluation plot's data with the Type-I testbed attributes.

use time4_netsim::{Fraction, Nanos, SimParams, StrategyKind, SweepPoint, NANOS_PER_MS};

use crate::output::Job;
use crate::usage;

pub const SWITCH_COUNTS: [usize; 5] = [2, 4, 8, 16, 32];
/// Scratch and rate-reduction grid, in 40ths: 0 to 10 %.
pub const FRACTION_GRID: [i64; 5] = [0, 1, 2, 3, 4];
pub const DELTA_GRID_MS: [f64; 7] = [1.0, 2.0, 5.0, 9.64, 20.0, 50.0, 100.0];
pub const INSTALL_RANGE_GRID_MS: [f64; 7] = [0.0, 1.3, 10.0, 30.0, 100.0, 300.0, 1000.0];
pub const SCHED_ERROR_GRID_MS: [f64; 7] = [0.0, 0.1, 0.5, 1.0, 1.23, 2.0, 5.0];
pub const DEFAULT_N: usize = 2;

fn nanos(ms: f64) -> Nanos {
    (ms * NANOS_PER_MS as f64).round() as Nanos
}

pub fn preset(figure: &str, n: Option<usize>, seeds: Option<u64>) -> anyhow::Result<Job> {
    let base = SimParams::type_i(0);
    let id = format!("fig{figure}");
    let n0 = n.unwrap_or(DEFAULT_N);
    let point = |n: usize, kind: StrategyKind, params: SimParams| {
        SweepPoint::flow_swap(&id, n, kind, params).map_err(|e| usage(e.to_string()))
    };
    let frac = |k: i64| Fraction::new(k, 40);
    let mut points = Vec::new();
    match figure {
        "6a" => {
            if n.is_some() {
                return Err(usage("--n does not apply to figure 6a, which sweeps n"));
            }
            for kind in [StrategyKind::Time4, StrategyKind::Untimed] {
                for n in SWITCH_COUNTS {
                    points.push(point(n, kind, base)?);
                }
            }
        }
        "6b" => {
            let p = frac(4);
            for kind in [
                StrategyKind::Untimed,
                StrategyKind::Ordered,
                StrategyKind::TwoPhase,
                StrategyKind::Time4,
                StrategyKind::Swan(p),
                StrategyKind::B4(p),
                StrategyKind::Time4Swan(p),
                StrategyKind::Time4B4(p),
            ] {
                points.push(point(n0, kind, base)?);
            }
        }
        "6c" | "6d" => {
            for k in FRACTION_GRID {
                let pair = if figure == "6c" {
                    [StrategyKind::Swan(frac(k)), StrategyKind::Time4Swan(frac(k))]
                } else {
                    [StrategyKind::B4(frac(k)), StrategyKind::Time4B4(frac(k))]
                };
                for kind in pair {
                    points.push(point(n0, kind, base)?);
                }
            }
        }
        "7" | "8a" => {
            let grid = if figure == "7" { &DELTA_GRID_MS } else { &INSTALL_RANGE_GRID_MS };
            for kind in [StrategyKind::Untimed, StrategyKind::Time4] {
                for &ms in grid {
                    let params = if figure == "7" {
                        SimParams { delta: nanos(ms), ..base }
                    } else {
                        SimParams { install_range: nanos(ms), ..base }
                    };
                    points.push(point(n0, kind, params)?);
                }
            }
        }
        "8b" => {
            for ms in SCHED_ERROR_GRID_MS {
                points.push(point(n0, StrategyKind::Time4, SimParams { sched_error: nanos(ms), ..base })?);
            }
        }
        other => return Err(usage(format!("unknown figure {other}"))),
    }
    let seeds = seeds.unwrap_or(crate::scenario::DEFAULT_SEEDS);
    if seeds == 0 {
        return Err(usage("at least one seed is needed"));
    }
    Ok(Job { points, seeds })
}
