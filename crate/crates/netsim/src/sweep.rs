use rayon::prelude::*;
use serde::Serialize;

use crate::{compile, ms, ratio_f64, run, ClockRegistry, SimError, SimParams, StrategyConfig, StrategyKind, SwapIntent};

/// One grid point of an experiment; seeds are supplied separately.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub scenario: String,
    pub intent: SwapIntent,
    pub config: StrategyConfig,
    pub params: SimParams,
    /// True switch clock offsets, known exactly to the controller. Zero when `None`.
    pub clocks: Option<ClockRegistry>,
}

impl SweepPoint {
    /// The n-switch evaluation swap.
    pub fn flow_swap(scenario: &str, n: usize, kind: StrategyKind, params: SimParams) -> Result<Self, SimError> {
        Ok(SweepPoint {
            scenario: scenario.to_string(),
            intent: SwapIntent::flow_swap(n)?,
            config: StrategyConfig::new(kind),
            params,
            clocks: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scenario: String,
    pub strategy: String,
    pub param: f64,
    pub n: usize,
    pub delta_ms: f64,
    pub install_range_ms: f64,
    pub sched_error_ms: f64,
    pub seed: u64,
    pub lost_packets: f64,
    pub update_duration_ms: f64,
    pub withheld_bandwidth_seconds: f64,
}

pub fn run_point(point: &SweepPoint, seed: u64) -> Result<SweepRow, SimError> {
    let params = point.params.with_seed(seed);
    let n = point.intent.switches;
    let clocks = point.clocks.clone().unwrap_or_else(|| ClockRegistry::zero(n));
    let compiled = compile(&point.intent, &point.config, &params, &clocks)?;
    let report = run(&compiled.world, &compiled.plan, &params)?;
    Ok(SweepRow {
        scenario: point.scenario.clone(),
        strategy: point.config.kind.label().to_string(),
        param: ratio_f64(&point.config.kind.param()),
        n,
        delta_ms: ms(params.delta),
        install_range_ms: ms(params.install_range),
        sched_error_ms: ms(params.sched_error),
        seed,
        lost_packets: report.lost_packets,
        update_duration_ms: ms(report.update_duration),
        withheld_bandwidth_seconds: report.withheld_bandwidth_seconds,
    })
}

/// Every point under every seed, in point-major order whatever the thread count.
pub fn sweep(points: &[SweepPoint], seeds: &[u64]) -> Result<Vec<SweepRow>, SimError> {
    let jobs: Vec<(&SweepPoint, u64)> = points.iter().flat_map(|p| seeds.iter().map(move |&s| (p, s))).collect();
    jobs.par_iter().map(|(p, s)| run_point(p, *s)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub strategy: String,
    pub param: f64,
    pub n: usize,
    pub delta_ms: f64,
    pub install_range_ms: f64,
    pub sched_error_ms: f64,
    pub runs: usize,
    pub mean_lost_packets: f64,
    pub std_lost_packets: f64,
    pub mean_update_duration_ms: f64,
    pub mean_withheld_bandwidth_seconds: f64,
}

/// Mean and sample standard deviation per grid point, in order of first appearance.
pub fn summarize(rows: &[SweepRow]) -> Vec<Summary> {
    let mut groups: Vec<(Summary, Vec<&SweepRow>)> = Vec::new();
    for row in rows {
        let same = |s: &Summary| {
            s.scenario == row.scenario
                && s.strategy == row.strategy
                && s.param == row.param
                && s.n == row.n
                && s.delta_ms == row.delta_ms
                && s.install_range_ms == row.install_range_ms
                && s.sched_error_ms == row.sched_error_ms
        };
        match groups.iter_mut().find(|(s, _)| same(s)) {
            Some((_, members)) => members.push(row),
            None => groups.push((
                Summary {
                    scenario: row.scenario.clone(),
                    strategy: row.strategy.clone(),
                    param: row.param,
                    n: row.n,
                    delta_ms: row.delta_ms,
                    install_range_ms: row.install_range_ms,
                    sched_error_ms: row.sched_error_ms,
                    runs: 0,
                    mean_lost_packets: 0.0,
                    std_lost_packets: 0.0,
                    mean_update_duration_ms: 0.0,
                    mean_withheld_bandwidth_seconds: 0.0,
                },
                vec![row],
            )),
        }
    }
    groups
        .into_iter()
        .map(|(mut s, members)| {
            let k = members.len() as f64;
            let mean = |f: fn(&SweepRow) -> f64| members.iter().map(|r| f(r)).sum::<f64>() / k;
            s.runs = members.len();
            s.mean_lost_packets = mean(|r| r.lost_packets);
            s.mean_update_duration_ms = mean(|r| r.update_duration_ms);
            s.mean_withheld_bandwidth_seconds = mean(|r| r.withheld_bandwidth_seconds);
            s.std_lost_packets = if members.len() > 1 {
                let m = s.mean_lost_packets;
                (members.iter().map(|r| (r.lost_packets - m).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
            } else {
                0.0
            };
            s
        })
        .collect()
}
