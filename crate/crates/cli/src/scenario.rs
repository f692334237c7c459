//! Versioned JSON scenario files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "id": "swap-8",
//!   "topology": { "n": 8 },
//!   "params": { "delta_ms": 9.64 },
//!   "strategy": { "kind": "time4+swan:0.05" },
//!   "sweep": { "n": [2, 4, 8], "strategies": ["time4", "untimed"] },
//!   "seeds": 20
//! }
//! ```
//!
//! Without `flows` the topology is the n-switch evaluation swap. With `flows`, `moves`
//! lists the new edge of each flow that changes, and `sweep.n` is not allowed.

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer};
use time4_core::parse_ratio;
use time4_netsim::{
    mbps, ClockRegistry, Move, Rate, SimFlow, SimParams, StrategyConfig, StrategyKind, SwapIntent, SweepPoint,
};

use crate::output::Job;
use crate::units::ms_to_nanos;
use crate::usage;

pub const VERSION: u32 = 1;
pub const DEFAULT_SEEDS: u64 = 100;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    #[serde(default = "default_id")]
    pub id: String,
    pub topology: Topology,
    #[serde(default)]
    pub flows: Option<Vec<FlowSpec>>,
    #[serde(default)]
    pub moves: Option<Vec<MoveSpec>>,
    #[serde(default)]
    pub params: ParamSpec,
    /// True clock offset of each switch in milliseconds, compensated exactly.
    #[serde(default)]
    pub offsets_ms: Option<Vec<f64>>,
    pub strategy: StrategySpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub seeds: Option<u64>,
}

fn default_id() -> String {
    "scenario".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub n: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_capacity", deserialize_with = "ratio")]
    pub capacity_mbps: Rate,
}

fn default_m() -> usize {
    2
}

fn default_capacity() -> Rate {
    Rate::from_integer(10)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub id: u32,
    #[serde(deserialize_with = "ratio")]
    pub rate_mbps: Rate,
    pub switch: usize,
    pub edge: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveSpec {
    pub flow: u32,
    pub to: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub delta_ms: Option<f64>,
    pub install_range_ms: Option<f64>,
    pub sched_error_ms: Option<f64>,
    pub packet_size_bits: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub kind: String,
    #[serde(default)]
    pub schedule_advance_ms: Option<f64>,
    #[serde(default)]
    pub swan_fallback: Option<bool>,
}

/// Every non-empty list multiplies the grid; an empty sweep is a single point.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub strategies: Vec<String>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub delta_ms: Vec<f64>,
    #[serde(default)]
    pub install_range_ms: Vec<f64>,
    #[serde(default)]
    pub sched_error_ms: Vec<f64>,
}

/// Accepts `10`, `2.5` or `"5/3"`.
fn ratio<'de, D: Deserializer<'de>>(d: D) -> Result<Rate, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Text {
        Num(serde_json::Number),
        Str(String),
    }
    let text = match Text::deserialize(d)? {
        Text::Num(n) => n.to_string(),
        Text::Str(s) => s,
    };
    parse_ratio(&text).map_err(|_| serde::de::Error::custom(format!("expected a rate such as 5 or \"5/3\", got {text:?}")))
}

/// Parses a scenario, reporting the failing field path and line.
pub fn load(text: &str, origin: &str) -> anyhow::Result<ScenarioFile> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        usage(format!("{origin}:{}:{}: at `{path}`: {inner}", inner.line(), inner.column()))
    })?;
    if file.version != VERSION {
        return Err(usage(format!("{origin}: unsupported scenario version {} (this build reads {VERSION})", file.version)));
    }
    Ok(file)
}

impl ScenarioFile {
    fn params(&self, delta: Option<f64>, install: Option<f64>, sched: Option<f64>) -> anyhow::Result<SimParams> {
        let base = SimParams::type_i(0);
        let pick = |v: Option<f64>, fallback: i64, name: &str| -> anyhow::Result<i64> {
            match v {
                Some(ms) => ms_to_nanos(ms).map_err(|e| usage(format!("params.{name}: {e}"))),
                None => Ok(fallback),
            }
        };
        let p = SimParams {
            delta: pick(delta.or(self.params.delta_ms), base.delta, "delta_ms")?,
            install_range: pick(install.or(self.params.install_range_ms), base.install_range, "install_range_ms")?,
            sched_error: pick(sched.or(self.params.sched_error_ms), base.sched_error, "sched_error_ms")?,
            packet_size: self.params.packet_size_bits.unwrap_or(base.packet_size),
            seed: 0,
        };
        p.validate().map_err(|e| usage(format!("params: {e}")))?;
        Ok(p)
    }

    fn intent(&self, n: usize) -> anyhow::Result<SwapIntent> {
        let Some(flows) = &self.flows else {
            if self.topology.m != 2 || self.topology.capacity_mbps != Rate::from_integer(10) {
                return Err(usage("topology: the built-in swap uses m = 2 and 10 Mbps edges; list flows to change them"));
            }
            return SwapIntent::flow_swap(n).map_err(|e| usage(format!("topology: {e}")));
        };
        let moves = self.moves.as_ref().ok_or_else(|| usage("`moves` is required with `flows`"))?;
        let flows: Vec<SimFlow> = flows
            .iter()
            .map(|f| SimFlow { id: f.id, rate: f.rate_mbps * mbps(1), switch: f.switch, edge: f.edge })
            .collect();
        let mut ids = BTreeSet::new();
        for f in &flows {
            if !ids.insert(f.id) {
                return Err(usage(format!("flows: id {} appears twice", f.id)));
            }
            if f.switch >= n || f.edge >= self.topology.m {
                return Err(usage(format!("flows: flow {} is outside the {n}×{} topology", f.id, self.topology.m)));
            }
        }
        let moves = moves
            .iter()
            .map(|m| {
                let f = flows.iter().find(|f| f.id == m.flow).ok_or_else(|| usage(format!("moves: unknown flow {}", m.flow)))?;
                Ok(Move { flow: m.flow, switch: f.switch, from: f.edge, to: m.to })
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let intent =
            SwapIntent { switches: n, edges: self.topology.m, capacity: self.topology.capacity_mbps * mbps(1), flows, moves };
        intent.validate().map_err(|e| usage(format!("moves: {e}")))?;
        Ok(intent)
    }

    fn config(&self, kind: &str) -> anyhow::Result<StrategyConfig> {
        let kind = StrategyKind::parse(kind).map_err(|e| usage(format!("strategy: {e}")))?;
        let mut cfg = StrategyConfig::new(kind);
        if let Some(ms) = self.strategy.schedule_advance_ms {
            cfg.schedule_advance = ms_to_nanos(ms).map_err(|e| usage(format!("strategy.schedule_advance_ms: {e}")))?;
            if cfg.schedule_advance < 0 {
                return Err(usage("strategy.schedule_advance_ms must not be negative"));
            }
        }
        if let Some(f) = self.strategy.swan_fallback {
            cfg.swan_fallback = f;
        }
        Ok(cfg)
    }

    fn clocks(&self, n: usize) -> anyhow::Result<Option<ClockRegistry>> {
        let Some(offsets) = &self.offsets_ms else { return Ok(None) };
        if offsets.len() != n {
            return Err(usage(format!("offsets_ms has {} entries for {n} switches", offsets.len())));
        }
        let mut reg = ClockRegistry::zero(n);
        for (i, ms) in offsets.iter().enumerate() {
            reg.set(i, ms_to_nanos(*ms).map_err(|e| usage(format!("offsets_ms[{i}]: {e}")))?);
        }
        Ok(Some(reg))
    }

    /// Expands the sweep grid, strategy-major.
    pub fn into_job(self, seeds: Option<u64>) -> anyhow::Result<Job> {
        let sweep = self.sweep.clone().unwrap_or_default();
        if self.flows.is_some() && !sweep.n.is_empty() {
            return Err(usage("sweep.n needs the built-in swap; drop `flows` or the n grid"));
        }
        let or_one = |v: &Vec<f64>| if v.is_empty() { vec![None] } else { v.iter().copied().map(Some).collect() };
        let kinds = if sweep.strategies.is_empty() { vec![self.strategy.kind.clone()] } else { sweep.strategies.clone() };
        let ns = if sweep.n.is_empty() { vec![self.topology.n] } else { sweep.n.clone() };
        let mut points = Vec::new();
        for kind in &kinds {
            let config = self.config(kind)?;
            for &n in &ns {
                let intent = self.intent(n)?;
                let clocks = self.clocks(n)?;
                for d in or_one(&sweep.delta_ms) {
                    for i in or_one(&sweep.install_range_ms) {
                        for s in or_one(&sweep.sched_error_ms) {
                            points.push(SweepPoint {
                                scenario: self.id.clone(),
                                intent: intent.clone(),
                                config,
                                params: self.params(d, i, s)?,
                                clocks: clocks.clone(),
                            });
                        }
                    }
                }
            }
        }
        let seeds = seeds.or(self.seeds).unwrap_or(DEFAULT_SEEDS);
        if seeds == 0 {
            return Err(usage("at least one seed is needed"));
        }
        Ok(Job { points, seeds })
    }
}
