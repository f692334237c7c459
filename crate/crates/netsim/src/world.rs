use serde::{Deserialize, Serialize};

use crate::{ClockRegistry, Nanos, Rate, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimParams {
    /// Δ, the gap between consecutive controller messages.
    pub delta: Nanos,
    /// I_R; untimed commands take effect after Uniform[0, I_R].
    pub install_range: Nanos,
    /// δ; timed commands take effect within [T_s, T_s + δ].
    pub sched_error: Nanos,
    pub seed: u64,
    /// Bits per packet for converting fluid loss into packets.
    pub packet_size: u64,
}

impl SimParams {
    pub const DEFAULT_PACKET_SIZE: u64 = 10_000;

    /// Machine Type I: Δ = 9.64 ms, I_R = 1.3 ms, δ = 1.23 ms.
    pub fn type_i(seed: u64) -> Self {
        SimParams {
            delta: 9_640_000,
            install_range: 1_300_000,
            sched_error: 1_230_000,
            seed,
            packet_size: Self::DEFAULT_PACKET_SIZE,
        }
    }

    /// No randomness at all: commands land exactly when sent or scheduled.
    pub fn ideal(delta: Nanos) -> Self {
        SimParams { delta, install_range: 0, sched_error: 0, seed: 0, packet_size: Self::DEFAULT_PACKET_SIZE }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SimParams { seed, ..self }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.delta < 0 || self.install_range < 0 || self.sched_error < 0 {
            return Err(SimError::Params("durations must be non-negative".into()));
        }
        if self.packet_size == 0 {
            return Err(SimError::Params("packet_size must be positive".into()));
        }
        Ok(())
    }
}

impl Default for SimParams {
    fn default() -> Self {
        Self::type_i(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimFlow {
    pub id: u32,
    pub rate: Rate,
    /// First-hop switch whose table decides the flow's egress edge.
    pub switch: usize,
    pub edge: usize,
}

/// Switches o_1..o_n in front of edges e_1..e_m, every switch reaching every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    pub switches: usize,
    pub edges: usize,
    pub capacity: Rate,
    pub flows: Vec<SimFlow>,
    /// True switch clock offsets. The controller may hold different estimates.
    pub clocks: ClockRegistry,
    /// Extra delay before a switch change reaches each edge; zero unless set.
    pub link_delay: Vec<Nanos>,
}

impl World {
    pub fn new(switches: usize, edges: usize, capacity: Rate, flows: Vec<SimFlow>) -> Self {
        World {
            switches,
            edges,
            capacity,
            flows,
            clocks: ClockRegistry::zero(switches),
            link_delay: vec![0; edges],
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.switches == 0 || self.edges == 0 {
            return Err(SimError::Params("need at least one switch and one edge".into()));
        }
        if self.capacity <= Rate::from_integer(0) {
            return Err(SimError::Params("capacity must be positive".into()));
        }
        if self.link_delay.len() != self.edges || self.link_delay.iter().any(|&d| d < 0) {
            return Err(SimError::Params("one non-negative delay per edge".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for f in &self.flows {
            if !seen.insert(f.id) {
                return Err(SimError::Params(format!("duplicate flow id {}", f.id)));
            }
            if f.switch >= self.switches {
                return Err(SimError::UnknownSwitch(f.switch));
            }
            if f.edge >= self.edges {
                return Err(SimError::Params(format!("flow {} on unknown edge {}", f.id, f.edge)));
            }
            if f.rate <= Rate::from_integer(0) {
                return Err(SimError::Params(format!("flow {} has non-positive rate", f.id)));
            }
        }
        for s in 0..self.switches {
            if self.clocks.offset(s).is_none() {
                return Err(SimError::Params(format!("no clock offset for switch {s}")));
            }
        }
        Ok(())
    }

    /// Packets per second of a flow at the given packet size.
    pub fn packet_rate(rate: &Rate, packet_size: u64) -> f64 {
        crate::ratio_f64(rate) / packet_size as f64
    }
}
