//! Event-driven simulation of timed and untimed flow-table updates.
//!
//! Time is integer nanoseconds of controller time. Rates are exact rationals in bits per
//! second, so a simultaneous swap between two lossless states integrates to exactly zero loss.
//! Loss is fluid: an edge carrying more than its capacity drops the excess, shared among its
//! flows in proportion to their rates.

pub mod clock;
pub mod engine;
pub mod plan;
pub mod strategies;
pub mod sweep;
pub mod timeline;
pub mod video;
pub mod world;

pub use clock::ClockRegistry;
pub use engine::{run, LossReport};
pub use plan::{schedule_timed_update, Command, Plan, TimedUpdate};
pub use strategies::{compile, Compiled, Move, StrategyConfig, StrategyKind, SwapIntent};
pub use sweep::{summarize, sweep, Summary, SweepPoint, SweepRow};
pub use timeline::{fluid_loss, LoadTimeline};
pub use video::{video_samples, video_swap, VideoSample};
pub use world::{SimFlow, SimParams, World};

use num_rational::Ratio;

/// Controller time in nanoseconds.
pub type Nanos = i64;

/// Bits per second.
pub type Rate = Ratio<i64>;

/// A dimensionless share such as a scratch or reduction fraction.
pub type Fraction = Ratio<i64>;

pub const NANOS_PER_MS: Nanos = 1_000_000;
pub const NANOS_PER_SEC: Nanos = 1_000_000_000;

pub fn mbps(x: i64) -> Rate {
    Rate::from_integer(x * 1_000_000)
}

pub use time4_core::to_f64 as ratio_f64;

pub fn ms(x: Nanos) -> f64 {
    x as f64 / NANOS_PER_MS as f64
}

/// Milliseconds to nanoseconds, rounded to the nearest nanosecond.
pub fn from_ms(x: f64) -> Nanos {
    (x * NANOS_PER_MS as f64).round() as Nanos
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("malformed plan: {0}")]
    Plan(String),
    #[error("unknown switch {0}")]
    UnknownSwitch(usize),
    #[error("unknown flow {0}")]
    UnknownFlow(u32),
    #[error("intent rejected: {0}")]
    Intent(String),
    #[error(transparent)]
    Lfa(#[from] time4_core::LfaError),
}

/// Mixes a run seed with a stream index (splitmix64 finalizer).
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
