//! Lossless flow allocation (LFA) as a two-player game between a traffic source and an SDN
//! controller, with exact arithmetic, the source strategies that force flow swaps, reference
//! controllers, and an exhaustive search oracle.

pub mod certify;
pub mod controller;
pub mod game;
pub mod graph;
pub mod ratio;
pub mod search;
pub mod strategy;

pub use certify::{certify, play, Certificate, Theorem, Transcript, TranscriptStep, Verdict};
pub use controller::{BestFit, Controller, ControllerPlan, FirstFit};
pub use game::{classify_update, EntryKey, Flow, FlowId, ForwardingFunction, GameState, Route, Update, UpdateKind};
pub use graph::{Edge, LfaGraph, Node};
pub use ratio::{format_ratio, parse_ratio, to_f64, Bandwidth};
pub use search::{controller_search, SearchOutcome, SearchPlan};
pub use strategy::{choose_gh, NSwapParams, SourceAction, SourceMove, Strategy};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LfaError {
    #[error("malformed node name `{0}`")]
    BadNode(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("edge {0} is not in the graph")]
    UnknownEdge(Edge),
    #[error("flow {0} does not exist")]
    UnknownFlow(FlowId),
    #[error("flow id {0} is already in use")]
    DuplicateFlow(FlowId),
    #[error("flow {id} is invalid: {reason}")]
    InvalidFlow { id: FlowId, reason: String },
    #[error("an update needs at least one assignment")]
    EmptyUpdate,
    #[error("invalid update: {0}")]
    InvalidUpdate(String),
    #[error("path of flow {flow} is broken: {reason}")]
    BrokenPath { flow: FlowId, reason: String },
    #[error("impact is defined for two-entry swaps only, got {0} entries")]
    NotTwoSwap(usize),
    #[error("operation requires the canonical layered topology")]
    NotCanonical,
    #[error("search guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("controller left the script: {0}")]
    ControllerFault(String),
    #[error("no lossless plan exists: {0}")]
    Infeasible(String),
    #[error("parse error: {0}")]
    Parse(String),
}
