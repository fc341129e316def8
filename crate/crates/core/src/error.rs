use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors raised by graph construction, state evaluation and simulation.
///
/// Node and agent indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidNodeCount(usize),
    SelfLoop { node: usize },
    NodeOutOfRange { a: usize, b: usize, n: usize },
    DuplicateEdge { a: usize, b: usize },
    InvalidWeight { a: usize, b: usize, weight: f64 },
    DimensionMismatch { expected: usize, found: usize },
    AgentCountMismatch { expected: usize, found: usize },
    MissingNeighborState { agent: usize, neighbor: usize },
    Disconnected { lambda2: f64 },
    Undeclared(&'static str),
    InvalidIntegrator(String),
    InvalidGains(String),
    InitialCondition(String),
    NonFinite { agent: usize, t: f64 },
    TooFewSamples { required: usize, got: usize },
    InvalidWindow(String),
    Validation(Vec<String>),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidNodeCount(n) => write!(f, "graph needs at least one node, got {n}"),
            Error::SelfLoop { node } => write!(f, "self-loop on node {node}"),
            Error::NodeOutOfRange { a, b, n } => {
                write!(f, "edge ({a}, {b}) references a node outside 0..{n}")
            }
            Error::DuplicateEdge { a, b } => write!(f, "duplicate edge ({a}, {b})"),
            Error::InvalidWeight { a, b, weight } => {
                write!(
                    f,
                    "edge ({a}, {b}) has weight {weight}; only unit weights are supported"
                )
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::AgentCountMismatch { expected, found } => {
                write!(
                    f,
                    "agent count mismatch: graph has {expected} nodes, state has {found}"
                )
            }
            Error::MissingNeighborState { agent, neighbor } => {
                write!(f, "agent {agent}: no filter state for neighbor {neighbor}")
            }
            Error::Disconnected { lambda2 } => {
                write!(f, "graph is not connected (lambda_2 = {lambda2:e})")
            }
            Error::Undeclared(what) => write!(f, "dynamics does not declare {what}"),
            Error::InvalidIntegrator(msg) => write!(f, "invalid integrator: {msg}"),
            Error::InvalidGains(msg) => write!(f, "invalid gains: {msg}"),
            Error::InitialCondition(msg) => write!(f, "invalid initial condition: {msg}"),
            Error::NonFinite { agent, t } => {
                write!(f, "non-finite state for agent {agent} at t = {t}")
            }
            Error::TooFewSamples { required, got } => {
                write!(f, "need at least {required} samples, got {got}")
            }
            Error::InvalidWindow(msg) => write!(f, "invalid fit window: {msg}"),
            Error::Validation(violations) => {
                write!(f, "{} validation failure(s)", violations.len())?;
                for v in violations {
                    write!(f, "\n  - {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for Error {}
