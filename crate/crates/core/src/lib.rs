//! Distributed average tracking for second-order agents with a shared
//! nonlinear term, coupled over a fixed undirected graph.
//!
//! Two protocol variants are provided:
//!
//! * [`Variant::Lipschitz`]: a non-smooth local filter with state-dependent
//!   gain `psi_i = |r_i|_1 + |v^r_i|_1 + gamma` plus a tracking controller whose
//!   gain grows with the agent's distance to its own reference. Works when the
//!   nonlinearity is Lipschitz (and possibly unbounded).
//! * [`Variant::Bounded`]: a simplified filter/controller with constant gains
//!   for nonlinearities bounded in 1-norm, relying on zero-sum filter
//!   initialization.
//!
//! The crate is `no_std` (with `alloc`) and contains no IO. Scenario files, CSV
//! output and the command line live in the `dat-sim` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
mod error;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod protocol;
pub mod simulator;
pub mod state;
pub mod vector;

pub use dynamics::{DynamicsKind, DynamicsSpec, SampleBox};
pub use error::Error;
pub use graph::{Graph, GraphFamily};
pub use linalg::DenseMatrix;
pub use metrics::{DecayFit, MetricsRecord, TrajectoryLog};
pub use protocol::{GainSetBounded, GainSetLipschitz, Gains, SignumPolicy};
pub use simulator::{IntegratorConfig, Problem, Scheme, Variant};
pub use state::{StateDerivative, SystemState};

pub type Result<T> = core::result::Result<T, Error>;
