//! Round-synchronous consensus seeking between negotiating agents.
//!
//! Agents hold numeric states (a scalar or a point in the plane), observe
//! each other through a boolean connectivity matrix, and each round decide a
//! next state from a snapshot of what they can see. The crate provides the
//! decision rules observed in conversational agents (averaging, suggestible,
//! stubborn, erroneous), canonical topologies, the experiment engine with
//! seeded reproducible batches, analysis of the resulting records, and a
//! planner/controller simulation for planar multi-robot aggregation.
//!
//! Everything is generic over the floating-point scalar via [`Scalar`];
//! `*64` aliases pin the common double-precision setup.

// negated comparisons are used on purpose: they reject NaN thresholds
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregation;
pub mod analysis;
pub mod backend;
pub mod config;
pub mod engine;
pub mod io;
pub mod scalar;
pub mod seed;
pub mod state;
pub mod strategy;
pub mod topology;

pub use backend::{AgentBackend, BackendError, BackendFactory, Decision, StrategyOnlyFactory};
pub use config::{BackendSpec, ExperimentConfig, LlmSessionConfig, Personality};
pub use scalar::Scalar;
pub use state::{Dimension, State};
pub use strategy::{Observation, StrategyKind, StrategySpec};
pub use topology::{ConnectivityMatrix, TopologySpec};

pub type State64 = state::State<f64>;
pub type Observation64 = strategy::Observation<f64>;
pub type StrategySpec64 = strategy::StrategySpec<f64>;
pub type BackendSpec64 = config::BackendSpec<f64>;
pub type ExperimentConfig64 = config::ExperimentConfig<f64>;
pub type ExperimentRecord64 = engine::ExperimentRecord<f64>;
pub type AggregationConfig64 = aggregation::AggregationConfig<f64>;
pub type TrajectoryPoint64 = aggregation::TrajectoryPoint<f64>;
