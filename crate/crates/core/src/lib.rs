//! Simulation and bound evaluation for K-typed countable-armed bandits.
//!
//! Arms are drawn from an infinite reservoir in which every arm carries one
//! of `K` hidden types. The crate provides the reservoir model, the
//! explore-then-commit and nested-UCB policies with their baselines, a
//! deterministic parallel experiment engine, and evaluators for the
//! constants appearing in the regret bounds.

pub mod bounds;
pub mod engine;
pub mod error;
pub mod policies;
pub mod reservoir;
pub mod seed;

pub use engine::{
    run_episode, run_experiment, AggregateCurve, EpisodeResult, ExperimentOutput, ExperimentPlan,
    NamedPolicy, RawRecord,
};
pub use error::{CabError, Result};
pub use policies::{Policy, PolicyAction, PolicyConfig};
pub use reservoir::{ReservoirSpec, RewardFamily};
