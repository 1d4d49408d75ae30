//! Game-theoretic engine for multi-user mobile computation offloading.
//!
//! Users sharing one wireless channel each decide whether to run a task
//! locally or offload it to the cloud. Offloaders interfere with each other,
//! so the decisions form a potential game. The crate provides the overhead
//! model ([`model`]), equilibrium machinery ([`game`], [`homogeneous`]), a
//! slotted simulation of the decentralized update mechanism ([`mechanism`]),
//! efficiency benchmarks ([`benchmark`]) and the experiment harness
//! ([`experiments`]).

pub mod benchmark;
pub mod error;
pub mod experiments;
pub mod game;
pub mod homogeneous;
pub mod mechanism;
pub mod model;

pub use error::{Error, Result};
pub use model::{DecisionProfile, Scenario, ScenarioMeta, Threshold, UserProfile};
