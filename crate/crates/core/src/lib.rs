//! Tabular regularized agent-state Q-learning for finite POMDPs.
//!
//! The crate builds up the full pipeline around RASQL (regularized
//! agent-state-based Q-learning) and its periodic variant RePASQL:
//!
//! * [`model`] — finite POMDP models with a joint kernel P(s',y'|s,a),
//!   validation, and a seeded step simulator;
//! * [`agent_state`] — recursively updateable agent-state machines
//!   z' = φ(z, y', a) (observation identity, sliding windows, tables);
//! * [`regularizer`] — strongly convex policy regularizers Ω on the action
//!   simplex with exact conjugates Ω* and maximizer maps ∇Ω*;
//! * [`policy`] — stationary and periodic stochastic policies, plus greedy
//!   policy extraction via ∇Ω*;
//! * [`occupancy`] — the joint Markov chain over (s, y, z, a) induced by a
//!   behavior policy and its limiting distribution(s);
//! * [`induced`] — the behavior-induced MDP on the agent state and the
//!   regularized fixed points Q_π̄ (the theoretical limits of learning);
//! * [`learner`] — the online off-policy RASQL/RePASQL/ASQL iterations with
//!   Robbins-Monro learning-rate schedules;
//! * [`presets`] — the bundled four-state benchmark POMDP and its behavior
//!   policies.
//!
//! Everything is plain `f64` arithmetic over dense tables, deterministic
//! given an [`rng::RngStream`] seed, and usable without `std` (enable the
//! `libm` feature in that case; `alloc` is required).

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("either the `std` or the `libm` feature must be enabled");

extern crate alloc;

pub mod agent_state;
pub mod error;
pub mod induced;
pub mod learner;
mod mat;
mod math;
pub mod model;
pub mod occupancy;
pub mod policy;
pub mod presets;
pub mod regularizer;
pub mod rng;

pub use agent_state::AgentStateMachine;
pub use error::Error;
pub use induced::{InducedMdp, QTable};
pub use learner::{LearningRateSchedule, RunConfig, RunRecord};
pub use mat::Mat;
pub use model::PomdpModel;
pub use occupancy::{JointChain, JointDistribution, SolveOptions};
pub use policy::{PeriodicPolicy, Policy};
pub use regularizer::{Entropy, KlDivergence, PolicyRegularizer};
pub use rng::RngStream;

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;
