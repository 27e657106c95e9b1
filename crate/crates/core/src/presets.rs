//! The bundled four-state benchmark POMDP and its behavior policies.
//!
//! A small partially observed chain: four hidden states, two actions, and a
//! binary observation that collapses states {0, 3} to y = 0 and {1, 2} to
//! y = 1. Rewards are pre-scaled by (1 − γ). The agent state is the current
//! observation, which is deliberately *not* an information state — exactly
//! the regime where the induced-MDP limit is interesting.

use alloc::vec;
use alloc::vec::Vec;

use crate::agent_state::AgentStateMachine;
use crate::mat::Mat;
use crate::model::PomdpModel;
use crate::policy::{PeriodicPolicy, Policy};

/// Discount factor of the benchmark.
pub const PAPER_DISCOUNT: f64 = 0.9;

/// Entropy inverse temperature used by the benchmark experiments.
pub const PAPER_BETA: f64 = 1.0;

/// The benchmark POMDP: |S| = 4, |A| = 2, |Y| = 2, γ = 0.9,
/// ρ = [0.3, 0, 0.2, 0.5].
pub fn paper_pomdp() -> PomdpModel {
    let scale = 1.0 - PAPER_DISCOUNT;
    let reward = Mat::from_rows(&[
        vec![scale * 0.6, scale * 0.1],
        vec![scale * 0.0, scale * -0.3],
        vec![scale * 0.5, scale * -0.2],
        vec![scale * -0.3, scale * 0.5],
    ]);
    let p0 = Mat::from_rows(&[
        vec![0.0, 0.6, 0.4, 0.0],
        vec![0.8, 0.0, 0.2, 0.0],
        vec![0.7, 0.3, 0.0, 0.0],
        vec![0.2, 0.0, 0.0, 0.8],
    ]);
    let p1 = Mat::from_rows(&[
        vec![0.8, 0.2, 0.0, 0.0],
        vec![0.4, 0.0, 0.6, 0.0],
        vec![0.0, 0.8, 0.2, 0.0],
        vec![0.1, 0.7, 0.2, 0.0],
    ]);
    let observation_map = paper_observation_map();
    PomdpModel::from_factored(
        &[p0, p1],
        &observation_map,
        2,
        reward,
        PAPER_DISCOUNT,
        vec![0.3, 0.0, 0.2, 0.5],
    )
    .expect("benchmark model is valid")
}

/// o(s): states {0, 3} emit 0, states {1, 2} emit 1.
pub fn paper_observation_map() -> Vec<usize> {
    vec![0, 1, 1, 0]
}

/// The benchmark agent state: the current observation (z = y).
pub fn paper_agent_state() -> AgentStateMachine {
    AgentStateMachine::observation_state(2, 2)
}

/// The stationary behavior policy π̄(a | z) = [[0.2, 0.8], [0.8, 0.2]].
pub fn paper_behavior_policy() -> Policy {
    Policy::new(Mat::from_rows(&[vec![0.2, 0.8], vec![0.8, 0.2]]))
        .expect("benchmark policy is valid")
}

/// The period-2 behavior policy: phase 0 as above, phase 1 mirrored.
pub fn paper_periodic_policy() -> PeriodicPolicy {
    let phase0 = paper_behavior_policy();
    let phase1 = Policy::new(Mat::from_rows(&[vec![0.8, 0.2], vec![0.2, 0.8]]))
        .expect("benchmark policy is valid");
    PeriodicPolicy::new(vec![phase0, phase1]).expect("two equal-shaped phases")
}
