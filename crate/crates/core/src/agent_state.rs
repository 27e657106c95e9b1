//! Recursively updateable agent-state machines z' = φ(z, y', a).
//!
//! An agent state is a model-free summary of the observation/action history:
//! it starts at z₀ and is updated through a fixed deterministic table. The
//! standard constructions are the observation identity (z = y) and sliding
//! windows over the last k observations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::Result;

/// Cap on |Z| for generated machines (windows grow as (|Y|+1)^k).
pub const MAX_AGENT_STATES: usize = 1 << 20;

/// How the first agent state z₁ is derived from the first observation.
///
/// The recursion z' = φ(z, y', a) only fires from the second observation
/// on; the very first one needs a convention, which each construction picks
/// for itself. Any fixed choice washes out in the limiting distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FirstStateRule {
    /// z₁ = z₀ as declared; the first observation is not consumed.
    InitState,
    /// z₁ = y₁ (observation-identity machines).
    FirstObservation,
    /// z₁ = shift of the all-padding tuple by y₁ (window machines; the
    /// update ignores the action, so this is well defined).
    WindowShift,
}

/// Deterministic finite agent-state machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentStateMachine {
    num_agent_states: usize,
    num_obs: usize,
    num_actions: usize,
    init_state: usize,
    /// φ flat over (z, y', a).
    table: Vec<usize>,
    first_rule: FirstStateRule,
}

impl AgentStateMachine {
    /// Machine from an explicit φ table, flat over (z, y', a).
    ///
    /// Every entry must be a valid state index. z₁ is taken to be
    /// `init_state` (the first observation is not consumed).
    pub fn from_table(
        num_agent_states: usize,
        num_obs: usize,
        num_actions: usize,
        init_state: usize,
        table: Vec<usize>,
    ) -> Result<Self> {
        if num_agent_states == 0 {
            return Err(Error::InvalidModel("empty agent-state space"));
        }
        if table.len() != num_agent_states * num_obs * num_actions {
            return Err(Error::DimensionMismatch {
                what: "agent-state table",
                expected: num_agent_states * num_obs * num_actions,
                got: table.len(),
            });
        }
        if init_state >= num_agent_states {
            return Err(Error::IndexOutOfRange {
                what: "initial agent state",
                index: init_state,
                bound: num_agent_states,
            });
        }
        for &z2 in &table {
            if z2 >= num_agent_states {
                return Err(Error::IndexOutOfRange {
                    what: "agent-state table entry",
                    index: z2,
                    bound: num_agent_states,
                });
            }
        }
        Ok(AgentStateMachine {
            num_agent_states,
            num_obs,
            num_actions,
            init_state,
            table,
            first_rule: FirstStateRule::InitState,
        })
    }

    /// The observation-identity machine: |Z| = |Y| and φ(z, y', a) = y'.
    pub fn observation_state(num_obs: usize, num_actions: usize) -> Self {
        let mut table = vec![0; num_obs * num_obs * num_actions];
        for z in 0..num_obs {
            for y2 in 0..num_obs {
                for a in 0..num_actions {
                    table[(z * num_obs + y2) * num_actions + a] = y2;
                }
            }
        }
        AgentStateMachine {
            num_agent_states: num_obs,
            num_obs,
            num_actions,
            init_state: 0,
            table,
            first_rule: FirstStateRule::FirstObservation,
        }
    }

    /// Sliding window over the last `k` observations.
    ///
    /// States enumerate k-tuples over the observation alphabet extended with
    /// a padding symbol for the slots not yet filled, so |Z| = (|Y|+1)^k;
    /// z₀ is the all-padding tuple. φ drops the oldest slot and appends y'
    /// (actions are ignored). Fails when (|Y|+1)^k exceeds
    /// [`MAX_AGENT_STATES`].
    ///
    /// Tuple encoding: slot 0 (least significant digit, base |Y|+1) holds
    /// the most recent observation; the padding symbol is the digit |Y|.
    pub fn sliding_window(num_obs: usize, num_actions: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter {
                what: "window length",
                value: 0.0,
            });
        }
        let base = num_obs + 1;
        let mut num_states: usize = 1;
        for _ in 0..k {
            num_states = num_states.checked_mul(base).ok_or(Error::SizeOverflow {
                requested: usize::MAX,
                cap: MAX_AGENT_STATES,
            })?;
            if num_states > MAX_AGENT_STATES {
                return Err(Error::SizeOverflow {
                    requested: num_states,
                    cap: MAX_AGENT_STATES,
                });
            }
        }
        // all-padding tuple: every digit equals num_obs
        let mut init = 0;
        for _ in 0..k {
            init = init * base + num_obs;
        }
        let shift_modulus = num_states / base; // base^(k-1)
        let mut table = vec![0; num_states * num_obs * num_actions];
        for z in 0..num_states {
            for y2 in 0..num_obs {
                let z2 = (z % shift_modulus) * base + y2;
                for a in 0..num_actions {
                    table[(z * num_obs + y2) * num_actions + a] = z2;
                }
            }
        }
        Ok(AgentStateMachine {
            num_agent_states: num_states,
            num_obs,
            num_actions,
            init_state: init,
            table,
            first_rule: FirstStateRule::WindowShift,
        })
    }

    pub fn num_agent_states(&self) -> usize {
        self.num_agent_states
    }

    pub fn num_obs(&self) -> usize {
        self.num_obs
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn init_state(&self) -> usize {
        self.init_state
    }

    /// φ(z, y', a).
    pub fn update(&self, z: usize, y2: usize, a: usize) -> Result<usize> {
        if z >= self.num_agent_states {
            return Err(Error::IndexOutOfRange {
                what: "agent state",
                index: z,
                bound: self.num_agent_states,
            });
        }
        if y2 >= self.num_obs {
            return Err(Error::IndexOutOfRange {
                what: "observation",
                index: y2,
                bound: self.num_obs,
            });
        }
        if a >= self.num_actions {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: a,
                bound: self.num_actions,
            });
        }
        Ok(self.update_unchecked(z, y2, a))
    }

    #[inline(always)]
    pub(crate) fn update_unchecked(&self, z: usize, y2: usize, a: usize) -> usize {
        self.table[(z * self.num_obs + y2) * self.num_actions + a]
    }

    /// The first agent state z₁, given the first observation y₁ (see
    /// [`FirstStateRule`] for the per-construction conventions).
    pub fn first_state(&self, y1: usize) -> Result<usize> {
        if y1 >= self.num_obs {
            return Err(Error::IndexOutOfRange {
                what: "observation",
                index: y1,
                bound: self.num_obs,
            });
        }
        Ok(match self.first_rule {
            FirstStateRule::InitState => self.init_state,
            FirstStateRule::FirstObservation => y1,
            FirstStateRule::WindowShift => self.update_unchecked(self.init_state, y1, 0),
        })
    }
}
