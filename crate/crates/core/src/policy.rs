//! Agent-state-based stochastic policies, stationary and periodic.

use alloc::vec::Vec;

use crate::error::Error;
use crate::mat::Mat;
use crate::math::abs;
use crate::regularizer::PolicyRegularizer;
use crate::rng::RngStream;
use crate::QTable;
use crate::Result;

/// Tolerance for policy rows summing to one.
pub const ROW_TOL: f64 = 1e-12;

/// Stationary policy π(a | z): one probability row per agent state.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    probs: Mat,
}

impl Policy {
    /// Policy from a |Z|×|A| table; every row must be a probability vector
    /// (entries ≥ 0, sum within [`ROW_TOL`] of one).
    pub fn new(probs: Mat) -> Result<Self> {
        for z in 0..probs.rows() {
            let mut sum = 0.0;
            for &p in probs.row(z) {
                if !p.is_finite() {
                    return Err(Error::NonFiniteInput("policy row"));
                }
                if p < 0.0 {
                    return Err(Error::NegativeMass {
                        what: "policy entry",
                        value: p,
                    });
                }
                sum += p;
            }
            if abs(sum - 1.0) > ROW_TOL {
                return Err(Error::NotADistribution {
                    what: "policy row",
                    sum,
                });
            }
        }
        Ok(Policy { probs })
    }

    /// Uniform policy over `num_actions` for every agent state.
    pub fn uniform(num_agent_states: usize, num_actions: usize) -> Self {
        let p = 1.0 / num_actions as f64;
        let mut m = Mat::zeros(num_agent_states, num_actions);
        for z in 0..num_agent_states {
            for a in 0..num_actions {
                m.set(z, a, p);
            }
        }
        Policy { probs: m }
    }

    pub fn num_agent_states(&self) -> usize {
        self.probs.rows()
    }

    pub fn num_actions(&self) -> usize {
        self.probs.cols()
    }

    /// π(a | z).
    #[inline(always)]
    pub fn prob(&self, z: usize, a: usize) -> f64 {
        self.probs.at(z, a)
    }

    /// The row π(· | z).
    #[inline(always)]
    pub fn row(&self, z: usize) -> &[f64] {
        self.probs.row(z)
    }

    pub fn table(&self) -> &Mat {
        &self.probs
    }

    /// Draw a ~ π(· | z).
    pub fn sample_action(&self, z: usize, rng: &mut RngStream) -> Result<usize> {
        if z >= self.probs.rows() {
            return Err(Error::IndexOutOfRange {
                what: "agent state",
                index: z,
                bound: self.probs.rows(),
            });
        }
        rng.sample_index(self.probs.row(z))
    }
}

/// Periodic policy: L stationary tables cycled over time.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPolicy {
    phases: Vec<Policy>,
}

impl PeriodicPolicy {
    /// Periodic policy from its per-phase tables; L ≥ 1 and all phases must
    /// agree on dimensions.
    pub fn new(phases: Vec<Policy>) -> Result<Self> {
        let first = phases.first().ok_or(Error::InvalidModel("empty periodic policy"))?;
        let (nz, na) = (first.num_agent_states(), first.num_actions());
        for p in &phases {
            if p.num_agent_states() != nz || p.num_actions() != na {
                return Err(Error::DimensionMismatch {
                    what: "periodic policy phase",
                    expected: nz * na,
                    got: p.num_agent_states() * p.num_actions(),
                });
            }
        }
        Ok(PeriodicPolicy { phases })
    }

    /// A stationary policy as the L = 1 case.
    pub fn stationary(policy: Policy) -> Self {
        PeriodicPolicy {
            phases: alloc::vec![policy],
        }
    }

    pub fn period(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[Policy] {
        &self.phases
    }

    /// The phase index of time step `t ≥ 1`: (t − 1) mod L, so t = 1 belongs
    /// to phase 0.
    pub fn phase_index(&self, t: u64) -> usize {
        ((t - 1) % self.phases.len() as u64) as usize
    }

    /// The policy used at time step `t ≥ 1`.
    pub fn phase_policy(&self, t: u64) -> &Policy {
        &self.phases[self.phase_index(t)]
    }
}

/// The greedy policy of a Q-table under a regularizer: row z is
/// ∇Ω*(Q(z, ·)), strictly interior (hence stochastic).
pub fn greedy_policy(q: &QTable, reg: &dyn PolicyRegularizer) -> Result<Policy> {
    let mut probs = Mat::zeros(q.num_agent_states(), q.num_actions());
    for z in 0..q.num_agent_states() {
        let row = reg.grad_conjugate(q.row(z))?;
        probs.row_mut(z).copy_from_slice(&row);
    }
    Ok(Policy { probs })
}
