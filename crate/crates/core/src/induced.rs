//! The behavior-induced MDP on the agent state, and its regularized fixed
//! points — the provable limits of the learning iterations.
//!
//! Averaging the true model under the limiting conditional ζ(s | z) yields
//! an ordinary MDP on Z:
//!
//! ```text
//! r_ind(z, a)    = Σ_s r(s, a) ζ(s | z)
//! p_ind(z'|z, a) = Σ_{s, y'} 1{z' = φ(z, y', a)} P(y' | s, a) ζ(s | z)
//! ```
//!
//! The regularized Bellman operator on this MDP,
//! `B Q(z,a) = r_ind(z,a) + γ Σ_{z'} p_ind(z'|z,a) Ω*(Q(z',·))`, is a
//! γ-contraction in sup norm; its unique fixed point is what the online
//! iteration converges to. The periodic variant couples L such operators
//! through the next phase's value function.

use alloc::vec;
use alloc::vec::Vec;

use crate::agent_state::AgentStateMachine;
use crate::error::Error;
use crate::mat::Mat;
use crate::math::slice_max;
use crate::model::PomdpModel;
use crate::occupancy::JointDistribution;
use crate::regularizer::PolicyRegularizer;
use crate::Result;

/// Real-valued table over Z×A.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: Mat,
}

impl QTable {
    /// All-zero table.
    pub fn zeros(num_agent_states: usize, num_actions: usize) -> Self {
        QTable {
            values: Mat::zeros(num_agent_states, num_actions),
        }
    }

    pub fn from_mat(values: Mat) -> Self {
        QTable { values }
    }

    pub fn num_agent_states(&self) -> usize {
        self.values.rows()
    }

    pub fn num_actions(&self) -> usize {
        self.values.cols()
    }

    pub fn at(&self, z: usize, a: usize) -> f64 {
        self.values.at(z, a)
    }

    pub fn set(&mut self, z: usize, a: usize, v: f64) {
        self.values.set(z, a, v);
    }

    pub fn row(&self, z: usize) -> &[f64] {
        self.values.row(z)
    }

    pub fn table(&self) -> &Mat {
        &self.values
    }

    /// ℓ∞ distance to another table.
    pub fn sup_dist(&self, other: &QTable) -> f64 {
        self.values.sup_dist(&other.values)
    }
}

/// MDP on the agent state induced by a behavior policy's limiting
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedMdp {
    /// r_ind(z, a).
    reward: Mat,
    /// p_ind flat over rows (z·|A| + a), columns z'.
    transition: Mat,
    discount: f64,
}

impl InducedMdp {
    pub fn num_agent_states(&self) -> usize {
        self.reward.rows()
    }

    pub fn num_actions(&self) -> usize {
        self.reward.cols()
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn reward(&self, z: usize, a: usize) -> f64 {
        self.reward.at(z, a)
    }

    pub fn reward_table(&self) -> &Mat {
        &self.reward
    }

    /// p_ind(z' | z, a).
    pub fn transition(&self, z: usize, a: usize, z2: usize) -> f64 {
        self.transition.at(z * self.num_actions() + a, z2)
    }

    /// The row p_ind(· | z, a).
    pub fn transition_row(&self, z: usize, a: usize) -> &[f64] {
        self.transition.row(z * self.num_actions() + a)
    }
}

/// Builds the induced MDP from a fully supported limiting distribution.
///
/// Every transition row is verified stochastic to 1e-10. Fails with
/// [`Error::ZeroVisit`] when some agent state has no limiting mass; see
/// [`build_induced_mdp_partial`] for the override.
pub fn build_induced_mdp(
    model: &PomdpModel,
    asm: &AgentStateMachine,
    zeta: &JointDistribution,
) -> Result<InducedMdp> {
    build_inner(model, asm, zeta, false)
}

/// [`build_induced_mdp`] for partially supported limits: agent states with
/// no mass get a zero reward and a self-loop (their rows are meaningless
/// and the caller is expected to mask them via the distribution's support
/// flags).
pub fn build_induced_mdp_partial(
    model: &PomdpModel,
    asm: &AgentStateMachine,
    zeta: &JointDistribution,
) -> Result<InducedMdp> {
    build_inner(model, asm, zeta, true)
}

fn build_inner(
    model: &PomdpModel,
    asm: &AgentStateMachine,
    zeta: &JointDistribution,
    allow_partial: bool,
) -> Result<InducedMdp> {
    let dims = zeta.dims();
    if dims.num_states != model.num_states()
        || dims.num_obs != model.num_obs()
        || dims.num_actions != model.num_actions()
        || dims.num_agent_states != asm.num_agent_states()
    {
        return Err(Error::DimensionMismatch {
            what: "limiting distribution dims",
            expected: model.num_states(),
            got: dims.num_states,
        });
    }
    let (nz, na, ns, ny) = (
        dims.num_agent_states,
        dims.num_actions,
        dims.num_states,
        dims.num_obs,
    );

    let mut reward = Mat::zeros(nz, na);
    let mut transition = Mat::zeros(nz * na, nz);
    let sz = zeta.marginal_sz();

    for z in 0..nz {
        let zmass: f64 = (0..ns).map(|s| sz.at(s, z)).sum();
        if !zeta.z_supported(z) {
            if !allow_partial {
                return Err(Error::ZeroVisit { phase: None, z, a: 0 });
            }
            for a in 0..na {
                transition.set(z * na + a, z, 1.0);
            }
            continue;
        }
        // ζ(s | z)
        let cond: Vec<f64> = (0..ns).map(|s| sz.at(s, z) / zmass).collect();
        for a in 0..na {
            let mut r = 0.0;
            for (s, &w) in cond.iter().enumerate() {
                if w > 0.0 {
                    r += model.reward(s, a) * w;
                }
            }
            reward.set(z, a, r);
            for y2 in 0..ny {
                let z2 = asm.update_unchecked(z, y2, a);
                let mut p = 0.0;
                for (s, &w) in cond.iter().enumerate() {
                    if w > 0.0 {
                        p += model.obs_marginal(s, a, y2) * w;
                    }
                }
                transition.add_at(z * na + a, z2, p);
            }
        }
    }

    for row in 0..nz * na {
        let sum: f64 = transition.row(row).iter().sum();
        if crate::math::abs(sum - 1.0) > 1e-10 {
            return Err(Error::NotADistribution {
                what: "induced transition row",
                sum,
            });
        }
    }

    Ok(InducedMdp {
        reward,
        transition,
        discount: model.discount(),
    })
}

/// Builds one induced MDP per phase from the periodic limiting family.
pub fn build_periodic_induced(
    model: &PomdpModel,
    asm: &AgentStateMachine,
    zetas: &[JointDistribution],
) -> Result<Vec<InducedMdp>> {
    zetas
        .iter()
        .map(|z| build_induced_mdp(model, asm, z))
        .collect()
}

/// One application of the regularized Bellman operator.
pub fn bellman_apply(
    q: &QTable,
    mdp: &InducedMdp,
    reg: &dyn PolicyRegularizer,
) -> Result<QTable> {
    check_shape(q, mdp)?;
    let nz = mdp.num_agent_states();
    let na = mdp.num_actions();
    let mut values: Vec<f64> = Vec::with_capacity(nz);
    for z2 in 0..nz {
        values.push(reg.conjugate(q.row(z2))?);
    }
    Ok(backup(mdp, &values, nz, na))
}

/// One application of the unregularized (max-bootstrap) Bellman operator.
pub fn bellman_apply_max(q: &QTable, mdp: &InducedMdp) -> Result<QTable> {
    check_shape(q, mdp)?;
    let nz = mdp.num_agent_states();
    let na = mdp.num_actions();
    let values: Vec<f64> = (0..nz).map(|z2| slice_max(q.row(z2))).collect();
    Ok(backup(mdp, &values, nz, na))
}

fn check_shape(q: &QTable, mdp: &InducedMdp) -> Result<()> {
    if q.num_agent_states() != mdp.num_agent_states() || q.num_actions() != mdp.num_actions() {
        return Err(Error::DimensionMismatch {
            what: "q-table shape",
            expected: mdp.num_agent_states() * mdp.num_actions(),
            got: q.num_agent_states() * q.num_actions(),
        });
    }
    Ok(())
}

fn backup(mdp: &InducedMdp, next_values: &[f64], nz: usize, na: usize) -> QTable {
    let mut out = QTable::zeros(nz, na);
    for z in 0..nz {
        for a in 0..na {
            let row = mdp.transition_row(z, a);
            let mut acc = 0.0;
            for (z2, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    acc += p * next_values[z2];
                }
            }
            out.set(z, a, mdp.reward(z, a) + mdp.discount() * acc);
        }
    }
    out
}

/// Sweep budget sufficient for value iteration from zero to reach `tol`:
/// γ^k · R_span / (1 − γ) ≤ tol.
fn sweep_bound(discount: f64, reward_span: f64, tol: f64) -> usize {
    if discount <= 0.0 {
        return 1;
    }
    let span = reward_span.max(1.0);
    let k = crate::math::ln(tol * (1.0 - discount) / span) / crate::math::ln(discount);
    (k.max(1.0) as usize).saturating_add(8)
}

enum Backup<'a> {
    Regularized(&'a dyn PolicyRegularizer),
    Max,
}

fn solve_single(mdp: &InducedMdp, op: &Backup<'_>, tol: f64, max_iter: usize) -> Result<QTable> {
    let nz = mdp.num_agent_states();
    let na = mdp.num_actions();
    let mut q = QTable::zeros(nz, na);
    let mut values = vec![0.0; nz];
    let mut last_residual = f64::INFINITY;
    for _ in 0..max_iter {
        for z2 in 0..nz {
            values[z2] = match op {
                Backup::Regularized(reg) => reg.conjugate(q.row(z2))?,
                Backup::Max => slice_max(q.row(z2)),
            };
        }
        let next = backup(mdp, &values, nz, na);
        last_residual = next.sup_dist(&q);
        q = next;
        if last_residual <= tol {
            return Ok(q);
        }
    }
    Err(Error::MaxIterExceeded {
        max_iter,
        residual: last_residual,
    })
}

/// The regularized fixed point Q with ‖BQ − Q‖∞ ≤ `tol`, by value
/// iteration from the zero table.
///
/// Value iteration from zero terminates within the analytic sweep bound;
/// `max_iter` only guards against a numerics bug.
pub fn solve_fixed_point(
    mdp: &InducedMdp,
    reg: &dyn PolicyRegularizer,
    tol: f64,
    max_iter: usize,
) -> Result<QTable> {
    solve_single(mdp, &Backup::Regularized(reg), tol, max_iter)
}

/// The unregularized (max-bootstrap) fixed point; the comparison baseline.
pub fn solve_fixed_point_max(mdp: &InducedMdp, tol: f64, max_iter: usize) -> Result<QTable> {
    solve_single(mdp, &Backup::Max, tol, max_iter)
}

/// A generous default sweep budget for the given MDP and tolerance.
pub fn default_max_iter(mdp: &InducedMdp, tol: f64) -> usize {
    let mut span = 0.0f64;
    for &r in mdp.reward_table().as_slice() {
        let a = crate::math::abs(r);
        if a > span {
            span = a;
        }
    }
    sweep_bound(mdp.discount(), 2.0 * span + 1.0, tol) * 4
}

/// Solves the coupled periodic fixed points {Q^ℓ}: synchronous sweeps of
/// Q^ℓ ← r^ℓ + γ P^ℓ V^{⟨ℓ+1⟩} with V^m(z) = Ω*(Q^m(z, ·)), until the
/// largest per-phase sweep change is ≤ `tol`.
///
/// Each returned table is additionally certified as a fixed point of its
/// composed operator B^ℓ B^{⟨ℓ+1⟩} ⋯ B^{⟨ℓ+L−1⟩} with residual ≤ L·`tol`.
pub fn solve_periodic_fixed_point(
    mdps: &[InducedMdp],
    reg: &dyn PolicyRegularizer,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<QTable>> {
    let period = mdps.len();
    if period == 0 {
        return Err(Error::InvalidModel("empty periodic MDP family"));
    }
    let nz = mdps[0].num_agent_states();
    let na = mdps[0].num_actions();
    for m in mdps {
        if m.num_agent_states() != nz || m.num_actions() != na {
            return Err(Error::DimensionMismatch {
                what: "periodic MDP phase shape",
                expected: nz * na,
                got: m.num_agent_states() * m.num_actions(),
            });
        }
    }

    let mut tables: Vec<QTable> = (0..period).map(|_| QTable::zeros(nz, na)).collect();
    let mut values = vec![0.0; nz];
    let mut last_residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max_iter {
        let mut next = Vec::with_capacity(period);
        for (l, mdp) in mdps.iter().enumerate() {
            let bootstrap = &tables[(l + 1) % period];
            for z2 in 0..nz {
                values[z2] = reg.conjugate(bootstrap.row(z2))?;
            }
            next.push(backup(mdp, &values, nz, na));
        }
        last_residual = next
            .iter()
            .zip(&tables)
            .map(|(a, b)| a.sup_dist(b))
            .fold(0.0, f64::max);
        tables = next;
        if last_residual <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::MaxIterExceeded {
            max_iter,
            residual: last_residual,
        });
    }

    // Composed-operator certification: applying B^ℓ B^{⟨ℓ+1⟩} ⋯ B^{⟨ℓ+L−1⟩}
    // (innermost last) to Q^ℓ must return Q^ℓ.
    for l in 0..period {
        let mut composed = tables[l].clone();
        for step in (0..period).rev() {
            let phase = (l + step) % period;
            for z2 in 0..nz {
                values[z2] = reg.conjugate(composed.row(z2))?;
            }
            composed = backup(&mdps[phase], &values, nz, na);
        }
        let res = composed.sup_dist(&tables[l]);
        if res > period as f64 * tol {
            return Err(Error::MaxIterExceeded {
                max_iter,
                residual: res,
            });
        }
    }

    Ok(tables)
}
