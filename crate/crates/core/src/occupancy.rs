//! The joint Markov chain over (s, y, z, a) induced by a behavior policy,
//! and its limiting distribution(s).
//!
//! Running an agent-state machine alongside a POMDP under a fixed behavior
//! policy makes the tuple (Sₜ, Yₜ, Zₜ, Aₜ) a Markov chain. Its limiting
//! distribution ζ is what ties the learning iteration to a well-defined
//! induced MDP on the agent state. The solver here is power iteration with
//! a running-average fallback, and every accepted answer is certified by its
//! residual plus agreement across random restarts.

use alloc::vec;
use alloc::vec::Vec;

use crate::agent_state::AgentStateMachine;
use crate::error::Error;
use crate::mat::Mat;
use crate::math::l1_dist;
use crate::model::PomdpModel;
use crate::policy::{PeriodicPolicy, Policy};
use crate::rng::RngStream;
use crate::Result;

/// Dimensions of the joint chain state (s, y, z, a).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainDims {
    pub num_states: usize,
    pub num_obs: usize,
    pub num_agent_states: usize,
    pub num_actions: usize,
}

impl ChainDims {
    pub fn len(&self) -> usize {
        self.num_states * self.num_obs * self.num_agent_states * self.num_actions
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of (s, y, z, a), row-major in that order.
    #[inline(always)]
    pub fn index(&self, s: usize, y: usize, z: usize, a: usize) -> usize {
        ((s * self.num_obs + y) * self.num_agent_states + z) * self.num_actions + a
    }
}

/// Row-stochastic transition matrix of the joint chain, with its dims.
#[derive(Debug, Clone, PartialEq)]
pub struct JointChain {
    dims: ChainDims,
    matrix: Mat,
}

impl JointChain {
    pub fn dims(&self) -> ChainDims {
        self.dims
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }
}

/// Options for the limiting-distribution solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Accepted stationarity residual ‖ζT − ζ‖₁.
    pub tol: f64,
    /// Total sweep budget per solve.
    pub max_iter: usize,
    /// When true, (z, a) pairs with zero limiting mass are flagged instead
    /// of raising [`Error::ZeroVisit`]; downstream construction then treats
    /// the limit as partial.
    pub allow_zero_visit: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-12,
            max_iter: 1_000_000,
            allow_zero_visit: false,
        }
    }
}

/// Limiting distribution of the joint chain (one phase).
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    dims: ChainDims,
    mass: Vec<f64>,
    /// ζ(z, a) above the dust threshold, the persistence-of-excitation flag.
    support: Vec<bool>,
    /// Residual ‖ζT − ζ‖₁ of the accepted answer (per-phase skeleton
    /// residual in the periodic case).
    residual: f64,
    /// Mass at or below this level counts as solver dust, not support.
    dust: f64,
}

/// Mass below this (scaled from the solver tolerance) counts as unvisited.
fn dust_level(tol: f64) -> f64 {
    (100.0 * tol).max(1e-12)
}

impl JointDistribution {
    pub fn dims(&self) -> ChainDims {
        self.dims
    }

    /// ζ(s, y, z, a).
    pub fn mass(&self, s: usize, y: usize, z: usize, a: usize) -> f64 {
        self.mass[self.dims.index(s, y, z, a)]
    }

    /// The flat mass vector, indexed by [`ChainDims::index`].
    pub fn as_slice(&self) -> &[f64] {
        &self.mass
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Per-(z, a) positivity flags, row-major (z, a).
    pub fn support_flags(&self) -> &[bool] {
        &self.support
    }

    /// True when every (z, a) has positive limiting mass.
    pub fn fully_supported(&self) -> bool {
        self.support.iter().all(|&b| b)
    }

    /// Marginal ζ(z, a) as a |Z|×|A| table.
    pub fn marginal_za(&self) -> Mat {
        let d = self.dims;
        let mut m = Mat::zeros(d.num_agent_states, d.num_actions);
        for s in 0..d.num_states {
            for y in 0..d.num_obs {
                for z in 0..d.num_agent_states {
                    for a in 0..d.num_actions {
                        m.add_at(z, a, self.mass(s, y, z, a));
                    }
                }
            }
        }
        m
    }

    /// Marginal ζ(s, z) as a |S|×|Z| table.
    pub fn marginal_sz(&self) -> Mat {
        let d = self.dims;
        let mut m = Mat::zeros(d.num_states, d.num_agent_states);
        for s in 0..d.num_states {
            for y in 0..d.num_obs {
                for z in 0..d.num_agent_states {
                    for a in 0..d.num_actions {
                        m.add_at(s, z, self.mass(s, y, z, a));
                    }
                }
            }
        }
        m
    }

    /// True when agent state `z` carries more than dust mass.
    pub fn z_supported(&self, z: usize) -> bool {
        let d = self.dims;
        let mut mass = 0.0;
        for s in 0..d.num_states {
            for y in 0..d.num_obs {
                for a in 0..d.num_actions {
                    mass += self.mass(s, y, z, a);
                }
            }
        }
        mass > self.dust
    }

    /// Conditional ζ(s | z) as a |Z|×|S| table (rows are probability
    /// vectors over s).
    ///
    /// Fails with [`Error::ZeroVisit`] for any z whose marginal mass is at
    /// dust level. Also asserts the factorization identity
    /// ζ(s | z, a) = ζ(s | z) for every supported (z, a), within 1e-8 —
    /// the property that makes the induced MDP well defined.
    pub fn conditional_s_given_z(&self) -> Result<Mat> {
        let d = self.dims;
        let sz = self.marginal_sz();
        let mut out = Mat::zeros(d.num_agent_states, d.num_states);
        for z in 0..d.num_agent_states {
            let zmass: f64 = (0..d.num_states).map(|s| sz.at(s, z)).sum();
            if zmass <= self.dust {
                return Err(Error::ZeroVisit { phase: None, z, a: 0 });
            }
            for s in 0..d.num_states {
                out.set(z, s, sz.at(s, z) / zmass);
            }
        }
        let za = self.marginal_za();
        for z in 0..d.num_agent_states {
            for a in 0..d.num_actions {
                if !self.support[z * d.num_actions + a] {
                    continue;
                }
                let pair_mass = za.at(z, a);
                for s in 0..d.num_states {
                    let joint: f64 = (0..d.num_obs).map(|y| self.mass(s, y, z, a)).sum();
                    let dev = crate::math::abs(joint / pair_mass - out.at(z, s));
                    if dev > 1e-8 {
                        return Err(Error::InvalidModel(
                            "conditional factorization violated: ζ(s|z,a) ≠ ζ(s|z)",
                        ));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Builds the joint chain transition matrix under a stationary policy.
///
/// Entry ((s,y,z,a) → (s',y',z',a')) = P(s',y' | s,a) · 1{z' = φ(z,y',a)}
/// · π(a' | z'). The policy argument generates the action at the
/// *destination* time step, which is what makes the periodic composition
/// below line up with simulated trajectories.
pub fn joint_transition(
    model: &PomdpModel,
    asm: &AgentStateMachine,
    policy: &Policy,
) -> Result<JointChain> {
    if asm.num_obs() != model.num_obs() {
        return Err(Error::DimensionMismatch {
            what: "agent-state machine observation count",
            expected: model.num_obs(),
            got: asm.num_obs(),
        });
    }
    if asm.num_actions() != model.num_actions() {
        return Err(Error::DimensionMismatch {
            what: "agent-state machine action count",
            expected: model.num_actions(),
            got: asm.num_actions(),
        });
    }
    if policy.num_agent_states() != asm.num_agent_states() {
        return Err(Error::DimensionMismatch {
            what: "policy agent-state count",
            expected: asm.num_agent_states(),
            got: policy.num_agent_states(),
        });
    }
    if policy.num_actions() != model.num_actions() {
        return Err(Error::DimensionMismatch {
            what: "policy action count",
            expected: model.num_actions(),
            got: policy.num_actions(),
        });
    }
    let dims = ChainDims {
        num_states: model.num_states(),
        num_obs: model.num_obs(),
        num_agent_states: asm.num_agent_states(),
        num_actions: model.num_actions(),
    };
    let n = dims.len();
    let mut t = Mat::zeros(n, n);
    for s in 0..dims.num_states {
        for y in 0..dims.num_obs {
            for z in 0..dims.num_agent_states {
                for a in 0..dims.num_actions {
                    let i = dims.index(s, y, z, a);
                    for s2 in 0..dims.num_states {
                        for y2 in 0..dims.num_obs {
                            let p = model.kernel(s, a, s2, y2);
                            if p == 0.0 {
                                continue;
                            }
                            let z2 = asm.update_unchecked(z, y2, a);
                            for a2 in 0..dims.num_actions {
                                let pa = policy.prob(z2, a2);
                                if pa > 0.0 {
                                    t.add_at(i, dims.index(s2, y2, z2, a2), p * pa);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(JointChain { dims, matrix: t })
}

/// A linear operator v ↦ vM given as a sequence of row-stochastic factors;
/// one factor is plain power iteration, several factors iterate the product
/// without ever materializing it.
struct ProductOp<'a> {
    factors: Vec<&'a Mat>,
    scratch: usize,
}

impl<'a> ProductOp<'a> {
    fn new(factors: Vec<&'a Mat>) -> Self {
        let scratch = factors[0].rows();
        ProductOp { factors, scratch }
    }

    fn len(&self) -> usize {
        self.scratch
    }

    fn apply(&self, v: &[f64], out: &mut [f64], tmp: &mut [f64]) {
        debug_assert!(!self.factors.is_empty());
        tmp.copy_from_slice(v);
        for m in &self.factors {
            m.vec_mul_into(tmp, out);
            tmp.copy_from_slice(out);
        }
    }
}

/// Stationary row vector of a row-stochastic matrix, by power iteration.
///
/// Starts from the uniform vector; if the sweep-to-sweep ℓ₁ change is not
/// below `tol` within `max_iter / 2` sweeps, switches to testing the
/// running (Cesàro) average for the remaining budget. The answer is
/// certified two ways: the residual ‖vT − v‖₁ ≤ `tol`, and re-solving from
/// five seeded random starts must land within 10·`tol` (ℓ₁, pairwise) of
/// the first answer — disagreement means the chain has no unique limit and
/// is reported as [`Error::NonErgodic`].
pub fn stationary_vector(t: &Mat, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = t.rows();
    if t.cols() != n {
        return Err(Error::DimensionMismatch {
            what: "transition matrix",
            expected: n,
            got: t.cols(),
        });
    }
    for i in 0..n {
        let sum: f64 = t.row(i).iter().sum();
        if crate::math::abs(sum - 1.0) > 1e-12 || t.row(i).iter().any(|&p| p < 0.0) {
            return Err(Error::NotADistribution {
                what: "transition matrix row",
                sum,
            });
        }
    }
    solve_with_restarts(&ProductOp::new(vec![t]), tol, max_iter)
}

fn solve_with_restarts(op: &ProductOp<'_>, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = op.len();
    let uniform = vec![1.0 / n as f64; n];
    let reference = power_iterate(op, uniform, tol, max_iter)?;

    let mut rng = RngStream::new(0x5EED_DA7A);
    for _ in 0..5 {
        let mut start: Vec<f64> = (0..n).map(|_| rng.next_f64() + 1e-3).collect();
        let sum: f64 = start.iter().sum();
        for x in &mut start {
            *x /= sum;
        }
        let other = power_iterate(op, start, tol, max_iter)?;
        let dist = l1_dist(&reference, &other);
        if dist > 10.0 * tol {
            return Err(Error::NonErgodic { residual: dist });
        }
    }
    Ok(reference)
}

fn power_iterate(
    op: &ProductOp<'_>,
    start: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = op.len();
    let mut v = start;
    let mut next = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let plain_budget = (max_iter / 2).max(1);
    let mut last_residual = f64::INFINITY;

    for _ in 0..plain_budget {
        op.apply(&v, &mut next, &mut tmp);
        normalize(&mut next);
        last_residual = l1_dist(&next, &v);
        core::mem::swap(&mut v, &mut next);
        if last_residual <= tol {
            return Ok(v);
        }
    }

    // Cesàro fallback: average the continuing iterates and certify the
    // average by its own residual.
    let mut avg = v.clone();
    let mut count = 1.0;
    let mut avg_image = vec![0.0; n];
    for sweep in 0..max_iter.saturating_sub(plain_budget) {
        op.apply(&v, &mut next, &mut tmp);
        normalize(&mut next);
        core::mem::swap(&mut v, &mut next);
        count += 1.0;
        for (acc, &x) in avg.iter_mut().zip(&v) {
            *acc += (x - *acc) / count;
        }
        if sweep % 8 == 0 {
            op.apply(&avg, &mut avg_image, &mut tmp);
            last_residual = l1_dist(&avg_image, &avg);
            if last_residual <= tol {
                normalize(&mut avg);
                return Ok(avg);
            }
        }
    }
    Err(Error::NonErgodic {
        residual: last_residual,
    })
}

fn normalize(v: &mut [f64]) {
    let sum: f64 = v.iter().sum();
    if sum > 0.0 {
        for x in v.iter_mut() {
            *x /= sum;
        }
    }
}

fn distribution_from_vector(
    dims: ChainDims,
    mass: Vec<f64>,
    residual: f64,
    tol: f64,
    allow_zero_visit: bool,
    phase: Option<usize>,
) -> Result<JointDistribution> {
    let dust = dust_level(tol);
    let mut support = vec![false; dims.num_agent_states * dims.num_actions];
    let mut pair_mass = vec![0.0; support.len()];
    for s in 0..dims.num_states {
        for y in 0..dims.num_obs {
            for z in 0..dims.num_agent_states {
                for a in 0..dims.num_actions {
                    pair_mass[z * dims.num_actions + a] += mass[dims.index(s, y, z, a)];
                }
            }
        }
    }
    for (flag, &m) in support.iter_mut().zip(&pair_mass) {
        *flag = m > dust;
    }
    if !allow_zero_visit {
        for z in 0..dims.num_agent_states {
            for a in 0..dims.num_actions {
                if !support[z * dims.num_actions + a] {
                    return Err(Error::ZeroVisit { phase, z, a });
                }
            }
        }
    }
    Ok(JointDistribution {
        dims,
        mass,
        support,
        residual,
        dust,
    })
}

/// Limiting distribution of a stationary-policy joint chain.
pub fn stationary_distribution(chain: &JointChain, opts: SolveOptions) -> Result<JointDistribution> {
    let v = stationary_vector(chain.matrix(), opts.tol, opts.max_iter)?;
    let mut image = vec![0.0; v.len()];
    chain.matrix().vec_mul_into(&v, &mut image);
    let res = l1_dist(&image, &v);
    distribution_from_vector(chain.dims(), v, res, opts.tol, opts.allow_zero_visit, None)
}

/// Per-phase limiting distributions of a periodic-policy joint chain.
///
/// Time step t carries phase (t − 1) mod L, and the one-step matrix *into*
/// phase m draws the destination action from phase m's policy; call it W^m.
/// ζ⁰ is then the stationary vector of the L-step skeleton W¹W²⋯W⁰ anchored
/// at phase 0, the later phases follow by the linkage ζ^{ℓ+1} = ζ^ℓ W^{ℓ+1}
/// (no independent eigen-solves, so the family stays mutually consistent),
/// and each phase is polished on its own rolled skeleton until its residual
/// passes `opts.tol`. The result matches phase-indexed visit frequencies of
/// a simulated trajectory.
pub fn periodic_stationary(
    model: &PomdpModel,
    asm: &AgentStateMachine,
    ppol: &PeriodicPolicy,
    opts: SolveOptions,
) -> Result<Vec<JointDistribution>> {
    let period = ppol.period();
    let chains: Vec<JointChain> = ppol
        .phases()
        .iter()
        .map(|p| joint_transition(model, asm, p))
        .collect::<Result<_>>()?;
    let dims = chains[0].dims();
    let n = dims.len();

    let skeleton_at = |anchor: usize| -> ProductOp<'_> {
        ProductOp::new(
            (1..=period)
                .map(|step| chains[(anchor + step) % period].matrix())
                .collect(),
        )
    };

    let zeta0 = solve_with_restarts(&skeleton_at(0), opts.tol, opts.max_iter)?;

    let mut vectors = Vec::with_capacity(period);
    vectors.push(zeta0);
    for l in 1..period {
        let mut next = vec![0.0; n];
        chains[l].matrix().vec_mul_into(vectors.last().unwrap(), &mut next);
        normalize(&mut next);
        // Polish on this phase's own skeleton; the linked vector is already
        // within solver precision, so this converges immediately.
        let polished = power_iterate(&skeleton_at(l), next, opts.tol, opts.max_iter)?;
        vectors.push(polished);
    }

    let mut out = Vec::with_capacity(period);
    let mut tmp = vec![0.0; n];
    let mut image = vec![0.0; n];
    for (l, v) in vectors.into_iter().enumerate() {
        skeleton_at(l).apply(&v, &mut image, &mut tmp);
        let res = l1_dist(&image, &v);
        out.push(distribution_from_vector(
            dims,
            v,
            res,
            opts.tol,
            opts.allow_zero_visit,
            Some(l),
        )?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use alloc::vec;

    fn paper_chain() -> JointChain {
        joint_transition(
            &presets::paper_pomdp(),
            &presets::paper_agent_state(),
            &presets::paper_behavior_policy(),
        )
        .unwrap()
    }

    #[test]
    fn degenerate_one_point_chain() {
        let model = PomdpModel::new(
            1,
            1,
            1,
            vec![1.0],
            Mat::from_rows(&[vec![0.0]]),
            0.5,
            vec![1.0],
        )
        .unwrap();
        let asm = AgentStateMachine::observation_state(1, 1);
        let pol = Policy::uniform(1, 1);
        let chain = joint_transition(&model, &asm, &pol).unwrap();
        assert_eq!(chain.matrix().rows(), 1);
        assert_eq!(chain.matrix().at(0, 0), 1.0);
    }

    #[test]
    fn paper_chain_rows_stochastic() {
        let chain = paper_chain();
        for i in 0..chain.matrix().rows() {
            let sum: f64 = chain.matrix().row(i).iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12, "row {i} sums to {sum}");
        }
    }

    #[test]
    fn deterministic_model_gives_zero_one_matrix() {
        // Kernel rows are point masses and the policy is deterministic, so
        // every chain row is a point mass too.
        let mut kernel = vec![0.0; 2 * 1 * 2 * 2];
        // s=0 → (s'=1, y'=1); s=1 → (s'=0, y'=0)
        kernel[(0 * 2 + 1) * 2 + 1] = 1.0;
        kernel[(1 * 2) * 2] = 1.0;
        let model = PomdpModel::new(2, 1, 2, kernel, Mat::zeros(2, 1), 0.9, vec![1.0, 0.0]).unwrap();
        let asm = AgentStateMachine::observation_state(2, 1);
        let pol = Policy::uniform(2, 1);
        let chain = joint_transition(&model, &asm, &pol).unwrap();
        for i in 0..chain.matrix().rows() {
            for j in 0..chain.matrix().cols() {
                let v = chain.matrix().at(i, j);
                assert!(v == 0.0 || v == 1.0);
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let model = presets::paper_pomdp();
        let asm = AgentStateMachine::observation_state(3, 2); // wrong |Y|
        let pol = Policy::uniform(3, 2);
        assert!(matches!(
            joint_transition(&model, &asm, &pol),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_chain_is_non_ergodic() {
        let t = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let err = stationary_vector(&t, 1e-12, 10_000).unwrap_err();
        assert!(matches!(err, Error::NonErgodic { .. }));
    }

    #[test]
    fn doubly_stochastic_gives_uniform() {
        let t = Mat::from_rows(&[vec![0.7, 0.3], vec![0.3, 0.7]]);
        let v = stationary_vector(&t, 1e-13, 100_000).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-12);
        assert!((v[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn paper_distribution_residual_and_support() {
        let zeta = stationary_distribution(&paper_chain(), SolveOptions::default()).unwrap();
        assert!(zeta.residual() <= 1e-12);
        assert!(zeta.fully_supported());
        // Cross-check the (z, a) marginal against independently computed
        // values.
        let za = zeta.marginal_za();
        let expect = [[0.12974296, 0.51897185], [0.28102815, 0.07025704]];
        for z in 0..2 {
            for a in 0..2 {
                assert!(
                    (za.at(z, a) - expect[z][a]).abs() < 1e-6,
                    "ζ({z},{a}) = {}",
                    za.at(z, a)
                );
            }
        }
    }

    #[test]
    fn paper_conditional_identity() {
        let zeta = stationary_distribution(&paper_chain(), SolveOptions::default()).unwrap();
        let cond = zeta.conditional_s_given_z().unwrap();
        // ζ(s | z = 1) computed independently.
        assert!((cond.at(1, 1) - 0.655052265).abs() < 1e-6);
        assert!((cond.at(1, 2) - 0.344947735).abs() < 1e-6);
        for z in 0..2 {
            let sum: f64 = (0..4).map(|s| cond.at(z, s)).sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn point_mass_distribution_conditional() {
        let dims = ChainDims {
            num_states: 2,
            num_obs: 1,
            num_agent_states: 2,
            num_actions: 1,
        };
        let mut mass = vec![0.0; dims.len()];
        mass[dims.index(1, 0, 0, 0)] = 1.0;
        let zeta = JointDistribution {
            dims,
            mass,
            support: vec![true, false],
            residual: 0.0,
            dust: 1e-12,
        };
        // z = 1 has zero marginal, so the full conditional fails.
        assert!(matches!(
            zeta.conditional_s_given_z(),
            Err(Error::ZeroVisit { z: 1, .. })
        ));
    }

    #[test]
    fn product_distribution_rows_equal_mu() {
        let dims = ChainDims {
            num_states: 2,
            num_obs: 1,
            num_agent_states: 2,
            num_actions: 1,
        };
        let mu = [0.3, 0.7];
        let nu = [0.4, 0.6];
        let mut mass = vec![0.0; dims.len()];
        for s in 0..2 {
            for z in 0..2 {
                mass[dims.index(s, 0, z, 0)] = mu[s] * nu[z];
            }
        }
        let zeta = JointDistribution {
            dims,
            mass,
            support: vec![true, true],
            residual: 0.0,
            dust: 1e-12,
        };
        let cond = zeta.conditional_s_given_z().unwrap();
        for z in 0..2 {
            for s in 0..2 {
                assert!((cond.at(z, s) - mu[s]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn factorization_with_deterministic_obs_map() {
        // ζ(s, y, z, a) = ζ(s, z) π(a|z) 1{y = o(s)} for the bundled model.
        let model = presets::paper_pomdp();
        let pol = presets::paper_behavior_policy();
        let zeta = stationary_distribution(&paper_chain(), SolveOptions::default()).unwrap();
        let omap = model.deterministic_obs_map().unwrap();
        let sz = zeta.marginal_sz();
        for s in 0..4 {
            for y in 0..2 {
                for z in 0..2 {
                    for a in 0..2 {
                        let want = if y == omap[s] {
                            sz.at(s, z) * pol.prob(z, a)
                        } else {
                            0.0
                        };
                        assert!(
                            (zeta.mass(s, y, z, a) - want).abs() < 1e-8,
                            "factorization fails at ({s},{y},{z},{a})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn zero_visit_detected_and_overridable() {
        // Deterministic policy: action 1 never taken from either z.
        let model = presets::paper_pomdp();
        let asm = presets::paper_agent_state();
        let pol = Policy::new(Mat::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]])).unwrap();
        let chain = joint_transition(&model, &asm, &pol).unwrap();
        let err = stationary_distribution(&chain, SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::ZeroVisit { .. }));

        let opts = SolveOptions {
            allow_zero_visit: true,
            ..SolveOptions::default()
        };
        let zeta = stationary_distribution(&chain, opts).unwrap();
        assert!(!zeta.fully_supported());
    }

    #[test]
    fn periodic_reduces_to_stationary_at_period_one() {
        let model = presets::paper_pomdp();
        let asm = presets::paper_agent_state();
        let pol = presets::paper_behavior_policy();
        let ppol = PeriodicPolicy::stationary(pol);
        let per = periodic_stationary(&model, &asm, &ppol, SolveOptions::default()).unwrap();
        assert_eq!(per.len(), 1);
        let stat = stationary_distribution(&paper_chain(), SolveOptions::default()).unwrap();
        let dist = l1_dist(per[0].as_slice(), stat.as_slice());
        assert!(dist <= 1e-10, "ℓ₁ = {dist}");
    }

    #[test]
    fn periodic_identical_phases_match() {
        let model = presets::paper_pomdp();
        let asm = presets::paper_agent_state();
        let pol = presets::paper_behavior_policy();
        let ppol = PeriodicPolicy::new(vec![pol.clone(), pol]).unwrap();
        let per = periodic_stationary(&model, &asm, &ppol, SolveOptions::default()).unwrap();
        let dist = l1_dist(per[0].as_slice(), per[1].as_slice());
        assert!(dist <= 1e-10, "ℓ₁ = {dist}");
    }

    #[test]
    fn periodic_paper_phases_supported_and_linked() {
        let model = presets::paper_pomdp();
        let asm = presets::paper_agent_state();
        let ppol = presets::paper_periodic_policy();
        let per = periodic_stationary(&model, &asm, &ppol, SolveOptions::default()).unwrap();
        assert_eq!(per.len(), 2);
        for zeta in &per {
            assert!(zeta.fully_supported());
            assert!(zeta.residual() <= 1e-12);
        }
        // Independently computed phase marginals.
        let expect0 = [[0.04385738, 0.17542953], [0.62457047, 0.15614262]];
        let expect1 = [[0.51920742, 0.12980185], [0.07019815, 0.28079258]];
        let za0 = per[0].marginal_za();
        let za1 = per[1].marginal_za();
        for z in 0..2 {
            for a in 0..2 {
                assert!((za0.at(z, a) - expect0[z][a]).abs() < 1e-6, "phase 0 ({z},{a})");
                assert!((za1.at(z, a) - expect1[z][a]).abs() < 1e-6, "phase 1 ({z},{a})");
            }
        }
    }

    #[test]
    fn periodic_conditional_identity_per_phase() {
        let model = presets::paper_pomdp();
        let asm = presets::paper_agent_state();
        let ppol = presets::paper_periodic_policy();
        let per = periodic_stationary(&model, &asm, &ppol, SolveOptions::default()).unwrap();
        for zeta in &per {
            // conditional_s_given_z internally asserts ζ(s|z,a) = ζ(s|z).
            let cond = zeta.conditional_s_given_z().unwrap();
            for z in 0..2 {
                let sum: f64 = (0..4).map(|s| cond.at(z, s)).sum();
                assert!((sum - 1.0).abs() < 1e-12);
            }
        }
    }
}
