//! Independent oracles for the two solver pipelines.
//!
//! The stationary distribution is cross-checked against a direct null-space
//! linear solve of (Tᵀ − I)ζ = 0 with Σζ = 1, and the regularized fixed
//! points against straight-loop value iteration written here from scratch
//! over plain nested vectors. Neither oracle shares code with the library
//! solvers.

use rasql_core::induced::{
    bellman_apply, build_induced_mdp, build_periodic_induced, solve_fixed_point,
    solve_periodic_fixed_point,
};
use rasql_core::occupancy::{
    joint_transition, periodic_stationary, stationary_distribution, stationary_vector,
    SolveOptions,
};
use rasql_core::regularizer::{Entropy, PolicyRegularizer};
use rasql_core::{presets, AgentStateMachine, Mat, Policy, PomdpModel, QTable, RngStream};

// ---------------------------------------------------------------------------
// Oracle: dense Gaussian elimination for the stationary distribution
// ---------------------------------------------------------------------------

/// Solves (Tᵀ − I)ζ = 0 with the last equation replaced by Σζ = 1, via
/// Gaussian elimination with partial pivoting.
fn null_space_stationary(t: &Mat) -> Vec<f64> {
    let n = t.rows();
    // A[i][j] over the system rows; column-major of T minus identity.
    let mut a = vec![vec![0.0f64; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = t.at(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[n - 1][j] = 1.0;
    }
    a[n - 1][n] = 1.0;

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        assert!(p.abs() > 1e-14, "singular system");
        for r in 0..n {
            if r != col {
                let f = a[r][col] / p;
                if f != 0.0 {
                    for c in col..=n {
                        let v = a[col][c];
                        a[r][c] -= f * v;
                    }
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[test]
fn power_iteration_matches_null_space_on_benchmark_chain() {
    let chain = joint_transition(
        &presets::paper_pomdp(),
        &presets::paper_agent_state(),
        &presets::paper_behavior_policy(),
    )
    .unwrap();
    let power = stationary_vector(chain.matrix(), 1e-12, 1_000_000).unwrap();
    let direct = null_space_stationary(chain.matrix());
    let dist = l1(&power, &direct);
    assert!(dist <= 1e-10, "ℓ₁ distance {dist}");
}

#[test]
fn power_iteration_matches_null_space_on_random_chains() {
    let mut rng = RngStream::new(0xBEEF);
    for trial in 0..10 {
        let n = 2 + (rng.next_u64() % 15) as usize;
        let mut t = Mat::zeros(n, n);
        for i in 0..n {
            let mut row: Vec<f64> = (0..n).map(|_| rng.next_f64() + 0.05).collect();
            let sum: f64 = row.iter().sum();
            for x in &mut row {
                *x /= sum;
            }
            for (j, &x) in row.iter().enumerate() {
                t.set(i, j, x);
            }
        }
        let power = stationary_vector(&t, 1e-13, 1_000_000).unwrap();
        let direct = null_space_stationary(&t);
        let dist = l1(&power, &direct);
        assert!(dist <= 1e-10, "trial {trial}: ℓ₁ distance {dist}");
    }
}

// ---------------------------------------------------------------------------
// Oracle: straight-loop soft value iteration over nested vectors
// ---------------------------------------------------------------------------

struct PlainMdp {
    r: Vec<Vec<f64>>,          // [z][a]
    p: Vec<Vec<Vec<f64>>>,     // [z][a][z']
    gamma: f64,
}

fn oracle_logsumexp(row: &[f64], beta: f64) -> f64 {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = row.iter().map(|&q| ((q - m) * beta).exp()).sum();
    m + s.ln() / beta
}

fn oracle_soft_vi(mdp: &PlainMdp, beta: f64, sweeps: usize) -> Vec<Vec<f64>> {
    let nz = mdp.r.len();
    let na = mdp.r[0].len();
    let mut q = vec![vec![0.0; na]; nz];
    for _ in 0..sweeps {
        let v: Vec<f64> = (0..nz).map(|z| oracle_logsumexp(&q[z], beta)).collect();
        let mut next = vec![vec![0.0; na]; nz];
        for z in 0..nz {
            for a in 0..na {
                let mut acc = 0.0;
                for z2 in 0..nz {
                    acc += mdp.p[z][a][z2] * v[z2];
                }
                next[z][a] = mdp.r[z][a] + mdp.gamma * acc;
            }
        }
        q = next;
    }
    q
}

fn plain_from_induced(mdp: &rasql_core::InducedMdp) -> PlainMdp {
    let nz = mdp.num_agent_states();
    let na = mdp.num_actions();
    PlainMdp {
        r: (0..nz)
            .map(|z| (0..na).map(|a| mdp.reward(z, a)).collect())
            .collect(),
        p: (0..nz)
            .map(|z| {
                (0..na)
                    .map(|a| (0..nz).map(|z2| mdp.transition(z, a, z2)).collect())
                    .collect()
            })
            .collect(),
        gamma: mdp.discount(),
    }
}

#[test]
fn fixed_point_matches_straight_loop_oracle() {
    let model = presets::paper_pomdp();
    let asm = presets::paper_agent_state();
    let pol = presets::paper_behavior_policy();
    let chain = joint_transition(&model, &asm, &pol).unwrap();
    let zeta = stationary_distribution(&chain, SolveOptions::default()).unwrap();
    let mdp = build_induced_mdp(&model, &asm, &zeta).unwrap();
    let reg = Entropy::new(1.0).unwrap();
    let lib = solve_fixed_point(&mdp, &reg, 1e-14, 100_000).unwrap();

    let oracle = oracle_soft_vi(&plain_from_induced(&mdp), 1.0, 600);
    for z in 0..2 {
        for a in 0..2 {
            assert!(
                (lib.at(z, a) - oracle[z][a]).abs() <= 1e-10,
                "({z},{a}): {} vs {}",
                lib.at(z, a),
                oracle[z][a]
            );
        }
    }
}

#[test]
fn periodic_fixed_point_matches_composed_operator_oracle() {
    let model = presets::paper_pomdp();
    let asm = presets::paper_agent_state();
    let ppol = presets::paper_periodic_policy();
    let zetas = periodic_stationary(&model, &asm, &ppol, SolveOptions::default()).unwrap();
    let mdps = build_periodic_induced(&model, &asm, &zetas).unwrap();
    let reg = Entropy::new(1.0).unwrap();
    let lib = solve_periodic_fixed_point(&mdps, &reg, 1e-14, 200_000).unwrap();

    // Oracle: iterate the composed two-phase operator independently per
    // phase, with straight loops.
    let plain: Vec<PlainMdp> = mdps.iter().map(plain_from_induced).collect();
    let apply = |mdp: &PlainMdp, q: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let nz = mdp.r.len();
        let na = mdp.r[0].len();
        let v: Vec<f64> = (0..nz).map(|z| oracle_logsumexp(&q[z], 1.0)).collect();
        let mut next = vec![vec![0.0; na]; nz];
        for z in 0..nz {
            for a in 0..na {
                let mut acc = 0.0;
                for z2 in 0..nz {
                    acc += mdp.p[z][a][z2] * v[z2];
                }
                next[z][a] = mdp.r[z][a] + mdp.gamma * acc;
            }
        }
        next
    };
    for l in 0..2 {
        let mut q = vec![vec![0.0; 2]; 2];
        for _ in 0..400 {
            // C^l = B^l ∘ B^{l+1}: innermost first.
            q = apply(&plain[(l + 1) % 2], &q);
            q = apply(&plain[l], &q);
        }
        for z in 0..2 {
            for a in 0..2 {
                assert!(
                    (lib[l].at(z, a) - q[z][a]).abs() <= 1e-10,
                    "phase {l} ({z},{a}): {} vs {}",
                    lib[l].at(z, a),
                    q[z][a]
                );
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Cross-route check on the fully observed wrapper
// ---------------------------------------------------------------------------

#[test]
fn fully_observed_limit_is_behavior_independent() {
    // Random 4-state MDP wrapped as a POMDP with y = s and z = y: the
    // induced MDP is the underlying MDP for any behavior policy, so the
    // limit must match soft value iteration on the raw model and must not
    // depend on the behavior policy.
    let mut rng = RngStream::new(0xABCD);
    let (ns, na) = (4, 2);
    let mut kernel = vec![0.0; ns * na * ns * ns];
    let mut reward = Mat::zeros(ns, na);
    let mut plain = PlainMdp {
        r: vec![vec![0.0; na]; ns],
        p: vec![vec![vec![0.0; ns]; na]; ns],
        gamma: 0.9,
    };
    for s in 0..ns {
        for a in 0..na {
            let mut row: Vec<f64> = (0..ns).map(|_| rng.next_f64() + 0.1).collect();
            let sum: f64 = row.iter().sum();
            for x in &mut row {
                *x /= sum;
            }
            for s2 in 0..ns {
                kernel[((s * na + a) * ns + s2) * ns + s2] = row[s2];
                plain.p[s][a][s2] = row[s2];
            }
            let r = rng.next_f64() - 0.5;
            reward.set(s, a, r);
            plain.r[s][a] = r;
        }
    }
    let model = PomdpModel::new(ns, na, ns, kernel, reward, 0.9, vec![0.25; 4]).unwrap();
    let asm = AgentStateMachine::observation_state(ns, na);
    let reg = Entropy::new(1.0).unwrap();
    let oracle = oracle_soft_vi(&plain, 1.0, 800);

    let mut previous: Option<QTable> = None;
    for _ in 0..5 {
        let mut probs = Mat::zeros(ns, na);
        for z in 0..ns {
            let mut row: Vec<f64> = (0..na).map(|_| rng.next_f64() + 0.1).collect();
            let sum: f64 = row.iter().sum();
            for (a, x) in row.iter().enumerate() {
                probs.set(z, a, x / sum);
            }
        }
        let pol = Policy::new(probs).unwrap();
        let chain = joint_transition(&model, &asm, &pol).unwrap();
        let zeta = stationary_distribution(&chain, SolveOptions::default()).unwrap();
        let mdp = build_induced_mdp(&model, &asm, &zeta).unwrap();
        let q = solve_fixed_point(&mdp, &reg, 1e-14, 100_000).unwrap();
        for s in 0..ns {
            for a in 0..na {
                assert!((q.at(s, a) - oracle[s][a]).abs() <= 1e-10);
            }
        }
        if let Some(prev) = &previous {
            assert!(q.sup_dist(prev) <= 1e-10);
        }
        previous = Some(q);
    }
}

#[test]
fn bellman_residual_certifies_solver_output() {
    let model = presets::paper_pomdp();
    let asm = presets::paper_agent_state();
    let pol = presets::paper_behavior_policy();
    let chain = joint_transition(&model, &asm, &pol).unwrap();
    let zeta = stationary_distribution(&chain, SolveOptions::default()).unwrap();
    let mdp = build_induced_mdp(&model, &asm, &zeta).unwrap();
    for beta in [0.5, 1.0, 20.0] {
        let reg = Entropy::new(beta).unwrap();
        let q = solve_fixed_point(&mdp, &reg, 1e-13, 100_000).unwrap();
        let image = bellman_apply(&q, &mdp, &reg).unwrap();
        assert!(image.sup_dist(&q) <= 1e-13);
        // Conjugate-based greedy rows are strictly interior.
        let greedy = rasql_core::policy::greedy_policy(&q, &reg).unwrap();
        for z in 0..2 {
            for a in 0..2 {
                assert!(greedy.prob(z, a) > 0.0);
            }
        }
    }
}
