//! Online off-policy learning loops: RASQL, its periodic variant RePASQL,
//! and the unregularized ASQL baseline.
//!
//! One step of the regularized iteration, at the visited pair (zₜ, aₜ):
//!
//! ```text
//! Q(z, a) ← Q(z, a) + α · [ rₜ + γ Ω*(Q(z_{t+1}, ·)) − Q(z, a) ]
//! ```
//!
//! with α the per-pair visit-indexed learning rate (zero off the visited
//! pair). The periodic variant keeps one table per phase and bootstraps
//! from the *next* phase's table; ASQL replaces Ω* with the row max.
//!
//! Given a seed, a run is bit-reproducible: each step consumes exactly two
//! uniforms (action, transition) after two at initialization (initial
//! state, initial observation).

use alloc::vec;
use alloc::vec::Vec;

use crate::agent_state::AgentStateMachine;
use crate::error::Error;
use crate::induced::QTable;
use crate::math::{powf, slice_max};
use crate::model::PomdpModel;
use crate::policy::{PeriodicPolicy, Policy};
use crate::regularizer::PolicyRegularizer;
use crate::rng::RngStream;
use crate::Result;

/// Per-(z, a) step-size rule, indexed by that pair's visit count n ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearningRateSchedule {
    /// α_n = 1/n. Satisfies Σα = ∞, Σα² < ∞.
    InverseVisit,
    /// α_n = 1/n^ω with ω ∈ (0.5, 1]. Satisfies Σα = ∞, Σα² < ∞.
    Polynomial { omega: f64 },
    /// α_n = c. Diagnostics only: Σα² = ∞, so the convergence conditions
    /// fail and runs require the explicit opt-in flag.
    Constant { rate: f64 },
}

impl LearningRateSchedule {
    /// Parameter validation (ω range, positive rate).
    pub fn validate(&self) -> Result<()> {
        match *self {
            LearningRateSchedule::InverseVisit => Ok(()),
            LearningRateSchedule::Polynomial { omega } => {
                if omega > 0.5 && omega <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        what: "schedule exponent omega",
                        value: omega,
                    })
                }
            }
            LearningRateSchedule::Constant { rate } => {
                if rate > 0.0 && rate <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        what: "constant rate",
                        value: rate,
                    })
                }
            }
        }
    }

    /// Whether the schedule satisfies the stochastic-approximation
    /// conditions Σα = ∞ and Σα² < ∞.
    pub fn is_compliant(&self) -> bool {
        !matches!(self, LearningRateSchedule::Constant { .. })
    }

    /// Step size at visit count `n ≥ 1`.
    #[inline]
    pub fn rate(&self, n: u64) -> f64 {
        match *self {
            LearningRateSchedule::InverseVisit => 1.0 / n as f64,
            LearningRateSchedule::Polynomial { omega } => powf(n as f64, -omega),
            LearningRateSchedule::Constant { rate } => rate,
        }
    }
}

/// Knobs for a single learning run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    /// Total environment steps (≥ 1).
    pub steps: u64,
    /// Seed of the run's private random stream.
    pub seed: u64,
    /// Snapshot cadence: the tables are logged at every t divisible by
    /// `log_every`, plus the final step. Zero means "200 evenly spaced
    /// snapshots".
    pub log_every: u64,
    /// Explicit opt-in for non-compliant (constant) schedules.
    pub allow_noncompliant_schedule: bool,
}

impl RunConfig {
    pub fn new(steps: u64, seed: u64) -> Self {
        RunConfig {
            steps,
            seed,
            log_every: 0,
            allow_noncompliant_schedule: false,
        }
    }

    fn resolved_log_every(&self) -> u64 {
        if self.log_every > 0 {
            self.log_every
        } else {
            (self.steps / 200).max(1)
        }
    }
}

/// Q-tables (one per phase) captured at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: u64,
    pub tables: Vec<QTable>,
}

/// Everything a single run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub steps: u64,
    /// Period L of the behavior policy (1 for stationary runs).
    pub period: usize,
    /// Logged iterates, times strictly increasing, final step included.
    pub snapshots: Vec<Snapshot>,
    /// Final tables, one per phase.
    pub finals: Vec<QTable>,
    /// Visit counts per (phase, z, a), flat over z·|A| + a.
    pub visit_counts: Vec<Vec<u64>>,
}

impl RunRecord {
    /// Total visits across all phases and pairs; equals `steps`.
    pub fn total_visits(&self) -> u64 {
        self.visit_counts
            .iter()
            .map(|phase| phase.iter().sum::<u64>())
            .sum()
    }
}

enum Bootstrap<'a> {
    Conjugate(&'a dyn PolicyRegularizer),
    Max,
}

impl Bootstrap<'_> {
    #[inline]
    fn value(&self, row: &[f64]) -> Result<f64> {
        match self {
            Bootstrap::Conjugate(reg) => reg.conjugate(row),
            Bootstrap::Max => Ok(slice_max(row)),
        }
    }
}

/// RASQL: regularized agent-state Q-learning under a stationary behavior
/// policy. Converges (per-pair compliant rates, fully supported limiting
/// distribution) to the regularized fixed point of the induced MDP.
pub fn run_rasql(
    model: &PomdpModel,
    asm: &AgentStateMachine,
    behavior: &Policy,
    reg: &dyn PolicyRegularizer,
    sched: LearningRateSchedule,
    cfg: &RunConfig,
) -> Result<RunRecord> {
    let ppol = PeriodicPolicy::stationary(behavior.clone());
    run_loop(model, asm, &ppol, Bootstrap::Conjugate(reg), sched, cfg)
}

/// RePASQL: the periodic variant. Maintains one table per phase; the phase
/// of time step t is (t − 1) mod L, and the update at phase ℓ bootstraps
/// from phase ⟨ℓ+1⟩'s table at the successor agent state.
pub fn run_repasql(
    model: &PomdpModel,
    asm: &AgentStateMachine,
    behavior: &PeriodicPolicy,
    reg: &dyn PolicyRegularizer,
    sched: LearningRateSchedule,
    cfg: &RunConfig,
) -> Result<RunRecord> {
    run_loop(model, asm, behavior, Bootstrap::Conjugate(reg), sched, cfg)
}

/// ASQL: the unregularized baseline, bootstrapping with the row max.
pub fn run_asql(
    model: &PomdpModel,
    asm: &AgentStateMachine,
    behavior: &Policy,
    sched: LearningRateSchedule,
    cfg: &RunConfig,
) -> Result<RunRecord> {
    let ppol = PeriodicPolicy::stationary(behavior.clone());
    run_loop(model, asm, &ppol, Bootstrap::Max, sched, cfg)
}

fn run_loop(
    model: &PomdpModel,
    asm: &AgentStateMachine,
    behavior: &PeriodicPolicy,
    bootstrap: Bootstrap<'_>,
    sched: LearningRateSchedule,
    cfg: &RunConfig,
) -> Result<RunRecord> {
    sched.validate()?;
    if !sched.is_compliant() && !cfg.allow_noncompliant_schedule {
        return Err(Error::NonCompliantSchedule("constant"));
    }
    if cfg.steps == 0 {
        return Err(Error::InvalidParameter {
            what: "steps",
            value: 0.0,
        });
    }
    if asm.num_obs() != model.num_obs() || asm.num_actions() != model.num_actions() {
        return Err(Error::DimensionMismatch {
            what: "agent-state machine",
            expected: model.num_obs(),
            got: asm.num_obs(),
        });
    }
    for phase in behavior.phases() {
        if phase.num_agent_states() != asm.num_agent_states()
            || phase.num_actions() != model.num_actions()
        {
            return Err(Error::DimensionMismatch {
                what: "behavior policy",
                expected: asm.num_agent_states(),
                got: phase.num_agent_states(),
            });
        }
    }

    let period = behavior.period();
    let nz = asm.num_agent_states();
    let na = model.num_actions();
    let log_every = cfg.resolved_log_every();

    let mut tables: Vec<QTable> = (0..period).map(|_| QTable::zeros(nz, na)).collect();
    let mut visits: Vec<Vec<u64>> = (0..period).map(|_| vec![0u64; nz * na]).collect();
    let mut snapshots = Vec::new();

    let mut rng = RngStream::new(cfg.seed);
    let mut s = model.sample_initial(&mut rng)?;
    let y1 = model.initial_observation(s, &mut rng)?;
    let mut z = asm.first_state(y1)?;

    for t in 1..=cfg.steps {
        let phase = behavior.phase_index(t);
        let a = behavior.phases()[phase].sample_action(z, &mut rng)?;
        let (s2, y2, r) = model.step(s, a, &mut rng)?;
        let z2 = asm.update_unchecked(z, y2, a);

        let next_phase = (phase + 1) % period;
        let target = r + model.discount() * bootstrap.value(tables[next_phase].row(z2))?;

        let n = {
            let c = &mut visits[phase][z * na + a];
            *c += 1;
            *c
        };
        let alpha = sched.rate(n);
        let old = tables[phase].at(z, a);
        tables[phase].set(z, a, old + alpha * (target - old));

        if t % log_every == 0 || t == cfg.steps {
            snapshots.push(Snapshot {
                t,
                tables: tables.clone(),
            });
        }

        s = s2;
        z = z2;
    }

    Ok(RunRecord {
        seed: cfg.seed,
        steps: cfg.steps,
        period,
        finals: tables,
        snapshots,
        visit_counts: visits,
    })
}
