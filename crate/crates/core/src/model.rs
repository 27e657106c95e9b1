//! Finite POMDP models: validation and a seeded step simulator.
//!
//! A model is the joint transition kernel P(s', y' | s, a), a reward table
//! r(s, a), a discount γ ∈ [0, 1), and an initial state distribution ρ. The
//! kernel is stored dense: the problems this crate targets are tiny and
//! density keeps every computation exact.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::mat::Mat;
use crate::math::abs;
use crate::rng::RngStream;
use crate::Result;

/// Tolerance for probability rows and ρ summing to one.
pub const MASS_TOL: f64 = 1e-12;

/// Finite POMDP: hidden states S, actions A, observations Y.
///
/// Immutable after construction; share freely across workers. Each worker
/// owns its own [`RngStream`].
#[derive(Debug, Clone, PartialEq)]
pub struct PomdpModel {
    num_states: usize,
    num_actions: usize,
    num_obs: usize,
    /// Flat (s, a, s', y') row-major kernel.
    kernel: Vec<f64>,
    /// Reward r(s, a), any bounded real range.
    reward: Mat,
    discount: f64,
    init_dist: Vec<f64>,
}

impl PomdpModel {
    /// Builds a model from a dense joint kernel.
    ///
    /// `kernel[((s·|A| + a)·|S| + s')·|Y| + y']` is P(s', y' | s, a). The
    /// model is validated; construction fails on the first violation (use
    /// [`validate_model`] for the full report).
    pub fn new(
        num_states: usize,
        num_actions: usize,
        num_obs: usize,
        kernel: Vec<f64>,
        reward: Mat,
        discount: f64,
        init_dist: Vec<f64>,
    ) -> Result<Self> {
        let model = PomdpModel {
            num_states,
            num_actions,
            num_obs,
            kernel,
            reward,
            discount,
            init_dist,
        };
        let report = validate_model(&model);
        match report.into_iter().next() {
            None => Ok(model),
            Some(v) => Err(v.into_error()),
        }
    }

    /// Builds the joint kernel from the factored pair: a per-action state
    /// transition P(s' | s, a) and a deterministic observation map o: S → Y,
    /// expanded as P(s', y' | s, a) = P(s' | s, a) · 1{y' = o(s')}.
    ///
    /// `transition[a]` is the |S|×|S| matrix for action `a` (rows s,
    /// columns s').
    pub fn from_factored(
        transition: &[Mat],
        observation_map: &[usize],
        num_obs: usize,
        reward: Mat,
        discount: f64,
        init_dist: Vec<f64>,
    ) -> Result<Self> {
        let num_states = observation_map.len();
        let num_actions = transition.len();
        if num_actions == 0 || num_states == 0 {
            return Err(Error::InvalidModel("empty state or action space"));
        }
        for &o in observation_map {
            if o >= num_obs {
                return Err(Error::IndexOutOfRange {
                    what: "observation map entry",
                    index: o,
                    bound: num_obs,
                });
            }
        }
        for m in transition {
            if m.rows() != num_states || m.cols() != num_states {
                return Err(Error::DimensionMismatch {
                    what: "transition matrix",
                    expected: num_states,
                    got: m.rows().max(m.cols()),
                });
            }
        }
        let mut kernel = vec![0.0; num_states * num_actions * num_states * num_obs];
        for s in 0..num_states {
            for (a, m) in transition.iter().enumerate() {
                for s2 in 0..num_states {
                    let y2 = observation_map[s2];
                    let idx = ((s * num_actions + a) * num_states + s2) * num_obs + y2;
                    kernel[idx] = m.at(s, s2);
                }
            }
        }
        PomdpModel::new(
            num_states,
            num_actions,
            num_obs,
            kernel,
            reward,
            discount,
            init_dist,
        )
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_obs(&self) -> usize {
        self.num_obs
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn init_dist(&self) -> &[f64] {
        &self.init_dist
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward.at(s, a)
    }

    pub fn reward_table(&self) -> &Mat {
        &self.reward
    }

    /// Smallest and largest reward entries.
    pub fn reward_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &r in self.reward.as_slice() {
            if r < lo {
                lo = r;
            }
            if r > hi {
                hi = r;
            }
        }
        (lo, hi)
    }

    /// P(s', y' | s, a).
    #[inline(always)]
    pub fn kernel(&self, s: usize, a: usize, s2: usize, y2: usize) -> f64 {
        self.kernel[((s * self.num_actions + a) * self.num_states + s2) * self.num_obs + y2]
    }

    /// The kernel row P(·, · | s, a), flat over (s', y').
    #[inline(always)]
    pub fn kernel_row(&self, s: usize, a: usize) -> &[f64] {
        let n = self.num_states * self.num_obs;
        let start = (s * self.num_actions + a) * n;
        &self.kernel[start..start + n]
    }

    /// Observation marginal P(y' | s, a) = Σ_{s'} P(s', y' | s, a).
    pub fn obs_marginal(&self, s: usize, a: usize, y2: usize) -> f64 {
        (0..self.num_states).map(|s2| self.kernel(s, a, s2, y2)).sum()
    }

    /// The deterministic observation map o: S → Y implied by the kernel, if
    /// one exists: every reachable s' emits a single observation.
    ///
    /// States with no incoming kernel mass have no evidence; they default to
    /// observation 0.
    pub fn deterministic_obs_map(&self) -> Option<Vec<usize>> {
        let mut map = vec![None; self.num_states];
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                for s2 in 0..self.num_states {
                    for y2 in 0..self.num_obs {
                        if self.kernel(s, a, s2, y2) > 0.0 {
                            match map[s2] {
                                None => map[s2] = Some(y2),
                                Some(y) if y == y2 => {}
                                Some(_) => return None,
                            }
                        }
                    }
                }
            }
        }
        Some(map.into_iter().map(|y| y.unwrap_or(0)).collect())
    }

    /// Draw the initial state s₁ ~ ρ.
    pub fn sample_initial(&self, rng: &mut RngStream) -> Result<usize> {
        rng.sample_index(&self.init_dist)
    }

    /// Draw the observation paired with a freshly sampled initial state.
    ///
    /// The dynamics only emit observations jointly with transitions, so y₁
    /// needs a convention: we use the kernel-implied emission channel
    /// q(y | s) ∝ Σ_{s̃, ã} P(s, y | s̃, ã), the observation the kernel
    /// produces when landing in `s`, averaged over source pairs. For models
    /// with a deterministic observation map this is exactly y₁ = o(s₁).
    /// States the kernel never reaches fall back to a uniform draw. Any
    /// fixed convention washes out in the limiting distribution; this one
    /// consumes exactly one uniform.
    pub fn initial_observation(&self, s: usize, rng: &mut RngStream) -> Result<usize> {
        if s >= self.num_states {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: s,
                bound: self.num_states,
            });
        }
        let mut q = vec![0.0; self.num_obs];
        for s0 in 0..self.num_states {
            for a0 in 0..self.num_actions {
                for (y, qy) in q.iter_mut().enumerate() {
                    *qy += self.kernel(s0, a0, s, y);
                }
            }
        }
        let total: f64 = q.iter().sum();
        if total <= 0.0 {
            q.fill(1.0 / self.num_obs as f64);
        } else {
            for qy in &mut q {
                *qy /= total;
            }
        }
        rng.sample_index(&q)
    }

    /// One environment step: draws (s', y') from the kernel row of (s, a)
    /// and returns the current-pair reward r(s, a).
    pub fn step(&self, s: usize, a: usize, rng: &mut RngStream) -> Result<(usize, usize, f64)> {
        if s >= self.num_states {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: s,
                bound: self.num_states,
            });
        }
        if a >= self.num_actions {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: a,
                bound: self.num_actions,
            });
        }
        let flat = rng.sample_index(self.kernel_row(s, a))?;
        let (s2, y2) = (flat / self.num_obs, flat % self.num_obs);
        Ok((s2, y2, self.reward.at(s, a)))
    }
}

/// One validation violation, with enough indices to locate it.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Kernel row (s, a) sums to `sum` instead of 1.
    KernelRowMass { s: usize, a: usize, sum: f64 },
    /// Kernel entry below zero.
    KernelNegative { s: usize, a: usize, s2: usize, y2: usize, value: f64 },
    /// ρ sums to `sum` instead of 1.
    InitDistMass { sum: f64 },
    /// ρ entry below zero.
    InitDistNegative { s: usize, value: f64 },
    /// ρ has the wrong length.
    InitDistLen { expected: usize, got: usize },
    /// Reward entry NaN or infinite.
    RewardNotFinite { s: usize, a: usize },
    /// Reward outside the declared range (strict-range validation only).
    RewardOutOfRange { s: usize, a: usize, value: f64 },
    /// Discount outside [0, 1).
    DiscountOutOfRange { value: f64 },
    /// Reward table shape does not match |S|×|A|.
    RewardShape { expected_rows: usize, expected_cols: usize },
    /// Kernel buffer has the wrong length.
    KernelLen { expected: usize, got: usize },
    /// A space is empty.
    EmptySpace { what: &'static str },
}

impl Violation {
    fn into_error(self) -> Error {
        match self {
            Violation::KernelRowMass { sum, .. } => Error::NotADistribution {
                what: "kernel row",
                sum,
            },
            Violation::KernelNegative { value, .. } => Error::NegativeMass {
                what: "kernel entry",
                value,
            },
            Violation::InitDistMass { sum } => Error::NotADistribution {
                what: "initial distribution",
                sum,
            },
            Violation::InitDistNegative { value, .. } => Error::NegativeMass {
                what: "initial distribution entry",
                value,
            },
            Violation::DiscountOutOfRange { value } => Error::InvalidParameter {
                what: "discount",
                value,
            },
            Violation::RewardNotFinite { .. } => Error::InvalidModel("non-finite reward"),
            Violation::RewardOutOfRange { .. } => Error::InvalidModel("reward outside strict range"),
            Violation::InitDistLen { .. } => Error::InvalidModel("initial distribution length"),
            Violation::RewardShape { .. } => Error::InvalidModel("reward table shape"),
            Violation::KernelLen { .. } => Error::InvalidModel("kernel buffer length"),
            Violation::EmptySpace { what } => Error::InvalidModel(what),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::KernelRowMass { s, a, sum } => {
                write!(f, "kernel row (s={s}, a={a}) has mass {sum}, expected 1")
            }
            Violation::KernelNegative { s, a, s2, y2, value } => write!(
                f,
                "kernel entry (s={s}, a={a}, s'={s2}, y'={y2}) is negative: {value}"
            ),
            Violation::InitDistMass { sum } => {
                write!(f, "initial distribution has mass {sum}, expected 1")
            }
            Violation::InitDistNegative { s, value } => {
                write!(f, "initial distribution entry s={s} is negative: {value}")
            }
            Violation::InitDistLen { expected, got } => {
                write!(f, "initial distribution has length {got}, expected {expected}")
            }
            Violation::RewardNotFinite { s, a } => {
                write!(f, "reward (s={s}, a={a}) is not finite")
            }
            Violation::RewardOutOfRange { s, a, value } => {
                write!(f, "reward (s={s}, a={a}) = {value} outside the strict range")
            }
            Violation::DiscountOutOfRange { value } => {
                write!(f, "discount {value} outside [0, 1)")
            }
            Violation::RewardShape { expected_rows, expected_cols } => {
                write!(f, "reward table is not {expected_rows}×{expected_cols}")
            }
            Violation::KernelLen { expected, got } => {
                write!(f, "kernel has {got} entries, expected {expected}")
            }
            Violation::EmptySpace { what } => write!(f, "{what}"),
        }
    }
}

/// Formats a report as one line per violation.
pub fn report_to_string(report: &[Violation]) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for v in report {
        let _ = writeln!(s, "{v}");
    }
    s
}

/// Checks every model invariant and returns all violations found (empty
/// report iff the model is valid).
///
/// Rewards are only required to be finite: bounded negative entries are
/// legitimate. Use [`validate_model_strict`] to also enforce a range.
pub fn validate_model(model: &PomdpModel) -> Vec<Violation> {
    validate_with_range(model, None)
}

/// [`validate_model`] plus a strict reward-range check `lo ≤ r ≤ hi`.
pub fn validate_model_strict(model: &PomdpModel, lo: f64, hi: f64) -> Vec<Violation> {
    validate_with_range(model, Some((lo, hi)))
}

fn validate_with_range(model: &PomdpModel, range: Option<(f64, f64)>) -> Vec<Violation> {
    let mut report = Vec::new();
    let (ns, na, ny) = (model.num_states, model.num_actions, model.num_obs);
    if ns == 0 {
        report.push(Violation::EmptySpace { what: "empty state space" });
    }
    if na == 0 {
        report.push(Violation::EmptySpace { what: "empty action space" });
    }
    if ny == 0 {
        report.push(Violation::EmptySpace { what: "empty observation space" });
    }
    if !report.is_empty() {
        return report;
    }

    if model.kernel.len() != ns * na * ns * ny {
        report.push(Violation::KernelLen {
            expected: ns * na * ns * ny,
            got: model.kernel.len(),
        });
        return report;
    }
    if model.reward.rows() != ns || model.reward.cols() != na {
        report.push(Violation::RewardShape {
            expected_rows: ns,
            expected_cols: na,
        });
        return report;
    }
    if model.init_dist.len() != ns {
        report.push(Violation::InitDistLen {
            expected: ns,
            got: model.init_dist.len(),
        });
        return report;
    }

    for s in 0..ns {
        for a in 0..na {
            let mut sum = 0.0;
            for s2 in 0..ns {
                for y2 in 0..ny {
                    let p = model.kernel(s, a, s2, y2);
                    if p < 0.0 {
                        report.push(Violation::KernelNegative { s, a, s2, y2, value: p });
                    }
                    sum += p;
                }
            }
            if abs(sum - 1.0) > MASS_TOL {
                report.push(Violation::KernelRowMass { s, a, sum });
            }
        }
    }

    let mut rho_sum = 0.0;
    for (s, &p) in model.init_dist.iter().enumerate() {
        if p < 0.0 {
            report.push(Violation::InitDistNegative { s, value: p });
        }
        rho_sum += p;
    }
    if abs(rho_sum - 1.0) > MASS_TOL {
        report.push(Violation::InitDistMass { sum: rho_sum });
    }

    for s in 0..ns {
        for a in 0..na {
            let r = model.reward.at(s, a);
            if !r.is_finite() {
                report.push(Violation::RewardNotFinite { s, a });
            } else if let Some((lo, hi)) = range {
                if r < lo || r > hi {
                    report.push(Violation::RewardOutOfRange { s, a, value: r });
                }
            }
        }
    }

    if !(0.0..1.0).contains(&model.discount) {
        report.push(Violation::DiscountOutOfRange {
            value: model.discount,
        });
    }

    report
}
