//! Error type shared across the crate.

use core::fmt;

/// Errors raised by model construction, solvers, and learners.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An index was outside its table bound.
    IndexOutOfRange {
        /// Which index (e.g. `"state"`, `"action"`).
        what: &'static str,
        index: usize,
        bound: usize,
    },
    /// Two inputs had incompatible dimensions.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// A model or table failed validation; see [`crate::model::validate_model`]
    /// for the report-style variant.
    InvalidModel(&'static str),
    /// A vector that must be a probability distribution was not one.
    NotADistribution {
        what: &'static str,
        /// Total mass found.
        sum: f64,
    },
    /// A probability entry was negative beyond tolerance.
    NegativeMass { what: &'static str, value: f64 },
    /// A regularizer input contained NaN or ±∞.
    NonFiniteInput(&'static str),
    /// The chain solver failed to contract, or restarts from distinct
    /// initial conditions disagreed (limiting-distribution assumption
    /// violated).
    NonErgodic { residual: f64 },
    /// Some (z, a) pair — or (phase, z, a) triple — has zero limiting mass,
    /// so it is not visited infinitely often.
    ZeroVisit {
        phase: Option<usize>,
        z: usize,
        a: usize,
    },
    /// A fixed-point iteration exceeded its sweep budget.
    MaxIterExceeded { max_iter: usize, residual: f64 },
    /// A learning-rate schedule that does not satisfy the Robbins-Monro
    /// conditions was used without the explicit opt-in flag.
    NonCompliantSchedule(&'static str),
    /// A requested table size exceeded the configured cap.
    SizeOverflow { requested: usize, cap: usize },
    /// Invalid scalar parameter (e.g. β ≤ 0, ω outside (0.5, 1]).
    InvalidParameter { what: &'static str, value: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::IndexOutOfRange { what, index, bound } => {
                write!(f, "{what} index {index} out of range (bound {bound})")
            }
            Error::DimensionMismatch { what, expected, got } => {
                write!(f, "dimension mismatch for {what}: expected {expected}, got {got}")
            }
            Error::InvalidModel(msg) => write!(f, "invalid model: {msg}"),
            Error::NotADistribution { what, sum } => {
                write!(f, "{what} is not a probability distribution (mass {sum})")
            }
            Error::NegativeMass { what, value } => {
                write!(f, "{what} has negative entry {value}")
            }
            Error::NonFiniteInput(what) => write!(f, "non-finite input to {what}"),
            Error::NonErgodic { residual } => write!(
                f,
                "chain does not converge to a unique limiting distribution (residual {residual:e})"
            ),
            Error::ZeroVisit { phase: Some(l), z, a } => {
                write!(f, "zero limiting mass at phase {l}, (z={z}, a={a})")
            }
            Error::ZeroVisit { phase: None, z, a } => {
                write!(f, "zero limiting mass at (z={z}, a={a})")
            }
            Error::MaxIterExceeded { max_iter, residual } => {
                write!(f, "no convergence within {max_iter} sweeps (residual {residual:e})")
            }
            Error::NonCompliantSchedule(kind) => write!(
                f,
                "schedule `{kind}` violates the Robbins-Monro conditions; pass the explicit opt-in to use it"
            ),
            Error::SizeOverflow { requested, cap } => {
                write!(f, "requested table of {requested} entries exceeds cap {cap}")
            }
            Error::InvalidParameter { what, value } => {
                write!(f, "invalid parameter {what} = {value}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

impl Error {
    /// True for the errors that signal a violated convergence assumption
    /// (as opposed to bad input or a numerics bug).
    pub fn is_assumption_violation(&self) -> bool {
        matches!(self, Error::NonErgodic { .. } | Error::ZeroVisit { .. })
    }
}
