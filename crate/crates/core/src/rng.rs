//! Deterministic counter-based random number stream.
//!
//! The generator is SplitMix64: the state is a plain counter advanced by the
//! golden-ratio increment, and each output is an avalanche mix of the
//! counter. The algorithm is fixed here, bit for bit, so that a seed
//! reproduces the same sample sequence on every platform and in every
//! future version — trace files and experiment artifacts stay replayable.
//!
//! Not cryptographically secure.

use crate::error::Error;
use crate::Result;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seeded deterministic stream of uniforms and categorical draws.
///
/// Each simulation worker owns its stream exclusively; streams are cheap to
/// construct, so derive one per (seed, purpose) rather than sharing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    /// Stream seeded with `seed`. Identical seeds yield identical sequences.
    pub fn new(seed: u64) -> Self {
        RngStream { state: seed }
    }

    /// Next raw 64-bit output (SplitMix64).
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut x = self.state;
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^ (x >> 31)
    }

    /// Uniform in [0, 1) with 53 random mantissa bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Index drawn from the categorical distribution `probs`.
    ///
    /// `probs` must be non-negative with total mass ≈ 1; the draw scans the
    /// cumulative sum, and rounding shortfall lands on the last index with
    /// positive mass.
    #[inline]
    pub fn sample_index(&mut self, probs: &[f64]) -> Result<usize> {
        if probs.is_empty() {
            return Err(Error::DimensionMismatch {
                what: "categorical support",
                expected: 1,
                got: 0,
            });
        }
        let u = self.next_f64();
        let mut acc = 0.0;
        let mut last_positive = None;
        for (i, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last_positive = Some(i);
                if u < acc {
                    return Ok(i);
                }
            }
        }
        last_positive.ok_or(Error::NotADistribution {
            what: "categorical weights",
            sum: 0.0,
        })
    }
}
