//! Strongly convex policy regularizers with exact convex conjugates.
//!
//! A regularizer Ω penalizes the policy row chosen at each stage. What the
//! solvers and learners actually consume is its Legendre-Fenchel transform
//!
//! ```text
//! Ω*(q) = max_{p ∈ Δ(A)} { ⟨p, q⟩ − Ω(p) }
//! ```
//!
//! and the maximizer map ∇Ω*(q), which returns the argmax distribution.
//! Two closed-form instances are built in:
//!
//! * [`Entropy`]: Ω(p) = (1/β) Σ p(a) ln p(a), with Ω*(q) =
//!   (1/β) ln Σ exp(β q(a)) and ∇Ω* = softmax(βq);
//! * [`KlDivergence`]: Ω(p) = (1/β) Σ p(a) ln(p(a)/p_ref(a)), with Ω*(q) =
//!   (1/β) ln Σ p_ref(a) exp(β q(a)) and the p_ref-weighted softmax.
//!
//! Anything implementing [`PolicyRegularizer`] plugs into every solver and
//! learner unchanged.

use alloc::vec::Vec;

use crate::error::Error;
use crate::math::{abs, exp, ln, slice_max};
use crate::Result;

/// How far a nominal probability vector may stray from the simplex before
/// it is rejected rather than renormalized.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// The contract a policy regularizer exposes: Ω, Ω*, ∇Ω*, and a strong
/// convexity modulus.
///
/// Inputs are validated: `omega` expects a probability vector within
/// [`SIMPLEX_TOL`] of the simplex (renormalized internally, 0·ln 0 := 0),
/// and the conjugate maps reject non-finite entries.
pub trait PolicyRegularizer {
    /// Ω(p) on the action simplex.
    fn omega(&self, p: &[f64]) -> Result<f64>;

    /// Ω*(q), the convex conjugate.
    fn conjugate(&self, q: &[f64]) -> Result<f64>;

    /// ∇Ω*(q), the maximizing distribution. Strictly interior: every entry
    /// is positive and the row sums to one.
    fn grad_conjugate(&self, q: &[f64]) -> Result<Vec<f64>>;

    /// Modulus of strong convexity of Ω with respect to ‖·‖₁ on the simplex.
    fn strong_convexity_modulus(&self) -> f64;
}

/// Checks `p` is within tolerance of the simplex and returns a clamped,
/// renormalized copy.
fn sanitize_simplex(p: &[f64]) -> Result<Vec<f64>> {
    let mut sum = 0.0;
    for &x in p {
        if !x.is_finite() {
            return Err(Error::NonFiniteInput("regularizer probability vector"));
        }
        if x < -SIMPLEX_TOL {
            return Err(Error::NegativeMass {
                what: "probability vector",
                value: x,
            });
        }
        sum += x.max(0.0);
    }
    if abs(sum - 1.0) > SIMPLEX_TOL {
        return Err(Error::NotADistribution {
            what: "probability vector",
            sum,
        });
    }
    Ok(p.iter().map(|&x| x.max(0.0) / sum).collect())
}

fn check_finite(q: &[f64]) -> Result<()> {
    if q.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteInput("q-vector"))
    }
}

/// (1/β) ln Σ wᵢ exp(β qᵢ), stabilized by max subtraction so that |βq| up
/// to ~1e4 cannot overflow. Weights must be non-negative with positive sum.
fn weighted_logsumexp(q: &[f64], weights: Option<&[f64]>, beta: f64) -> f64 {
    let m = slice_max(q);
    let mut acc = 0.0;
    for (i, &qi) in q.iter().enumerate() {
        let w = weights.map_or(1.0, |ws| ws[i]);
        if w > 0.0 {
            acc += w * exp(beta * (qi - m));
        }
    }
    m + ln(acc) / beta
}

/// Softmax of βq with optional weights, written as a fresh vector.
fn weighted_softmax(q: &[f64], weights: Option<&[f64]>, beta: f64) -> Vec<f64> {
    let m = slice_max(q);
    let mut out: Vec<f64> = q
        .iter()
        .enumerate()
        .map(|(i, &qi)| weights.map_or(1.0, |ws| ws[i]) * exp(beta * (qi - m)))
        .collect();
    let sum: f64 = out.iter().sum();
    for x in &mut out {
        *x /= sum;
    }
    out
}

/// Entropy regularization at inverse temperature β > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Entropy {
    beta: f64,
}

impl Entropy {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter {
                what: "beta",
                value: beta,
            });
        }
        Ok(Entropy { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl PolicyRegularizer for Entropy {
    fn omega(&self, p: &[f64]) -> Result<f64> {
        let p = sanitize_simplex(p)?;
        // 0·ln 0 := 0
        let neg_entropy: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| x * ln(x)).sum();
        Ok(neg_entropy / self.beta)
    }

    fn conjugate(&self, q: &[f64]) -> Result<f64> {
        check_finite(q)?;
        Ok(weighted_logsumexp(q, None, self.beta))
    }

    fn grad_conjugate(&self, q: &[f64]) -> Result<Vec<f64>> {
        check_finite(q)?;
        Ok(weighted_softmax(q, None, self.beta))
    }

    fn strong_convexity_modulus(&self) -> f64 {
        // Negative entropy is 1-strongly convex w.r.t. ‖·‖₁ on the simplex.
        1.0 / self.beta
    }
}

/// KL regularization toward a strictly positive reference distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct KlDivergence {
    beta: f64,
    ref_dist: Vec<f64>,
}

impl KlDivergence {
    pub fn new(beta: f64, ref_dist: Vec<f64>) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter {
                what: "beta",
                value: beta,
            });
        }
        let mut sum = 0.0;
        for &x in &ref_dist {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::InvalidParameter {
                    what: "reference distribution entry",
                    value: x,
                });
            }
            sum += x;
        }
        if abs(sum - 1.0) > 1e-12 {
            return Err(Error::NotADistribution {
                what: "reference distribution",
                sum,
            });
        }
        Ok(KlDivergence { beta, ref_dist })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn ref_dist(&self) -> &[f64] {
        &self.ref_dist
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.ref_dist.len() {
            return Err(Error::DimensionMismatch {
                what: "KL regularizer action count",
                expected: self.ref_dist.len(),
                got: n,
            });
        }
        Ok(())
    }
}

impl PolicyRegularizer for KlDivergence {
    fn omega(&self, p: &[f64]) -> Result<f64> {
        self.check_len(p.len())?;
        let p = sanitize_simplex(p)?;
        let kl: f64 = p
            .iter()
            .zip(&self.ref_dist)
            .filter(|(&x, _)| x > 0.0)
            .map(|(&x, &r)| x * ln(x / r))
            .sum();
        Ok(kl / self.beta)
    }

    fn conjugate(&self, q: &[f64]) -> Result<f64> {
        self.check_len(q.len())?;
        check_finite(q)?;
        Ok(weighted_logsumexp(q, Some(&self.ref_dist), self.beta))
    }

    fn grad_conjugate(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.check_len(q.len())?;
        check_finite(q)?;
        Ok(weighted_softmax(q, Some(&self.ref_dist), self.beta))
    }

    fn strong_convexity_modulus(&self) -> f64 {
        1.0 / self.beta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entropy_point_mass_is_zero() {
        let reg = Entropy::new(1.0).unwrap();
        assert_eq!(reg.omega(&[1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_uniform_beta2() {
        let reg = Entropy::new(2.0).unwrap();
        let v = reg.omega(&[0.5, 0.5]).unwrap();
        assert!(close(v, -core::f64::consts::LN_2 / 2.0, 1e-12), "{v}");
    }

    #[test]
    fn kl_at_reference_is_zero() {
        let reg = KlDivergence::new(3.0, vec![0.25, 0.75]).unwrap();
        let v = reg.omega(&[0.25, 0.75]).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn entropy_conjugate_values() {
        let reg = Entropy::new(1.0).unwrap();
        assert!(close(
            reg.conjugate(&[0.0, 0.0]).unwrap(),
            core::f64::consts::LN_2,
            1e-12
        ));
        assert!(close(
            reg.conjugate(&[1.0, 0.0]).unwrap(),
            (1.0f64.exp() + 1.0).ln(),
            1e-12
        ));
    }

    #[test]
    fn kl_conjugate_at_zero_is_zero() {
        let reg = KlDivergence::new(1.0, vec![0.5, 0.5]).unwrap();
        assert!(reg.conjugate(&[0.0, 0.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn softmax_values() {
        let reg = Entropy::new(1.0).unwrap();
        let p = reg.grad_conjugate(&[0.0, 0.0]).unwrap();
        assert!(close(p[0], 0.5, 1e-15) && close(p[1], 0.5, 1e-15));
        let p = reg.grad_conjugate(&[1.0, 0.0]).unwrap();
        let e = 1.0f64.exp();
        assert!(close(p[0], e / (e + 1.0), 1e-12), "{}", p[0]);
        assert!(close(p[1], 1.0 / (e + 1.0), 1e-12), "{}", p[1]);
    }

    #[test]
    fn kl_constant_q_returns_reference() {
        let reg = KlDivergence::new(2.5, vec![0.9, 0.1]).unwrap();
        for c in [-4.0, 0.0, 11.0] {
            let p = reg.grad_conjugate(&[c, c]).unwrap();
            assert!(close(p[0], 0.9, 1e-12) && close(p[1], 0.1, 1e-12));
        }
    }

    #[test]
    fn no_overflow_at_large_magnitudes() {
        let reg = Entropy::new(1.0).unwrap();
        let v = reg.conjugate(&[1e4, -1e4, 0.0]).unwrap();
        assert!(v.is_finite() && close(v, 1e4, 1e-9), "{v}");
        let p = reg.grad_conjugate(&[1e4, -1e4, 0.0]).unwrap();
        assert!(p.iter().all(|x| x.is_finite()));
        assert!(close(p.iter().sum::<f64>(), 1.0, 1e-12));
    }

    #[test]
    fn rejects_bad_inputs() {
        let reg = Entropy::new(1.0).unwrap();
        assert!(matches!(
            reg.omega(&[0.7, 0.7]),
            Err(Error::NotADistribution { .. })
        ));
        assert!(matches!(
            reg.omega(&[1.1, -0.1]),
            Err(Error::NegativeMass { .. })
        ));
        assert!(matches!(
            reg.conjugate(&[f64::NAN, 0.0]),
            Err(Error::NonFiniteInput(_))
        ));
        assert!(Entropy::new(0.0).is_err());
        assert!(KlDivergence::new(1.0, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn near_simplex_input_renormalized() {
        let reg = Entropy::new(1.0).unwrap();
        // within 1e-9 of the simplex: accepted
        let v = reg.omega(&[0.5 + 4e-10, 0.5]).unwrap();
        assert!(close(v, -core::f64::consts::LN_2, 1e-8));
        // tiny negative within tolerance: clamped
        assert!(reg.omega(&[1.0 + 1e-10, -1e-10]).is_ok());
    }

    #[test]
    fn fenchel_young_equality_random() {
        let mut rng = crate::rng::RngStream::new(5150);
        let ent = Entropy::new(1.7).unwrap();
        let kl = KlDivergence::new(0.8, vec![0.2, 0.5, 0.3]).unwrap();
        for _ in 0..1000 {
            let q: Vec<f64> = (0..3).map(|_| rng.next_f64() * 20.0 - 10.0).collect();
            for reg in [&ent as &dyn PolicyRegularizer, &kl] {
                let p = reg.grad_conjugate(&q).unwrap();
                let inner: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
                let fy = inner - reg.omega(&p).unwrap();
                let conj = reg.conjugate(&q).unwrap();
                assert!(close(fy, conj, 1e-10), "{fy} vs {conj}");
            }
        }
    }

    #[test]
    fn shift_covariance_exact() {
        let reg = Entropy::new(2.0).unwrap();
        let q = [0.3, -1.2, 4.5];
        let c = 7.25; // power of two times odd: exactly representable shifts
        let shifted: Vec<f64> = q.iter().map(|x| x + c).collect();
        let a = reg.conjugate(&q).unwrap() + c;
        let b = reg.conjugate(&shifted).unwrap();
        assert!(close(a, b, 1e-12), "{a} vs {b}");
        let pa = reg.grad_conjugate(&q).unwrap();
        let pb = reg.grad_conjugate(&shifted).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn entropy_bounds() {
        let mut rng = crate::rng::RngStream::new(42);
        let beta = 3.0;
        let reg = Entropy::new(beta).unwrap();
        for _ in 0..200 {
            let q: Vec<f64> = (0..4).map(|_| rng.next_f64() * 20.0 - 10.0).collect();
            let m = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let v = reg.conjugate(&q).unwrap();
            assert!(v >= m - 1e-12);
            assert!(v <= m + (4.0f64).ln() / beta + 1e-12);
        }
    }

    #[test]
    fn single_action_conjugate_is_identity() {
        let reg = Entropy::new(0.37).unwrap();
        for q in [-3.0, 0.0, 12.5] {
            assert!(close(reg.conjugate(&[q]).unwrap(), q, 1e-12));
            assert_eq!(reg.grad_conjugate(&[q]).unwrap(), vec![1.0]);
        }
    }
}
