//! Scalar math shims so the crate builds with or without `std`.

#[cfg(feature = "std")]
#[inline(always)]
pub(crate) fn exp(x: f64) -> f64 {
    x.exp()
}

#[cfg(all(not(feature = "std"), feature = "libm"))]
#[inline(always)]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[cfg(feature = "std")]
#[inline(always)]
pub(crate) fn ln(x: f64) -> f64 {
    x.ln()
}

#[cfg(all(not(feature = "std"), feature = "libm"))]
#[inline(always)]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// |x| without relying on `std`: clears the sign bit.
#[inline(always)]
pub(crate) fn abs(x: f64) -> f64 {
    f64::from_bits(x.to_bits() & 0x7fff_ffff_ffff_ffff)
}

/// x^y for x > 0 via exp(y ln x); used by polynomial learning rates.
#[inline(always)]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    exp(y * ln(x))
}

/// Max over a slice, −∞ if empty. Callers validate finiteness upstream.
#[inline]
pub(crate) fn slice_max(xs: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        if x > m {
            m = x;
        }
    }
    m
}

/// ℓ∞ distance between two equal-length slices.
#[inline]
pub(crate) fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut m = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let d = abs(x - y);
        if d > m {
            m = d;
        }
    }
    m
}

/// ℓ₁ distance between two equal-length slices.
#[inline]
pub(crate) fn l1_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| abs(x - y)).sum()
}
