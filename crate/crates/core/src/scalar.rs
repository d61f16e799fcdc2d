//! Scalar abstractions.
//!
//! Polynomial evaluation only needs ring operations plus a way to embed the
//! exact rational coefficients, so it runs over `f32`, `f64` and
//! [`BigRational`] alike. The optimizer additionally needs ordering, `sqrt`
//! and friends, which is what [`Real`] adds on top.

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// A number type that polynomials with rational coefficients can be
/// evaluated in.
pub trait Scalar: Num + Clone + PartialOrd + Debug {
    /// Embeds an exact rational, rounding if the type is inexact.
    fn from_rational(q: &BigRational) -> Self;

    /// Lossy conversion used for reporting.
    fn to_f64_lossy(&self) -> f64;
}

/// Floating point scalars usable by the simplex optimizer.
pub trait Real: Scalar + Float + FromPrimitive + Send + Sync + 'static {
    /// Absolute slack allowed on the coordinate sum of a simplex point.
    fn simplex_tol() -> Self;

    /// Coordinates below this are treated as exactly zero.
    fn support_floor() -> Self;

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }
}

impl Scalar for f64 {
    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q) as f32
    }

    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigRational {
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn to_f64_lossy(&self) -> f64 {
        rational_to_f64(self)
    }
}

impl Real for f64 {
    fn simplex_tol() -> Self {
        1e-12
    }

    fn support_floor() -> Self {
        1e-14
    }
}

impl Real for f32 {
    fn simplex_tol() -> Self {
        1e-5
    }

    fn support_floor() -> Self {
        1e-7
    }
}

/// Converts a big rational to the nearest-ish `f64`, staying finite for huge
/// numerators and denominators where a naive `num / den` would overflow.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000) as usize;
    let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Exact rational for a finite `f64` (every finite double is a dyadic rational).
pub fn f64_to_rational(v: f64) -> Option<BigRational> {
    BigRational::from_float(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn big(n: u64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn rational_round_trip() {
        let q = BigRational::new(big(2), big(9));
        assert!((f64::from_rational(&q) - 2.0 / 9.0).abs() < 1e-16);
        assert!((f32::from_rational(&q) - 2.0f32 / 9.0).abs() < 1e-7);
        assert_eq!(BigRational::from_rational(&q), q);
    }

    #[test]
    fn huge_rational_stays_finite() {
        let n = BigInt::from(3u8) * (BigInt::from(1u8) << 2000usize);
        let d = BigInt::from(1u8) << 2000usize;
        let q = BigRational::new(n, d);
        assert!((rational_to_f64(&q) - 3.0).abs() < 1e-12);
    }
}
