use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the numerics are written against.
///
/// Implemented for `f32` and `f64`. Tolerance defaults differ per type since
/// the quadrature and shooting targets only make sense relative to the unit
/// roundoff.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Default relative tolerance for integrals and eigenvalue bisection.
    fn default_tol() -> Self;

    /// Tolerance used when comparing exponents against critical values.
    fn exponent_eps() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn default_tol() -> Self {
        1e-10
    }
    fn exponent_eps() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn default_tol() -> Self {
        1e-5
    }
    fn exponent_eps() -> Self {
        1e-5
    }
}

/// `|x|^{q-2} x`, with the value at `x = 0` taken as 0 for every `q > 1`.
#[inline]
pub fn signed_pow<T: Real>(x: T, q: T) -> T {
    if x == T::zero() {
        T::zero()
    } else {
        x.signum() * x.abs().powf(q - T::one())
    }
}

/// Hölder conjugate `p / (p - 1)`.
#[inline]
pub fn conjugate<T: Real>(p: T) -> T {
    p / (p - T::one())
}

/// True when `a` and `b` agree to the exponent comparison tolerance.
#[inline]
pub(crate) fn exp_eq<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= T::exponent_eps() * (T::one() + a.abs().max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_pow_is_odd_and_vanishes_at_zero() {
        assert_eq!(signed_pow(0.0_f64, 1.5), 0.0);
        assert_eq!(signed_pow(0.0_f64, 3.0), 0.0);
        assert!((signed_pow(-4.0_f64, 1.5) + 2.0).abs() < 1e-15);
        assert!((signed_pow(4.0_f64, 3.0) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn conjugate_exponent() {
        assert_eq!(conjugate(2.0_f64), 2.0);
        assert!((conjugate(3.0_f64) - 1.5).abs() < 1e-15);
        assert!((conjugate(1.5_f32) - 3.0).abs() < 1e-6);
    }
}
