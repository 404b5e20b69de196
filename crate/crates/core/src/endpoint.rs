//! Exponent bookkeeping for power–log behaviour at a domain endpoint.
//!
//! Near `R₁` a function behaves like `x^power · |log x|^log` with
//! `x = r − R₁ → 0⁺`; near infinity like `r^power · (log r)^log`. Products,
//! powers and one-sided integrals of such asymptotes are again of this form
//! (up to a positive constant), which makes every integrability question on
//! the weight family decidable from exponents alone.

use serde::Serialize;

use crate::scalar::{exp_eq, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    /// `r → R₁⁺`.
    Left,
    /// `r → R₂⁻` with `R₂` finite.
    RightFinite,
    /// `r → ∞`.
    Infinity,
}

/// Asymptotic shape `x^power |log x|^log` at an endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerLog<T> {
    pub power: T,
    pub log: T,
}

impl<T: Real> PowerLog<T> {
    pub fn new(power: T, log: T) -> Self {
        Self { power, log }
    }

    /// A positive constant.
    pub fn constant() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn times(self, other: Self) -> Self {
        Self::new(self.power + other.power, self.log + other.log)
    }

    pub fn powf(self, k: T) -> Self {
        Self::new(self.power * k, self.log * k)
    }

    /// Multiplies by `r^k`. Only the left endpoint of a domain starting at 0
    /// sees this factor as singular.
    pub fn times_r_power(self, k: T, at: Endpoint, origin: T) -> Self {
        match at {
            Endpoint::Left if origin == T::zero() => Self::new(self.power + k, self.log),
            Endpoint::Infinity => Self::new(self.power + k, self.log),
            _ => self,
        }
    }

    /// Sign of the growth as the endpoint is approached: `+1` unbounded,
    /// `0` tends to a positive constant, `-1` tends to zero.
    pub fn trend(self, at: Endpoint) -> i8 {
        // Near a finite endpoint the distance to it shrinks, so negative powers
        // grow; near ∞ positive powers grow.
        let dir = if at == Endpoint::Infinity { 1 } else { -1 };
        trend_from(self.power, self.log, dir)
    }

    pub fn tends_to_zero(self, at: Endpoint) -> bool {
        self.trend(at) < 0
    }

    pub fn is_bounded(self, at: Endpoint) -> bool {
        self.trend(at) <= 0
    }

    /// Whether the function is integrable up to the endpoint.
    pub fn is_integrable(self, at: Endpoint) -> bool {
        let crit = -T::one();
        match at {
            Endpoint::Left | Endpoint::RightFinite => {
                if exp_eq(self.power, crit) {
                    self.log < crit && !exp_eq(self.log, crit)
                } else {
                    self.power > crit
                }
            }
            Endpoint::Infinity => {
                if exp_eq(self.power, crit) {
                    self.log < crit && !exp_eq(self.log, crit)
                } else {
                    self.power < crit
                }
            }
        }
    }

    /// Shape of the integral taken from the endpoint (`∫_{R₁}^r` near the
    /// left, `∫_r^∞` at infinity). `None` if the integral diverges.
    pub fn integral_from_endpoint(self, at: Endpoint) -> Option<Self> {
        if !self.is_integrable(at) {
            return None;
        }
        if exp_eq(self.power, -T::one()) {
            Some(Self::new(T::zero(), self.log + T::one()))
        } else {
            Some(Self::new(self.power + T::one(), self.log))
        }
    }

    /// Shape of the integral taken from a fixed interior point towards the
    /// endpoint (`∫_r^ξ` near the left, `∫_ξ^r` at infinity). Convergent
    /// integrals tend to a positive constant. `None` marks the doubly
    /// critical `log log` growth, which this calculus does not represent.
    pub fn integral_toward_endpoint(self, at: Endpoint) -> Option<Self> {
        if self.is_integrable(at) {
            return Some(Self::constant());
        }
        if exp_eq(self.power, -T::one()) {
            if exp_eq(self.log, -T::one()) {
                None
            } else {
                Some(Self::new(T::zero(), self.log + T::one()))
            }
        } else {
            Some(Self::new(self.power + T::one(), self.log))
        }
    }
}

fn trend_from<T: Real>(power: T, log: T, dir: i8) -> i8 {
    let dir_t = if dir > 0 { T::one() } else { -T::one() };
    if !exp_eq(power, T::zero()) {
        return if power * dir_t > T::zero() { 1 } else { -1 };
    }
    if exp_eq(log, T::zero()) {
        0
    } else if log > T::zero() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_integrability_threshold() {
        for (g, ok) in [(-2.0, false), (-1.5, false), (-1.0, false), (-0.999, true), (-0.5, true), (0.0, true)] {
            assert_eq!(PowerLog::new(g, 0.0).is_integrable(Endpoint::Left), ok, "gamma = {g}");
        }
        assert!(PowerLog::new(-1.0, -2.0).is_integrable(Endpoint::Left));
        assert!(!PowerLog::new(-1.0, -1.0).is_integrable(Endpoint::Left));
    }

    #[test]
    fn tail_integrability_threshold() {
        assert!(PowerLog::new(-2.0, 0.0).is_integrable(Endpoint::Infinity));
        assert!(!PowerLog::new(-1.0, 0.0).is_integrable(Endpoint::Infinity));
        assert!(PowerLog::new(-1.0, -2.0).is_integrable(Endpoint::Infinity));
        assert!(!PowerLog::new(-0.5, -5.0).is_integrable(Endpoint::Infinity));
    }

    #[test]
    fn integrals_shift_exponents() {
        let f = PowerLog::new(-0.5, 0.0);
        assert_eq!(f.integral_from_endpoint(Endpoint::Left), Some(PowerLog::new(0.5, 0.0)));
        let g = PowerLog::new(-2.0, 0.0);
        assert_eq!(g.integral_toward_endpoint(Endpoint::Left), Some(PowerLog::new(-1.0, 0.0)));
        assert_eq!(g.integral_from_endpoint(Endpoint::Infinity), Some(PowerLog::new(-1.0, 0.0)));
        let h = PowerLog::new(-1.0, 0.0);
        assert_eq!(h.integral_toward_endpoint(Endpoint::Left), Some(PowerLog::new(0.0, 1.0)));
        assert_eq!(PowerLog::new(-1.0, -1.0).integral_toward_endpoint(Endpoint::Infinity), None);
    }

    #[test]
    fn trends() {
        assert!(PowerLog::new(0.5, 0.0).tends_to_zero(Endpoint::Left));
        assert!(!PowerLog::new(0.5, 0.0).is_bounded(Endpoint::Infinity));
        assert!(PowerLog::new(0.0, -1.0).tends_to_zero(Endpoint::Left));
        assert!(PowerLog::new(0.0, 0.0).is_bounded(Endpoint::Left));
        assert!(!PowerLog::new(0.0, 0.0).tends_to_zero(Endpoint::Left));
        assert!(PowerLog::new(-1.5, 3.0).tends_to_zero(Endpoint::Infinity));
        assert!(PowerLog::new(1.0, 0.0).tends_to_zero(Endpoint::RightFinite));
    }
}
