//! Concrete problem instances.
//!
//! The model problems come with admissible parameter *ranges*; each preset
//! fixes documented defaults inside those ranges and exposes a parameter
//! struct for variations. Pieces may meet with bounded jumps.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::weights::{PowerLogPiece, ProblemSpec, WeightModel};

fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

fn inf<T: Real>() -> T {
    T::infinity()
}

/// Degenerate weight at `R₁ = 1` on `(1, ∞)`:
/// `v = (r − 1)^α`, `w = (r − 1)^δ` on `(1, 2)` and `w = r^{tail}` beyond
/// (a bounded jump at 2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ex61Params {
    pub n: u32,
    pub p: f64,
    pub alpha: f64,
    pub delta: f64,
    pub tail: f64,
}

impl Default for Ex61Params {
    fn default() -> Self {
        Self { n: 3, p: 2.0, alpha: 0.5, delta: -0.25, tail: -4.0 }
    }
}

impl Ex61Params {
    /// Exponent of the boundary profile at `R₁`: `(p − 1 − α)/(p − 1)`.
    pub fn left_exponent(&self) -> f64 {
        (self.p - 1.0 - self.alpha) / (self.p - 1.0)
    }

    /// Decay exponent at infinity: `−(N − p + α)/(p − 1)`.
    pub fn right_exponent(&self) -> f64 {
        -(self.n as f64 - self.p + self.alpha) / (self.p - 1.0)
    }
}

pub fn ex61<T: Real>() -> ProblemSpec<T> {
    ex61_with(&Ex61Params::default()).expect("default parameters are admissible")
}

pub fn ex61_with<T: Real>(q: &Ex61Params) -> Result<ProblemSpec<T>> {
    if !(q.alpha >= 0.0 && q.alpha < q.p - 1.0) {
        return Err(Error::InvalidParameter { name: "alpha", reason: format!("{} must lie in [0, p − 1)", q.alpha) });
    }
    if !(q.p < q.n as f64 + q.alpha) {
        return Err(Error::InvalidParameter { name: "p", reason: "decay at infinity needs p < N + alpha".into() });
    }
    if !(q.delta > -1.0) {
        return Err(Error::InvalidParameter { name: "delta", reason: format!("{} must exceed −1 for local integrability", q.delta) });
    }
    let one = T::one();
    let two = lit::<T>(2.0);
    let v = WeightModel::new(one, vec![PowerLogPiece::shifted_power(one, inf(), one, lit(q.alpha))])?;
    let w = WeightModel::new(
        one,
        vec![
            PowerLogPiece::shifted_power(one, two, one, lit(q.delta)),
            PowerLogPiece::power(two, inf(), one, lit(q.tail)),
        ],
    )?;
    ProblemSpec::new(q.n, lit(q.p), one, inf(), v, w)
}

/// Singular weight at `R₁ = 1` on `(1, ∞)`: `v = (r − 1)^α` with
/// `p − N < α < 0`, `w = 1` on `(1, 2)` and `w = r^{tail}` beyond.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ex62Params {
    pub n: u32,
    pub p: f64,
    pub alpha: f64,
    pub tail: f64,
}

impl Default for Ex62Params {
    fn default() -> Self {
        Self { n: 3, p: 2.0, alpha: -0.5, tail: -4.0 }
    }
}

impl Ex62Params {
    pub fn left_exponent(&self) -> f64 {
        (self.p - 1.0 - self.alpha) / (self.p - 1.0)
    }

    pub fn right_exponent(&self) -> f64 {
        -(self.n as f64 - self.p + self.alpha) / (self.p - 1.0)
    }
}

pub fn ex62<T: Real>() -> ProblemSpec<T> {
    ex62_with(&Ex62Params::default()).expect("default parameters are admissible")
}

pub fn ex62_with<T: Real>(q: &Ex62Params) -> Result<ProblemSpec<T>> {
    if !(q.alpha < 0.0 && q.alpha > q.p - q.n as f64) {
        return Err(Error::InvalidParameter { name: "alpha", reason: format!("{} must lie in (p − N, 0)", q.alpha) });
    }
    if !(q.tail + q.p - q.alpha < -1.0) {
        return Err(Error::InvalidParameter { name: "tail", reason: "w must be integrable against (r − 1)^(p−1−α)".into() });
    }
    let one = T::one();
    let two = lit::<T>(2.0);
    let v = WeightModel::new(one, vec![PowerLogPiece::shifted_power(one, inf(), one, lit(q.alpha))])?;
    let w = WeightModel::new(
        one,
        vec![PowerLogPiece::constant(one, two, one), PowerLogPiece::power(two, inf(), one, lit(q.tail))],
    )?;
    ProblemSpec::new(q.n, lit(q.p), one, inf(), v, w)
}

/// `v ≡ 1` on `(1, ∞)` with `w = (r − 1)^β`, `−p < β ≤ −1`, on `(1, 2)` and
/// a continuous `r^{−p−2}` tail. Defaults: `N = 3`, `p = 2`, `β = −1.5`.
pub fn rmk22<T: Real>() -> ProblemSpec<T> {
    rmk22_with(3, 2.0, -1.5).expect("default parameters are admissible")
}

pub fn rmk22_with<T: Real>(n: u32, p: f64, beta: f64) -> Result<ProblemSpec<T>> {
    if !(beta > -p && beta <= -1.0) {
        return Err(Error::InvalidParameter { name: "beta", reason: format!("{beta} must lie in (−p, −1]") });
    }
    let one = T::one();
    let two = lit::<T>(2.0);
    let tail = -p - 2.0;
    let v = WeightModel::constant(one, inf(), one)?;
    let w = WeightModel::new(
        one,
        vec![PowerLogPiece::shifted_power(one, two, one, lit(beta)), PowerLogPiece::power(two, inf(), lit(2f64.powf(-tail)), lit(tail))],
    )?;
    ProblemSpec::new(n, lit(p), one, inf(), v, w)
}

/// Weights satisfying the exterior condition W1 but not (OK):
///
/// ```text
/// v = (r − 1)^α on [1, 2),  v ∈ [1, 3^β] on [2, 3),  v = r^β on [3, ∞)
/// w = (r − 1)^{α₁} on [1, 2), w ∈ [3^{β₁}, 1] on [2, 3), w = r^{β₁} on [3, ∞)
/// ```
///
/// with `1 < p < N`, `α < p − 1`, `β ≥ 0`, `α − p < α₁ ≤ −1`,
/// `−N ≤ β₁ < −p`. The bands are represented by their geometric means.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rmk23Params {
    pub n: u32,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha1: f64,
    pub beta1: f64,
}

impl Default for Rmk23Params {
    fn default() -> Self {
        Self { n: 3, p: 2.0, alpha: 0.5, beta: 1.0, alpha1: -1.0, beta1: -3.0 }
    }
}

impl Rmk23Params {
    pub fn validate(&self) -> Result<()> {
        let n = self.n as f64;
        let bad = |name: &'static str, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if !(self.p > 1.0 && self.p < n) {
            return bad("p", "needs 1 < p < N");
        }
        if !(self.alpha < self.p - 1.0) {
            return bad("alpha", "needs alpha < p − 1");
        }
        if !(self.beta >= 0.0) {
            return bad("beta", "needs beta ≥ 0");
        }
        if !(self.alpha1 > self.alpha - self.p && self.alpha1 <= -1.0) {
            return bad("alpha1", "needs alpha − p < alpha1 ≤ −1");
        }
        if !(self.beta1 >= -n && self.beta1 < -self.p) {
            return bad("beta1", "needs −N ≤ beta1 < −p");
        }
        Ok(())
    }

    /// A draw from the admissible ranges, kept a little away from the open
    /// ends: `N ∈ {3, 4, 5}`, `p ∈ [1.2, N − 0.2]`, `α ∈ [−0.5, p − 1.1]`,
    /// `β ∈ [0, 2]`, `α₁ ∈ [α − p + 0.05, −1]`, `β₁ ∈ [−N, −p − 0.05]`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let n: u32 = rng.gen_range(3..=5);
        let nf = n as f64;
        let p = rng.gen_range(1.2..=nf - 0.2);
        let alpha = rng.gen_range(-0.5..=(p - 1.1).max(-0.5));
        let beta = rng.gen_range(0.0..=2.0);
        let alpha1 = rng.gen_range((alpha - p + 0.05)..=-1.0);
        let beta1 = rng.gen_range(-nf..=(-p - 0.05));
        Self { n, p, alpha, beta, alpha1, beta1 }
    }
}

pub fn rmk23<T: Real>() -> ProblemSpec<T> {
    rmk23_with(&Rmk23Params::default()).expect("default parameters are admissible")
}

pub fn rmk23_with<T: Real>(q: &Rmk23Params) -> Result<ProblemSpec<T>> {
    q.validate()?;
    let (one, two, three) = (T::one(), lit::<T>(2.0), lit::<T>(3.0));
    let v = WeightModel::new(
        one,
        vec![
            PowerLogPiece::shifted_power(one, two, one, lit(q.alpha)),
            PowerLogPiece::band(two, three, one, lit(3f64.powf(q.beta))),
            PowerLogPiece::power(three, inf(), one, lit(q.beta)),
        ],
    )?;
    let w = WeightModel::new(
        one,
        vec![
            PowerLogPiece::shifted_power(one, two, one, lit(q.alpha1)),
            PowerLogPiece::band(two, three, lit(3f64.powf(q.beta1)), one),
            PowerLogPiece::power(three, inf(), one, lit(q.beta1)),
        ],
    )?;
    ProblemSpec::new(q.n, lit(q.p), one, inf(), v, w)
}

/// `v = w ≡ 1`, `N = 1`, `p = 2` on `(1, 2)`: `λ₁ = π²`, `u = sin(π(r − 1))`.
pub fn annulus_trivial<T: Real>() -> ProblemSpec<T> {
    annulus(1, 2.0).expect("valid")
}

/// `v = w ≡ 1`, `N = 3`, `p = 2` on `(1, 2)`: `λ₁ = π²`, `u = sin(π(r − 1))/r`.
pub fn annulus_n3<T: Real>() -> ProblemSpec<T> {
    annulus(3, 2.0).expect("valid")
}

/// `v = w ≡ 1` on `(1, 2)`.
pub fn annulus<T: Real>(n: u32, p: f64) -> Result<ProblemSpec<T>> {
    let (one, two) = (T::one(), lit::<T>(2.0));
    ProblemSpec::new(n, lit(p), one, two, WeightModel::constant(one, two, one)?, WeightModel::constant(one, two, one)?)
}

/// `v ≡ 1`, `w = r^{−p−extra}` on `(1, ∞)`; condition (A) holds iff `extra > 0`.
pub fn critical_tail<T: Real>(n: u32, p: f64, extra: f64) -> Result<ProblemSpec<T>> {
    let one = T::one();
    ProblemSpec::new(
        n,
        lit(p),
        one,
        inf(),
        WeightModel::constant(one, inf(), one)?,
        WeightModel::new(one, vec![PowerLogPiece::power(one, inf(), one, lit(-p - extra))])?,
    )
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 7] = ["ex61", "ex62", "rmk22", "rmk23", "annulus-trivial", "annulus-n3", "critical-tail"];

/// Preset with default parameters by name.
pub fn by_name<T: Real>(name: &str) -> Option<ProblemSpec<T>> {
    Some(match name {
        "ex61" => ex61(),
        "ex62" => ex62(),
        "rmk22" => rmk22(),
        "rmk23" => rmk23(),
        "annulus-trivial" => annulus_trivial(),
        "annulus-n3" => annulus_n3(),
        "critical-tail" => critical_tail(3, 2.0, 0.0).ok()?,
        _ => return None,
    })
}
