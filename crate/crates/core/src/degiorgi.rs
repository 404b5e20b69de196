//! The recursion-decay lemma behind the boundedness estimates.
//!
//! A nonnegative sequence with `J_{n+1} ≤ K η^n (J_n^{1+δ₁} + J_n^{1+δ₂})`
//! decays geometrically once `J₀` is below an explicit threshold:
//!
//! ```text
//! J_n ≤ min(1, (2K)^{−1/δ₁} η^{−1/δ₁²} η^{−n/δ₁})   for n ≥ n₀.
//! ```
//!
//! Traces are computed in `log₂ J` so that they survive far below the
//! smallest representable float (and stay exact when `K` and `η` are powers
//! of two).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecursionParams<T> {
    pub k: T,
    pub eta: T,
    pub delta1: T,
    pub delta2: T,
    /// `log₂ J₀`; kept in log form so that tiny thresholds stay exact.
    pub log2_j0: T,
    pub n_max: usize,
}

impl<T: Real> RecursionParams<T> {
    pub fn new(k: T, eta: T, delta1: T, delta2: T, j0: T, n_max: usize) -> Result<Self> {
        Self::with_log2_j0(k, eta, delta1, delta2, j0.log2(), n_max)
    }

    pub fn with_log2_j0(k: T, eta: T, delta1: T, delta2: T, log2_j0: T, n_max: usize) -> Result<Self> {
        let bad = |name: &'static str, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if !(k > T::zero() && k.is_finite()) {
            return bad("K", "must be positive and finite");
        }
        if !(eta > T::one() && eta.is_finite()) {
            return bad("eta", "must exceed 1");
        }
        if !(delta1 > T::zero() && delta2 >= delta1 && delta2.is_finite()) {
            return bad("delta", "needs 0 < delta1 ≤ delta2");
        }
        if log2_j0.is_nan() || log2_j0 == T::infinity() {
            return bad("J0", "must be positive and finite");
        }
        Ok(Self { k, eta, delta1, delta2, log2_j0, n_max })
    }

    pub fn j0(&self) -> T {
        self.log2_j0.exp2()
    }
}

/// Base-2 logarithms of the two threshold alternatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds<T> {
    pub log2_a: T,
    pub log2_b: T,
}

impl<T: Real> Thresholds<T> {
    pub fn a(&self) -> T {
        self.log2_a.exp2()
    }

    pub fn b(&self) -> T {
        self.log2_b.exp2()
    }
}

/// `thr_a = min(1, (2K)^{−1/δ₁} η^{−1/δ₁²})` and
/// `thr_b = min((2K)^{−1/δ₁} η^{−1/δ₁²}, (2K)^{−1/δ₂} η^{−1/(δ₁δ₂) − (δ₂−δ₁)/δ₂²})`.
pub fn threshold<T: Real>(q: &RecursionParams<T>) -> Thresholds<T> {
    let l2k = (T::lit(2.0) * q.k).log2();
    let le = q.eta.log2();
    let (d1, d2) = (q.delta1, q.delta2);
    let first = -l2k / d1 - le / (d1 * d1);
    let second = -l2k / d2 - le * (T::one() / (d1 * d2) + (d2 - d1) / (d2 * d2));
    Thresholds { log2_a: first.min(T::zero()), log2_b: first.min(second) }
}

/// `log₂` of the decay bound at step `n`.
pub fn log2_bound<T: Real>(q: &RecursionParams<T>, n: usize) -> T {
    let le = q.eta.log2();
    let d1 = q.delta1;
    let v = -(T::lit(2.0) * q.k).log2() / d1 - le / (d1 * d1) - T::from_usize_lossy(n) * le / d1;
    v.min(T::zero())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecursionTrace<T> {
    pub log2_j: Vec<T>,
    /// First index with `J_n ≤ 1`.
    pub n0: Option<usize>,
    /// The trace stopped because `J_n` left the float range.
    pub overflow: bool,
}

impl<T: Real> RecursionTrace<T> {
    pub fn j(&self) -> Vec<T> {
        self.log2_j.iter().map(|l| l.exp2()).collect()
    }
}

/// `log₂(K η^n (J^{1+δ₁} + J^{1+δ₂}))` from `L = log₂ J`.
fn step_log<T: Real>(q: &RecursionParams<T>, n: usize, l: T) -> T {
    if l == T::neg_infinity() {
        return l;
    }
    let gap = (q.delta2 - q.delta1) * l;
    // log₂(2^{(1+δ₁)L} + 2^{(1+δ₂)L}) without overflow
    let mix = if gap == T::zero() {
        T::one()
    } else if gap > T::zero() {
        gap + (-gap).exp2().ln_1p() / T::LN_2()
    } else {
        gap.exp2().ln_1p() / T::LN_2()
    };
    q.k.log2() + T::from_usize_lossy(n) * q.eta.log2() + (T::one() + q.delta1) * l + mix
}

const LOG2_OVERFLOW: f64 = 1000.0;

/// Runs a recursion that is the worst case scaled by `slack(n) ∈ (0, 1]`.
pub fn simulate_with_slack<T: Real>(q: &RecursionParams<T>, mut slack: impl FnMut(usize) -> T) -> RecursionTrace<T> {
    let mut log2_j = Vec::with_capacity(q.n_max + 1);
    log2_j.push(q.log2_j0);
    let mut overflow = false;
    for n in 0..q.n_max {
        let l = *log2_j.last().unwrap();
        let next = step_log(q, n, l) + slack(n).log2();
        if next > T::lit(LOG2_OVERFLOW) {
            overflow = true;
            break;
        }
        log2_j.push(next);
    }
    let n0 = log2_j.iter().position(|&l| l <= T::zero());
    RecursionTrace { log2_j, n0, overflow }
}

/// The equality recursion `J_{n+1} = K η^n (J_n^{1+δ₁} + J_n^{1+δ₂})`.
pub fn simulate<T: Real>(q: &RecursionParams<T>) -> RecursionTrace<T> {
    simulate_with_slack(q, |_| T::one())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck<T> {
    pub holds: bool,
    /// First index at which the trace exceeds the bound.
    pub counterexample: Option<usize>,
    pub n0: Option<usize>,
    /// `min_n (log₂ bound − log₂ J_n)` over the checked range.
    pub min_log2_margin: T,
}

/// Checks the decay bound on the equality trace for `n₀ ≤ n ≤ n_max`.
/// Errors if `J₀` meets neither threshold alternative.
pub fn verify_bound<T: Real>(q: &RecursionParams<T>) -> Result<BoundCheck<T>> {
    let thr = threshold(q);
    let slack = T::lit(1e-12) * (T::one() + q.log2_j0.abs());
    if !(q.log2_j0 <= thr.log2_a + slack || q.log2_j0 <= thr.log2_b + slack) {
        return Err(Error::InvalidParameter {
            name: "J0",
            reason: format!("J0 = {} exceeds both thresholds ({}, {})", q.j0(), thr.a(), thr.b()),
        });
    }
    let trace = simulate(q);
    let Some(n0) = trace.n0 else {
        return Ok(BoundCheck { holds: false, counterexample: Some(trace.log2_j.len() - 1), n0: None, min_log2_margin: T::neg_infinity() });
    };
    let mut margin = T::infinity();
    let mut counterexample = None;
    for (n, &l) in trace.log2_j.iter().enumerate().skip(n0) {
        let b = log2_bound(q, n);
        let m = b - l;
        if m < margin {
            margin = m;
        }
        // round-off in log space grows with |log J|
        let tol = T::lit(1e-10) * (T::one() + b.abs() + l.abs());
        if counterexample.is_none() && m < -tol {
            counterexample = Some(n);
        }
    }
    if trace.overflow && counterexample.is_none() {
        counterexample = Some(trace.log2_j.len());
    }
    Ok(BoundCheck { holds: counterexample.is_none(), counterexample, n0: Some(n0), min_log2_margin: margin })
}

/// Which threshold the sweep places `J₀` under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample<T> {
    pub draw: usize,
    pub params: RecursionParams<T>,
    pub index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport<T> {
    pub draws: usize,
    pub alternative: Alternative,
    pub counterexamples: Vec<Counterexample<T>>,
    /// Largest `n₀` met; every draw found one when `missing_n0 == 0`.
    pub max_n0: usize,
    pub missing_n0: usize,
}

/// Draw `i` of a seeded sweep: `K` log-uniform in `[1e−2, 1e3]`,
/// `η` uniform in `(1, 10]`, `δ₁ ≤ δ₂` sorted uniforms in `(0, 3]`,
/// `J₀ = 0.99 ·` the chosen threshold.
pub fn sweep_draw<T: Real>(seed: u64, i: usize, alternative: Alternative, n_max: usize) -> RecursionParams<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let k = 10f64.powf(rng.gen_range(-2.0..=3.0));
    let eta = 10.0 - rng.gen_range(0.0..9.0);
    let a = 3.0 - rng.gen_range(0.0..3.0);
    let b = 3.0 - rng.gen_range(0.0..3.0);
    let (d1, d2) = if a <= b { (a, b) } else { (b, a) };
    let base = RecursionParams::with_log2_j0(T::lit(k), T::lit(eta), T::lit(d1), T::lit(d2), T::zero(), n_max).expect("draws are valid");
    let thr = threshold(&base);
    let log_thr = match alternative {
        Alternative::A => thr.log2_a,
        Alternative::B => thr.log2_b,
    };
    RecursionParams { log2_j0: log_thr + T::lit(0.99f64.log2()), ..base }
}

/// Runs `draws` seeded draws in parallel and collects counterexamples.
pub fn sweep<T: Real>(draws: usize, seed: u64, alternative: Alternative, n_max: usize) -> SweepReport<T> {
    let results: Vec<(usize, RecursionParams<T>, Result<BoundCheck<T>>)> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let q = sweep_draw(seed, i, alternative, n_max);
            (i, q, verify_bound(&q))
        })
        .collect();
    let mut counterexamples = Vec::new();
    let mut max_n0 = 0;
    let mut missing_n0 = 0;
    for (draw, params, res) in results {
        match res {
            Ok(check) => {
                match check.n0 {
                    Some(n0) => max_n0 = max_n0.max(n0),
                    None => missing_n0 += 1,
                }
                if !check.holds {
                    counterexamples.push(Counterexample { draw, params, index: check.counterexample });
                }
            }
            Err(_) => counterexamples.push(Counterexample { draw, params, index: None }),
        }
    }
    SweepReport { draws, alternative, counterexamples, max_n0, missing_n0 }
}

/// Outcome of starting just above the threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessProbe<T> {
    pub factor: T,
    /// The trace reached `J_n ≤ 1` and kept decreasing to the end.
    pub decays: bool,
    /// Largest `log₂ J_n − log₂ bound_n` after `n₀` (positive = bound broken).
    pub max_log2_excess: T,
    pub steps: usize,
}

/// Starts at `thr_a · factor` and records how the trace behaves. The lemma
/// is one-directional, so this measures rather than asserts.
pub fn sharpness_probe<T: Real>(q: &RecursionParams<T>, factor: T) -> SharpnessProbe<T> {
    let thr = threshold(q);
    let probe = RecursionParams { log2_j0: thr.log2_a + factor.log2(), ..*q };
    let trace = simulate(&probe);
    let start = trace.n0.unwrap_or(0);
    let excess = trace.log2_j.iter().enumerate().skip(start).map(|(n, &l)| l - log2_bound(&probe, n)).fold(T::neg_infinity(), T::max);
    let tail_decreasing = trace.log2_j.windows(2).rev().take(5).all(|w| w[1] < w[0]);
    SharpnessProbe {
        factor,
        decays: trace.n0.is_some() && !trace.overflow && tail_decreasing,
        max_log2_excess: excess,
        steps: trace.log2_j.len() - 1,
    }
}
