//! Radial weights as piecewise power–log functions.
//!
//! A piece is `c · (r − R₁)^a · r^b · (log r)^l` on an interval `[lo, hi)`.
//! A [`WeightModel`] tiles `(R₁, R₂)` with such pieces; a [`ProblemSpec`]
//! bundles two models (`v` for the operator, `w` for the spectral term) with
//! the dimension `N` and exponent `p`, and from them derives
//! `ρ(r) = r^{N−1} v(r)` and `σ(r) = r^{N−1} w(r)`.

use serde::{Deserialize, Serialize};

use crate::endpoint::{Endpoint, PowerLog};
use crate::error::{Error, Result};
use crate::scalar::{conjugate, Real};

/// One power–log factor on `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct PowerLogPiece<T> {
    #[serde(with = "radius")]
    pub lo: T,
    #[serde(with = "radius")]
    pub hi: T,
    #[serde(default = "one")]
    pub c: T,
    #[serde(default)]
    pub a: T,
    #[serde(default)]
    pub b: T,
    #[serde(default)]
    pub l: T,
}

fn one<T: Real>() -> T {
    T::one()
}

impl<T: Real> PowerLogPiece<T> {
    pub fn new(lo: T, hi: T, c: T, a: T, b: T, l: T) -> Self {
        Self { lo, hi, c, a, b, l }
    }

    pub fn constant(lo: T, hi: T, c: T) -> Self {
        Self::new(lo, hi, c, T::zero(), T::zero(), T::zero())
    }

    /// `c · (r − R₁)^a`.
    pub fn shifted_power(lo: T, hi: T, c: T, a: T) -> Self {
        Self::new(lo, hi, c, a, T::zero(), T::zero())
    }

    /// `c · r^b`.
    pub fn power(lo: T, hi: T, c: T, b: T) -> Self {
        Self::new(lo, hi, c, T::zero(), b, T::zero())
    }

    /// Constant piece standing in for a weight only known to lie in
    /// `[min, max]` on the interval; takes the geometric mean of the band.
    pub fn band(lo: T, hi: T, min: T, max: T) -> Self {
        Self::constant(lo, hi, (min * max).sqrt())
    }

    pub fn has_log(&self) -> bool {
        self.l != T::zero()
    }

    /// Value at `r = origin + x`. The offset is passed separately so that
    /// `(r − R₁)^a` stays accurate when `x` is far below the resolution of `r`.
    #[inline]
    pub fn value_at_offset(&self, origin: T, x: T) -> T {
        let r = origin + x;
        let mut v = self.c;
        if self.a != T::zero() {
            v = v * x.powf(self.a);
        }
        if self.b != T::zero() {
            v = v * r.powf(self.b);
        }
        if self.l != T::zero() {
            let lr = if origin == T::one() { x.ln_1p() } else { r.ln() };
            v = v * lr.powf(self.l);
        }
        v
    }

    #[inline]
    pub fn value(&self, origin: T, r: T) -> T {
        self.value_at_offset(origin, r - origin)
    }

    /// The piece raised to the power `k`.
    pub fn powf(&self, k: T) -> Self {
        Self { lo: self.lo, hi: self.hi, c: self.c.powf(k), a: self.a * k, b: self.b * k, l: self.l * k }
    }

    /// The piece multiplied by `r^k`.
    pub fn times_r_power(&self, k: T) -> Self {
        Self { b: self.b + k, ..self.clone() }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { c: self.c * s, ..self.clone() }
    }

    fn contains(&self, r: T) -> bool {
        self.lo <= r && r < self.hi
    }
}

/// Piecewise power–log weight tiling `(R₁, R₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightModel<T> {
    origin: T,
    pieces: Vec<PowerLogPiece<T>>,
    continuity: Vec<bool>,
}

impl<T: Real> WeightModel<T> {
    /// Builds and validates a model whose first piece starts at `origin = R₁`.
    pub fn new(origin: T, pieces: Vec<PowerLogPiece<T>>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidWeight("no pieces".into()));
        }
        if !origin.is_finite() || origin < T::zero() {
            return Err(Error::InvalidWeight(format!("origin {origin} must be finite and nonnegative")));
        }
        if pieces[0].lo != origin {
            return Err(Error::InvalidWeight(format!(
                "first piece starts at {} but R1 = {origin}",
                pieces[0].lo
            )));
        }
        for (i, piece) in pieces.iter().enumerate() {
            if !(piece.c > T::zero()) || !piece.c.is_finite() {
                return Err(Error::InvalidWeight(format!("piece {i}: scale c = {} must be positive", piece.c)));
            }
            if !(piece.lo < piece.hi) || !piece.lo.is_finite() {
                return Err(Error::InvalidWeight(format!("piece {i}: empty interval [{}, {})", piece.lo, piece.hi)));
            }
            if ![piece.a, piece.b, piece.l].iter().all(|e| e.is_finite()) {
                return Err(Error::InvalidWeight(format!("piece {i}: exponents must be finite")));
            }
            if piece.has_log() {
                let allowed = piece.lo > T::one() || (piece.lo == T::one() && origin == T::one());
                if !allowed {
                    return Err(Error::InvalidWeight(format!(
                        "piece {i}: log factor requires lo > 1 (or lo = R1 = 1), got lo = {}",
                        piece.lo
                    )));
                }
            }
            if i + 1 < pieces.len() {
                if piece.hi != pieces[i + 1].lo {
                    return Err(Error::InvalidWeight(format!(
                        "pieces {i} and {} do not tile: {} != {}",
                        i + 1,
                        piece.hi,
                        pieces[i + 1].lo
                    )));
                }
                if !piece.hi.is_finite() {
                    return Err(Error::InvalidWeight(format!("piece {i} extends to infinity but is not last")));
                }
            }
        }
        let continuity = pieces
            .windows(2)
            .map(|w| {
                let r = w[0].hi;
                let left = w[0].value(origin, r);
                let right = w[1].value(origin, r);
                (left - right).abs() <= T::lit(1e-12) * left.abs().max(right.abs())
            })
            .collect();
        Ok(Self { origin, pieces, continuity })
    }

    /// Single piece covering the whole domain.
    pub fn single(origin: T, hi: T, c: T, a: T, b: T, l: T) -> Result<Self> {
        Self::new(origin, vec![PowerLogPiece::new(origin, hi, c, a, b, l)])
    }

    pub fn constant(origin: T, hi: T, c: T) -> Result<Self> {
        Self::new(origin, vec![PowerLogPiece::constant(origin, hi, c)])
    }

    pub fn origin(&self) -> T {
        self.origin
    }

    /// Right end of the last piece (`R₂`, possibly infinite).
    pub fn end(&self) -> T {
        self.pieces.last().map(|p| p.hi).unwrap_or(self.origin)
    }

    pub fn pieces(&self) -> &[PowerLogPiece<T>] {
        &self.pieces
    }

    /// Per-junction continuity markers; `false` marks a jump.
    pub fn continuity_flags(&self) -> &[bool] {
        &self.continuity
    }

    /// Index of the piece governing `r`; junctions resolve to the right piece.
    pub fn piece_index(&self, r: T) -> Option<usize> {
        if !(r > self.origin) || !(r < self.end()) {
            return None;
        }
        let idx = self.pieces.partition_point(|p| p.lo <= r);
        let idx = idx.saturating_sub(1);
        self.pieces[idx].contains(r).then_some(idx)
    }

    /// Evaluates the weight at an interior radius.
    pub fn eval(&self, r: T) -> Result<T> {
        self.piece_index(r)
            .map(|i| self.pieces[i].value(self.origin, r))
            .ok_or_else(|| domain_error(r, self.origin, self.end()))
    }

    /// Evaluates the weight at `R₁ + x`, keeping full precision in `x`.
    pub fn eval_offset(&self, x: T) -> Result<T> {
        let r = self.origin + x;
        if !(x > T::zero()) {
            return Err(domain_error(r, self.origin, self.end()));
        }
        // Offsets below the resolution of r still belong to the first piece.
        let idx = if r <= self.pieces[0].lo { Some(0) } else { self.piece_index(r) };
        idx.map(|i| self.pieces[i].value_at_offset(self.origin, x))
            .ok_or_else(|| domain_error(r, self.origin, self.end()))
    }

    /// Unchecked evaluation used on hot paths where the caller guarantees the
    /// offset lies inside the domain.
    #[inline]
    pub(crate) fn eval_offset_unchecked(&self, x: T) -> T {
        let r = self.origin + x;
        let idx = if self.pieces.len() == 1 || r <= self.pieces[0].lo {
            0
        } else {
            let i = self.pieces.partition_point(|p| p.lo <= r);
            i.saturating_sub(1).min(self.pieces.len() - 1)
        };
        self.pieces[idx].value_at_offset(self.origin, x)
    }

    /// Governing exponents of the piece adjacent to `endpoint`.
    ///
    /// At `R₁` the power is the exponent of `(r − R₁)`, absorbing `r^b` when
    /// `R₁ = 0` and `(log r)^l` when `R₁ = 1`. At infinity the power is
    /// `a + b` and the log exponent is `l`. A finite `R₂` is a regular point.
    pub fn local_exponents(&self, endpoint: Endpoint) -> PowerLog<T> {
        match endpoint {
            Endpoint::Left => {
                let p = &self.pieces[0];
                let mut power = p.a;
                if self.origin == T::zero() {
                    power = power + p.b;
                }
                if self.origin == T::one() && p.has_log() {
                    power = power + p.l;
                }
                PowerLog::new(power, T::zero())
            }
            Endpoint::RightFinite => PowerLog::new(T::zero(), T::zero()),
            Endpoint::Infinity => {
                let p = self.pieces.last().expect("nonempty");
                PowerLog::new(p.a + p.b, p.l)
            }
        }
    }

    /// Applies `f` to every piece, keeping the tiling.
    pub fn map_pieces(&self, f: impl Fn(&PowerLogPiece<T>) -> PowerLogPiece<T>) -> Self {
        let pieces: Vec<_> = self.pieces.iter().map(f).collect();
        Self::new(self.origin, pieces).expect("piecewise map preserves validity")
    }

    pub fn powf(&self, k: T) -> Self {
        self.map_pieces(|p| p.powf(k))
    }

    pub fn times_r_power(&self, k: T) -> Self {
        self.map_pieces(|p| p.times_r_power(k))
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map_pieces(|p| p.scaled(s))
    }
}

fn domain_error<T: Real>(r: T, lo: T, hi: T) -> Error {
    Error::Domain { r: r.to_f64_lossy(), lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() }
}

/// Radial problem data `(N, p, R₁, R₂, v, w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec<T> {
    n: u32,
    p: T,
    r1: T,
    r2: T,
    v: WeightModel<T>,
    w: WeightModel<T>,
    lambda: Option<T>,
    rho: WeightModel<T>,
    sigma: WeightModel<T>,
    rho_conj: WeightModel<T>,
}

impl<T: Real> ProblemSpec<T> {
    pub fn new(n: u32, p: T, r1: T, r2: T, v: WeightModel<T>, w: WeightModel<T>) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidProblem("dimension N must be at least 1".into()));
        }
        if !(p > T::one()) || !p.is_finite() {
            return Err(Error::InvalidProblem(format!("p = {p} must exceed 1")));
        }
        if !(r1 >= T::zero()) || !r1.is_finite() {
            return Err(Error::InvalidProblem(format!("R1 = {r1} must be finite and nonnegative")));
        }
        if !(r2 > r1) {
            return Err(Error::InvalidProblem(format!("R2 = {r2} must exceed R1 = {r1}")));
        }
        for (name, m) in [("v", &v), ("w", &w)] {
            if m.origin() != r1 || m.end() != r2 {
                return Err(Error::InvalidProblem(format!(
                    "weight {name} covers ({}, {}) but the domain is ({r1}, {r2})",
                    m.origin(),
                    m.end()
                )));
            }
        }
        let shift = T::from_u32(n - 1).expect("dimension fits");
        let rho = v.times_r_power(shift);
        let sigma = w.times_r_power(shift);
        let rho_conj = rho.powf(T::one() - conjugate(p));
        Ok(Self { n, p, r1, r2, v, w, lambda: None, rho, sigma, rho_conj })
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }
    pub fn p(&self) -> T {
        self.p
    }
    /// Hölder conjugate `p′ = p/(p−1)`.
    pub fn p_conj(&self) -> T {
        conjugate(self.p)
    }
    pub fn r1(&self) -> T {
        self.r1
    }
    pub fn r2(&self) -> T {
        self.r2
    }
    pub fn is_exterior(&self) -> bool {
        self.r2.is_infinite()
    }
    pub fn lambda(&self) -> Option<T> {
        self.lambda
    }
    pub fn v(&self) -> &WeightModel<T> {
        &self.v
    }
    pub fn w(&self) -> &WeightModel<T> {
        &self.w
    }

    /// `ρ = r^{N−1} v` as a weight model.
    pub fn rho_model(&self) -> &WeightModel<T> {
        &self.rho
    }
    /// `σ = r^{N−1} w` as a weight model.
    pub fn sigma_model(&self) -> &WeightModel<T> {
        &self.sigma
    }
    /// `ρ^{1−p′}` as a weight model.
    pub fn rho_conj_model(&self) -> &WeightModel<T> {
        &self.rho_conj
    }

    pub fn rho(&self, r: T) -> Result<T> {
        self.rho.eval(r)
    }
    pub fn sigma(&self, r: T) -> Result<T> {
        self.sigma.eval(r)
    }
    /// `ρ(r)^{1−p′}`.
    pub fn rho_conj_power(&self, r: T) -> Result<T> {
        self.rho_conj.eval(r)
    }

    /// Same problem with `v` replaced by `s·v`.
    pub fn with_v_scaled(&self, s: T) -> Self {
        Self::new(self.n, self.p, self.r1, self.r2, self.v.scaled(s), self.w.clone()).expect("scaling keeps validity")
    }

    /// Same problem with `w` replaced by `s·w`.
    pub fn with_w_scaled(&self, s: T) -> Self {
        Self::new(self.n, self.p, self.r1, self.r2, self.v.clone(), self.w.scaled(s)).expect("scaling keeps validity")
    }

    /// Same weights with exponent `p` replaced.
    pub fn with_p(&self, p: T) -> Result<Self> {
        Self::new(self.n, p, self.r1, self.r2, self.v.clone(), self.w.clone())
    }

    /// Parses the JSON problem schema.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ProblemJson<T> = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        raw.into_spec()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProblemJson::from_spec(self)).expect("problem serializes")
    }
}

/// Wire form of [`ProblemSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
#[serde(deny_unknown_fields)]
pub struct ProblemJson<T> {
    #[serde(rename = "N")]
    pub n: u32,
    pub p: T,
    #[serde(rename = "R1")]
    pub r1: T,
    #[serde(rename = "R2", with = "radius")]
    pub r2: T,
    pub v: Vec<PowerLogPiece<T>>,
    pub w: Vec<PowerLogPiece<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<T>,
}

impl<T: Real> ProblemJson<T> {
    pub fn into_spec(self) -> Result<ProblemSpec<T>> {
        let v = WeightModel::new(self.r1, self.v).map_err(|e| Error::InvalidProblem(format!("field `v`: {e}")))?;
        let w = WeightModel::new(self.r1, self.w).map_err(|e| Error::InvalidProblem(format!("field `w`: {e}")))?;
        let spec = ProblemSpec::new(self.n, self.p, self.r1, self.r2, v, w)?;
        Ok(match self.lambda {
            Some(l) => spec.with_lambda(l),
            None => spec,
        })
    }

    pub fn from_spec(spec: &ProblemSpec<T>) -> Self {
        Self {
            n: spec.n,
            p: spec.p,
            r1: spec.r1,
            r2: spec.r2,
            v: spec.v.pieces().to_vec(),
            w: spec.w.pieces().to_vec(),
            lambda: spec.lambda,
        }
    }
}

/// Radii serialize as numbers, with `+∞` written as the string `"inf"`.
mod radius {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scalar::Real;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn serialize<T: Real, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
        if value.is_infinite() && *value > T::zero() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(value.to_f64_lossy())
        }
    }

    pub fn deserialize<'de, T: Real, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        let raw = Raw::deserialize(d)?;
        let x = match raw {
            Raw::Num(x) => x,
            Raw::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" | "+infinity" => f64::INFINITY,
                other => return Err(serde::de::Error::custom(format!("expected a number or \"inf\", got \"{other}\""))),
            },
        };
        T::from_f64(x).ok_or_else(|| serde::de::Error::custom("radius not representable"))
    }
}
