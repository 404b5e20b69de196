//! Graded meshes on `(R₁, R₂_trunc)`.
//!
//! Nodes are stored as offsets `x = r − R₁` so that the geometric
//! accumulation at the inner boundary keeps full precision.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mesh<T> {
    origin: T,
    end: T,
    offsets: Vec<T>,
}

impl<T: Real> Mesh<T> {
    /// Mesh from explicit offsets, strictly increasing inside `(0, end)`.
    pub fn new(origin: T, end: T, offsets: Vec<T>) -> Result<Self> {
        if offsets.len() < 2 {
            return Err(Error::InvalidParameter { name: "mesh", reason: "needs at least two nodes".into() });
        }
        if !(offsets[0] > T::zero()) || !(*offsets.last().unwrap() < end) || !end.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mesh",
                reason: "nodes must lie strictly inside (R1, R2_trunc) with a finite end".into(),
            });
        }
        if offsets.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter { name: "mesh", reason: "nodes must be strictly increasing".into() });
        }
        Ok(Self { origin, end, offsets })
    }

    /// `n` nodes on `(R₁, R₁ + end)` from `delta_l` up to within `delta_r`
    /// of the end. Spacing is `κ · min(x, end − x, M)`: geometric at both
    /// boundaries and, in between, uniform in `x` for short spans
    /// (`M = end/8`) or uniform in `log r` for long ones (`M = r`). The
    /// grading `κ` is chosen so that exactly `n` nodes fit.
    pub fn graded(origin: T, end: T, n: usize, delta_l: T, delta_r: T) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidParameter { name: "n", reason: "graded meshes need at least 8 nodes".into() });
        }
        if !(delta_l > T::zero() && delta_r > T::zero() && delta_l + delta_r < end) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("end offsets {delta_l}, {delta_r} do not fit in a span of {end}"),
            });
        }
        let long = end > T::lit(8.0) * origin.max(T::one());
        let eighth = end * T::lit(0.125);
        let march = |kappa: T| -> Vec<T> {
            let mut xs = vec![delta_l];
            let mut x = delta_l;
            while end - x > delta_r && xs.len() <= n {
                let middle = if long { origin + x } else { eighth };
                x = x + kappa * x.min(end - x).min(middle);
                xs.push(x);
            }
            xs
        };
        let (mut lo, mut hi) = (T::lit(1e-7), T::lit(0.5));
        if march(hi).len() > n {
            return Err(Error::InvalidParameter { name: "n", reason: format!("{n} nodes cannot span the requested grading") });
        }
        let mut best = march(hi);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            let xs = march(mid);
            if xs.len() > n {
                lo = mid;
            } else {
                hi = mid;
                best = xs;
                if best.len() == n {
                    break;
                }
            }
        }
        Self::new(origin, end, best)
    }

    pub fn origin(&self) -> T {
        self.origin
    }

    /// Offset of the truncated outer boundary.
    pub fn end(&self) -> T {
        self.end
    }

    pub fn offsets(&self) -> &[T] {
        &self.offsets
    }

    pub fn radii(&self) -> Vec<T> {
        self.offsets.iter().map(|&x| self.origin + x).collect()
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Offsets with the two boundary ghosts `0` and `end` attached.
    pub(crate) fn with_ghosts(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.offsets.len() + 2);
        v.push(T::zero());
        v.extend_from_slice(&self.offsets);
        v.push(self.end);
        v
    }

    /// Largest spacing between neighbouring nodes (ghosts included).
    pub fn max_spacing(&self) -> T {
        self.with_ghosts().windows(2).map(|w| w[1] - w[0]).fold(T::zero(), T::max)
    }
}
