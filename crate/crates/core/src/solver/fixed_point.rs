//! Boundary integral representation as an independent oracle:
//!
//! ```text
//! u(r) = λ^{1/(p−1)} ∫_{R₁}^r ρ^{1−p′}(t) (∫_t^ã σ u^{p−1})^{1/(p−1)} dt.
//! ```
//!
//! The map is positively homogeneous of degree one, so iterating it from a
//! positive seed is a power iteration whose shape converges to the
//! eigenfunction profile on `(R₁, ã]` when `ã` is the maximum point.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::integrate_exact_powerlog_offsets;
use crate::scalar::Real;
use crate::weights::ProblemSpec;

/// Applies the representation map `iters` times to `seed` given at the
/// nodes of `mesh`, whose end is `ã − R₁`. Cells use product integration:
/// exact `∫σ` and `∫ρ^{1−p′}` per cell against trapezoidal averages of the
/// smooth factors.
pub fn fixed_point_left<T: Real>(ps: &ProblemSpec<T>, lambda: T, mesh: &Mesh<T>, seed: &[T], iters: usize) -> Result<Vec<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParameter { name: "lambda", reason: format!("{lambda} must be positive") });
    }
    if seed.len() != mesh.len() {
        return Err(Error::InvalidParameter { name: "seed", reason: "one value per mesh node".into() });
    }
    let tol = T::default_tol() * T::lit(0.01);
    let xs = mesh.offsets();
    let n = xs.len();
    let q = ps.p() - T::one();
    let inv_q = T::one() / q;
    let cell = |m: &crate::weights::WeightModel<T>, a: T, b: T| integrate_exact_powerlog_offsets(m, a, b, tol).value;
    // σ-mass of [x_k, x_{k+1}] (last cell reaches ã) and ρ'-mass of [x_{k−1}, x_k]
    let s_cells: Vec<T> = (0..n).map(|k| cell(ps.sigma_model(), xs[k], if k + 1 < n { xs[k + 1] } else { mesh.end() })).collect();
    let c_cells: Vec<T> = (0..n).map(|k| cell(ps.rho_conj_model(), if k == 0 { T::zero() } else { xs[k - 1] }, xs[k])).collect();
    if s_cells.iter().chain(&c_cells).any(|v| !v.is_finite()) {
        return Err(Error::Divergent {
            a: ps.r1().to_f64_lossy(),
            b: (ps.r1() + mesh.end()).to_f64_lossy(),
            context: "cell integrals of the representation".into(),
        });
    }
    let scale = lambda.powf(inv_q);
    let half = T::lit(0.5);
    let mut u = seed.to_vec();
    for it in 0..iters {
        let w: Vec<T> = u.iter().map(|&v| v.max(T::zero()).powf(q)).collect();
        let mut inner = vec![T::zero(); n];
        inner[n - 1] = s_cells[n - 1] * w[n - 1];
        for k in (0..n - 1).rev() {
            inner[k] = inner[k + 1] + s_cells[k] * (w[k] + w[k + 1]) * half;
        }
        let h: Vec<T> = inner.iter().map(|&i| i.powf(inv_q)).collect();
        let mut next = Vec::with_capacity(n);
        let mut acc = scale * c_cells[0] * h[0];
        next.push(acc);
        for k in 1..n {
            acc = acc + scale * c_cells[k] * (h[k - 1] + h[k]) * half;
            next.push(acc);
        }
        let top = next.iter().copied().fold(T::zero(), T::max);
        if !top.is_finite() || top > T::lit(1e150) {
            return Err(Error::Diverged(format!("fixed-point iterate norm {top} after {} steps", it + 1)));
        }
        u = next;
    }
    Ok(u)
}
