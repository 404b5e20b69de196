//! Principal eigenvalue solvers.
//!
//! [`find_lambda1`] bisects on the number of interior zeros of the shooting
//! solution (Sturm ordering: the first zero moves inward as `λ` grows).
//! [`rayleigh_minimize`] is an independent discretization; the two are
//! compared on identical truncated domains. [`fixed_point_left`] iterates the
//! boundary integral representation near `R₁`.

mod fixed_point;
mod rayleigh;
mod shoot;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::ode::Dopri;
use crate::scalar::{signed_pow, Real};
use crate::weights::ProblemSpec;

pub use fixed_point::fixed_point_left;
pub use rayleigh::{discretize, rayleigh_quotient, Discretization};
pub use shoot::{shoot, start_offset, ShootResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Shooting,
    Rayleigh,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics<T> {
    pub method: Method,
    /// Relative width of the final bisection bracket (shooting) or the last
    /// relative change of the quotient (Rayleigh).
    pub lambda_uncertainty: T,
    /// Outer radius of the computational domain.
    pub truncation_radius: T,
    /// `|u(R₂_trunc)| / max u` for shooting; zero for Rayleigh.
    pub residual_norm: T,
    /// `(R_max, λ)` pairs of the truncation ladder on exterior domains.
    pub ladder: Vec<(T, T)>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eigenpair<T> {
    pub lambda: T,
    pub mesh: Mesh<T>,
    /// Eigenfunction at the mesh nodes, normalized to `max u = 1`.
    pub u: Vec<T>,
    /// Flux `ρ|u′|^{p−2}u′` at the mesh nodes.
    pub flux: Vec<T>,
    pub zero_count: usize,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Real> Eigenpair<T> {
    pub fn radii(&self) -> Vec<T> {
        self.mesh.radii()
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions<T> {
    /// Relative width at which bisection stops.
    pub lambda_rel_tol: T,
    pub nodes: usize,
    /// The shooting start `δ_L` satisfies `E_L(δ_L) ≤ start_ratio · E_L(span/2)`.
    pub start_ratio: T,
    /// Gap between the last node and the truncated outer boundary, relative
    /// to the span.
    pub end_gap: T,
    /// Single truncation radius for exterior domains (skips the ladder).
    pub r_max: Option<T>,
    /// Truncation radii for the exterior ladder; default `R₁·2^k`, `k = 2..=12`.
    pub ladder: Option<Vec<T>>,
    pub ode: Dopri<T>,
    pub max_iter: usize,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            lambda_rel_tol: T::lit(1e-12).max(T::epsilon() * T::lit(8.0)),
            nodes: 2000,
            start_ratio: T::lit(1e-8).max(T::epsilon() * T::lit(100.0)),
            end_gap: T::lit(1e-9).max(T::epsilon() * T::lit(100.0)),
            r_max: None,
            ladder: None,
            ode: Dopri::default(),
            max_iter: 500,
        }
    }
}

impl<T: Real> SolveOptions<T> {
    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn with_r_max(mut self, r_max: T) -> Self {
        self.r_max = Some(r_max);
        self
    }

    /// Mesh used on `(R₁, R₁ + span)`.
    pub fn mesh(&self, ps: &ProblemSpec<T>, span: T) -> Result<Mesh<T>> {
        let x0 = start_offset(ps, span, self.start_ratio)?;
        Mesh::graded(ps.r1(), span, self.nodes, x0, span * self.end_gap)
    }
}

/// Offset of the (possibly truncated) outer boundary.
fn span_for<T: Real>(ps: &ProblemSpec<T>, r_max: Option<T>) -> Result<T> {
    if ps.is_exterior() {
        let r = r_max.ok_or_else(|| Error::InvalidParameter { name: "r_max", reason: "exterior domains need a truncation radius".into() })?;
        if !(r > ps.r1()) || !r.is_finite() {
            return Err(Error::InvalidParameter { name: "r_max", reason: format!("{r} must be finite and exceed R1") });
        }
        Ok(r - ps.r1())
    } else {
        Ok(ps.r2() - ps.r1())
    }
}

/// Principal eigenpair by shooting. Exterior domains are solved on a ladder
/// of truncations and the eigenvalue extrapolated (Aitken) unless
/// `opts.r_max` pins a single truncation.
pub fn find_lambda1<T: Real>(ps: &ProblemSpec<T>, opts: &SolveOptions<T>) -> Result<Eigenpair<T>> {
    if !ps.is_exterior() || opts.r_max.is_some() {
        let span = span_for(ps, opts.r_max)?;
        return find_lambda1_truncated(ps, span, opts);
    }
    let base = ps.r1().max(T::one());
    let radii: Vec<T> = match &opts.ladder {
        Some(l) => l.clone(),
        None => (2..=12).map(|k| base * T::lit(2f64.powi(k))).collect(),
    };
    if radii.len() < 2 {
        return Err(Error::InvalidParameter { name: "ladder", reason: "needs at least two radii".into() });
    }
    let rungs: Vec<Result<Eigenpair<T>>> =
        radii.par_iter().map(|&r| find_lambda1_truncated(ps, span_for(ps, Some(r))?, opts)).collect();
    let mut rungs = rungs.into_iter().collect::<Result<Vec<_>>>()?;
    let ladder: Vec<(T, T)> = radii.iter().zip(&rungs).map(|(&r, e)| (r, e.lambda)).collect();
    let lambdas: Vec<T> = ladder.iter().map(|l| l.1).collect();
    let mut best = rungs.pop().unwrap();
    best.lambda = aitken(&lambdas);
    best.diagnostics.ladder = ladder;
    Ok(best)
}

/// Aitken Δ² on the last three terms when they decrease geometrically;
/// otherwise the last term.
pub fn aitken<T: Real>(seq: &[T]) -> T {
    let n = seq.len();
    let last = seq[n - 1];
    if n < 3 {
        return last;
    }
    let (a, b, c) = (seq[n - 3], seq[n - 2], seq[n - 1]);
    let d1 = b - a;
    let d2 = c - b;
    let dd = d2 - d1;
    if d1 == T::zero() || d2 == T::zero() || (d1 > T::zero()) != (d2 > T::zero()) || !(d2.abs() < d1.abs()) || dd == T::zero() {
        return last;
    }
    c - d2 * d2 / dd
}

/// Principal eigenpair by shooting on `(R₁, R₁ + span)`.
pub fn find_lambda1_truncated<T: Real>(ps: &ProblemSpec<T>, span: T, opts: &SolveOptions<T>) -> Result<Eigenpair<T>> {
    let mesh = opts.mesh(ps, span)?;
    let x0 = mesh.offsets()[0];
    let zero_at = |lambda: T| -> Result<Option<T>> {
        let out = shoot::run(ps, lambda, x0, span, None, true, &opts.ode)?;
        Ok(out.zero.filter(|&z| z < span))
    };

    // bracket: `lo` has no interior zero, `hi` has one
    let two = T::lit(2.0);
    let mut lo = T::one();
    let mut hi = T::one();
    let mut hi_zero = zero_at(hi)?;
    let mut steps = 0;
    if hi_zero.is_some() {
        loop {
            lo = lo / two;
            steps += 1;
            if zero_at(lo)?.is_none() {
                break;
            }
            hi = lo;
            if steps > 200 {
                return Err(Error::NoBracket { lo: lo.to_f64_lossy(), hi: 1.0 });
            }
        }
        hi_zero = zero_at(hi)?;
    } else {
        loop {
            hi = hi * two;
            steps += 1;
            hi_zero = zero_at(hi)?;
            if hi_zero.is_some() {
                break;
            }
            lo = hi;
            if steps > 200 {
                return Err(Error::NoBracket { lo: 1.0, hi: hi.to_f64_lossy() });
            }
        }
    }

    let mut iterations = steps;
    // zeros far out sit where u′ is tiny and their location is round-off
    // dominated; only well-conditioned ones take part in the Sturm check
    let half_span = span * T::lit(0.5);
    // below this relative bracket width an out-of-order zero is round-off
    // in the far tail, not ill-posedness: bisection stops there
    let floor = T::lit(1e-8);
    let mut at_floor = false;
    while hi - lo > opts.lambda_rel_tol * hi {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if !(mid > lo && mid < hi) {
            break;
        }
        iterations += 1;
        match zero_at(mid)? {
            Some(z) => {
                if let Some(prev) = hi_zero {
                    // lowering λ must push the first zero outward
                    if prev < half_span && z < prev * (T::one() - T::lit(1e-6)) {
                        if hi - lo <= floor * hi {
                            at_floor = true;
                            break;
                        }
                        return Err(Error::NonMonotone { lambda: mid.to_f64_lossy() });
                    }
                }
                hi = mid;
                hi_zero = Some(z);
            }
            None => lo = mid,
        }
        if iterations > opts.max_iter {
            break;
        }
    }

    let traced = shoot::run(ps, lo, x0, span, Some(mesh.offsets()), false, &opts.ode)?;
    let top = traced.nodes.iter().fold(T::zero(), |m, y| m.max(y[0]));
    let scale_flux = top.powf(ps.p() - T::one());
    let u: Vec<T> = traced.nodes.iter().map(|y| y[0] / top).collect();
    let flux: Vec<T> = traced.nodes.iter().map(|y| y[1] / scale_flux).collect();
    let zero_count = count_sign_changes(&u);
    let lambda = lo + (hi - lo) * T::lit(0.5);
    Ok(Eigenpair {
        lambda,
        mesh,
        u,
        flux,
        zero_count,
        diagnostics: Diagnostics {
            method: Method::Shooting,
            lambda_uncertainty: (hi - lo) / hi,
            truncation_radius: ps.r1() + span,
            residual_norm: traced.terminal[0].abs() / top,
            ladder: Vec::new(),
            iterations,
            converged: at_floor || hi - lo <= opts.lambda_rel_tol * hi * two,
        },
    })
}

fn count_sign_changes<T: Real>(u: &[T]) -> usize {
    // ignore round-off-sized wiggles around zero
    let tiny = T::lit(1e-9);
    let mut count = 0;
    let mut last: Option<bool> = None;
    for &v in u {
        if v.abs() <= tiny {
            continue;
        }
        let s = v > T::zero();
        if last.is_some_and(|l| l != s) {
            count += 1;
        }
        last = Some(s);
    }
    count
}

/// Principal eigenpair by minimizing the discrete Rayleigh quotient on
/// `(R₁, R₁ + span)` (exterior domains need `opts.r_max`). The minimizer is
/// a nonlinear inverse power iteration; each linearized step is solved
/// exactly through the cumulative flux.
pub fn rayleigh_minimize<T: Real>(ps: &ProblemSpec<T>, mesh: Option<&Mesh<T>>, opts: &SolveOptions<T>) -> Result<Eigenpair<T>> {
    let mesh = match mesh {
        Some(m) => m.clone(),
        None => opts.mesh(ps, span_for(ps, opts.r_max)?)?,
    };
    let d = discretize(ps, &mesh)?;
    let end = mesh.end();
    let seed: Vec<T> = mesh.offsets().iter().map(|&x| x.min(end - x)).collect();
    let tol = opts.lambda_rel_tol.max(T::epsilon() * T::lit(64.0));
    let (lambda, u, iterations, converged) = rayleigh::inverse_iteration(&d, ps.p(), seed, tol, opts.max_iter)?;
    let flux = node_flux(&d, ps.p(), &u);
    let zero_count = count_sign_changes(&u);
    Ok(Eigenpair {
        lambda,
        mesh,
        u,
        flux,
        zero_count,
        diagnostics: Diagnostics {
            method: Method::Rayleigh,
            lambda_uncertainty: tol,
            truncation_radius: ps.r1() + end,
            residual_norm: T::zero(),
            ladder: Vec::new(),
            iterations,
            converged,
        },
    })
}

fn node_flux<T: Real>(d: &Discretization<T>, p: T, u: &[T]) -> Vec<T> {
    let n = u.len();
    // cells between consecutive nodes: kappa[1..n]
    let cells: Vec<T> = (1..n).map(|k| d.kappa[k] * signed_pow(u[k] - u[k - 1], p)).collect();
    (0..n)
        .map(|j| match j {
            0 => cells[0],
            j if j == n - 1 => cells[n - 2],
            j => (cells[j - 1] + cells[j]) * T::lit(0.5),
        })
        .collect()
}

/// Discrete flux `ρ|u′|^{p−2}u′` at the nodes: cell fluxes `κ φ_p(Δu)`
/// averaged onto nodes, one-sided at the first and last node.
pub fn flux<T: Real>(ps: &ProblemSpec<T>, mesh: &Mesh<T>, u: &[T]) -> Result<Vec<T>> {
    if u.len() != mesh.len() {
        return Err(Error::InvalidParameter { name: "u", reason: format!("{} values for {} nodes", u.len(), mesh.len()) });
    }
    Ok(node_flux(&discretize(ps, mesh)?, ps.p(), u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightModel;
    use std::f64::consts::PI;

    fn slab(p: f64) -> ProblemSpec<f64> {
        let one = || WeightModel::constant(1.0, 2.0, 1.0).unwrap();
        ProblemSpec::new(1, p, 1.0, 2.0, one(), one()).unwrap()
    }

    #[test]
    fn shooting_recovers_pi_squared() {
        let eig = find_lambda1(&slab(2.0), &SolveOptions::default()).unwrap();
        assert!((eig.lambda - PI * PI).abs() < 1e-8, "{}", eig.lambda);
        assert_eq!(eig.zero_count, 0);
        let err = eig.mesh.offsets().iter().zip(&eig.u).map(|(&x, &v)| (v - (PI * x).sin()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "eigenfunction error {err}");
    }

    #[test]
    fn rayleigh_recovers_pi_squared() {
        let eig = rayleigh_minimize(&slab(2.0), None, &SolveOptions::default().with_nodes(1000)).unwrap();
        assert!(eig.diagnostics.converged);
        assert!((eig.lambda - PI * PI).abs() < 1e-3, "{}", eig.lambda);
    }

    #[test]
    fn flux_of_linear_function_is_one() {
        let ps = slab(2.0);
        let mesh = Mesh::new(1.0, 1.0, vec![0.1, 0.3, 0.35, 0.8]).unwrap();
        let u: Vec<f64> = mesh.offsets().to_vec();
        for g in flux(&ps, &mesh, &u).unwrap() {
            assert!((g - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shooting_below_lambda1_has_no_zero() {
        let ps = slab(2.0);
        let mesh = SolveOptions::default().with_nodes(200).mesh(&ps, 1.0).unwrap();
        assert!(shoot(&ps, 9.0, &mesh).unwrap().first_zero.is_none());
        let z = shoot(&ps, 4.0 * PI * PI, &mesh).unwrap().first_zero.unwrap();
        assert!((z - 1.5).abs() < 1e-9, "{z}");
    }

    #[test]
    fn aitken_is_exact_on_geometric_tails() {
        let seq: Vec<f64> = (0..5).map(|k| 3.0 + 0.5f64.powi(k)).collect();
        assert!((aitken(&seq) - 3.0).abs() < 1e-12);
        assert_eq!(aitken(&[1.0, 2.0]), 2.0);
    }
}
