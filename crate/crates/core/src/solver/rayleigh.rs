//! Discrete Rayleigh quotient and its minimizer.
//!
//! Cells carry the exact conductance `κ = (∫_cell ρ^{1−p′})^{1−p}` — the
//! energy of the ρ-harmonic interpolant between the node values — and nodes
//! carry lumped masses `∫ σ` over the dual cell. The quotient is
//! `Σ κ |Δu|^p / Σ m |u|^p` with `u = 0` at both boundary ghosts.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::integrate_exact_powerlog_offsets;
use crate::scalar::{conjugate, signed_pow, Real};
use crate::weights::ProblemSpec;

/// Cell conductances (`n + 1` cells including both boundary cells) and
/// lumped node masses (`n` interior nodes).
#[derive(Clone, Debug)]
pub struct Discretization<T> {
    pub kappa: Vec<T>,
    pub mass: Vec<T>,
}

fn cell_integral<T: Real>(m: &crate::weights::WeightModel<T>, a: T, b: T) -> Result<T> {
    let res = integrate_exact_powerlog_offsets(m, a, b, T::default_tol() * T::lit(0.01));
    if !res.value.is_finite() {
        return Err(Error::Divergent { a: a.to_f64_lossy(), b: b.to_f64_lossy(), context: "cell integral".into() });
    }
    Ok(res.value)
}

pub fn discretize<T: Real>(ps: &ProblemSpec<T>, mesh: &Mesh<T>) -> Result<Discretization<T>> {
    let xs = mesh.with_ghosts();
    let q = ps.p() - T::one();
    let kappa = xs
        .windows(2)
        .map(|w| cell_integral(ps.rho_conj_model(), w[0], w[1]).map(|c| c.powf(-q)))
        .collect::<Result<Vec<_>>>()?;
    let half = T::lit(0.5);
    let mass = (1..xs.len() - 1)
        .map(|j| {
            let lo = if j == 1 { xs[1] * half } else { (xs[j - 1] + xs[j]) * half };
            let hi = (xs[j] + xs[j + 1]) * half;
            cell_integral(ps.sigma_model(), lo, hi)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Discretization { kappa, mass })
}

impl<T: Real> Discretization<T> {
    pub fn energy(&self, p: T, u: &[T]) -> T {
        let n = u.len();
        (0..=n)
            .map(|k| {
                let left = if k == 0 { T::zero() } else { u[k - 1] };
                let right = if k == n { T::zero() } else { u[k] };
                self.kappa[k] * (right - left).abs().powf(p)
            })
            .sum()
    }

    pub fn weighted_norm(&self, p: T, u: &[T]) -> T {
        self.mass.iter().zip(u).map(|(&m, &v)| m * v.abs().powf(p)).sum()
    }

    pub fn quotient(&self, p: T, u: &[T]) -> Result<T> {
        let den = self.weighted_norm(p, u);
        if !(den > T::zero()) {
            return Err(Error::ZeroDenominator);
        }
        Ok(self.energy(p, u) / den)
    }

    /// Solves `−Δ_p v = b` (discrete flux form) exactly: cell fluxes are
    /// `F_k = F₀ − Σ_{j≤k} b_j`, and `F₀` is the unique root of the
    /// monotone closure condition `Σ_k φ_{p′}(F_k/κ_k) = 0`.
    pub fn solve(&self, p: T, b: &[T]) -> Vec<T> {
        let n = b.len();
        let pc = conjugate(p);
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(T::zero());
        for &bj in b {
            let last = *cum.last().unwrap();
            cum.push(last + bj);
        }
        let closure = |f0: T| -> T { cum.iter().zip(&self.kappa).map(|(&bk, &k)| signed_pow((f0 - bk) / k, pc)).sum() };
        let mut lo = cum.iter().copied().fold(T::infinity(), T::min);
        let mut hi = cum.iter().copied().fold(T::neg_infinity(), T::max);
        let (mut glo, mut ghi) = (closure(lo), closure(hi));
        let mut f0 = lo;
        if glo == T::zero() {
            f0 = lo;
        } else if ghi == T::zero() {
            f0 = hi;
        } else {
            let mut side = 0i8;
            for it in 0..400 {
                let secant = (lo * ghi - hi * glo) / (ghi - glo);
                let mid = (lo + hi) * T::lit(0.5);
                let c = if it % 3 == 2 || !(secant > lo && secant < hi) { mid } else { secant };
                if !(c > lo && c < hi) {
                    f0 = c;
                    break;
                }
                let gc = closure(c);
                f0 = c;
                if gc == T::zero() {
                    break;
                }
                if gc < T::zero() {
                    lo = c;
                    glo = gc;
                    if side == -1 {
                        ghi = ghi * T::lit(0.5);
                    }
                    side = -1;
                } else {
                    hi = c;
                    ghi = gc;
                    if side == 1 {
                        glo = glo * T::lit(0.5);
                    }
                    side = 1;
                }
            }
        }
        let mut v = Vec::with_capacity(n);
        let mut acc = T::zero();
        for (&ck, &kk) in cum.iter().zip(&self.kappa).take(n) {
            acc = acc + signed_pow((f0 - ck) / kk, pc);
            v.push(acc);
        }
        v
    }
}

/// Discrete quotient of node values `u` (boundary ghosts are zero).
pub fn rayleigh_quotient<T: Real>(ps: &ProblemSpec<T>, mesh: &Mesh<T>, u: &[T]) -> Result<T> {
    if u.len() != mesh.len() {
        return Err(Error::InvalidParameter { name: "u", reason: format!("{} values for {} nodes", u.len(), mesh.len()) });
    }
    discretize(ps, mesh)?.quotient(ps.p(), u)
}

/// Nonlinear inverse iteration `v ← (−Δ_p)^{−1}(m φ_p(u))`, renormalized to
/// `max v = 1`. Returns `(λ, u, iterations, converged)`.
pub(crate) fn inverse_iteration<T: Real>(
    d: &Discretization<T>,
    p: T,
    seed: Vec<T>,
    tol: T,
    max_iter: usize,
) -> Result<(T, Vec<T>, usize, bool)> {
    let mut u = seed;
    let norm = u.iter().copied().fold(T::zero(), T::max);
    if !(norm > T::zero()) {
        return Err(Error::ZeroDenominator);
    }
    u.iter_mut().for_each(|v| *v = *v / norm);
    let mut lambda = d.quotient(p, &u)?;
    for it in 1..=max_iter {
        let b: Vec<T> = d.mass.iter().zip(&u).map(|(&m, &v)| m * signed_pow(v.max(T::zero()), p)).collect();
        let mut v = d.solve(p, &b);
        let vmax = v.iter().copied().fold(T::zero(), T::max);
        if !(vmax > T::zero()) || !vmax.is_finite() {
            return Err(Error::Diverged(format!("inverse iteration lost positivity at step {it}")));
        }
        v.iter_mut().for_each(|x| *x = (*x / vmax).max(T::zero()));
        let next = d.quotient(p, &v)?;
        let change = u.iter().zip(&v).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
        let done = (lambda - next).abs() <= tol * next && change <= tol.sqrt();
        u = v;
        lambda = next;
        if done {
            return Ok((lambda, u, it, true));
        }
    }
    Ok((lambda, u, max_iter, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightModel;

    fn trivial() -> ProblemSpec<f64> {
        let one = || WeightModel::constant(1.0, 2.0, 1.0).unwrap();
        ProblemSpec::new(1, 2.0, 1.0, 2.0, one(), one()).unwrap()
    }

    fn uniform(n: usize) -> Mesh<f64> {
        let h = 1.0 / (n as f64 + 1.0);
        Mesh::new(1.0, 1.0, (1..=n).map(|k| k as f64 * h).collect()).unwrap()
    }

    #[test]
    fn sine_quotient_is_second_order() {
        let ps = trivial();
        let pi2 = std::f64::consts::PI.powi(2);
        let mut errs = Vec::new();
        for n in [99, 199] {
            let m = uniform(n);
            let u: Vec<f64> = m.offsets().iter().map(|&x| (std::f64::consts::PI * x).sin()).collect();
            let q = rayleigh_quotient(&ps, &m, &u).unwrap();
            errs.push((q - pi2).abs());
        }
        assert!(errs[0] < 1e-3 * pi2);
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.8, "observed order {order}");
    }

    #[test]
    fn quotient_is_scale_invariant() {
        let ps = trivial();
        let m = uniform(50);
        let u: Vec<f64> = m.offsets().iter().map(|&x| x * (1.0 - x)).collect();
        let a = rayleigh_quotient(&ps, &m, &u).unwrap();
        let v: Vec<f64> = u.iter().map(|x| 7.5 * x).collect();
        let b = rayleigh_quotient(&ps, &m, &v).unwrap();
        assert!((a - b).abs() <= 1e-14 * a);
    }

    #[test]
    fn zero_vector_is_rejected() {
        let ps = trivial();
        let m = uniform(10);
        assert_eq!(rayleigh_quotient(&ps, &m, &[0.0; 10]), Err(Error::ZeroDenominator));
    }

    #[test]
    fn exact_flux_solve_satisfies_the_equations() {
        let ps = ProblemSpec::new(
            1,
            3.0,
            1.0,
            2.0,
            WeightModel::constant(1.0, 2.0, 1.0).unwrap(),
            WeightModel::constant(1.0, 2.0, 1.0).unwrap(),
        )
        .unwrap();
        let m = uniform(40);
        let d = discretize(&ps, &m).unwrap();
        let b: Vec<f64> = (0..40).map(|k| 1.0 + (k as f64 * 0.3).sin()).collect();
        let v = d.solve(3.0, &b);
        let n = v.len();
        let flux = |k: usize| {
            let l = if k == 0 { 0.0 } else { v[k - 1] };
            let r = if k == n { 0.0 } else { v[k] };
            d.kappa[k] * signed_pow(r - l, 3.0)
        };
        for (j, &bj) in b.iter().enumerate().take(n) {
            let resid = flux(j) - flux(j + 1) - bj;
            assert!(resid.abs() < 1e-9, "node {j}: {resid}");
        }
    }
}
