//! Shooting in flux variables `(u, g)`, `g = ρ|u′|^{p−2}u′`.
//!
//! The system `u′ = φ_{p′}(g/ρ)`, `g′ = −λσφ_p(u)` is integrated in the
//! offset `x = r − R₁`, starting on the boundary asymptote
//! `u = ∫_{R₁}^{r₀} ρ^{1−p′}`, `g = 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::ode::{step, Control, Dopri, State};
use crate::quadrature::integrate_exact_powerlog_offsets;
use crate::scalar::{conjugate, signed_pow, Real};
use crate::weights::ProblemSpec;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShootResult<T> {
    /// First interior zero of `u`, as a radius.
    pub first_zero: Option<T>,
    pub terminal_u: T,
    pub terminal_flux: T,
    /// `(r, u, g)` at the mesh nodes, when requested.
    pub trace: Option<Vec<(T, T, T)>>,
}

/// Raw outcome in offsets.
#[derive(Clone, Debug)]
pub(crate) struct Run<T> {
    pub zero: Option<T>,
    pub terminal: State<T>,
    pub max_u: T,
    pub nodes: Vec<State<T>>,
}

/// `∫_{R₁}^{R₁+x} ρ^{1−p′}`.
pub(crate) fn envelope_at<T: Real>(ps: &ProblemSpec<T>, x: T) -> Result<T> {
    let res = integrate_exact_powerlog_offsets(ps.rho_conj_model(), T::zero(), x, T::default_tol() * T::lit(0.01));
    if !res.value.is_finite() {
        return Err(Error::Divergent {
            a: ps.r1().to_f64_lossy(),
            b: (ps.r1() + x).to_f64_lossy(),
            context: "rho^(1-p') is not integrable at R1; the shooting start needs it".into(),
        });
    }
    Ok(res.value)
}

/// Start offset `δ_L` with `envelope(δ_L) ≤ ratio · envelope(span/2)`.
pub fn start_offset<T: Real>(ps: &ProblemSpec<T>, span: T, ratio: T) -> Result<T> {
    let mid = span * T::lit(0.5);
    let target = envelope_at(ps, mid)? * ratio;
    let mut x = mid;
    for _ in 0..1000 {
        x = x * T::lit(0.5);
        if envelope_at(ps, x)? <= target {
            return Ok(x);
        }
    }
    Err(Error::InvalidProblem("envelope decays too slowly at R1 to place the shooting start".into()))
}

pub(crate) struct System<'a, T> {
    ps: &'a ProblemSpec<T>,
    lambda: T,
    p: T,
    pc: T,
}

impl<'a, T: Real> System<'a, T> {
    pub fn new(ps: &'a ProblemSpec<T>, lambda: T) -> Self {
        Self { ps, lambda, p: ps.p(), pc: conjugate(ps.p()) }
    }

    pub fn rhs(&self, x: T, y: &State<T>) -> State<T> {
        let rho = self.ps.rho_model().eval_offset_unchecked(x);
        let sigma = self.ps.sigma_model().eval_offset_unchecked(x);
        [signed_pow(y[1] / rho, self.pc), -self.lambda * sigma * signed_pow(y[0], self.p)]
    }
}

/// Integrates from `x0` to `x_end`. With `stop_at_zero` the run ends at
/// the first sign change of `u`; with `record` the state is sampled at the
/// given offsets (which must lie in `[x0, x_end)`).
pub(crate) fn run<T: Real>(
    ps: &ProblemSpec<T>,
    lambda: T,
    x0: T,
    x_end: T,
    record: Option<&[T]>,
    stop_at_zero: bool,
    ode: &Dopri<T>,
) -> Result<Run<T>> {
    let sys = System::new(ps, lambda);
    let f = |x: T, y: &State<T>| sys.rhs(x, y);
    let y0 = [envelope_at(ps, x0)?, T::one()];
    let mut zero: Option<T> = None;
    let mut max_u = y0[0];
    let mut h = x0 * T::lit(0.01);
    let mut nodes = Vec::new();

    let mut x = x0;
    let mut y = y0;
    let targets: Vec<T> = match record {
        Some(r) => r.iter().copied().filter(|&t| t > x0).chain(std::iter::once(x_end)).collect(),
        None => vec![x_end],
    };
    if let Some(r) = record {
        if r.first().is_some_and(|&t| t == x0) {
            nodes.push(y0);
        }
    }
    for (i, &target) in targets.iter().enumerate() {
        let mut crossing: Option<(T, State<T>, T)> = None;
        let (xn, yn) = ode.run(&f, x, y, target, h, |xp, yp, xn, yn| {
            // the final step of each leg is clipped; keep the last free step
            if xn < target || xn - xp > h {
                h = xn - xp;
            }
            if yn[0] > max_u {
                max_u = yn[0];
            }
            if zero.is_none() && crossing.is_none() && yp[0] > T::zero() && yn[0] <= T::zero() {
                crossing = Some((xp, *yp, xn - xp));
                if stop_at_zero {
                    return Control::Stop;
                }
            }
            Control::Continue
        })?;
        if let Some((xp, yp, hh)) = crossing {
            zero = Some(polish_zero(&f, xp, &yp, hh));
            if stop_at_zero {
                return Ok(Run { zero, terminal: yn, max_u, nodes });
            }
        }
        x = xn;
        y = yn;
        if record.is_some() && i + 1 < targets.len() {
            nodes.push(y);
        }
    }
    Ok(Run { zero, terminal: y, max_u, nodes })
}

/// Locates `u = 0` inside one step by Illinois iteration on single RK steps.
fn polish_zero<T: Real, F: Fn(T, &State<T>) -> State<T>>(f: &F, x: T, y: &State<T>, h: T) -> T {
    let k1 = f(x, y);
    let u_at = |s: T| step(f, x, y, &k1, s).0[0];
    let (mut a, mut fa) = (T::zero(), y[0]);
    let (mut b, mut fb) = (h, u_at(h));
    if fb == T::zero() {
        return x + h;
    }
    let mut side = 0i8;
    for _ in 0..100 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c > a && c < b { c } else { (a + b) * T::lit(0.5) };
        let fc = u_at(c);
        if fc == T::zero() || (b - a) <= T::epsilon() * T::lit(4.0) * (x + b).abs() {
            return x + c;
        }
        if (fc > T::zero()) == (fa > T::zero()) {
            a = c;
            fa = fc;
            if side == -1 {
                fb = fb * T::lit(0.5);
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa = fa * T::lit(0.5);
            }
            side = 1;
        }
    }
    x + (a + b) * T::lit(0.5)
}

/// Shoots at `λ` across the mesh: starts at the first node and integrates
/// to the truncated boundary, recording `(r, u, g)` at every node.
pub fn shoot<T: Real>(ps: &ProblemSpec<T>, lambda: T, mesh: &Mesh<T>) -> Result<ShootResult<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParameter { name: "lambda", reason: format!("{lambda} must be positive") });
    }
    let ode = Dopri::default();
    let xs = mesh.offsets();
    let out = run(ps, lambda, xs[0], mesh.end(), Some(xs), false, &ode)?;
    let trace = xs.iter().zip(&out.nodes).map(|(&x, y)| (ps.r1() + x, y[0], y[1])).collect();
    let tiny = out.terminal[0].abs() <= T::lit(1e-9) * out.max_u;
    let first_zero = match out.zero {
        Some(z) if z < mesh.end() => Some(ps.r1() + z),
        Some(_) => Some(ps.r1() + mesh.end()),
        None if tiny => Some(ps.r1() + mesh.end()),
        None => None,
    };
    Ok(ShootResult { first_zero, terminal_u: out.terminal[0], terminal_flux: out.terminal[1], trace: Some(trace) })
}
