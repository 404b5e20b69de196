//! Adaptive Dormand–Prince 5(4) for the two-component flux system.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type State<T> = [T; 2];

/// Step-size control settings.
#[derive(Clone, Copy, Debug)]
pub struct Dopri<T> {
    pub rtol: T,
    /// Absolute floor relative to the largest magnitude seen per component.
    pub atol_rel: T,
    pub max_steps: usize,
}

impl<T: Real> Default for Dopri<T> {
    fn default() -> Self {
        let rtol = if T::epsilon() < T::lit(1e-10) { T::lit(1e-12) } else { T::lit(1e-6) };
        Self { rtol, atol_rel: T::lit(1e-3), max_steps: 2_000_000 }
    }
}

/// What the observer wants after an accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<T: Real>(y: &State<T>, h: T, terms: &[(f64, &State<T>)]) -> State<T> {
    let mut out = *y;
    for (c, k) in terms {
        let c = T::lit(*c) * h;
        out[0] = out[0] + c * k[0];
        out[1] = out[1] + c * k[1];
    }
    out
}

/// One Dormand–Prince step: `(y_new, error estimate, f(x+h, y_new))`.
pub fn step<T: Real, F: Fn(T, &State<T>) -> State<T>>(f: &F, x: T, y: &State<T>, k1: &State<T>, h: T) -> (State<T>, State<T>, State<T>) {
    let k2 = f(x + T::lit(C2) * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(x + T::lit(C3) * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(x + T::lit(C4) * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(x + T::lit(C5) * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(x + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(x + h, &y_new);
    let zero = [T::zero(); 2];
    let err = axpy(&zero, h, &[(E1, k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
    (y_new, err, k7)
}

impl<T: Real> Dopri<T> {
    /// Integrates from `x0` to `x_end`, calling `observe(x_prev, y_prev, x, y)`
    /// after every accepted step. Returns the last state reached.
    pub fn run<F, O>(&self, f: &F, x0: T, y0: State<T>, x_end: T, h0: T, mut observe: O) -> Result<(T, State<T>)>
    where
        F: Fn(T, &State<T>) -> State<T>,
        O: FnMut(T, &State<T>, T, &State<T>) -> Control,
    {
        let mut x = x0;
        let mut y = y0;
        let mut k1 = f(x, &y);
        let mut h = h0.min(x_end - x0);
        let mut scale = [y0[0].abs(), y0[1].abs()];
        let safety = T::lit(0.9);
        for _ in 0..self.max_steps {
            if !(x < x_end) {
                return Ok((x, y));
            }
            let last = x + h >= x_end;
            if last {
                h = x_end - x;
            }
            let (y_new, err, k_new) = step(f, x, &y, &k1, h);
            let mut norm = T::zero();
            let mut finite = true;
            for i in 0..2 {
                if !y_new[i].is_finite() {
                    finite = false;
                }
                let sc = self.rtol * (y[i].abs().max(y_new[i].abs()) + self.atol_rel * scale[i]) + T::min_positive_value();
                norm = norm.max((err[i] / sc).abs());
            }
            if !finite || norm.is_nan() {
                norm = T::lit(1e10);
            }
            if norm <= T::one() {
                let x_new = if last { x_end } else { x + h };
                scale = [scale[0].max(y_new[0].abs()), scale[1].max(y_new[1].abs())];
                let ctl = observe(x, &y, x_new, &y_new);
                x = x_new;
                y = y_new;
                k1 = k_new;
                if ctl == Control::Stop || last {
                    return Ok((x, y));
                }
                let fac = if norm == T::zero() { T::lit(5.0) } else { (safety * norm.powf(T::lit(-0.2))).min(T::lit(5.0)) };
                h = h * fac.max(T::lit(0.2));
            } else {
                h = h * (safety * norm.powf(T::lit(-0.2))).max(T::lit(0.1));
            }
            let floor = T::epsilon() * T::lit(16.0) * x.abs().max(T::min_positive_value());
            if !(h > floor) {
                return Err(Error::Integration {
                    r: x.to_f64_lossy(),
                    reason: format!("step size collapsed to {}", h.to_f64_lossy()),
                });
            }
        }
        Err(Error::Integration { r: x.to_f64_lossy(), reason: "step budget exhausted".into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_quarter_period() {
        // u' = g, g' = −u from (0, 1): u = sin x
        let f = |_x: f64, y: &State<f64>| [y[1], -y[0]];
        let (x, y) = Dopri::default().run(&f, 0.0, [0.0, 1.0], std::f64::consts::FRAC_PI_2, 1e-3, |_, _, _, _| Control::Continue).unwrap();
        assert_eq!(x, std::f64::consts::FRAC_PI_2);
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
    }

    #[test]
    fn singular_start_with_geometric_steps() {
        // u' = x^{-1/2}/2 from tiny x: u = sqrt(x)
        let f = |x: f64, _y: &State<f64>| [0.5 / x.sqrt(), 0.0];
        let x0 = 1e-16;
        let (_, y) = Dopri::default().run(&f, x0, [1e-8, 1.0], 1.0, 1e-19, |_, _, _, _| Control::Continue).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9, "{}", y[0]);
    }

    #[test]
    fn observer_can_stop() {
        let f = |_x: f64, y: &State<f64>| [y[1], -y[0]];
        let (x, y) = Dopri::default()
            .run(&f, 0.0, [0.0, 1.0], 10.0, 1e-3, |_, _, _, y| if y[0] < 0.0 { Control::Stop } else { Control::Continue })
            .unwrap();
        assert!(x > std::f64::consts::PI && y[0] < 0.0);
    }
}
