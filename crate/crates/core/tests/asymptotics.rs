use std::f64::consts::PI;

use radial_plap::asymptotics::*;
use radial_plap::presets::{self, Ex61Params, Ex62Params};
use radial_plap::solver::{find_lambda1, SolveOptions};
use radial_plap::{Error, EigenpairF64, ProblemSpecF64};

fn solve(ps: &ProblemSpecF64, r_max: f64) -> EigenpairF64 {
    find_lambda1(ps, &SolveOptions::default().with_nodes(4000).with_r_max(r_max)).unwrap()
}

#[test]
fn envelope_examples() {
    let ps: ProblemSpecF64 = presets::annulus_trivial();
    for r in [1.01, 1.5, 1.99] {
        assert!((envelope_left(&ps, r).unwrap() - (r - 1.0)).abs() < 1e-14);
    }
    // ex61: ρ^{1−p′} = r^{−(N−1)/(p−1)} (r−1)^{−α/(p−1)}
    let q = Ex61Params::default();
    let ps: ProblemSpecF64 = presets::ex61_with(&q).unwrap();
    let c_left: Vec<f64> = [1e-8, 1e-6, 1e-4].iter().map(|&x| envelope_left_offset(&ps, x).unwrap() / x.powf(q.left_exponent())).collect();
    assert!(c_left.iter().all(|c| (c / c_left[0] - 1.0).abs() < 1e-3), "{c_left:?}");
    let c_right: Vec<f64> = [1e4, 1e5, 1e6].iter().map(|&r: &f64| envelope_right(&ps, r).unwrap() / r.powf(q.right_exponent())).collect();
    assert!(c_right.iter().all(|c| (c / c_right[2] - 1.0).abs() < 1e-3), "{c_right:?}");
}

#[test]
fn envelopes_are_monotone_and_vanish_at_the_boundary() {
    let ps: ProblemSpecF64 = presets::ex62();
    let rs: Vec<f64> = (1..200).map(|k| 1.0 + 1e-6 * 1.1f64.powi(k)).collect();
    let left: Vec<f64> = rs.iter().map(|&r| envelope_left(&ps, r).unwrap()).collect();
    let right: Vec<f64> = rs.iter().map(|&r| envelope_right(&ps, r).unwrap()).collect();
    assert!(left.windows(2).all(|w| w[1] > w[0]));
    assert!(right.windows(2).all(|w| w[1] < w[0]));
    assert!(envelope_left_offset(&ps, 1e-12).unwrap() < 1e-15);
}

#[test]
fn divergent_envelope_is_an_error() {
    // v ≡ 1, N = 2, p = 2: ρ^{1−p′} = 1/r is not integrable at infinity
    let ps: ProblemSpecF64 = presets::critical_tail(2, 2.0, 1.0).unwrap();
    assert!(matches!(envelope_right(&ps, 5.0), Err(Error::Divergent { .. })));
}

#[test]
fn power_laws_fit_exactly() {
    let s: Vec<(f64, f64)> = (1..=12).map(|k| (1.0 + k as f64 * 1e-2, (k as f64 * 1e-2).powf(0.75))).map(|(r, u)| (r - 1.0, u)).collect();
    assert!((fit_exponent(&s, Anchor::InnerOffset).unwrap().exponent - 0.75).abs() < 1e-10);
    let s: Vec<(f64, f64)> = (1..=12).map(|k| (10.0 * k as f64, (10.0 * k as f64).powf(-1.5))).collect();
    let fit = fit_exponent(&s, Anchor::Radius).unwrap();
    assert!((fit.exponent + 1.5).abs() < 1e-10 && fit.residual < 1e-10);
    let mut bad = s.clone();
    bad[3].1 = -1.0;
    assert!(fit_exponent(&bad, Anchor::Radius).is_err());
    assert!(fit_exponent(&s[..5], Anchor::Radius).is_err());
}

#[test]
fn sine_sandwich_near_the_inner_radius() {
    let ps: ProblemSpecF64 = presets::annulus_trivial();
    let eig = find_lambda1(&ps, &SolveOptions::default()).unwrap();
    let v = sandwich_check(&eig, &ps, Boundary::Left, Some((1e-6, 0.1)), &AsymptoticOptions::default()).unwrap();
    assert!(v.pass, "{v:?}");
    assert!(v.ratio_min >= 0.95 * PI && v.ratio_max <= PI * (1.0 + 1e-6), "{v:?}");
    let v = sandwich_check(&eig, &ps, Boundary::Right, None, &AsymptoticOptions::default()).unwrap();
    assert!(v.pass, "{v:?}");
    assert!((v.fitted_exponent - 1.0).abs() < 0.05);
}

#[test]
fn window_with_a_zero_is_rejected() {
    let ps: ProblemSpecF64 = presets::annulus_trivial();
    let mut eig = find_lambda1(&ps, &SolveOptions::default()).unwrap();
    let i = eig.u.len() / 2;
    eig.u[i] = -eig.u[i];
    let x = eig.mesh.offsets()[i];
    let err = sandwich_check(&eig, &ps, Boundary::Left, Some((x * 0.5, x * 1.5)), &AsymptoticOptions::default());
    assert!(matches!(err, Err(Error::Window(_))), "{err:?}");
}

#[test]
fn degenerate_weight_exponents() {
    let opts = AsymptoticOptions::default();
    for alpha in [0.0, 0.5] {
        let q = Ex61Params { alpha, ..Default::default() };
        let ps: ProblemSpecF64 = presets::ex61_with(&q).unwrap();
        let eig = solve(&ps, (1u64 << 20) as f64);
        let left = sandwich_check(&eig, &ps, Boundary::Left, None, &opts).unwrap();
        assert!(left.pass, "alpha = {alpha}: {left:?}");
        assert!((left.fitted_exponent - q.left_exponent()).abs() <= 0.05);
        assert_eq!(left.theoretical_exponent, Some(q.left_exponent()));
        let right = sandwich_check(&eig, &ps, Boundary::Right, None, &opts).unwrap();
        assert!(right.pass, "alpha = {alpha}: {right:?}");
        assert!((right.fitted_exponent - q.right_exponent()).abs() <= 0.05);
    }
}

#[test]
fn singular_weight_left_exponent() {
    let q = Ex62Params::default();
    let ps: ProblemSpecF64 = presets::ex62_with(&q).unwrap();
    let eig = solve(&ps, 1024.0);
    let left = sandwich_check(&eig, &ps, Boundary::Left, None, &AsymptoticOptions::default()).unwrap();
    assert!(left.pass, "{left:?}");
    assert!((left.fitted_exponent - q.left_exponent()).abs() <= 0.05);
}

#[test]
fn flux_bounds_match_the_derivative_sandwich() {
    // |u′|/ρ^{1−p′} = |g|^{1/(p−1)}: the two bounds are the same statement
    for p in [2.0, 3.0] {
        let ps: ProblemSpecF64 = presets::ex61_with(&Ex61Params { p, ..Default::default() }).unwrap();
        let eig = solve(&ps, 64.0);
        let v = sandwich_check(&eig, &ps, Boundary::Left, None, &AsymptoticOptions::default()).unwrap();
        let xs = eig.mesh.offsets();
        let (x_in, x_out) = (v.window.0 - 1.0, v.window.1 - 1.0);
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 1..xs.len() - 1 {
            if xs[i] < x_in || xs[i] > x_out {
                continue;
            }
            let du = (eig.u[i + 1] - eig.u[i - 1]) / (xs[i + 1] - xs[i - 1]);
            let d = du.abs() / ps.rho_conj_power(1.0 + xs[i]).unwrap();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        let q = 1.0 / (p - 1.0);
        assert!((lo / v.flux_min.powf(q) - 1.0).abs() < 1e-2, "p = {p}: {lo} vs {}", v.flux_min.powf(q));
        assert!((hi / v.flux_max.powf(q) - 1.0).abs() < 1e-2, "p = {p}: {hi} vs {}", v.flux_max.powf(q));
        assert!(v.flux_min > 0.0 && v.flux_max / v.flux_min < 10.0);
    }
}

#[test]
fn shrinking_the_window_keeps_the_spread() {
    let opts = AsymptoticOptions::default();
    for ps in [presets::ex61::<f64>(), presets::ex62()] {
        let eig = solve(&ps, 1024.0);
        let (x_in, x_out) = default_window(&ps, &eig, Boundary::Left, opts.level).unwrap();
        let full = sandwich_check(&eig, &ps, Boundary::Left, Some((x_in, x_out)), &opts).unwrap();
        let half = sandwich_check(&eig, &ps, Boundary::Left, Some((x_in * 0.5, x_out * 0.5)), &opts).unwrap();
        let (s_full, s_half) = (full.ratio_max / full.ratio_min, half.ratio_max / half.ratio_min);
        assert!(s_half <= 1.05 * s_full, "{s_half} vs {s_full}");
    }
}

#[test]
fn verdict_serializes() {
    let ps: ProblemSpecF64 = presets::annulus_trivial();
    let eig = find_lambda1(&ps, &SolveOptions::default()).unwrap();
    let v = sandwich_check(&eig, &ps, Boundary::Left, None, &AsymptoticOptions::default()).unwrap();
    let text = serde_json::to_string(&v).unwrap();
    assert!(text.contains("\"boundary\":\"left\""));
    assert!(text.contains("\"pass\":true"));
}
