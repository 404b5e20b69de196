use radial_plap::presets::{self, Rmk23Params};
use radial_plap::{Endpoint, Error, PowerLogPiece, ProblemSpecF64, WeightModelF64};

const INF: f64 = f64::INFINITY;

fn unit_weight(r1: f64, r2: f64) -> WeightModelF64 {
    WeightModelF64::constant(r1, r2, 1.0).unwrap()
}

#[test]
fn degenerate_power_has_unit_value_at_two() {
    let v = WeightModelF64::single(1.0, INF, 1.0, 0.5, 0.0, 0.0).unwrap();
    assert!((v.eval(2.0).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn remark_weight_near_inner_radius() {
    let ps: ProblemSpecF64 = presets::rmk23_with(&Rmk23Params { alpha1: -1.0, ..Default::default() }).unwrap();
    assert!((ps.w().eval(1.5).unwrap() - 2.0).abs() < 1e-14);
}

#[test]
fn constant_weight_everywhere() {
    let w = WeightModelF64::constant(1.0, INF, 3.0).unwrap();
    for r in [1.0001, 2.0, 17.0, 1e9] {
        assert_eq!(w.eval(r).unwrap(), 3.0);
    }
}

#[test]
fn evaluation_outside_domain_is_an_error() {
    let w = unit_weight(1.0, 2.0);
    for r in [0.5, 1.0, 2.0, 3.0] {
        assert!(matches!(w.eval(r), Err(Error::Domain { .. })), "r = {r}");
    }
}

#[test]
fn junction_takes_right_piece() {
    let w = WeightModelF64::new(1.0, vec![PowerLogPiece::constant(1.0, 2.0, 1.0), PowerLogPiece::constant(2.0, INF, 5.0)]).unwrap();
    assert_eq!(w.eval(2.0).unwrap(), 5.0);
    assert_eq!(w.continuity_flags(), &[false]);
}

#[test]
fn rho_and_sigma() {
    let ps = ProblemSpecF64::new(3, 2.0, 1.0, INF, unit_weight(1.0, INF), unit_weight(1.0, INF)).unwrap();
    assert_eq!(ps.rho(2.0).unwrap(), 4.0);
    assert_eq!(ps.sigma(2.0).unwrap(), 4.0);
    // dimension one leaves v untouched
    let v = WeightModelF64::single(1.0, INF, 2.0, 0.3, 0.0, 0.0).unwrap();
    let ps = ProblemSpecF64::new(1, 2.0, 1.0, INF, v.clone(), unit_weight(1.0, INF)).unwrap();
    for r in [1.5, 3.0, 10.0] {
        assert_eq!(ps.rho(r).unwrap(), v.eval(r).unwrap());
    }
    let v = WeightModelF64::single(1.0, INF, 1.0, 1.0, 0.0, 0.0).unwrap();
    let ps = ProblemSpecF64::new(3, 2.0, 1.0, INF, v, unit_weight(1.0, INF)).unwrap();
    assert!((ps.rho(2.0).unwrap() - 4.0).abs() < 1e-14);
}

#[test]
fn conjugate_power_of_rho() {
    let ps = ProblemSpecF64::new(3, 2.0, 1.0, INF, unit_weight(1.0, INF), unit_weight(1.0, INF)).unwrap();
    for r in [1.5, 2.0, 7.0] {
        assert!((ps.rho_conj_power(r).unwrap() - 1.0 / ps.rho(r).unwrap()).abs() < 1e-15);
    }
    // ρ(2) = 8 with N = 4, v ≡ 1; p = 3 gives 8^{−1/2}
    let ps = ProblemSpecF64::new(4, 3.0, 1.0, INF, unit_weight(1.0, INF), unit_weight(1.0, INF)).unwrap();
    assert!((ps.rho_conj_power(2.0).unwrap() - 0.353_553_390_593_273_8).abs() < 1e-15);
    for p in [1.3, 2.0, 4.5] {
        let ps = ProblemSpecF64::new(1, p, 1.0, 2.0, unit_weight(1.0, 2.0), unit_weight(1.0, 2.0)).unwrap();
        assert_eq!(ps.rho_conj_power(1.5).unwrap(), 1.0);
    }
}

#[test]
fn local_exponent_examples() {
    let v = WeightModelF64::single(1.0, INF, 1.0, 0.5, 0.0, 0.0).unwrap();
    assert_eq!(v.local_exponents(Endpoint::Left).power, 0.5);
    let w = WeightModelF64::new(1.0, vec![PowerLogPiece::constant(1.0, 3.0, 1.0), PowerLogPiece::power(3.0, INF, 1.0, -4.0)]).unwrap();
    assert_eq!(w.local_exponents(Endpoint::Infinity).power, -4.0);
    let n = 3.0;
    let w = WeightModelF64::new(1.0, vec![PowerLogPiece::constant(1.0, 3.0, 1.0), PowerLogPiece::new(3.0, INF, 1.0, 0.0, -5.0, n - 1.0)]).unwrap();
    let e = w.local_exponents(Endpoint::Infinity);
    assert_eq!((e.power, e.log), (-5.0, n - 1.0));
}

#[test]
fn invalid_models_are_rejected() {
    assert!(WeightModelF64::new(1.0, vec![]).is_err());
    assert!(WeightModelF64::new(1.0, vec![PowerLogPiece::constant(1.0, 2.0, -1.0)]).is_err());
    // gap between pieces
    assert!(WeightModelF64::new(1.0, vec![PowerLogPiece::constant(1.0, 2.0, 1.0), PowerLogPiece::constant(2.5, INF, 1.0)]).is_err());
    // log factor below r = 1
    assert!(WeightModelF64::new(0.5, vec![PowerLogPiece::new(0.5, 2.0, 1.0, 0.0, 0.0, 1.0)]).is_err());
    // weights must cover the domain
    assert!(ProblemSpecF64::new(3, 2.0, 1.0, INF, unit_weight(1.0, 2.0), unit_weight(1.0, INF)).is_err());
    assert!(ProblemSpecF64::new(3, 1.0, 1.0, 2.0, unit_weight(1.0, 2.0), unit_weight(1.0, 2.0)).is_err());
}

#[test]
fn json_round_trip_with_infinite_radius() {
    let ps: ProblemSpecF64 = presets::ex61();
    let text = ps.to_json();
    assert!(text.contains("\"inf\""));
    let back = ProblemSpecF64::from_json(&text).unwrap();
    assert_eq!(back.to_json(), text);
    for r in [1.1, 2.0, 50.0] {
        assert_eq!(back.sigma(r).unwrap(), ps.sigma(r).unwrap());
    }
}

#[test]
fn json_defaults_and_unknown_fields() {
    let text = r#"{"N": 1, "p": 2, "R1": 1, "R2": 2, "v": [{"lo": 1, "hi": 2}], "w": [{"lo": 1, "hi": 2, "c": 3}]}"#;
    let ps = ProblemSpecF64::from_json(text).unwrap();
    assert_eq!(ps.w().eval(1.5).unwrap(), 3.0);
    let bad = r#"{"N": 1, "p": 2, "R1": 1, "R2": 2, "v": [], "w": [], "extra": 0}"#;
    assert!(matches!(ProblemSpecF64::from_json(bad), Err(Error::Json(_))));
}
