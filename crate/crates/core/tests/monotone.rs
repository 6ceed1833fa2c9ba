use sosreg::monotone::{classify_monotonicity, monotone_functional, verify_power_bound, MonotoneOptions};
use sosreg::{Ball, FunctionHandle, Modulus};

fn on_unit_interval() -> MonotoneOptions {
    MonotoneOptions { region: Some(Ball::new(vec![0.5], 0.5)), ..MonotoneOptions::default() }
}

#[test]
fn linear_function_closed_form() {
    // sup_{y in B(x/2,|x|/2)} y / omega_s(x) = x^{1-s} on (0,1], maximal at x = 1.
    let f = FunctionHandle::from_expr("x", &["x"]).unwrap();
    for s in [0.25, 0.5, 1.0] {
        let r = monotone_functional(&f, &Modulus::scale(s).unwrap(), &on_unit_interval()).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-3, "s = {s}: {}", r.estimate);
    }
}

#[test]
fn radial_function_is_monotone() {
    let f = FunctionHandle::from_expr("x^2 + y^2", &["x", "y"]).unwrap();
    let o = MonotoneOptions { region: Some(Ball::unit(2)), outer_samples: 200, inner_samples: 32, ..Default::default() };
    let c = classify_monotonicity(&f, &[0.5, 1.0], 1e6, &o).unwrap();
    assert!(c.nearly_monotone && c.holder_monotone);
    assert!(classify_monotonicity(&f, &[], 1e6, &o).is_err());
}

#[test]
fn increasing_flat_function_is_bounded() {
    // B(x/2, |x|/2) lies between 0 and x, so for an increasing f the ratio
    // f(y) / omega(f(x)) is at most f(x)^{1-s} <= 1.
    let f = FunctionHandle::from_expr("exp(-1/x^2)", &["x"]).unwrap();
    let r = monotone_functional(&f, &Modulus::scale(0.5).unwrap(), &on_unit_interval()).unwrap();
    assert!(r.estimate.is_finite() && r.estimate <= 1.0 + 1e-9);
}

#[test]
fn power_bound_requires_ordered_exponents() {
    let f = FunctionHandle::from_expr("x^2 + y^2", &["x", "y"]).unwrap();
    assert!(verify_power_bound(&f, 0.5, 0.7, 2, &Ball::unit(2), 100, 1e-2).is_err());
    // |grad f| = 2 f^{1/2}, while |hess f| = 2 is not O(f^{1/4}) at the origin.
    let r = verify_power_bound(&f, 0.9, 0.5, 1, &Ball::unit(2), 400, 1e-2).unwrap();
    assert!(r.pass, "{}", r.to_json());
    let r = verify_power_bound(&f, 0.9, 0.5, 2, &Ball::unit(2), 400, 1e-2).unwrap();
    assert!(!r.pass);
}
