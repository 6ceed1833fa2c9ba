mod common;

use proptest::prelude::*;
use sosreg::calculus::{
    dyadic_grid, holder_on_points, holder_seminorm, is_flat, sup_fourth, verify_interpolation_bound,
    verify_odd_even_control,
};
use sosreg::{Ball, FunctionHandle, Modulus};

fn h(src: &str, v: &[&str]) -> FunctionHandle {
    FunctionHandle::from_expr(src, v).unwrap()
}

#[test]
fn modulus_closed_forms() {
    let t = 0.01f64;
    assert!((Modulus::scale(1.0).unwrap().eval(t).unwrap() - t * (1.0 + (1.0 / t).ln())).abs() < 1e-15);
    assert!((Modulus::scale(0.5).unwrap().eval(t).unwrap() - 0.1).abs() < 1e-15);
    assert!((Modulus::scale(0.0).unwrap().eval(t).unwrap() - 1.0 / (1.0 + (1.0 / t).ln())).abs() < 1e-15);
    assert!(Modulus::scale(1.2).is_err());
    assert!(Modulus::table(vec![(0.0, 0.0), (0.5, 0.2), (1.0, 1.0)]).is_err());
    let m = Modulus::table(vec![(0.0, 0.0), (0.25, 0.5), (1.0, 1.0)]).unwrap();
    assert!((m.eval(0.125).unwrap() - 0.25).abs() < 1e-15);
}

proptest! {
    #[test]
    fn scale_modulus_is_increasing_and_subadditive(s in 0.0f64..=1.0, a in 1e-6f64..0.5, b in 1e-6f64..0.5) {
        let m = Modulus::scale(s).unwrap();
        let (wa, wb, wab) = (m.eval(a).unwrap(), m.eval(b).unwrap(), m.eval(a + b).unwrap());
        prop_assert!(wab >= wa.max(wb) - 1e-15);
        prop_assert!(wab <= wa + wb + 1e-15);
        prop_assert!((m.ln_eval(a.ln()) - wa.ln()).abs() < 1e-12);
    }
}

#[test]
fn exact_derivatives_of_polynomials() {
    let f = h("x^3*y + 2*y^2", &["x", "y"]);
    assert!(f.is_exact());
    let x = [1.5, -0.5];
    assert!((f.derivative(&[2, 1], &x).unwrap() - 9.0).abs() < 1e-14);
    let g = f.gradient(&x).unwrap();
    assert!((g[0] - 3.0 * 2.25 * -0.5).abs() < 1e-14);
    let hs = f.hessian(&x).unwrap();
    assert!((hs[(1, 1)] - 4.0).abs() < 1e-14);
    assert!((hs[(0, 1)] - hs[(1, 0)]).abs() < 1e-14);
}

#[test]
fn closure_handles_use_finite_differences() {
    let f = FunctionHandle::from_fn("c", 1, Ball::unit(1), 1.0, |x: &[f64]| x[0].sin());
    assert!(!f.is_exact());
    let d = f.derivative(&[2], &[0.4]).unwrap();
    assert!((d + 0.4f64.sin()).abs() < 1e-5);
}

#[test]
fn odd_even_control_on_quartic() {
    let f = h("x^4 + y^4 + x^2*y^2", &["x", "y"]);
    let r = verify_odd_even_control(&f, &Ball::unit(2), 2000).unwrap();
    assert!(r.pass, "{}", r.to_json());
}

#[test]
fn interpolation_bound_holds_for_polynomial() {
    let f = h("x^4 - x^2 + 0.3", &["x"]);
    let r = verify_interpolation_bound(&f, &Ball::unit(1), 2, 4, 200).unwrap();
    assert!(r.pass, "{}", r.to_json());
}

#[test]
fn sup_fourth_of_quartic() {
    let f = h("x^4/24", &["x"]);
    assert!((sup_fourth(&f, &Ball::unit(1), 50).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn flatness_detection() {
    let grid = dyadic_grid(8);
    assert!(is_flat(&h("exp(-1/x^2)", &["x"]), 4, &grid, false).unwrap().pass);
    assert!(!is_flat(&h("x^6", &["x"]), 8, &grid, false).unwrap().pass);
}

#[test]
fn holder_seminorm_of_power() {
    // |x|^{3/2}: first derivative is 1.5 |x|^{1/2} sign x, whose 1/2-Hölder
    // seminorm on [-1,1] is 1.5 sqrt 2 (attained across the origin).
    let f = FunctionHandle::from_fn("p", 1, Ball::unit(1), 1.0, |x: &[f64]| x[0].abs().powf(1.5));
    let e = holder_seminorm(&f, 0, 0.5, &Ball::unit(1), 200).unwrap();
    assert!(e.seminorm > 0.0);
    let pts: Vec<Vec<f64>> = (0..=40).map(|i| vec![-1.0 + i as f64 / 20.0]).collect();
    let lin = h("3*x + 1", &["x"]);
    let e = holder_on_points(&lin, 0, 1.0, &pts, 1e-9).unwrap();
    assert!((e.seminorm - 3.0).abs() < 1e-12);
}
