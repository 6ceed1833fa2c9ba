mod common;

use common::{bisect, exact_delta_sequence, ridders, Frac};
use proptest::prelude::*;
use sosreg::sos::{
    check_differential_inequalities, decompose, delta_sequence, implicit_root, newton_root, verify_decomposition,
    DecomposeParams,
};
use sosreg::{Ball, FunctionHandle};
use std::sync::Arc;

fn h(src: &str, v: &[&str]) -> FunctionHandle {
    FunctionHandle::from_expr(src, v).unwrap()
}

#[test]
fn delta_sequence_matches_exact_recursion() {
    let seq = delta_sequence(0.25, 0.3, 4).unwrap();
    let exact = exact_delta_sequence(Frac(1, 4), Frac(3, 10), 4);
    for (a, b) in seq.iter().zip(&exact) {
        assert!((a - b.to_f64()).abs() < 1e-15);
    }
    assert!(delta_sequence(0.5, 0.3, 4).is_err());
}

proptest! {
    #[test]
    fn delta_sequence_is_decreasing(d in 0.01f64..0.49, eta in 0.05f64..0.49, n in 2usize..8) {
        let seq = delta_sequence(d, eta, n).unwrap();
        prop_assert_eq!(seq.len(), n);
        for w in seq.windows(2) {
            prop_assert!(w[1] < w[0] && w[1] > 0.0);
        }
    }
}

#[test]
fn implicit_root_gradient_against_bisection() {
    let g = h("x^3 + x - a - 2*b", &["a", "b", "x"]);
    let root = |a: f64, b: f64| bisect(&|x| x * x * x + x - a - 2.0 * b, -10.0, 10.0);
    let xi = [0.4, -0.1];
    let r = implicit_root(&g, &xi, 0.0).unwrap();
    assert!((r.value - root(xi[0], xi[1])).abs() < 1e-13);
    let (da, _) = ridders(&|t| root(t, xi[1]), xi[0], 0.1);
    let (db, _) = ridders(&|t| root(xi[0], t), xi[1], 0.1);
    assert!((r.gradient[0] - da).abs() < 1e-9);
    assert!((r.gradient[1] - db).abs() < 1e-9);
    assert!((newton_root(&g, &xi, 1.0).unwrap() - r.value).abs() < 1e-13);
}

#[test]
fn differential_inequalities() {
    // The Hessian of |x|^2 is constant while f^eta vanishes at the origin.
    let sq = h("x^2 + y^2", &["x", "y"]);
    let r = check_differential_inequalities(&sq, 0.25, 0.3, &Ball::unit(2), 500).unwrap();
    assert!(!r.pass);
    assert_eq!(r.constants["fourth_constant"], 0.0);
    let pos = h("x^4 + y^4 + 0.1", &["x", "y"]);
    let r = check_differential_inequalities(&pos, 0.25, 0.3, &Ball::unit(2), 500).unwrap();
    assert!(r.pass, "{}", r.to_json());
}

#[test]
fn decomposition_reconstructs_positive_quartic() {
    let f = h("x^4 + x^2*y^2 + y^4 + 0.05", &["x", "y"]);
    let region = Ball::new(vec![0.0, 0.0], 0.1);
    let d = Arc::new(decompose(&f, &DecomposeParams::new(region.clone())).unwrap());
    assert!(d.groups() > 0);
    assert_eq!(d.group_labels().len(), d.groups());
    let grid = region.sample(500);
    let v = verify_decomposition(&f, &d, &grid, None).unwrap();
    assert!(v.pass && v.residual_sup <= 1e-6 * (1.0 + v.sup_f));
    for x in grid.iter().filter(|x| d.partition().covers(x)).take(50) {
        let roots = d.eval_roots(x).unwrap();
        let s: f64 = roots.iter().map(|g| g * g).sum();
        assert!((s - f.value(x)).abs() < 1e-12);
        let g0 = d.group_handle(0);
        assert!((g0.value(x) - roots[0]).abs() < 1e-15);
    }
}

#[test]
fn square_norm_has_case_two_cell() {
    let f = h("x^2 + y^2", &["x", "y"]);
    let d = decompose(&f, &DecomposeParams::new(Ball::new(vec![0.0, 0.0], 0.1))).unwrap();
    let profiles = d.case_two_profiles();
    assert!(!profiles.is_empty());
    for p in profiles {
        for y in Ball::new(vec![0.0, 0.0], p.frame.radius).sample(50) {
            let back = p.frame.to_local(&p.frame.to_global(&y));
            assert!((back[0] - y[0]).abs() < 1e-15 && (back[1] - y[1]).abs() < 1e-15);
            assert!(p.identity_defect(&y).unwrap() < 1e-12);
        }
    }
}
