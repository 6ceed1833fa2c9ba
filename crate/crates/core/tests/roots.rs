mod common;

use common::nested_partial;
use sosreg::roots::{
    falling_factorial, power_derivative, set_partitions, verify_power_smoothness_chain, verify_root_regularity,
    PowerHandle,
};
use sosreg::{Ball, FunctionHandle};

#[test]
fn set_partition_counts_are_bell_numbers() {
    let bell = [1, 1, 2, 5, 15, 52, 203];
    for (k, b) in bell.iter().enumerate() {
        assert_eq!(set_partitions(k).len(), *b, "k = {k}");
    }
    for part in set_partitions(4) {
        let mut all: Vec<usize> = part.concat();
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }
}

#[test]
fn falling_factorial_values() {
    assert_eq!(falling_factorial(5.0, 3), 60.0);
    assert_eq!(falling_factorial(0.5, 0), 1.0);
    assert!((falling_factorial(0.5, 3) - 0.375).abs() < 1e-15);
    assert_eq!(falling_factorial(2.0, 3), 0.0);
}

#[test]
fn power_derivatives_against_closed_form() {
    // (1 + x^2)^{1/2}: second derivative (1 + x^2)^{-3/2}.
    let base = FunctionHandle::from_expr("1 + x^2", &["x"]).unwrap();
    let p = PowerHandle::new(base, 0.5, 4).unwrap();
    for x in [-0.7, 0.0, 0.4, 1.3] {
        assert!((p.value(&[x]) - (1.0f64 + x * x).sqrt()).abs() < 1e-15);
        let d2 = power_derivative(&p, &[x], &[2]).unwrap();
        assert!((d2 - (1.0 + x * x).powf(-1.5)).abs() < 1e-13);
    }
}

#[test]
fn mixed_power_derivative_matches_fd() {
    let base = FunctionHandle::from_expr("2 + sin(x) * y^2", &["x", "y"]).unwrap();
    let p = PowerHandle::new(base, 1.0 / 3.0, 4).unwrap();
    let f = |q: &[f64]| (2.0 + q[0].sin() * q[1] * q[1]).powf(1.0 / 3.0);
    let x = [0.3, 0.8];
    for alpha in [[1u8, 1], [2, 1], [1, 3]] {
        let a = power_derivative(&p, &x, &alpha).unwrap();
        let b = nested_partial(&f, &alpha, &x, 0.05);
        assert!((a - b).abs() < 1e-6 * a.abs().max(1.0), "{alpha:?}: {a} vs {b}");
    }
    assert!(PowerHandle::new(FunctionHandle::from_expr("x", &["x"]).unwrap(), 0.5, 9).is_err());
}

#[test]
fn square_root_of_positive_function_is_regular() {
    let f = FunctionHandle::from_expr("x^2 + y^2 + 0.5", &["x", "y"]).unwrap();
    let r = verify_root_regularity(&f, 0.9, 2, &[0.25, 0.5], &Ball::unit(2), 400).unwrap();
    assert!(r.pass, "{}", r.to_json());
    assert!(verify_root_regularity(&f, 0.5, 2, &[0.25], &Ball::unit(2), 100).is_err());
}

#[test]
fn power_chain_on_positive_function() {
    let f = FunctionHandle::from_expr("x^2 + 1", &["x"]).unwrap();
    let r = verify_power_smoothness_chain(&f, &[0.5, 1.5], 2, &Ball::unit(1), 200, 1e-2).unwrap();
    assert!(r.pass, "{}", r.to_json());
}

#[test]
fn power_chain_on_one_sided_flat_function() {
    let f = FunctionHandle::from_expr("if(x, exp(-1/x), 0)", &["x"]).unwrap();
    let r = verify_power_smoothness_chain(&f, &[0.5, 0.25], 4, &Ball::new(vec![0.5], 0.5), 400, 1e-2).unwrap();
    assert!(r.pass, "{}", r.to_json());
}
