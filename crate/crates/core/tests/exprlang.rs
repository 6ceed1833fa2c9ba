mod common;

use common::nested_partial;
use proptest::prelude::*;
use sosreg::exprlang::{
    catalog_entries, catalog_function, differentiate, parse_expression, parse_function_file, parse_with_vars, Expr,
    FunctionDef, Tape,
};
use sosreg::Error;
use std::collections::BTreeMap;

fn vars(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn eval(src: &str, names: &[&str], x: &[f64]) -> f64 {
    let e = parse_with_vars(src, &vars(names)).unwrap();
    e.eval(&vars(names), x).unwrap()
}

#[test]
fn precedence_and_associativity() {
    assert_eq!(eval("1 + 2*3", &[], &[]), 7.0);
    assert_eq!(eval("(2^3)^2", &[], &[]), 64.0);
    assert!(matches!(parse_expression("2^3^2"), Err(Error::Syntax { .. })));
    assert_eq!(eval("-2^2", &[], &[]), -4.0);
    assert_eq!(eval("8/4/2", &[], &[]), 1.0);
    assert_eq!(eval("x - y - 1", &["x", "y"], &[5.0, 2.0]), 2.0);
}

#[test]
fn builtins_evaluate() {
    let x = 0.7f64;
    assert!((eval("exp(x) + ln(x) + sin(x)*cos(x)", &["x"], &[x]) - (x.exp() + x.ln() + x.sin() * x.cos())).abs() < 1e-15);
    assert_eq!(eval("if(x, 1, 2)", &["x"], &[0.0]), 2.0);
    assert_eq!(eval("if(x, 1, 2)", &["x"], &[1e-300]), 1.0);
}

#[test]
fn syntax_errors_carry_positions() {
    match parse_expression("x +* y") {
        Err(Error::Syntax { line, col, .. }) => assert_eq!((line, col), (1, 4)),
        other => panic!("unexpected {other:?}"),
    }
    match parse_with_vars("x + q", &vars(&["x"])) {
        Err(Error::UnknownIdentifier { name, col, .. }) => {
            assert_eq!(name, "q");
            assert_eq!(col, 5);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(parse_expression("sin(x, y)"), Err(Error::Arity { expected: 1, got: 2, .. })));
}

#[test]
fn function_file_definitions() {
    let src = "# comment\ndef f(x, y) = x^2 + y^2\n\ndef g(t) = exp(-1/t^2)\n";
    let defs = parse_function_file(src).unwrap();
    assert_eq!(defs.len(), 2);
    assert_eq!(defs[0].name, "f");
    assert_eq!(defs[0].vars, vars(&["x", "y"]));
    assert_eq!(defs[1].name, "g");
}

#[test]
fn derivatives_of_known_functions() {
    let v = vars(&["x"]);
    let e = parse_with_vars("x^5", &v).unwrap();
    let d3 = differentiate(&e, "x", 3).unwrap();
    assert!((d3.eval(&v, &[2.0]).unwrap() - 60.0 * 4.0).abs() < 1e-12);
    let e = parse_with_vars("exp(-1/x^2)", &v).unwrap();
    let d1 = differentiate(&e, "x", 1).unwrap();
    let x = 0.6f64;
    let exact = 2.0 / x.powi(3) * (-1.0 / (x * x)).exp();
    assert!((d1.eval(&v, &[x]).unwrap() - exact).abs() < 1e-14);
}

#[test]
fn tape_matches_tree_evaluation() {
    let v = vars(&["x", "y"]);
    let e = parse_with_vars("sin(x*y) + (x^2 + 1)^0.5 / (1 + y^2) - ln(2 + cos(y))", &v).unwrap();
    let t = Tape::compile(&e, &v).unwrap();
    for (x, y) in [(0.1, 0.2), (-1.3, 2.0), (3.0, -0.5)] {
        let a = t.eval(&[x, y]);
        let b = e.eval(&v, &[x, y]).unwrap();
        assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
    }
}

#[test]
fn mixed_partials_match_finite_differences() {
    let def = FunctionDef::parse("g", &["x", "y"], "exp(x*y) * sin(x + 2*y)").unwrap();
    let h = sosreg::FunctionHandle::from_def(&def).unwrap();
    let f = |p: &[f64]| (p[0] * p[1]).exp() * (p[0] + 2.0 * p[1]).sin();
    let x = [0.3, -0.2];
    for alpha in [[1u8, 0], [1, 1], [2, 1], [0, 3]] {
        let sym = h.derivative(&alpha, &x).unwrap();
        let fd = nested_partial(&f, &alpha, &x, 0.05);
        assert!((sym - fd).abs() < 1e-6 * sym.abs().max(1.0), "{alpha:?}: {sym} vs {fd}");
    }
}

#[test]
fn catalog_is_complete_and_validates_params() {
    let names: Vec<&str> = catalog_entries().iter().map(|e| e.name).collect();
    for n in ["motzkin_M", "quartic_L", "flat_exp_sq", "flat_exp", "bump_h", "family_f", "glaeser_stub"] {
        assert!(names.contains(&n), "{n}");
        let def = catalog_function(n, &BTreeMap::new()).unwrap();
        let f = sosreg::FunctionHandle::from_def(&def).unwrap();
        assert_eq!(f.arity(), def.variables.len());
    }
    let bad = BTreeMap::from([("rho".to_string(), 1.5)]);
    assert!(matches!(catalog_function("bump_h", &bad), Err(Error::ParamRange { .. })));
    assert!(matches!(catalog_function("nope", &BTreeMap::new()), Err(Error::UnknownCatalog(_))));
}

#[test]
fn motzkin_is_nonnegative() {
    let def = catalog_function("motzkin_M", &BTreeMap::new()).unwrap();
    let f = sosreg::FunctionHandle::from_def(&def).unwrap();
    for p in def.domain.sample(2000) {
        assert!(f.value(&p) >= -1e-15);
    }
    let third = (1.0f64 / 3.0).sqrt();
    assert!(f.value(&[third, third, third]).abs() < 1e-15);
}

fn arb_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        (-5i32..6).prop_map(|k| format!("{}", k as f64 / 2.0)),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("exp({a} / 4)")),
            (inner.clone(), 1u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_roundtrip(src in arb_expr(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let v = vars(&["x", "y"]);
        let e: Expr = parse_with_vars(&src, &v).unwrap();
        let printed = e.to_string();
        let back = parse_with_vars(&printed, &v).unwrap();
        let a = e.eval(&v, &[x, y]).unwrap();
        let b = back.eval(&v, &[x, y]).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} -> {}", src, printed);
        prop_assert_eq!(back.to_string(), printed);
    }
}
