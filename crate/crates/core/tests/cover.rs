use proptest::prelude::*;
use sosreg::cover::{
    build_cover, build_partition, control_distance, control_terms, plateau, verify_slowly_varying, ControlDistanceParams, Variant,
};
use sosreg::{Ball, FunctionHandle};

fn h(src: &str, v: &[&str]) -> FunctionHandle {
    FunctionHandle::from_expr(src, v).unwrap()
}

#[test]
fn params_validate_delta() {
    assert!(ControlDistanceParams::new(0.0, Variant::Full).is_err());
    assert!(ControlDistanceParams::new(0.5, Variant::Full).is_err());
    assert!(ControlDistanceParams::new(0.25, Variant::Reduced).is_ok());
}

#[test]
fn control_terms_closed_form() {
    let f = h("x^4/24 + x^2", &["x"]);
    let d = 0.25;
    let x = 0.3f64;
    let full = ControlDistanceParams::new(d, Variant::Full).unwrap();
    let t = control_terms(&f, &[x], &full).unwrap();
    let v = x.powi(4) / 24.0 + x * x;
    let h2 = x * x / 2.0 + 2.0;
    assert!((t[0] - v.powf(1.0 / (4.0 + 2.0 * d))).abs() < 1e-12);
    assert!((t[1] - h2.powf(1.0 / (2.0 + 2.0 * d))).abs() < 1e-12);
    assert!((t[2] - 1.0).abs() < 1e-12);
    assert_eq!(control_distance(&f, &[x], &full).unwrap(), t[0].max(t[1]).max(t[2]));
    let reduced = ControlDistanceParams::new(d, Variant::Reduced).unwrap();
    assert_eq!(control_terms(&f, &[x], &reduced).unwrap()[2], 0.0);
}

#[test]
fn slowly_varying_reduced_variant() {
    let f = h("x^2*y^2 + x^4 + 0.01", &["x", "y"]);
    let p = ControlDistanceParams::new(0.25, Variant::Reduced).unwrap();
    let r = verify_slowly_varying(&f, &p, &Ball::unit(2), 2000).unwrap();
    assert!(r.pass, "{}", r.to_json());
}

#[test]
fn plateau_shape() {
    assert_eq!(plateau(0.0), 1.0);
    assert_eq!(plateau(0.5), 1.0);
    assert_eq!(plateau(1.0), 0.0);
    assert_eq!(plateau(2.0), 0.0);
    let mut last = 1.0;
    for i in 0..=100 {
        let v = plateau(0.5 + i as f64 / 200.0);
        assert!(v <= last && (0.0..=1.0).contains(&v));
        last = v;
    }
}

#[test]
fn cover_has_bounded_overlap() {
    let f = h("x^2 + y^2", &["x", "y"]);
    let p = ControlDistanceParams::new(0.25, Variant::Full).unwrap();
    let region = Ball::new(vec![0.0, 0.0], 0.1);
    let cells = build_cover(&f, &p, &region, 1.0 / 200.0, 1e-3).unwrap();
    assert!(!cells.is_empty());
    let part = build_partition(cells);
    let chk = part.check(&region.sample(3000)).unwrap();
    assert!(chk.max_error < 1e-10);
    assert!(chk.max_overlap >= 1 && chk.max_overlap < 64, "{}", chk.max_overlap);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn partition_squares_sum_to_one(x in -0.07f64..0.07, y in -0.07f64..0.07) {
        let f = h("x^2 + y^2", &["x", "y"]);
        let p = ControlDistanceParams::new(0.25, Variant::Full).unwrap();
        let region = Ball::new(vec![0.0, 0.0], 0.1);
        let part = build_partition(build_cover(&f, &p, &region, 1.0 / 200.0, 1e-3).unwrap());
        prop_assume!(part.covers(&[x, y]));
        let s: f64 = part.phis(&[x, y]).iter().map(|(_, v)| v * v).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
        prop_assert!(part.phis(&[x, y]).iter().all(|(_, v)| *v >= 0.0));
    }
}
