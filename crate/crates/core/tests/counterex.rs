use proptest::prelude::*;
use sosreg::counterex::{
    boundary_points, boundary_search, build_family, crucial_lower_bound, estimate_delta_nu, family_ln, functional,
    gamma_alpha, log_grid, monotone_bounds, pair_ratio_ln, quartic_l, scan, sos_failure_criterion, sphere_points,
    threshold, witness_pairs, BoundsOptions, DeltaNuOptions, FamilyParams, Functional, LogProfile, SosVerdict,
};
use sosreg::Modulus;

fn std_family() -> FamilyParams {
    FamilyParams::standard(Some(0.5), 0.5).unwrap()
}

#[test]
fn gamma_and_threshold_closed_forms() {
    let g1 = gamma_alpha(1.0).unwrap();
    assert!((g1 - (1.0 + 2f64.sqrt()) / 2.0).abs() < 1e-15);
    let s0 = threshold(1.0).unwrap();
    assert!((s0 - 4.0 / (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-15);
    assert_eq!(format!("{s0:.5}"), "0.68629");
    assert!(gamma_alpha(0.0).is_err());
}

#[test]
fn family_handle_agrees_with_log_form() {
    let p = std_family();
    let f = build_family(&p).unwrap();
    for q in [[0.1, 0.2, -0.1, 0.05, 0.3], [0.3, 0.0, 0.0, 0.0, 0.2], [0.0, 0.0, 0.0, 0.0, 0.5]] {
        let v = f.value(&q);
        assert!(v > 0.0);
        assert!((v.ln() - family_ln(&p, &q)).abs() < 1e-10, "{q:?}");
    }
}

#[test]
fn psi_must_be_small() {
    let mut p = std_family();
    p.psi = Some(LogProfile::new("t^2", |t| 2.0 * t.ln()));
    assert!(p.validate().is_err());
    p.rho = 1.0;
    assert!(p.validate().is_err());
}

#[test]
fn missing_psi_is_reported() {
    let p = FamilyParams::standard(None, 0.5).unwrap();
    let grid = log_grid(1e-2, 4);
    assert!(matches!(
        functional(&p, Functional::R, 1.0, &Modulus::scale(0.5).unwrap(), &grid),
        Err(sosreg::Error::MissingPsi)
    ));
}

#[test]
fn t_functional_flips_at_threshold() {
    let p = std_family();
    let g1 = gamma_alpha(1.0).unwrap();
    let grid = log_grid(10f64.powf(-2.5), 8);
    let below = functional(&p, Functional::T, g1, &Modulus::scale(0.6).unwrap(), &grid).unwrap();
    let above = functional(&p, Functional::T, g1, &Modulus::scale(0.75).unwrap(), &grid).unwrap();
    assert!(!below.divergent && below.sup.is_finite());
    assert!(above.divergent);
}

#[test]
fn t_verdict_is_sharp_at_threshold() {
    let p = std_family();
    let g1 = gamma_alpha(1.0).unwrap();
    let s0 = threshold(1.0).unwrap();
    let grid = log_grid(10f64.powf(-2.5), 8);
    let at = |s: f64| functional(&p, Functional::T, g1, &Modulus::scale(s).unwrap(), &grid).unwrap().divergent;
    assert!(!at(s0 - 0.02));
    assert!(at(s0 + 0.02));
}

#[test]
fn crucial_bound_exponent_and_scaling() {
    let taus = [0.01, 0.1, 1.0];
    let a = crucial_lower_bound(0.2, 0.5, 1.0, &taus).unwrap();
    assert!((a.exponent + 1.0 / 14.0).abs() < 1e-15);
    let b = crucial_lower_bound(0.4, 0.5, 1.0, &taus).unwrap();
    for (x, y) in a.points.iter().zip(&b.points) {
        assert!((y.1 / x.1 - 2f64.powf(2.0 / 3.5)).abs() < 1e-12);
    }
    assert!(crucial_lower_bound(0.0, 0.5, 1.0, &taus).is_err());
}

#[test]
fn sos_failure_verdicts() {
    let p = std_family();
    let grid = log_grid(1e-2, 8);
    assert_eq!(sos_failure_criterion(&p, 0.7, &grid).unwrap().verdict, SosVerdict::FailsSos);
    assert_eq!(sos_failure_criterion(&p, 0.3, &grid).unwrap().verdict, SosVerdict::DoesNotTrigger);
    let beta = 0.5;
    let mut q = std_family();
    q.psi = Some(LogProfile::new("phi^(4/beta) t^(16/beta)", move |t| {
        4.0 / beta * (-1.0 / (t * t)) + 16.0 / beta * t.ln()
    }));
    assert_eq!(sos_failure_criterion(&q, beta, &grid).unwrap().verdict, SosVerdict::Inconclusive);
}

#[test]
fn bounds_sandwich_for_small_s() {
    let p = FamilyParams::standard(Some(0.5), 0.9).unwrap();
    let r = monotone_bounds(&p, &Modulus::scale(0.1).unwrap(), 0.02, &BoundsOptions::default()).unwrap();
    assert_eq!(r.sandwich, Some(true), "{:?}", r.notes);
    assert!(r.witness_s.matches && r.witness_t.matches);
}

#[test]
fn scan_rows_follow_threshold() {
    // S(1/2) is finite exactly for s <= s', so s' = 0.9 isolates the T flip.
    let p = FamilyParams::standard(Some(0.9), 0.5).unwrap();
    let grid = log_grid(10f64.powf(-2.5), 8);
    let rows = scan(&p, &[0.6, 0.75], 0.7, &grid).unwrap();
    assert_eq!(rows.len(), 2);
    assert_ne!(rows[0].verdict_monotone, "divergent");
    assert_eq!(rows[1].verdict_monotone, "divergent");
}

#[test]
fn quartic_zeros_and_sign() {
    assert_eq!(quartic_l(&[0.0, 1.0, 0.0, 0.0]), 0.0);
    assert_eq!(quartic_l(&[1.0, 1.0, 1.0, 1.0]), 2.0);
    let min = sphere_points(2000).iter().map(|w| quartic_l(w)).fold(f64::INFINITY, f64::min);
    assert!(min >= 0.0);
}

#[test]
fn delta_nu_decreases_with_nu() {
    let est = |nu| {
        let o = DeltaNuOptions {
            sphere_samples: 1000,
            restarts: 4,
            iterations: 150,
            final_samples: 4000,
            ..DeltaNuOptions::new(nu, 3.0)
        };
        estimate_delta_nu(&o).unwrap().estimate
    };
    let (d0, d1, d2) = (est(0), est(1), est(2));
    assert!(d0 >= d1 && d1 >= d2 && d2 > 0.0, "{d0} {d1} {d2}");
    assert!(estimate_delta_nu(&DeltaNuOptions::new(5, 3.0)).is_err());
    assert!(estimate_delta_nu(&DeltaNuOptions::new(1, 0.0)).is_err());
}

proptest! {
    #[test]
    fn quartic_is_homogeneous(w in prop::array::uniform4(-2.0f64..2.0), lam in -3.0f64..3.0) {
        let scaled = w.map(|v| v * lam);
        let a = quartic_l(&scaled);
        let b = lam.powi(4) * quartic_l(&w);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }

    #[test]
    fn boundary_points_lie_on_sphere(
        w in prop::array::uniform4(-0.5f64..0.5),
        t in -0.5f64..0.5,
        th in 0.0f64..std::f64::consts::TAU,
    ) {
        let mut p = w.to_vec();
        p.push(t);
        let q = &boundary_points(&p, &[th])[0];
        let half: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt() / 2.0;
        let d: f64 = q.iter().zip(&p).map(|(a, b)| (a - b / 2.0).powi(2)).sum::<f64>().sqrt();
        prop_assert!((d - half).abs() <= 1e-12);
    }

    #[test]
    fn witnesses_bounded_by_search(t in 0.05f64..0.7) {
        let p = std_family();
        let m = Modulus::scale(0.5).unwrap();
        let o = BoundsOptions { t_grid: vec![t], ratios: vec![0.0, 1.0], thetas: 64, directions: 1, witness_t0: 0.05 };
        let (sup, _) = boundary_search(&p, &m, &o);
        for (pt, q) in witness_pairs(t) {
            prop_assert!(pair_ratio_ln(&p, &m, &pt, &q) <= sup + 1e-9);
        }
    }
}
