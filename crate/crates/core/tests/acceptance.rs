//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod common;

use common::{bisect, close, exact_delta_sequence, ridders, Frac};
use sosreg::calculus::{verify_odd_even_control, FunctionHandle, Modulus};
use sosreg::counterex::{
    estimate_delta_nu, functional, gamma_alpha, log_grid, quartic_l, sphere_points, threshold, witness_shapes,
    DeltaNuOptions, FamilyParams, Functional,
};
use sosreg::cover::{build_cover, build_partition, verify_slowly_varying, ControlDistanceParams, Variant};
use sosreg::exprlang::{catalog_entries, catalog_function};
use sosreg::geometry::multi_indices;
use sosreg::monotone::{monotone_functional, MonotoneOptions};
use sosreg::roots::PowerHandle;
use sosreg::sos::{
    case_two_identity, decompose, delta_sequence, group_holder, implicit_root, verify_decomposition, DecomposeParams,
    Decomposition, HolderOptions,
};
use sosreg::Ball;
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    format!("error: {e}")
}

struct Case {
    label: &'static str,
    f: FunctionHandle,
    region: Ball,
}

fn cases() -> Vec<Case> {
    let h = |src: &str, vars: &[&str]| FunctionHandle::from_expr(src, vars).unwrap();
    vec![
        Case { label: "c = 4", f: h("4 + 0*x", &["x"]), region: Ball::new(vec![0.0], 1.0) },
        Case { label: "x^2", f: h("x^2", &["x"]), region: Ball::new(vec![0.0], 1.0) },
        Case { label: "x^2+y^2", f: h("x^2 + y^2", &["x", "y"]), region: Ball::new(vec![0.0, 0.0], 0.1) },
        Case { label: "x^4+y^4+0.1", f: h("x^4 + y^4 + 0.1", &["x", "y"]), region: Ball::new(vec![0.0, 0.0], 0.1) },
    ]
}

fn partition_of_unity() -> Check {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for c in cases().into_iter().take(3) {
        let p = ControlDistanceParams::new(0.25, Variant::Full).map_err(err)?;
        let cells = build_cover(&c.f, &p, &c.region, 1.0 / 200.0, 1e-3).map_err(err)?;
        let part = build_partition(cells);
        let pts: Vec<Vec<f64>> = c.region.sample(10_000).into_iter().filter(|x| part.covers(x)).collect();
        let mut e: f64 = 0.0;
        for x in &pts {
            let s: f64 = part.phis(x).iter().map(|(_, v)| v * v).sum();
            e = e.max((s - 1.0).abs());
        }
        worst = worst.max(e);
        lines.push(format!("{}: {} pts, err {e:.1e}", c.label, pts.len()));
        if pts.len() < 5000 {
            return Err(format!("{}: only {} covered grid points", c.label, pts.len()));
        }
    }
    ensure(worst <= 1e-10, lines.join("; "))
}

fn residuals(store: &mut Vec<(String, Arc<Decomposition>)>) -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for c in cases() {
        let t = Instant::now();
        let params = DecomposeParams::new(c.region.clone());
        let d = decompose(&c.f, &params).map_err(err)?;
        let grid = c.region.sample(4000);
        let v = verify_decomposition(&c.f, &d, &grid, None).map_err(err)?;
        let sup_f = grid.iter().map(|x| c.f.value(x)).fold(0.0, f64::max);
        let mut own: f64 = 0.0;
        for x in &grid {
            if d.partition().covers(x) {
                own = own.max((c.f.value(x) - d.sum_of_squares(x).map_err(err)?).abs());
            }
        }
        let tol = 1e-6 * (1.0 + sup_f);
        let secs = t.elapsed().as_secs_f64();
        let pass = v.pass && v.used > 0 && v.residual_sup <= tol && own <= tol && secs < 60.0;
        ok &= pass;
        lines.push(format!("{}: sup {:.1e} ({} groups, {:.1}s)", c.label, v.residual_sup.max(own), d.groups(), secs));
        store.push((c.label.to_string(), Arc::new(d)));
    }
    ensure(ok, lines.join("; "))
}

fn case_two(store: &[(String, Arc<Decomposition>)]) -> Check {
    let (_, d) = store.iter().find(|(l, _)| l == "x^2+y^2").ok_or("2D decomposition missing")?;
    let profiles = d.case_two_profiles();
    if profiles.is_empty() {
        return Err("no Case II cells on the 2D test".into());
    }
    let mut worst: f64 = 0.0;
    let mut worst_h: f64 = 0.0;
    for p in &profiles {
        worst = worst.max(case_two_identity(p, 1000).map_err(err)?);
        // For |x|^2 the factor is exactly 1 and X(xi) = -(c + R(xi, 0)) . a.
        let a = p.frame.axis();
        for y in Ball::new(vec![0.0; 2], p.frame.radius).sample(200) {
            let base = p.frame.to_global(&[y[0], 0.0]);
            let x_exact = -base.iter().zip(&a).map(|(u, v)| u * v).sum::<f64>();
            let x = p.solve(&y[..1]).map_err(err)?;
            let h = p.factor(&y[..1], y[1]).map_err(err)?;
            worst_h = worst_h.max((h - 1.0).abs()).max((x - x_exact).abs());
            let g = p.frame.to_global(&y);
            let fy = g.iter().map(|v| v * v).sum::<f64>();
            let m = p.frame.to_global(&[y[0], x_exact]);
            let big_f = m.iter().map(|v| v * v).sum::<f64>();
            worst = worst.max((fy - big_f - (y[1] - x_exact).powi(2)).abs());
        }
    }
    ensure(
        worst <= 1e-10 && worst_h <= 1e-10,
        format!("{} cells, identity defect {worst:.1e}, |H - 1| and |X - X_exact| {worst_h:.1e}", profiles.len()),
    )
}

fn odd_even() -> Check {
    let names = ["motzkin_M", "quartic_L", "flat_exp_sq", "flat_exp", "bump_h"];
    let mut lines = Vec::new();
    let mut ok = true;
    for n in names {
        let def = catalog_function(n, &BTreeMap::new()).map_err(err)?;
        let f = FunctionHandle::from_def(&def).map_err(err)?;
        let rep = verify_odd_even_control(&f, &def.domain, 10_000).map_err(err)?;
        let viol: u64 = rep.details.as_array().map_or(0, |a| {
            a.iter().take(5).map(|s| s["violations"].as_u64().unwrap_or(0)).sum()
        });
        ok &= rep.pass && viol == 0;
        lines.push(format!("{n}: worst ratio {:.3}", rep.ratio));
    }
    ensure(ok, lines.join("; "))
}

fn slow_variation() -> Check {
    let quartic = FunctionHandle::from_expr("x^4/24", &["x"]).unwrap();
    let flat = FunctionHandle::from_expr("exp(-1/x^2)", &["x"]).unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for (label, f, region) in [
        ("x^4/24", &quartic, Ball::new(vec![0.0], 1.0)),
        ("exp(-1/t^2) on [0.05,1]", &flat, Ball::new(vec![0.525], 0.475)),
    ] {
        for delta in [0.1, 0.25, 0.45] {
            let p = ControlDistanceParams::new(delta, Variant::Full).map_err(err)?;
            let rep = verify_slowly_varying(f, &p, &region, 10_000).map_err(err)?;
            ok &= rep.pass && rep.constants["pairs"] >= 10_000.0;
            lines.push(format!("{label} d={delta}: {:.3}", rep.ratio));
        }
    }
    ensure(ok, format!("worst |r(x)-r(y)|/bound: {}", lines.join(", ")))
}

fn recursion() -> Check {
    let t = Instant::now();
    let seq = delta_sequence(0.4, 0.3, 5).map_err(err)?;
    let secs = t.elapsed().as_secs_f64();
    let exact = exact_delta_sequence(Frac(2, 5), Frac(3, 10), 5);
    let last = exact[4];
    let lo = Frac(4, 5).mul(Frac(1, 2).mul(Frac(1, 2)).mul(Frac(1, 2)).mul(Frac(1, 2))).mul(Frac(2, 5));
    let hi = Frac(5, 4).mul(Frac(3, 5).mul(Frac(3, 5)).mul(Frac(3, 5)).mul(Frac(3, 5))).mul(Frac(2, 5));
    let agree = seq.iter().zip(&exact).all(|(a, b)| close(*a, b.to_f64(), 1e-14));
    ensure(
        lo.le(last) && last.le(hi) && agree && secs < 1e-3,
        format!("delta_4 = {}/{} = {:.6} in [{:.4}, {:.4}]", last.0, last.1, last.to_f64(), lo.to_f64(), hi.to_f64()),
    )
}

fn threshold_flip() -> Check {
    let s0 = threshold(1.0).map_err(err)?;
    let shown: f64 = format!("{s0:.5}").parse().unwrap();
    let p = FamilyParams::standard(Some(0.5), 0.5).map_err(err)?;
    let g1 = gamma_alpha(1.0).map_err(err)?;
    let grid = log_grid(10f64.powf(-2.5), 8);
    let lo = functional(&p, Functional::T, g1, &Modulus::scale(0.6).unwrap(), &grid).map_err(err)?;
    let hi = functional(&p, Functional::T, g1, &Modulus::scale(0.75).unwrap(), &grid).map_err(err)?;
    ensure(
        (shown - 0.68629).abs() <= 1e-5 && !lo.divergent && hi.divergent,
        format!("s0 = {shown:.5}; T(s=0.6) ln sup {:.3}, T(s=0.75) divergent = {}", lo.ln_sup, hi.divergent),
    )
}

fn interior_points(def: &sosreg::exprlang::FunctionDef, count: usize) -> Vec<Vec<f64>> {
    let all: Vec<Vec<f64>> = def.domain.sample(40 * count).into_iter().filter(|p| (def.interior)(p)).collect();
    let stride = (all.len() / count).max(1);
    all.into_iter().step_by(stride).take(count).collect()
}

/// Each symbolic partial of order k + 1 against the Ridders derivative of
/// the partial of order k, the base case being plain function values. The
/// starting step with the smallest Ridders error estimate wins.
fn chain_check(f: &FunctionHandle, pts: &[Vec<f64>], max_order: usize, h0: f64) -> std::result::Result<(f64, usize), String> {
    let n = f.arity();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for k in 1..=max_order {
        for alpha in multi_indices(n, k) {
            let i = alpha.iter().position(|&a| a > 0).unwrap();
            let mut lower = alpha.clone();
            lower[i] -= 1;
            for x in pts {
                let sym = f.derivative(&alpha, x).map_err(err)?;
                let g = |t: f64| {
                    let mut y = x.clone();
                    y[i] = t;
                    f.derivative(&lower, &y).unwrap()
                };
                let fd = [h0, h0 / 4.0, h0 / 16.0]
                    .iter()
                    .map(|&h| ridders(&g, x[i], h))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap()
                    .0;
                let scale = 1f64.max(sym.abs()).max(fd.abs());
                worst = worst.max((sym - fd).abs() / scale);
                count += 1;
            }
        }
    }
    Ok((worst, count))
}

fn derivative_oracles() -> Check {
    let mut lines = Vec::new();
    let mut worst: f64 = 0.0;
    for e in catalog_entries() {
        let def = catalog_function(e.name, &BTreeMap::new()).map_err(err)?;
        let f = FunctionHandle::from_def(&def).map_err(err)?;
        let pts = interior_points(&def, 100);
        if pts.len() < 100 {
            return Err(format!("{}: only {} interior points", e.name, pts.len()));
        }
        let (w, c) = chain_check(&f, &pts, 4, 1e-2)?;
        worst = worst.max(w);
        lines.push(format!("{} {c} partials {w:.0e}", e.name));
    }
    for (src, gamma) in [("x^2*y^2 + x^4 + y^2 + 0.2", 0.5), ("1.5 + sin(x)*cos(y)", 1.0 / 3.0), ("1 + x^2 + x*y", 2.5)] {
        let base = FunctionHandle::from_expr(src, &["x", "y"]).map_err(err)?;
        let p = PowerHandle::new(base, gamma, 4).map_err(err)?.handle();
        let pts = Ball::new(vec![0.0, 0.0], 0.9).sample(100);
        let (w, c) = chain_check(&p, &pts, 4, 1e-2)?;
        worst = worst.max(w);
        lines.push(format!("({src})^{gamma:.3} {c} partials {w:.0e}"));
    }
    ensure(worst <= 1e-5, lines.join("; "))
}

fn ift() -> Check {
    // G1(a, b, x) = x^3 + x + a^2 b - sin(b) - 1, G2(a, x) = exp(x) + a x - 2.
    let g1 = FunctionHandle::from_expr("x^3 + x + a^2*b - sin(b) - 1", &["a", "b", "x"]).unwrap();
    let g2 = FunctionHandle::from_expr("exp(x) + a*x - 2", &["a", "x"]).unwrap();
    let root1 = |a: f64, b: f64| bisect(&|x: f64| x.powi(3) + x + a * a * b - b.sin() - 1.0, -10.0, 10.0);
    let root2 = |a: f64| bisect(&|x: f64| x.exp() + a * x - 2.0, -10.0, 10.0);
    let mut worst: f64 = 0.0;
    for xi in [[0.3, -0.4], [0.7, 0.2], [-0.5, 0.9]] {
        let r = implicit_root(&g1, &xi, 0.0).map_err(err)?;
        worst = worst.max((r.value - root1(xi[0], xi[1])).abs());
        let h = 1e-3;
        let oracle = [
            [
                (root1(xi[0] + h, xi[1]) - 2.0 * root1(xi[0], xi[1]) + root1(xi[0] - h, xi[1])) / (h * h),
                (root1(xi[0] + h, xi[1] + h) - root1(xi[0] + h, xi[1] - h) - root1(xi[0] - h, xi[1] + h)
                    + root1(xi[0] - h, xi[1] - h))
                    / (4.0 * h * h),
            ],
            [
                0.0,
                (root1(xi[0], xi[1] + h) - 2.0 * root1(xi[0], xi[1]) + root1(xi[0], xi[1] - h)) / (h * h),
            ],
        ];
        worst = worst
            .max((r.hessian[0][0] - oracle[0][0]).abs())
            .max((r.hessian[0][1] - oracle[0][1]).abs())
            .max((r.hessian[1][0] - oracle[0][1]).abs())
            .max((r.hessian[1][1] - oracle[1][1]).abs());
    }
    for a in [0.5, 1.0, 2.0] {
        let r = implicit_root(&g2, &[a], 0.0).map_err(err)?;
        let d2 = ridders(&|t: f64| ridders(&|u: f64| root2(u), t, 0.05).0, a, 0.05).0;
        worst = worst.max((r.value - root2(a)).abs()).max((r.hessian[0][0] - d2).abs());
    }
    ensure(worst <= 1e-6, format!("max deviation from FD second derivatives {worst:.1e}"))
}

fn monotone_closed_form() -> Check {
    let f = FunctionHandle::from_expr("x", &["x"]).unwrap();
    let o = MonotoneOptions { region: Some(Ball::new(vec![0.5], 0.5)), ..MonotoneOptions::default() };
    let rep = monotone_functional(&f, &Modulus::scale(0.5).unwrap(), &o).map_err(err)?;
    let p = FamilyParams::standard(Some(0.5), 0.5).map_err(err)?;
    let (ws, wt) = witness_shapes(&p, &Modulus::scale(0.5).unwrap(), 0.05).map_err(err)?;
    ensure(
        (rep.estimate - 1.0).abs() <= 1e-3 && ws.matches && wt.matches,
        format!(
            "estimate {:.6}; witness spreads S {:.1e}, T {:.1e} over t in [0.05, 0.5]",
            rep.estimate, ws.spread, wt.spread
        ),
    )
}

fn delta_nu() -> Check {
    let t = Instant::now();
    let d = estimate_delta_nu(&DeltaNuOptions::new(1, 3.0)).map_err(err)?;
    let within = d.per_restart.iter().filter(|v| **v <= 1.2 * d.estimate).count();
    let pts = sphere_points(10_000);
    let zeros: Vec<[f64; 4]> = (1..4)
        .flat_map(|i| {
            [1.0, -1.0].map(|s| {
                let mut z = [0.0; 4];
                z[i] = s;
                z
            })
        })
        .collect();
    let min_l = pts.iter().map(|w| quartic_l(w)).fold(f64::INFINITY, f64::min);
    let zero_ok = zeros.iter().all(|z| quartic_l(z) == 0.0);
    // Away from the x, y, z axes L stays bounded below.
    let far_min = pts
        .iter()
        .filter(|w| zeros.iter().all(|z| w.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() > 0.2))
        .map(|w| quartic_l(w))
        .fold(f64::INFINITY, f64::min);
    let secs = t.elapsed().as_secs_f64();
    ensure(
        d.estimate > 0.0 && d.stable && min_l >= 0.0 && zero_ok && far_min > 1e-4 && secs < 120.0,
        format!(
            "delta_1 = {:.5}, {within}/{} restarts within 20%; min L = {min_l:.2e}, min L off-axis = {far_min:.2e}; {secs:.1}s",
            d.estimate,
            d.per_restart.len()
        ),
    )
}

fn holder(store: &[(String, Arc<Decomposition>)]) -> Check {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (label, d) in store {
        let a = group_holder(d, HolderOptions { per_ball: 64, max_balls: 4 }).map_err(err)?;
        let b = group_holder(d, HolderOptions { per_ball: 128, max_balls: 4 }).map_err(err)?;
        let mut w: f64 = 0.0;
        for (x, y) in a.iter().zip(&b) {
            let (s, t) = (x.estimate.seminorm, y.estimate.seminorm);
            let g = if s > 0.0 { t / s } else if t <= 1e-12 { 1.0 } else { f64::INFINITY };
            w = w.max(g);
        }
        worst = worst.max(w);
        lines.push(format!("{label}: {} groups, max growth {w:.3}", a.len()));
    }
    ensure(worst < 1.5, lines.join("; "))
}

fn main() {
    let mut store = Vec::new();
    let mut results: Vec<(usize, &str, Check, f64)> = Vec::new();
    let mut run = |id: usize, name: &'static str, f: &mut dyn FnMut() -> Check| {
        let t = Instant::now();
        let r = f();
        results.push((id, name, r, t.elapsed().as_secs_f64()));
    };
    run(1, "partition of unity", &mut || {
        let t = Instant::now();
        let r = partition_of_unity();
        match r {
            Ok(m) if t.elapsed().as_secs_f64() >= 10.0 => Err(format!("{m}; over 10 s")),
            other => other,
        }
    });
    run(2, "decomposition residual", &mut || residuals(&mut store));
    run(3, "Case II identity", &mut || case_two(&store));
    run(4, "odd/even control constants", &mut odd_even);
    run(5, "slow variation", &mut slow_variation);
    run(6, "delta recursion sandwich", &mut recursion);
    run(7, "threshold and T flip", &mut || {
        let t = Instant::now();
        let r = threshold_flip();
        match r {
            Ok(m) if t.elapsed().as_secs_f64() >= 5.0 => Err(format!("{m}; over 5 s")),
            other => other,
        }
    });
    run(8, "derivative oracles", &mut || {
        let t = Instant::now();
        let r = derivative_oracles();
        match r {
            Ok(m) if t.elapsed().as_secs_f64() >= 30.0 => Err(format!("{m}; over 30 s")),
            other => other,
        }
    });
    run(9, "implicit function second derivatives", &mut ift);
    run(10, "monotone closed form and witnesses", &mut monotone_closed_form);
    run(11, "delta_nu positivity", &mut delta_nu);
    run(12, "Hölder stability of roots", &mut || holder(&store));
    let mut failed = 0;
    for (id, name, r, secs) in &results {
        let (tag, msg) = match r {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("[{tag}] {id:>2}. {name} ({secs:.2}s): {msg}");
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
