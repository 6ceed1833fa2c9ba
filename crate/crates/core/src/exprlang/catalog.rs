use super::ast::Expr;
use super::parse::parse_with_vars;
use super::FunctionDef;
use crate::error::{Error, Result};
use crate::geometry::{norm, Ball};
use std::collections::BTreeMap;
use std::sync::Arc;

/// One row of the catalog listing.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static str,
    pub formula: &'static str,
    pub note: &'static str,
}

pub fn catalog_entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "motzkin_M",
            params: "lambda in [0,1] (default 1)",
            formula: "z^6 + x^2 y^2 (x^2 + y^2 - 3 lambda z^2)",
            note: "homogeneous Motzkin form, nonnegative, not a polynomial sum of squares",
        },
        CatalogEntry {
            name: "quartic_L",
            params: "lambda in [0,1] (default 1/2)",
            formula: "w^4 + x^2 y^2 + y^2 z^2 + z^2 x^2 - 4 lambda w x y z",
            note: "quartic in four variables; lambda = 1/2 gives the -2wxyz form",
        },
        CatalogEntry {
            name: "flat_exp_sq",
            params: "",
            formula: "exp(-1/t^2), extended by 0 at t = 0",
            note: "flat at the origin, the default phi of the counterexample family",
        },
        CatalogEntry {
            name: "flat_exp",
            params: "",
            formula: "exp(-1/t) for t > 0, 0 otherwise",
            note: "one-sided flat function, increasing",
        },
        CatalogEntry {
            name: "bump_h",
            params: "rho in (0,1) (default 1/2)",
            formula: "1 on |x| <= rho, 0 on |x| >= 1, exp-transition plateau between",
            note: "even smooth plateau used in the counterexample family",
        },
        CatalogEntry {
            name: "family_f",
            params: "s_prime in (0,1) (default 1/2), rho in (0,1) (default 1/2)",
            formula: "phi(t) L(W) + psi(t) + phi(|W|) h_rho(t/|W|), psi(t) = phi(t/2)^(1/s') t^(4/s')",
            note: "five-variable counterexample family with phi = exp(-1/t^2)",
        },
        CatalogEntry {
            name: "glaeser_stub",
            params: "gamma in (0,1) optional",
            formula: "phi = exp(-1/x^2); with gamma: phi^(1/gamma - 1) (sin^2(pi/x) + phi)",
            note: "flat building block; the full plateau construction is not included",
        },
    ]
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64, lo: f64, hi: f64, open: bool) -> Result<f64> {
    let v = params.get(key).copied().unwrap_or(default);
    let ok = if open { v > lo && v < hi } else { v >= lo && v <= hi };
    if !ok || !v.is_finite() {
        let range = if open { format!("({lo}, {hi})") } else { format!("[{lo}, {hi}]") };
        return Err(Error::ParamRange { name: key.to_string(), value: v, range });
    }
    Ok(v)
}

fn vars(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn build(name: &str, names: &[&str], body: &str, radius: f64) -> Result<FunctionDef> {
    let v = vars(names);
    let e = parse_with_vars(body, &v)?;
    let n = v.len();
    FunctionDef::new(name, v, e, Ball::new(vec![0.0; n], radius))
}

/// Body of the plateau h_rho as a function of the expression `arg`.
fn bump_body(arg: &str, rho: f64) -> String {
    let a = format!("(({arg})^2)^0.5");
    let u = format!("(({a} - {rho})/{})", 1.0 - rho);
    format!(
        "if({a} - {rho}, if(1 - {a}, exp(-1/(1 - {u}))/(exp(-1/{u}) + exp(-1/(1 - {u}))), 0), 1)"
    )
}

/// Looks up a catalog entry and instantiates it with `params`.
pub fn catalog_function(name: &str, params: &BTreeMap<String, f64>) -> Result<FunctionDef> {
    let known: &[&str] = match name {
        "motzkin_M" | "quartic_L" => &["lambda"],
        "bump_h" => &["rho"],
        "family_f" => &["s_prime", "rho"],
        "glaeser_stub" => &["gamma"],
        "flat_exp_sq" | "flat_exp" => &[],
        _ => return Err(Error::UnknownCatalog(name.to_string())),
    };
    if let Some(k) = params.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::Invalid(format!("catalog entry `{name}` has no parameter `{k}`")));
    }
    match name {
        "motzkin_M" => {
            let l = param(params, "lambda", 1.0, 0.0, 1.0, false)?;
            let body = format!("z^6 + x^2*y^2*(x^2 + y^2 - {}*z^2)", 3.0 * l);
            Ok(build(name, &["x", "y", "z"], &body, 1.0)?
                .nonnegative(true)
                .with_interior(Arc::new(|p| norm(p) <= 0.95)))
        }
        "quartic_L" => {
            let l = param(params, "lambda", 0.5, 0.0, 1.0, false)?;
            let body = format!("w^4 + x^2*y^2 + y^2*z^2 + z^2*x^2 - {}*w*x*y*z", 4.0 * l);
            Ok(build(name, &["w", "x", "y", "z"], &body, 1.0)?
                .nonnegative(true)
                .with_interior(Arc::new(|p| norm(p) <= 0.95)))
        }
        "flat_exp_sq" => Ok(build(name, &["t"], "if(t^2, exp(-1/t^2), 0)", 1.0)?
            .nonnegative(true)
            .with_interior(Arc::new(|p| p[0].abs() >= 0.25 && p[0].abs() <= 0.95))),
        "flat_exp" => Ok(build(name, &["t"], "if(t, exp(-1/t), 0)", 1.0)?
            .nonnegative(true)
            .with_interior(Arc::new(|p| p[0] >= 0.1 && p[0] <= 0.95))),
        "bump_h" => {
            let rho = param(params, "rho", 0.5, 0.0, 1.0, true)?;
            let lo = rho + 0.2 * (1.0 - rho);
            let hi = 1.0 - 0.2 * (1.0 - rho);
            let inner = rho * 0.9;
            Ok(build(name, &["x"], &bump_body("x", rho), 1.5)?.nonnegative(true).with_interior(Arc::new(
                move |p| {
                    let a = p[0].abs();
                    (a >= lo && a <= hi) || a <= inner || (1.05..=1.45).contains(&a)
                },
            )))
        }
        "family_f" => {
            let sp = param(params, "s_prime", 0.5, 0.0, 1.0, true)?;
            let rho = param(params, "rho", 0.5, 0.0, 1.0, true)?;
            let l = "(w^4 + x^2*y^2 + y^2*z^2 + z^2*x^2 - 2*w*x*y*z)";
            let r2 = "(w^2 + x^2 + y^2 + z^2)";
            let psi = format!("exp(-{}/t^2)*(t^2)^{}", 4.0 / sp, 2.0 / sp);
            let h = bump_body(&format!("t/{r2}^0.5"), rho);
            let body = format!("if(t^2, exp(-1/t^2)*{l} + {psi}, 0) + if({r2}, exp(-1/{r2})*{h}, 0)");
            let lo = rho + 0.2 * (1.0 - rho);
            let hi = 1.0 - 0.2 * (1.0 - rho);
            Ok(build(name, &["w", "x", "y", "z", "t"], &body, 1.0)?.nonnegative(true).with_interior(
                Arc::new(move |p| {
                    let r = norm(&p[..4]);
                    let t = p[4].abs();
                    if norm(p) > 0.95 || r < 0.4 || t < 0.4 {
                        return false;
                    }
                    let v = t / r;
                    (v >= lo && v <= hi) || v <= 0.9 * rho || v >= 1.05
                }),
            ))
        }
        "glaeser_stub" => {
            let g = parse_with_vars("x^2", &vars(&["x"]))?;
            glaeser_stub(g, params.get("gamma").copied())
        }
        _ => unreachable!(),
    }
}

/// `exp(-1/g(x))`, or with `gamma` the two-factor form
/// `phi^(1/gamma - 1) (sin^2(pi/x) + phi)` built on `phi = exp(-1/g)`.
/// `g` must be an expression in `x` that is positive away from the origin.
pub fn glaeser_stub(g: Expr, gamma: Option<f64>) -> Result<FunctionDef> {
    let v = vars(&["x"]);
    let gs = g.to_string();
    let phi = format!("exp(-1/({gs}))");
    let body = match gamma {
        None => format!("if({gs}, {phi}, 0)"),
        Some(gm) => {
            if !(gm > 0.0 && gm < 1.0) {
                return Err(Error::ParamRange { name: "gamma".into(), value: gm, range: "(0, 1)".into() });
            }
            format!("if({gs}, {phi}^{}*(sin(pi/x)^2 + {phi}), 0)", 1.0 / gm - 1.0)
        }
    };
    let e = parse_with_vars(&body, &v)?;
    Ok(FunctionDef::new("glaeser_stub", v, e, Ball::unit(1))?
        .nonnegative(true)
        .with_interior(Arc::new(|p| p[0].abs() >= 0.3 && p[0].abs() <= 0.95)))
}
