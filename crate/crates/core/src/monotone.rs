//! The omega-monotone functional sup f(y) / omega(f(x)) over
//! y in B(x/2, |x|/2), monotonicity verdicts and derivative-power bounds.

use crate::calculus::{FunctionHandle, Modulus, Report};
use crate::error::{Error, Result};
use crate::geometry::{lex_less, multi_indices, norm, Ball};
use crate::par;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneOptions {
    pub outer_samples: usize,
    /// Points of the product grid on each inner ball (rounded up to a
    /// full grid).
    pub inner_samples: usize,
    pub t_min: f64,
    /// Where x ranges; the unit ball by default.
    pub region: Option<Ball>,
    pub ascent_steps: usize,
}

impl Default for MonotoneOptions {
    fn default() -> Self {
        MonotoneOptions { outer_samples: 400, inner_samples: 64, t_min: 1e-3, region: None, ascent_steps: 50 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub function: String,
    pub modulus: String,
    pub estimate: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub outer_samples: usize,
    pub inner_samples: usize,
    pub t_min: f64,
    /// f is divided by this before evaluation.
    pub rescale: f64,
}

fn inner_ball(x: &[f64]) -> Ball {
    Ball::new(x.iter().map(|v| v / 2.0).collect(), norm(x) / 2.0)
}

struct Scorer<'a> {
    f: &'a FunctionHandle,
    m: &'a Modulus,
    ln_scale: f64,
}

impl Scorer<'_> {
    fn ln_f(&self, p: &[f64]) -> Result<f64> {
        let v = self.f.value(p);
        if v < -1e-14 {
            return Err(Error::Negative { point: p.to_vec(), value: v });
        }
        Ok(v.max(0.0).ln() - self.ln_scale)
    }

    /// ln f(y) - ln omega(f(x)), or None when both vanish.
    fn score(&self, x: &[f64], y: &[f64]) -> Result<Option<f64>> {
        let (lx, ly) = (self.ln_f(x)?, self.ln_f(y)?);
        if ly == f64::NEG_INFINITY {
            return Ok(if lx == f64::NEG_INFINITY { None } else { Some(f64::NEG_INFINITY) });
        }
        if lx == f64::NEG_INFINITY {
            return Err(Error::Divergent { x: x.to_vec(), y: y.to_vec(), fy: ly.exp() });
        }
        Ok(Some(ly - self.m.ln_eval(lx.min(0.0))))
    }
}

fn better(a: f64, pa: &(Vec<f64>, Vec<f64>), b: f64, pb: &(Vec<f64>, Vec<f64>)) -> bool {
    a > b || (a == b && (lex_less(&pa.0, &pb.0) || (pa.0 == pb.0 && lex_less(&pa.1, &pb.1))))
}

/// Estimates sup f(y) / omega(f(x)) for x in the region with |x| >= t_min
/// and y in the closed ball B(x/2, |x|/2). f is divided by its sampled
/// supremum first.
pub fn monotone_functional(f: &FunctionHandle, m: &Modulus, o: &MonotoneOptions) -> Result<MonotoneReport> {
    let n = f.arity();
    let region = o.region.clone().unwrap_or_else(|| Ball::unit(n));
    if region.dim() != n {
        return Err(Error::Invalid("region dimension differs from arity".into()));
    }
    if !(o.t_min > 0.0) {
        return Err(Error::ParamRange { name: "t_min".into(), value: o.t_min, range: "(0, inf)".into() });
    }
    let outer: Vec<Vec<f64>> = region.sample(o.outer_samples).into_iter().filter(|x| norm(x) >= o.t_min).collect();
    if outer.is_empty() {
        return Err(Error::Invalid("no outer samples beyond t_min".into()));
    }
    let mut sup: f64 = 0.0;
    for x in &outer {
        sup = sup.max(f.value(x));
    }
    let rescale = if sup > 0.0 { sup } else { 1.0 };
    let sc = Scorer { f, m, ln_scale: rescale.ln() };
    let per_axis = (o.inner_samples.max(2) as f64).powf(1.0 / n as f64).ceil() as usize;
    let rows: Vec<Result<Option<(f64, (Vec<f64>, Vec<f64>))>>> = par::map(&outer, |x| {
        let mut best: Option<(f64, (Vec<f64>, Vec<f64>))> = None;
        for y in inner_ball(x).grid(per_axis.max(2)) {
            if let Some(v) = sc.score(x, &y)? {
                let cand = (x.clone(), y);
                if best.as_ref().is_none_or(|(b, pb)| better(v, &cand, *b, pb)) {
                    best = Some((v, cand));
                }
            }
        }
        Ok(best)
    });
    let mut best: Option<(f64, (Vec<f64>, Vec<f64>))> = None;
    for r in rows {
        if let Some((v, p)) = r? {
            if best.as_ref().is_none_or(|(b, pb)| better(v, &p, *b, pb)) {
                best = Some((v, p));
            }
        }
    }
    let Some((mut v, (mut x, mut y))) = best else {
        let z = vec![0.0; n];
        return Ok(MonotoneReport {
            function: f.name.clone(),
            modulus: m.label(),
            estimate: 0.0,
            x: z.clone(),
            y: z,
            outer_samples: outer.len(),
            inner_samples: per_axis.pow(n as u32),
            t_min: o.t_min,
            rescale,
        });
    };
    // Coordinate ascent on (x, y) with y kept in the closed inner ball.
    let mut step = region.radius / (o.outer_samples as f64).powf(1.0 / n as f64);
    for _ in 0..o.ascent_steps {
        let mut moved = false;
        for k in 0..2 * n {
            for sgn in [1.0, -1.0] {
                let (mut x2, mut y2) = (x.clone(), y.clone());
                if k < n {
                    x2[k] += sgn * step;
                    x2 = region.project(&x2);
                    if norm(&x2) < o.t_min {
                        continue;
                    }
                } else {
                    y2[k - n] += sgn * step / 2.0;
                }
                y2 = inner_ball(&x2).project(&y2);
                if let Some(s) = sc.score(&x2, &y2)? {
                    if s > v {
                        v = s;
                        x = x2;
                        y = y2;
                        moved = true;
                    }
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    Ok(MonotoneReport {
        function: f.name.clone(),
        modulus: m.label(),
        estimate: v.exp(),
        x,
        y,
        outer_samples: outer.len(),
        inner_samples: per_axis.pow(n as u32),
        t_min: o.t_min,
        rescale,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SVerdict {
    pub s: f64,
    pub coarse: Option<f64>,
    pub fine: Option<f64>,
    pub finite: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub function: String,
    pub c_max: f64,
    pub verdicts: Vec<SVerdict>,
    pub nearly_monotone: bool,
    pub holder_monotone: bool,
}

/// Finite verdict for omega_s when the estimate is at most `c_max` and
/// moves by under 5% when both sample counts double and t_min halves.
pub fn classify_monotonicity(f: &FunctionHandle, s_grid: &[f64], c_max: f64, o: &MonotoneOptions) -> Result<Classification> {
    if s_grid.is_empty() {
        return Err(Error::Invalid("empty s grid".into()));
    }
    let fine = MonotoneOptions {
        outer_samples: 2 * o.outer_samples,
        inner_samples: 2 * o.inner_samples,
        t_min: o.t_min / 2.0,
        ..o.clone()
    };
    let mut verdicts = Vec::new();
    for &s in s_grid {
        let m = Modulus::scale(s)?;
        let a = monotone_functional(f, &m, o);
        let b = monotone_functional(f, &m, &fine);
        let (coarse, finev, note) = match (&a, &b) {
            (Ok(a), Ok(b)) => (Some(a.estimate), Some(b.estimate), None),
            (Err(e), _) | (_, Err(e)) => (a.as_ref().ok().map(|r| r.estimate), b.as_ref().ok().map(|r| r.estimate), Some(e.to_string())),
        };
        let finite = match (coarse, finev) {
            (Some(c), Some(d)) => d <= c_max && (d - c).abs() <= 0.05 * c.abs().max(1e-300),
            _ => false,
        };
        verdicts.push(SVerdict { s, coarse, fine: finev, finite, note });
    }
    let nearly = verdicts.iter().all(|v| v.finite);
    let holder = verdicts.iter().any(|v| v.finite);
    Ok(Classification { function: f.name.clone(), c_max, verdicts, nearly_monotone: nearly, holder_monotone: holder })
}

/// sup |nabla^m f| / f^{(s')^m} for m = 1..=m_max over the region minus
/// B(0, t_min), at `samples` points and again at 4 * `samples` points with
/// t_min / 4. A constant is stable when the refined value grows by at most
/// 25%.
pub fn verify_power_bound(
    f: &FunctionHandle,
    s: f64,
    s_prime: f64,
    m_max: usize,
    region: &Ball,
    samples: usize,
    t_min: f64,
) -> Result<Report> {
    if !(0.0 < s_prime && s_prime < s && s < 1.0) {
        return Err(Error::Invalid(format!("need 0 < s' < s < 1, got s = {s}, s' = {s_prime}")));
    }
    let n = f.arity();
    let idx: Vec<Vec<Vec<u8>>> = (1..=m_max).map(|m| multi_indices(n, m)).collect();
    let sweep = |count: usize, tm: f64| -> Result<(Vec<f64>, f64)> {
        let pts: Vec<Vec<f64>> = region.sample(count).into_iter().filter(|x| norm(x) >= tm).collect();
        let mut sup: f64 = 0.0;
        for x in &pts {
            sup = sup.max(f.value(x));
        }
        let k = if sup > 1.0 { 1.0 / sup } else { 1.0 };
        let rows: Vec<Result<Vec<f64>>> = par::map(&pts, |x| {
            let v = f.value(x) * k;
            let mut out = Vec::with_capacity(m_max);
            for (mi, set) in idx.iter().enumerate() {
                let mut d: f64 = 0.0;
                for a in set {
                    d = d.max((f.derivative(a, x)? * k).abs());
                }
                let e = s_prime.powi(mi as i32 + 1);
                out.push(if d <= 1e-300 {
                    0.0
                } else if v > 0.0 {
                    (d.ln() - e * v.ln()).exp()
                } else {
                    return Err(Error::Derivative { point: x.clone(), msg: "f = 0 with nonzero derivative".into() });
                });
            }
            Ok(out)
        });
        let mut c = vec![0.0f64; m_max];
        for r in rows {
            for (a, b) in c.iter_mut().zip(r?) {
                *a = a.max(b);
            }
        }
        Ok((c, k))
    };
    let (c1, k) = sweep(samples, t_min)?;
    let (c2, _) = sweep(4 * samples, t_min / 4.0)?;
    let mut rep = Report::new("power_bound", &f.name, Some(region.clone()));
    rep.constants.insert("s".into(), s);
    rep.constants.insert("s_prime".into(), s_prime);
    rep.constants.insert("rescale".into(), k);
    let mut rows = Vec::new();
    for m in 0..m_max {
        let stable = c2[m].is_finite() && c2[m] <= 1.25 * c1[m] + 1e-12;
        rep.constants.insert(format!("m{}_constant", m + 1), c2[m]);
        if !stable {
            rep.pass = false;
            rep.notes.push(format!("order {} constant not refinement-stable", m + 1));
        }
        rep.ratio = rep.ratio.max(if c1[m] > 0.0 { c2[m] / c1[m] } else { 1.0 });
        rows.push(serde_json::json!({ "m": m + 1, "coarse": c1[m], "fine": c2[m], "stable": stable }));
    }
    rep.details = serde_json::Value::Array(rows);
    Ok(rep)
}
