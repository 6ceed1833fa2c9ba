//! Powers f^gamma of nonnegative functions: Faà di Bruno derivatives and
//! regularity checks of square roots.

use crate::calculus::{default_separation, holder_on_points, FunctionHandle, Report, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::{directions, multi_indices, norm, Ball};
use crate::par;
use std::collections::HashMap;
use std::sync::Arc;

/// gamma (gamma - 1) ... (gamma - m + 1).
pub fn falling_factorial(gamma: f64, m: usize) -> f64 {
    (0..m).map(|i| gamma - i as f64).product()
}

/// All set partitions of {0, .., k-1}, each as a list of blocks.
pub fn set_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut cur: Vec<Vec<usize>> = Vec::new();
    fn rec(i: usize, k: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == k {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            rec(i + 1, k, cur, out);
            cur[b].pop();
        }
        cur.push(vec![i]);
        rec(i + 1, k, cur, out);
        cur.pop();
    }
    rec(0, k, &mut cur, &mut out);
    out
}

#[derive(Clone)]
pub struct PowerHandle {
    pub base: FunctionHandle,
    pub gamma: f64,
    pub max_order: usize,
}

impl std::fmt::Debug for PowerHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PowerHandle({:?}^{}, M={})", self.base, self.gamma, self.max_order)
    }
}

impl PowerHandle {
    pub fn new(base: FunctionHandle, gamma: f64, max_order: usize) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::ParamRange { name: "gamma".into(), value: gamma, range: "(0, inf)".into() });
        }
        if max_order > 8 {
            return Err(Error::UnsupportedOrder(max_order));
        }
        Ok(PowerHandle { base, gamma, max_order })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let v = self.base.value(x);
        if v <= 0.0 {
            0.0
        } else {
            v.powf(self.gamma)
        }
    }

    /// f^gamma as a function handle whose derivatives come from
    /// [`power_derivative`].
    pub fn handle(&self) -> FunctionHandle {
        let name = format!("({})^{}", self.base.name, self.gamma);
        FunctionHandle::new(&name, Arc::new(PowerField(self.clone())), self.base.domain.clone())
    }
}

struct PowerField(PowerHandle);

impl ScalarField for PowerField {
    fn arity(&self) -> usize {
        self.0.base.arity()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x)
    }

    fn exact_derivative(&self, alpha: &[u8], x: &[f64]) -> Option<Result<f64>> {
        Some(power_derivative(&self.0, x, alpha))
    }

    fn is_exact(&self) -> bool {
        self.0.base.is_exact()
    }

    fn fd_scale(&self) -> f64 {
        self.0.base.field.fd_scale()
    }
}

/// D^alpha (f^gamma)(x) = sum over set partitions P of the directions of
/// alpha of gamma^(|P|) f^{gamma - |P|} prod_{B in P} D^B f, with the
/// falling factorial gamma^(m).
pub fn power_derivative(p: &PowerHandle, x: &[f64], alpha: &[u8]) -> Result<f64> {
    let dirs = directions(alpha);
    let k = dirs.len();
    if k > p.max_order {
        return Err(Error::UnsupportedOrder(k));
    }
    let v = p.base.value(x);
    if !(v > 0.0) {
        return Err(Error::Derivative { point: x.to_vec(), msg: format!("f = {v:e} is not positive") });
    }
    if k == 0 {
        return Ok(v.powf(p.gamma));
    }
    let n = alpha.len();
    let lv = v.ln();
    let mut cache: HashMap<Vec<u8>, f64> = HashMap::new();
    let mut total = 0.0;
    for part in set_partitions(k) {
        let m = part.len();
        let c = falling_factorial(p.gamma, m);
        if c == 0.0 {
            continue;
        }
        let mut prod = 1.0;
        for block in &part {
            let mut beta = vec![0u8; n];
            for &i in block {
                beta[dirs[i]] += 1;
            }
            let d = match cache.get(&beta) {
                Some(d) => *d,
                None => {
                    let d = p.base.derivative(&beta, x)?;
                    cache.insert(beta, d);
                    d
                }
            };
            prod *= d;
            if prod == 0.0 {
                break;
            }
        }
        if prod != 0.0 {
            total += c * prod * ((p.gamma - m as f64) * lv).exp();
        }
    }
    Ok(total)
}

fn truncated_samples(f: &FunctionHandle, region: &Ball, count: usize, floor: f64) -> (Vec<Vec<f64>>, usize) {
    let all = region.sample(count);
    let total = all.len();
    let kept: Vec<Vec<f64>> = all.into_iter().filter(|x| f.value(x) > floor).collect();
    let dropped = total - kept.len();
    (kept, dropped)
}

/// Order-M Hölder estimates of sqrt f for each delta in the grid, at
/// `samples` and 2 * `samples` points with f > 1e-300. A delta counts as
/// finite when the refined estimate grows by at most 25% and by less than
/// 2^{delta/2} (a seminorm that diverges like h^{-delta} grows by 2^delta).
pub fn verify_root_regularity(f: &FunctionHandle, s: f64, m: usize, delta_grid: &[f64], region: &Ball, samples: usize) -> Result<Report> {
    if m == 0 {
        return Err(Error::ParamRange { name: "M".into(), value: 0.0, range: "[1, 8]".into() });
    }
    let lo = 1.0 - 1.0 / (2.0 * m as f64);
    if !(s > lo && s <= 1.0) {
        return Err(Error::ParamRange { name: "s".into(), value: s, range: format!("({lo}, 1]") });
    }
    let root = PowerHandle::new(f.clone(), 0.5, m)?.handle();
    let h_min = if root.is_exact() { 0.0 } else { default_separation(&root, m) };
    let (coarse, d1) = truncated_samples(f, region, samples, 1e-300);
    let (fine, d2) = truncated_samples(f, region, 2 * samples, 1e-300);
    let mut rep = Report::new("root_regularity", &f.name, Some(region.clone()));
    if d1 + d2 > 0 {
        rep.notes.push(format!("{} samples at zeros of f dropped", d1 + d2));
    }
    rep.constants.insert("s".into(), s);
    rep.constants.insert("M".into(), m as f64);
    let mut rows = Vec::new();
    let mut best: Option<f64> = None;
    for &delta in delta_grid {
        let a = holder_on_points(&root, m, delta, &coarse, h_min)?;
        let b = holder_on_points(&root, m, delta, &fine, h_min)?;
        let growth = if a.seminorm > 0.0 { b.seminorm / a.seminorm } else if b.seminorm > 0.0 { f64::INFINITY } else { 1.0 };
        let finite = b.seminorm.is_finite() && growth <= 1.25 && growth.log2() < delta / 2.0;
        if finite {
            best = Some(best.map_or(delta, |v: f64| v.max(delta)));
        }
        rows.push(serde_json::json!({
            "delta": delta, "coarse": a.seminorm, "fine": b.seminorm, "growth": growth, "finite": finite
        }));
    }
    rep.pass = best.is_some();
    if let Some(d) = best {
        rep.constants.insert("largest_delta".into(), d);
    }
    rep.details = serde_json::Value::Array(rows);
    Ok(rep)
}

fn sup_derivatives(h: &FunctionHandle, pts: &[Vec<f64>], m_max: usize) -> Result<Vec<f64>> {
    let n = h.arity();
    let idx: Vec<Vec<Vec<u8>>> = (1..=m_max).map(|m| multi_indices(n, m)).collect();
    let rows: Vec<Result<Vec<f64>>> = par::map(pts, |x| {
        let mut out = vec![0.0f64; m_max];
        for (m, set) in idx.iter().enumerate() {
            for a in set {
                out[m] = out[m].max(h.derivative(a, x)?.abs());
            }
        }
        Ok(out)
    });
    let mut sup = vec![0.0f64; m_max];
    for r in rows {
        for (a, b) in sup.iter_mut().zip(r?) {
            *a = a.max(b);
        }
    }
    Ok(sup)
}

/// Checks |nabla^m f| <= C f^{0.9} and the boundedness of nabla^m (f^gamma)
/// for gamma in the grid and m <= m_max, on the region minus B(0, t_min),
/// at `samples` points and at 4 * `samples` points with t_min / 4. Each
/// constant must be finite and grow by at most 25%. Reports whether the
/// first condition implies the second on this data.
pub fn verify_power_smoothness_chain(
    f: &FunctionHandle,
    gamma_grid: &[f64],
    m_max: usize,
    region: &Ball,
    samples: usize,
    t_min: f64,
) -> Result<Report> {
    let s = 0.9;
    let pick = |count: usize, tm: f64| -> Vec<Vec<f64>> {
        region.sample(count).into_iter().filter(|x| norm(x) >= tm && f.value(x) > 0.0).collect()
    };
    let (p1, p2) = (pick(samples, t_min), pick(4 * samples, t_min / 4.0));
    let sup_f = p2.iter().map(|x| f.value(x)).fold(0.0, f64::max);
    let k = if sup_f > 1.0 { 1.0 / sup_f } else { 1.0 };
    let g = f.scaled(k);
    let ratio_sup = |pts: &[Vec<f64>]| -> Result<Vec<f64>> {
        let n = g.arity();
        let idx: Vec<Vec<Vec<u8>>> = (1..=m_max).map(|m| multi_indices(n, m)).collect();
        let rows: Vec<Result<Vec<f64>>> = par::map(pts, |x| {
            let lv = g.value(x).ln();
            let mut out = vec![0.0f64; m_max];
            for (m, set) in idx.iter().enumerate() {
                for a in set {
                    let d = g.derivative(a, x)?.abs();
                    if d > 0.0 {
                        out[m] = out[m].max((d.ln() - s * lv).exp());
                    }
                }
            }
            Ok(out)
        });
        let mut sup = vec![0.0f64; m_max];
        for r in rows {
            for (a, b) in sup.iter_mut().zip(r?) {
                *a = a.max(b);
            }
        }
        Ok(sup)
    };
    let stable = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| y.is_finite() && *y <= 1.25 * x + 1e-12);
    let (c1, c2) = (ratio_sup(&p1)?, ratio_sup(&p2)?);
    let cond2 = stable(&c1, &c2);
    let mut rep = Report::new("power_smoothness_chain", &f.name, Some(region.clone()));
    rep.constants.insert("s".into(), s);
    rep.constants.insert("rescale".into(), k);
    let mut per_gamma = Vec::new();
    let mut cond3 = true;
    for &gm in gamma_grid {
        let h = PowerHandle::new(g.clone(), gm, m_max)?.handle();
        let (b1, b2) = (sup_derivatives(&h, &p1, m_max)?, sup_derivatives(&h, &p2, m_max)?);
        let ok = stable(&b1, &b2);
        cond3 &= ok;
        per_gamma.push(serde_json::json!({ "gamma": gm, "coarse": b1, "fine": b2, "bounded": ok }));
    }
    let consistent = !cond2 || cond3;
    rep.pass = consistent;
    rep.notes.push(format!("condition (power bound) {}", if cond2 { "holds" } else { "fails" }));
    rep.notes.push(format!("condition (bounded powers) {}", if cond3 { "holds" } else { "fails" }));
    rep.details = serde_json::json!({
        "power_bound": { "coarse": c1, "fine": c2, "holds": cond2 },
        "powers": per_gamma,
        "implication_consistent": consistent,
    });
    Ok(rep)
}
