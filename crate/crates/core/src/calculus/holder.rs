use super::{fd, FunctionHandle};
use crate::error::{Error, Result};
use crate::geometry::{dist, lex_less, multi_indices, Ball};
use crate::par;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub order: usize,
    pub exponent: f64,
    /// sup |nabla^l f| over the samples, l = 0..=order (max tensor entry).
    pub sup_norms: Vec<f64>,
    pub seminorm: f64,
    pub samples: usize,
    pub pairs: u64,
    pub min_separation: f64,
    pub worst_pair: Option<(Vec<f64>, Vec<f64>)>,
}

/// Minimum pair separation for an order-`k` estimate: ten FD steps.
pub fn default_separation(f: &FunctionHandle, k: usize) -> f64 {
    10.0 * fd::step(k, f.field.fd_scale())
}

/// Hölder seminorm of the order-`k` derivatives over sampled pairs of the
/// region with |y - z| >= ten FD steps.
pub fn holder_seminorm(f: &FunctionHandle, k: usize, delta: f64, region: &Ball, samples: usize) -> Result<HolderEstimate> {
    if samples < 2 {
        return Err(Error::Invalid("holder_seminorm needs at least 2 samples".into()));
    }
    if region.dim() != f.arity() {
        return Err(Error::Invalid("region dimension differs from arity".into()));
    }
    let d = &f.domain;
    if dist(&region.center, &d.center) + region.radius > d.radius * (1.0 + 1e-9) {
        return Err(Error::Invalid(format!("region {region:?} not inside the domain of {}", f.name)));
    }
    let pts = region.sample(samples);
    let h_min = default_separation(f, k);
    holder_on_points(f, k, delta, &pts, h_min)
}

/// Same estimate over explicitly given sample points.
pub fn holder_on_points(f: &FunctionHandle, k: usize, delta: f64, pts: &[Vec<f64>], h_min: f64) -> Result<HolderEstimate> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::ParamRange { name: "delta".into(), value: delta, range: "(0, 1]".into() });
    }
    let n = f.arity();
    let idx: Vec<Vec<Vec<u8>>> = (0..=k).map(|l| multi_indices(n, l)).collect();
    let evals: Vec<Result<(Vec<f64>, Vec<f64>)>> = par::map(pts, |p| {
        let mut sups = vec![0.0; k + 1];
        let mut top = Vec::new();
        for (l, set) in idx.iter().enumerate() {
            for a in set {
                let v = f.derivative(a, p)?;
                sups[l] = f64::max(sups[l], v.abs());
                if l == k {
                    top.push(v);
                }
            }
        }
        Ok((sups, top))
    });
    let mut sup_norms = vec![0.0; k + 1];
    let mut tops = Vec::with_capacity(pts.len());
    for e in evals {
        let (s, t) = e?;
        for l in 0..=k {
            sup_norms[l] = f64::max(sup_norms[l], s[l]);
        }
        tops.push(t);
    }
    let (seminorm, pairs, worst) = pair_sweep(pts, &tops, delta, h_min);
    Ok(HolderEstimate {
        order: k,
        exponent: delta,
        sup_norms,
        seminorm,
        samples: pts.len(),
        pairs,
        min_separation: h_min,
        worst_pair: worst.map(|(i, j)| (pts[i].clone(), pts[j].clone())),
    })
}

/// Max over pairs (i < j) with |p_i - p_j| >= h_min of
/// max_a |v_i[a] - v_j[a]| / |p_i - p_j|^delta.
pub fn pair_sweep(pts: &[Vec<f64>], vals: &[Vec<f64>], delta: f64, h_min: f64) -> (f64, u64, Option<(usize, usize)>) {
    let rows: Vec<(f64, u64, Option<usize>)> = par::map_range(pts.len(), |i| {
        let mut best = 0.0;
        let mut arg = None;
        let mut count = 0u64;
        for j in i + 1..pts.len() {
            let dd = dist(&pts[i], &pts[j]);
            if dd < h_min {
                continue;
            }
            count += 1;
            let mut m: f64 = 0.0;
            for (a, b) in vals[i].iter().zip(&vals[j]) {
                m = m.max((a - b).abs());
            }
            let q = m / dd.powf(delta);
            if q > best {
                best = q;
                arg = Some(j);
            }
        }
        (best, count, arg)
    });
    let mut best = 0.0;
    let mut total = 0u64;
    let mut worst: Option<(usize, usize)> = None;
    for (i, (q, c, arg)) in rows.into_iter().enumerate() {
        total += c;
        if let Some(j) = arg {
            let better = q > best
                || (q == best && worst.is_some_and(|(a, _)| lex_less(&pts[i], &pts[a])));
            if better {
                best = q;
                worst = Some((i, j));
            }
        }
    }
    (best, total, worst)
}
