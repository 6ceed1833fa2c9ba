//! Control distance, slow-variation check, greedy ball cover, squared
//! partition of unity and color classes.

mod index;

pub use index::SpatialIndex;

use crate::calculus::{directional_hessian_plus, sup_fourth, FunctionHandle, Report};
use crate::error::{Error, Result};
use crate::geometry::{dist, halton, lex_less, Ball};
use crate::par;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// max{f^{1/(4+2d)}, [Hess]_+^{1/(2+2d)}, |nabla^4 f|^{1/(2d)}}
    Full,
    /// max{f^{1/(4+2d)}, [Hess]_+^{1/(2+2d)}}
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlDistanceParams {
    pub delta: f64,
    pub variant: Variant,
}

impl ControlDistanceParams {
    pub fn new(delta: f64, variant: Variant) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::ParamRange { name: "delta".into(), value: delta, range: "(0, 1/2)".into() });
        }
        Ok(ControlDistanceParams { delta, variant })
    }
}

/// The individual terms of the control distance (the third is 0 for the
/// reduced variant).
pub fn control_terms(f: &FunctionHandle, x: &[f64], p: &ControlDistanceParams) -> Result<[f64; 3]> {
    let d = p.delta;
    let v = f.value(x).max(0.0);
    let t1 = v.powf(1.0 / (4.0 + 2.0 * d));
    let t2 = directional_hessian_plus(f, x)?.powf(1.0 / (2.0 + 2.0 * d));
    let t3 = match p.variant {
        Variant::Full => f.tensor_norm(4, x)?.powf(1.0 / (2.0 * d)),
        Variant::Reduced => 0.0,
    };
    Ok([t1, t2, t3])
}

pub fn control_distance(f: &FunctionHandle, x: &[f64], p: &ControlDistanceParams) -> Result<f64> {
    let t = control_terms(f, x, p)?;
    Ok(t[0].max(t[1]).max(t[2]))
}

/// Factor 1/max(1, M) with M = sup |nabla^4 f| sampled on `region`, so that
/// the rescaled function has fourth derivatives bounded by one.
pub fn fourth_derivative_rescale(f: &FunctionHandle, region: &Ball, samples: usize) -> Result<(f64, f64)> {
    let m = sup_fourth(f, region, samples)?;
    Ok((m, 1.0 / m.max(1.0)))
}

/// Checks |r(x) - r(y)| <= (1/2)^{1/(4+2d)} r(x) for |x - y| <= r(x)/200
/// with the reduced distance r, after rescaling so |nabla^4 f| <= 1.
/// One partner y per sample; every other partner sits at the maximal
/// distance r(x)/200.
pub fn verify_slowly_varying(f: &FunctionHandle, p: &ControlDistanceParams, region: &Ball, samples: usize) -> Result<Report> {
    let (m, k) = fourth_derivative_rescale(f, &region.scaled(1.5), 256)?;
    let g = f.scaled(k);
    let red = ControlDistanceParams { delta: p.delta, variant: Variant::Reduced };
    let bound = 0.5f64.powf(1.0 / (4.0 + 2.0 * p.delta));
    let pts = region.sample(samples);
    let n = f.arity();
    let rows: Vec<Result<(f64, bool, Vec<f64>)>> = par::map_range(pts.len(), |i| {
        let x = &pts[i];
        let rx = control_distance(&g, x, &red)?;
        let mut w = halton(i as u64 + 1, n);
        w.iter_mut().for_each(|c| *c = 2.0 * *c - 1.0);
        let nw = crate::geometry::norm(&w).max(1e-300);
        let len = if i % 2 == 0 { 1.0 } else { nw.min(1.0) };
        let y: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a + rx / 200.0 * len * b / nw).collect();
        let ry = control_distance(&g, &y, &red)?;
        let lhs = (rx - ry).abs();
        let rhs = bound * rx;
        let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
        Ok((ratio, lhs > rhs * (1.0 + 1e-12) + 1e-15, x.clone()))
    });
    let mut rep = Report::new("slowly_varying", &f.name, Some(region.clone()));
    let mut violations = Vec::new();
    let mut worst = 0.0;
    for r in rows {
        let (ratio, bad, x) = r?;
        if bad {
            violations.push(x.clone());
        }
        if ratio > worst {
            worst = ratio;
            rep.worst_point = Some(x);
        }
    }
    rep.ratio = worst;
    rep.pass = violations.is_empty();
    rep.constants.insert("bound".into(), bound);
    rep.constants.insert("fourth_derivative_sup".into(), m);
    rep.constants.insert("rescale".into(), k);
    rep.constants.insert("delta".into(), p.delta);
    rep.constants.insert("pairs".into(), pts.len() as f64);
    violations.truncate(20);
    rep.details = serde_json::json!({ "violations": violations });
    Ok(rep)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverCell {
    pub index: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub rho: f64,
    pub color: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoverOptions {
    pub s: f64,
    pub floor: f64,
    pub max_boxes: usize,
    pub max_cells: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions { s: 1.0 / 200.0, floor: 1e-3, max_boxes: 4_000_000, max_cells: 1_000_000 }
    }
}

/// Candidate centres from adaptive dyadic boxes: a box is refined until its
/// half-diagonal is at most s*rho/4 at its (projected) centre.
fn candidates(f: &FunctionHandle, p: &ControlDistanceParams, region: &Ball, o: &CoverOptions) -> Result<Vec<(Vec<f64>, f64)>> {
    let n = region.dim();
    let sq = (n as f64).sqrt();
    let mut level = vec![(region.center.clone(), region.radius)];
    let mut out = Vec::new();
    let mut boxes = 0usize;
    while !level.is_empty() {
        boxes += level.len();
        if boxes > o.max_boxes {
            return Err(Error::CellBudget { reached: boxes });
        }
        let evals: Vec<Result<Option<(Vec<f64>, f64)>>> = par::map(&level, |(c, a)| {
            let d = a * sq;
            if dist(c, &region.center) - d > region.radius {
                return Ok(None);
            }
            let q = region.project(c);
            let rho = control_distance(f, &q, p)?;
            Ok(Some((q, rho)))
        });
        let mut next = Vec::new();
        for ((c, a), e) in level.iter().zip(evals) {
            let Some((q, rho)) = e? else { continue };
            let d = a * sq;
            let leaf = d <= o.s * rho / 4.0 || (rho < o.floor && d <= o.s * o.floor / 4.0);
            if leaf {
                if rho >= o.floor {
                    out.push((q, rho));
                }
                continue;
            }
            let h = a / 2.0;
            for corner in 0..(1usize << n) {
                let child: Vec<f64> =
                    (0..n).map(|i| c[i] + if corner >> i & 1 == 1 { h } else { -h }).collect();
                next.push((child, h));
            }
        }
        level = next;
    }
    Ok(out)
}

/// Greedy cover of {x in region : rho(x) >= floor} by balls of radius
/// s*rho(centre). Candidates are visited by decreasing rho and accepted
/// unless they lie within half the radius of an accepted cell.
pub fn build_cover(f: &FunctionHandle, p: &ControlDistanceParams, region: &Ball, s: f64, floor: f64) -> Result<Vec<CoverCell>> {
    let o = CoverOptions { s, floor, ..CoverOptions::default() };
    build_cover_with(f, p, region, &o)
}

pub fn build_cover_with(f: &FunctionHandle, p: &ControlDistanceParams, region: &Ball, o: &CoverOptions) -> Result<Vec<CoverCell>> {
    if !(o.s > 0.0 && o.s <= 1.0 / 200.0) {
        return Err(Error::ParamRange { name: "s".into(), value: o.s, range: "(0, 1/200]".into() });
    }
    if o.floor <= 0.0 {
        return Err(Error::ParamRange { name: "floor".into(), value: o.floor, range: "(0, inf)".into() });
    }
    let mut cand = candidates(f, p, region, o)?;
    cand.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| {
        if lex_less(&a.0, &b.0) {
            std::cmp::Ordering::Less
        } else if lex_less(&b.0, &a.0) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    }));
    let mut idx = SpatialIndex::new();
    let mut cells: Vec<CoverCell> = Vec::new();
    let mut hits = Vec::new();
    for (c, rho) in cand {
        idx.query(&c, 0.5, 0.0, &mut hits);
        if !hits.is_empty() {
            continue;
        }
        let r = o.s * rho;
        idx.insert(c.clone(), r);
        cells.push(CoverCell { index: cells.len(), center: c, radius: r, rho, color: 0 });
        if cells.len() > o.max_cells {
            return Err(Error::CellBudget { reached: cells.len() });
        }
    }
    color_classes(&mut cells);
    Ok(cells)
}

/// Greedy coloring of the graph joining cells whose tripled balls meet.
/// Returns the number of classes.
pub fn color_classes(cells: &mut [CoverCell]) -> usize {
    let mut idx = SpatialIndex::new();
    for c in cells.iter() {
        idx.insert(c.center.clone(), c.radius);
    }
    let mut colors: Vec<Option<usize>> = vec![None; cells.len()];
    let mut hits = Vec::new();
    let mut used = Vec::new();
    let mut count = 0;
    for i in 0..cells.len() {
        idx.query(&cells[i].center, 3.0, 3.0 * cells[i].radius, &mut hits);
        used.clear();
        for &j in &hits {
            if let Some(c) = colors[j] {
                used.push(c);
            }
        }
        used.sort_unstable();
        used.dedup();
        let mut c = 0;
        for &u in &used {
            if u == c {
                c += 1;
            } else if u > c {
                break;
            }
        }
        colors[i] = Some(c);
        cells[i].color = c;
        count = count.max(c + 1);
    }
    count
}

pub fn class_count(cells: &[CoverCell]) -> usize {
    cells.iter().map(|c| c.color + 1).max().unwrap_or(0)
}

/// Smooth radial profile: 1 on [0, 1/2], 0 on [1, inf), exp transition.
pub fn plateau(s: f64) -> f64 {
    if s <= 0.5 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let u = 2.0 * s - 1.0;
    let a = (-1.0 / (1.0 - u)).exp();
    let b = (-1.0 / u).exp();
    a / (a + b)
}

/// Squared partition of unity subordinate to a cover.
#[derive(Debug, Clone)]
pub struct Partition {
    pub cells: Vec<CoverCell>,
    index: SpatialIndex,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionCheck {
    pub points: usize,
    pub max_error: f64,
    pub max_overlap: usize,
}

impl Partition {
    pub fn chi(&self, nu: usize, x: &[f64]) -> f64 {
        let c = &self.cells[nu];
        plateau(dist(x, &c.center) / c.radius)
    }

    /// Cells whose support contains x, in index order.
    pub fn active(&self, x: &[f64], out: &mut Vec<usize>) {
        self.index.query(x, 1.0, 0.0, out);
    }

    pub fn sum_chi2(&self, x: &[f64]) -> f64 {
        let mut ids = Vec::new();
        self.active(x, &mut ids);
        ids.iter().map(|&i| self.chi(i, x).powi(2)).sum()
    }

    /// (cell, Phi_cell(x)) for every cell with Phi_cell(x) > 0.
    pub fn phis(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let mut ids = Vec::new();
        self.active(x, &mut ids);
        let chis: Vec<(usize, f64)> = ids.iter().map(|&i| (i, self.chi(i, x))).filter(|p| p.1 > 0.0).collect();
        let s: f64 = chis.iter().map(|p| p.1 * p.1).sum();
        if s == 0.0 {
            return vec![];
        }
        let r = s.sqrt();
        chis.into_iter().map(|(i, c)| (i, c / r)).collect()
    }

    pub fn phi(&self, nu: usize, x: &[f64]) -> f64 {
        let c = self.chi(nu, x);
        if c == 0.0 {
            return 0.0;
        }
        c / self.sum_chi2(x).sqrt()
    }

    pub fn covers(&self, x: &[f64]) -> bool {
        self.sum_chi2(x) > 0.0
    }

    /// Max |sum Phi^2 - 1| over the points; a point with no active bump is
    /// reported as a coverage hole.
    pub fn check(&self, pts: &[Vec<f64>]) -> Result<PartitionCheck> {
        let rows: Vec<Result<(f64, usize)>> = par::map(pts, |x| {
            let ph = self.phis(x);
            if ph.is_empty() {
                return Err(Error::CoverageHole(x.clone()));
            }
            let s: f64 = ph.iter().map(|p| p.1 * p.1).sum();
            Ok(((s - 1.0).abs(), ph.len()))
        });
        let mut out = PartitionCheck { points: pts.len(), max_error: 0.0, max_overlap: 0 };
        for r in rows {
            let (e, k) = r?;
            out.max_error = out.max_error.max(e);
            out.max_overlap = out.max_overlap.max(k);
        }
        Ok(out)
    }
}

pub fn build_partition(cells: Vec<CoverCell>) -> Partition {
    let mut index = SpatialIndex::new();
    for c in &cells {
        index.insert(c.center.clone(), c.radius);
    }
    Partition { cells, index }
}
