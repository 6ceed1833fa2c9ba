//! Local Case I / Case II splitting, dimension recursion and assembly of
//! f = sum g_l^2, with verification.

mod ift;
mod profile;

pub use ift::{implicit_root, newton_root, ImplicitRoot};
pub use profile::{gauss_legendre, Frame, Profile};

use crate::calculus::{
    directional_hessian_plus, holder_on_points, pair_sweep, sup_fourth, top_eigen, FunctionHandle, HolderEstimate, Report,
};
use crate::cover::{
    build_cover_with, build_partition, class_count, control_distance, ControlDistanceParams, CoverCell, CoverOptions,
    Partition, Variant,
};
use crate::error::{Error, Result};
use crate::geometry::{halton, Ball};
use crate::par;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// delta_0 = delta and delta_{k+1} / (2 + delta_{k+1}) = eta delta_k / (1 + delta_k).
pub fn delta_sequence(delta: f64, eta: f64, n: usize) -> Result<Vec<f64>> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::ParamRange { name: "delta".into(), value: delta, range: "(0, 1/2)".into() });
    }
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::ParamRange { name: "eta".into(), value: eta, range: "(0, 1/2)".into() });
    }
    if n == 0 {
        return Err(Error::ParamRange { name: "n".into(), value: 0.0, range: "[1, inf)".into() });
    }
    let mut out = vec![delta];
    for _ in 1..n {
        let d = *out.last().unwrap();
        let u = eta * d / (1.0 + d);
        out.push(2.0 * u / (1.0 - u));
    }
    Ok(out)
}

/// Empirical constants of |nabla^4 f| <= C f^{delta/(2+delta)} and
/// sup_T [d_T^2 f]_+ <= C f^eta at `samples` and 4 * `samples` points.
/// Passes when both are finite and grow by at most 25% under refinement.
pub fn check_differential_inequalities(f: &FunctionHandle, delta: f64, eta: f64, region: &Ball, samples: usize) -> Result<Report> {
    let p4 = delta / (2.0 + delta);
    let sweep = |count: usize| -> Result<(f64, f64, Vec<f64>, Vec<f64>)> {
        let pts = region.sample(count);
        let rows: Vec<Result<(f64, f64)>> = par::map(&pts, |x| {
            let v = f.value(x);
            if v < -1e-14 {
                return Err(Error::Negative { point: x.clone(), value: v });
            }
            let v = v.max(0.0);
            let ratio = |l: f64, r: f64| if l <= 1e-300 { 0.0 } else if r > 0.0 { l / r } else { f64::INFINITY };
            let a = ratio(f.tensor_norm(4, x)?, v.powf(p4));
            let b = ratio(directional_hessian_plus(f, x)?, v.powf(eta));
            Ok((a, b))
        });
        let (mut a, mut b) = (0.0f64, 0.0f64);
        let (mut pa, mut pb) = (vec![], vec![]);
        for (x, r) in pts.iter().zip(rows) {
            let (ra, rb) = r?;
            if ra > a || pa.is_empty() {
                a = a.max(ra);
                pa = x.clone();
            }
            if rb > b || pb.is_empty() {
                b = b.max(rb);
                pb = x.clone();
            }
        }
        Ok((a, b, pa, pb))
    };
    let (a1, b1, _, _) = sweep(samples)?;
    let (a2, b2, pa, pb) = sweep(4 * samples)?;
    let stable = |c: f64, d: f64| c.is_finite() && d.is_finite() && d <= 1.25 * c + 1e-12;
    let mut rep = Report::new("differential_inequalities", &f.name, Some(region.clone()));
    rep.constants.insert("delta".into(), delta);
    rep.constants.insert("eta".into(), eta);
    rep.constants.insert("fourth_constant".into(), a2);
    rep.constants.insert("fourth_constant_coarse".into(), a1);
    rep.constants.insert("hessian_constant".into(), b2);
    rep.constants.insert("hessian_constant_coarse".into(), b1);
    let (sa, sb) = (stable(a1, a2), stable(b1, b2));
    rep.pass = sa && sb;
    if !sa {
        rep.notes.push("fourth-derivative constant not refinement-stable".into());
    }
    if !sb {
        rep.notes.push("hessian constant not refinement-stable".into());
    }
    rep.ratio = a2.max(b2);
    rep.worst_point = Some(if a2 >= b2 { pa } else { pb });
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CellCase {
    I,
    II { axis: Vec<f64>, curvature: f64 },
}

/// Case I when f(x) >= c rho(x)^{4+2 delta} at the cell centre, otherwise
/// Case II along the top Hessian eigenvector.
pub fn classify_cell(f: &FunctionHandle, cell: &CoverCell, delta: f64, c: f64) -> Result<CellCase> {
    let v = f.value(&cell.center);
    if v >= c * cell.rho.powf(4.0 + 2.0 * delta) {
        return Ok(CellCase::I);
    }
    let (lam, axis) = top_eigen(&f.hessian(&cell.center)?);
    if !(lam > 0.0) {
        return Err(Error::NoAxis { cell: cell.index });
    }
    Ok(CellCase::II { axis, curvature: lam })
}

/// Fiber minimizer X(xi) of a Case II cell along `axis`.
pub fn implicit_minimizer(f: &FunctionHandle, cell: &CoverCell, axis: &[f64]) -> Result<Arc<Profile>> {
    let frame = Frame::new(cell.center.clone(), axis, cell.radius);
    Ok(Arc::new(Profile::new(cell.index, f.clone(), frame)?))
}

/// (F over n - 1 variables, H over the local coordinates of the cell).
pub fn reduced_profile(p: &Arc<Profile>) -> (FunctionHandle, FunctionHandle) {
    (p.reduced_handle("F"), p.factor_handle("H"))
}

/// Max |f - F - H (t - X)^2| over `samples` points of the cell ball.
pub fn case_two_identity(p: &Profile, samples: usize) -> Result<f64> {
    let n = p.dim();
    let pts = Ball::new(vec![0.0; n], p.frame.radius).sample(samples);
    let mut worst: f64 = 0.0;
    for y in pts {
        worst = worst.max(p.identity_defect(&y)?.abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecomposeParams {
    pub delta: f64,
    pub eta: f64,
    pub region: Ball,
    pub s: f64,
    /// Case split constant; capped at s^2 / 8.
    pub c: Option<f64>,
    pub floor: f64,
    pub tol: f64,
    pub max_depth: usize,
    pub kappa_samples: usize,
}

impl DecomposeParams {
    pub fn new(region: Ball) -> Self {
        DecomposeParams {
            delta: 0.25,
            eta: 0.3,
            region,
            s: 1.0 / 200.0,
            c: None,
            floor: 1e-3,
            tol: 1e-6,
            max_depth: 8,
            kappa_samples: 256,
        }
    }

    pub fn split_constant(&self) -> f64 {
        let cap = self.s * self.s / 8.0;
        self.c.map_or(cap, |c| c.min(cap))
    }
}

enum Rest {
    Const(f64),
    Sub(Box<Level>),
}

struct CaseTwo {
    profile: Arc<Profile>,
    rest: Rest,
    curvature: f64,
    factor0: f64,
    crucial: f64,
}

enum Piece {
    One,
    Two(CaseTwo),
}

/// One dimension level: G = kappa * G_hat decomposed over `partition`.
struct Level {
    dim: usize,
    delta: f64,
    kappa: f64,
    g: FunctionHandle,
    partition: Partition,
    pieces: Vec<Piece>,
    class_offset: Vec<usize>,
    class_width: Vec<usize>,
    groups: usize,
}

impl Level {
    fn build(g: &FunctionHandle, region: &Ball, deltas: &[f64], depth: usize, p: &DecomposeParams) -> Result<Level> {
        let n = g.arity();
        if depth > p.max_depth {
            return Err(Error::RecursionBudget(depth));
        }
        let delta = deltas[depth];
        let m4 = sup_fourth(g, region, p.kappa_samples)?;
        let kappa = m4.max(1.0);
        let gh = g.scaled(1.0 / kappa);
        let cp = ControlDistanceParams::new(delta, Variant::Full)?;
        let opts = CoverOptions { s: p.s, floor: p.floor, ..CoverOptions::default() };
        let cells = build_cover_with(&gh, &cp, region, &opts)?;
        let c = p.split_constant();
        let built: Vec<Result<Piece>> = par::map(&cells, |cell| match classify_cell(&gh, cell, delta, c)? {
            CellCase::I => Ok(Piece::One),
            CellCase::II { axis, curvature } => {
                let prof = implicit_minimizer(&gh, cell, &axis)?;
                let zero = vec![0.0; n - 1];
                let factor0 = prof.factor(&zero, 0.0)?;
                let bound = 0.25 * cell.rho.powf(2.0 + 2.0 * delta);
                if factor0 < bound * (1.0 - 1e-9) {
                    return Err(Error::FactorBound { cell: cell.index, value: factor0, bound });
                }
                let (rest, crucial) = if n == 1 {
                    (Rest::Const(prof.reduced(&zero)?), 0.0)
                } else {
                    let fh = prof.reduced_handle(&format!("{}/F{}", g.name, cell.index));
                    let crucial = top_eigen(&prof.reduced_hessian(&zero)?).0.max(0.0) / curvature;
                    let sub = Level::build(&fh, &Ball::new(zero.clone(), cell.radius), deltas, depth + 1, p)?;
                    (Rest::Sub(Box::new(sub)), crucial)
                };
                Ok(Piece::Two(CaseTwo { profile: prof, rest, curvature, factor0, crucial }))
            }
        });
        let mut pieces = Vec::with_capacity(cells.len());
        for b in built {
            pieces.push(b?);
        }
        let classes = class_count(&cells);
        let mut class_width = vec![1usize; classes];
        for (cell, piece) in cells.iter().zip(&pieces) {
            if let Piece::Two(t) = piece {
                let w = 1 + match &t.rest {
                    Rest::Const(_) => 1,
                    Rest::Sub(s) => s.groups,
                };
                class_width[cell.color] = class_width[cell.color].max(w);
            }
        }
        let mut class_offset = Vec::with_capacity(classes);
        let mut acc = 0;
        for w in &class_width {
            class_offset.push(acc);
            acc += w;
        }
        Ok(Level {
            dim: n,
            delta,
            kappa,
            g: gh,
            partition: build_partition(cells),
            pieces,
            class_offset,
            class_width,
            groups: acc,
        })
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let sk = self.kappa.sqrt();
        let n = self.dim;
        for (nu, phi) in self.partition.phis(x) {
            let base = self.class_offset[self.partition.cells[nu].color];
            match &self.pieces[nu] {
                Piece::One => out[base] += sk * phi * self.g.value(x).max(0.0).sqrt(),
                Piece::Two(t) => {
                    let y = t.profile.frame.to_local(x);
                    let (xi, tt) = (&y[..n - 1], y[n - 1]);
                    let xm = t.profile.solve(xi)?;
                    let h = t.profile.factor_at(xi, tt, xm)?;
                    out[base] += sk * phi * (tt - xm) * h.max(0.0).sqrt();
                    match &t.rest {
                        Rest::Const(f0) => out[base + 1] += sk * phi * f0.max(0.0).sqrt(),
                        Rest::Sub(sub) => {
                            let mut tmp = vec![0.0; sub.groups];
                            sub.eval(xi, &mut tmp)?;
                            for (j, v) in tmp.iter().enumerate() {
                                out[base + 1 + j] += sk * phi * v;
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn depth(&self) -> usize {
        1 + self
            .pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Two(CaseTwo { rest: Rest::Sub(s), .. }) => Some(s.depth()),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    fn sub_cells(&self) -> usize {
        self.pieces
            .iter()
            .map(|p| match p {
                Piece::Two(CaseTwo { rest: Rest::Sub(s), .. }) => s.partition.cells.len() + s.sub_cells(),
                _ => 0,
            })
            .sum()
    }

    fn min_radius(&self) -> f64 {
        let mut r = self.partition.cells.iter().map(|c| c.radius).fold(f64::INFINITY, f64::min);
        for p in &self.pieces {
            if let Piece::Two(CaseTwo { rest: Rest::Sub(s), .. }) = p {
                r = r.min(s.min_radius());
            }
        }
        r
    }

    fn labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.groups);
        for (l, w) in self.class_width.iter().enumerate() {
            out.push(format!("{l}"));
            for j in 1..*w {
                out.push(format!("{l}/{}", j - 1));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSummary {
    pub index: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub rho: f64,
    pub color: usize,
    pub case: String,
    pub axis: Option<Vec<f64>>,
    pub minimizer: Option<f64>,
    pub profile: Option<f64>,
    pub factor: Option<f64>,
    pub sub_cells: usize,
}

/// Result of [`decompose`]: f = sum_l g_l^2 on the covered region.
pub struct Decomposition {
    pub function: FunctionHandle,
    pub params: DecomposeParams,
    pub deltas: Vec<f64>,
    root: Level,
}

impl std::fmt::Debug for Decomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Decomposition({}, {} groups)", self.function.name, self.groups())
    }
}

pub fn decompose(f: &FunctionHandle, params: &DecomposeParams) -> Result<Decomposition> {
    let n = f.arity();
    if params.region.dim() != n {
        return Err(Error::Invalid("region dimension differs from arity".into()));
    }
    if !(params.s > 0.0 && params.s <= 1.0 / 200.0) {
        return Err(Error::ParamRange { name: "s".into(), value: params.s, range: "(0, 1/200]".into() });
    }
    if !(params.floor > 0.0) {
        return Err(Error::ParamRange { name: "floor".into(), value: params.floor, range: "(0, inf)".into() });
    }
    if n > params.max_depth + 1 {
        return Err(Error::RecursionBudget(n - 1));
    }
    let deltas = delta_sequence(params.delta, params.eta, n)?;
    let root = Level::build(f, &params.region, &deltas, 0, params)?;
    Ok(Decomposition { function: f.clone(), params: params.clone(), deltas, root })
}

impl Decomposition {
    pub fn dim(&self) -> usize {
        self.root.dim
    }

    pub fn groups(&self) -> usize {
        self.root.groups
    }

    pub fn classes(&self) -> usize {
        self.root.class_width.len()
    }

    pub fn kappa(&self) -> f64 {
        self.root.kappa
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn cells(&self) -> &[CoverCell] {
        &self.root.partition.cells
    }

    pub fn partition(&self) -> &Partition {
        &self.root.partition
    }

    pub fn group_labels(&self) -> Vec<String> {
        self.root.labels()
    }

    /// Class and index range of group `k`.
    pub fn group_class(&self, k: usize) -> usize {
        self.root.class_offset.partition_point(|&o| o <= k) - 1
    }

    /// Values of all g_l at x.
    pub fn eval_roots(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.groups()];
        self.root.eval(x, &mut out)?;
        Ok(out)
    }

    pub fn sum_of_squares(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_roots(x)?.iter().map(|v| v * v).sum())
    }

    /// Profiles of the top-level Case II cells.
    pub fn case_two_profiles(&self) -> Vec<Arc<Profile>> {
        self.root
            .pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Two(t) => Some(t.profile.clone()),
                _ => None,
            })
            .collect()
    }

    /// Largest [lambda_max Hess F]_+ / [lambda_max Hess f]_+ over the
    /// top-level Case II cell centres.
    pub fn crucial_ratio(&self) -> f64 {
        self.root
            .pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Two(t) => Some(t.crucial),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    /// g_k as a procedure-backed handle.
    pub fn group_handle(self: &Arc<Self>, k: usize) -> FunctionHandle {
        let d = self.clone();
        let scale = self.fd_step() / crate::calculus::fd::base_step();
        FunctionHandle::from_fn(&format!("g{k}"), self.dim(), self.params.region.clone(), scale, move |x| {
            d.eval_roots(x).map(|v| v[k]).unwrap_or(f64::NAN)
        })
    }

    /// First-order finite-difference step for the roots: 1/400 of the
    /// smallest cell radius at any level.
    pub fn fd_step(&self) -> f64 {
        self.root.min_radius() / 400.0
    }

    pub fn cell_table(&self) -> Vec<CellSummary> {
        self.root
            .partition
            .cells
            .iter()
            .zip(&self.root.pieces)
            .map(|(c, p)| {
                let mut s = CellSummary {
                    index: c.index,
                    center: c.center.clone(),
                    radius: c.radius,
                    rho: c.rho,
                    color: c.color,
                    case: "I".into(),
                    axis: None,
                    minimizer: None,
                    profile: None,
                    factor: None,
                    sub_cells: 0,
                };
                if let Piece::Two(t) = p {
                    s.case = "II".into();
                    s.axis = Some(t.profile.frame.axis());
                    s.minimizer = Some(t.profile.x0);
                    s.profile = t.profile.reduced(&vec![0.0; self.dim() - 1]).ok();
                    s.factor = Some(t.factor0);
                    s.sub_cells = match &t.rest {
                        Rest::Const(_) => 0,
                        Rest::Sub(sub) => sub.partition.cells.len(),
                    };
                }
                s
            })
            .collect()
    }

    pub fn report(&self) -> DecompositionReport {
        let table = self.cell_table();
        let case_two = table.iter().filter(|c| c.case == "II").count();
        let curv = self
            .root
            .pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Two(t) => Some(t.curvature),
                _ => None,
            })
            .fold(0.0, f64::max);
        let mut notes = Vec::new();
        let levels = self.depth();
        if self.groups() > self.classes() * levels {
            notes.push(format!(
                "{} groups exceed classes x levels = {}; sub-level classes add groups",
                self.groups(),
                self.classes() * levels
            ));
        }
        DecompositionReport {
            function: self.function.name.clone(),
            dim: self.dim(),
            params: self.params.clone(),
            deltas: self.deltas.clone(),
            level_delta: self.root.delta,
            depth: levels,
            kappa: self.kappa(),
            cells: table.len(),
            case_one: table.len() - case_two,
            case_two,
            sub_cells: self.root.sub_cells(),
            classes: self.classes(),
            groups: self.groups(),
            group_labels: self.group_labels(),
            max_case_two_curvature: curv,
            crucial_ratio: self.crucial_ratio(),
            cell_table: table,
            verification: None,
            notes,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub function: String,
    pub dim: usize,
    pub params: DecomposeParams,
    pub deltas: Vec<f64>,
    pub level_delta: f64,
    pub depth: usize,
    pub kappa: f64,
    pub cells: usize,
    pub case_one: usize,
    pub case_two: usize,
    pub sub_cells: usize,
    pub classes: usize,
    pub groups: usize,
    pub group_labels: Vec<String>,
    pub max_case_two_curvature: f64,
    pub crucial_ratio: f64,
    pub cell_table: Vec<CellSummary>,
    pub verification: Option<Verification>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupHolder {
    pub group: usize,
    pub label: String,
    pub class: usize,
    pub estimate: HolderEstimate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verification {
    pub points: usize,
    pub used: usize,
    /// Covered points with rho < floor.
    pub boundary_layer: usize,
    pub uncovered: usize,
    pub residual_sup: f64,
    pub residual_mean: f64,
    pub boundary_residual_sup: f64,
    pub sup_f: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub empty: bool,
    pub worst_point: Option<Vec<f64>>,
    pub holder: Vec<GroupHolder>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HolderOptions {
    /// Sample points per cell ball.
    pub per_ball: usize,
    /// Cells sampled per color class.
    pub max_balls: usize,
}

impl Default for HolderOptions {
    fn default() -> Self {
        HolderOptions { per_ball: 64, max_balls: 4 }
    }
}

/// Residual statistics of f - sum g_l^2 over `grid` restricted to
/// rho >= floor, and optionally order-2 Hölder estimates of every g_l with
/// exponent delta_{n-1}.
pub fn verify_decomposition(f: &FunctionHandle, d: &Decomposition, grid: &[Vec<f64>], holder: Option<HolderOptions>) -> Result<Verification> {
    let cp = ControlDistanceParams::new(d.params.delta, Variant::Full)?;
    let fh = f.scaled(1.0 / d.kappa());
    let rows: Vec<Result<(u8, f64, f64)>> = par::map(grid, |x| {
        let v = f.value(x);
        if !d.partition().covers(x) {
            return Ok((2, 0.0, v));
        }
        let r = (v - d.sum_of_squares(x)?).abs();
        let rho = control_distance(&fh, x, &cp)?;
        Ok((if rho >= d.params.floor { 0 } else { 1 }, r, v))
    });
    let mut out = Verification {
        points: grid.len(),
        used: 0,
        boundary_layer: 0,
        uncovered: 0,
        residual_sup: 0.0,
        residual_mean: 0.0,
        boundary_residual_sup: 0.0,
        sup_f: 0.0,
        tolerance: 0.0,
        pass: false,
        empty: true,
        worst_point: None,
        holder: vec![],
    };
    let mut sum = 0.0;
    for (x, r) in grid.iter().zip(rows) {
        let (kind, res, v) = r?;
        out.sup_f = out.sup_f.max(v.abs());
        match kind {
            0 => {
                out.used += 1;
                sum += res;
                if res > out.residual_sup || out.worst_point.is_none() {
                    out.residual_sup = out.residual_sup.max(res);
                    out.worst_point = Some(x.clone());
                }
            }
            1 => {
                out.boundary_layer += 1;
                out.boundary_residual_sup = out.boundary_residual_sup.max(res);
            }
            _ => out.uncovered += 1,
        }
    }
    out.empty = out.used == 0;
    if out.used > 0 {
        out.residual_mean = sum / out.used as f64;
    }
    out.tolerance = d.params.tol * (1.0 + out.sup_f);
    out.pass = !out.empty && out.residual_sup <= out.tolerance;
    if let Some(h) = holder {
        out.holder = group_holder(d, h)?;
    }
    Ok(out)
}

/// Value, gradient and second derivatives (i <= j) of the roots in
/// `range` at x, by central differences with one Richardson step.
fn group_jets(d: &Decomposition, x: &[f64], h: f64, range: std::ops::Range<usize>) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let at = |dx: &[(usize, f64)]| -> Result<Vec<f64>> {
        let mut p = x.to_vec();
        for &(i, v) in dx {
            p[i] += v;
        }
        Ok(d.eval_roots(&p)?[range.clone()].to_vec())
    };
    let base = at(&[])?;
    let m = base.len();
    let stencil = |h: f64| -> Result<Vec<Vec<f64>>> {
        let mut out = vec![Vec::with_capacity(n + n * (n + 1) / 2); m];
        let mut second = vec![Vec::with_capacity(n * (n + 1) / 2); m];
        for i in 0..n {
            for j in i..n {
                if i == j {
                    let (a, b) = (at(&[(i, h)])?, at(&[(i, -h)])?);
                    for k in 0..m {
                        out[k].push((a[k] - b[k]) / (2.0 * h));
                        second[k].push((a[k] - 2.0 * base[k] + b[k]) / (h * h));
                    }
                } else {
                    let pp = at(&[(i, h), (j, h)])?;
                    let pm = at(&[(i, h), (j, -h)])?;
                    let mp = at(&[(i, -h), (j, h)])?;
                    let mm = at(&[(i, -h), (j, -h)])?;
                    for k in 0..m {
                        second[k].push((pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h));
                    }
                }
            }
        }
        for (o, s) in out.iter_mut().zip(second) {
            o.extend(s);
        }
        Ok(out)
    };
    let c1 = stencil(h)?;
    let c2 = stencil(h / 2.0)?;
    Ok(c1
        .iter()
        .zip(&c2)
        .zip(&base)
        .map(|((a, b), v)| std::iter::once(*v).chain(a.iter().zip(b).map(|(u, w)| (4.0 * w - u) / 3.0)).collect())
        .collect())
}

/// Order-2 Hölder estimates of every root, sampling `per_ball` points in
/// up to `max_balls` cells of the root's color class, restricted to the
/// region. Classes with fewer than two such points are skipped.
pub fn group_holder(d: &Decomposition, o: HolderOptions) -> Result<Vec<GroupHolder>> {
    let n = d.dim();
    let exponent = *d.deltas.last().unwrap();
    let h = 2.0 * d.fd_step();
    let h_min = 10.0 * h;
    let labels = d.group_labels();
    let region = &d.params.region;
    let mut out = Vec::new();
    for class in 0..d.classes() {
        let lo = d.root.class_offset[class];
        let range = lo..lo + d.root.class_width[class];
        let members: Vec<&CoverCell> = d.cells().iter().filter(|c| c.color == class).collect();
        let take = members.len().min(o.max_balls.max(1));
        let mut pts = Vec::new();
        for i in 0..take {
            let c = members[i * members.len() / take];
            pts.extend(Ball::new(c.center.clone(), c.radius).sample(o.per_ball).into_iter().filter(|x| region.contains(x)));
        }
        if pts.len() < 2 {
            continue;
        }
        if n > 1 {
            pts.iter_mut().enumerate().for_each(|(i, p)| {
                // Shift off the deterministic Halton lattice of neighbouring balls.
                let u = halton(i as u64 + 7, n);
                p.iter_mut().zip(u).for_each(|(a, b)| *a += (b - 0.5) * 1e-9);
            });
        }
        let vals: Vec<Result<Vec<Vec<f64>>>> = par::map(&pts, |x| group_jets(d, x, h, range.clone()));
        let mut table = Vec::with_capacity(pts.len());
        for v in vals {
            table.push(v?);
        }
        for (k, g) in range.clone().enumerate() {
            let sup = |a: usize, b: usize| table.iter().flat_map(|row| row[k][a..b].iter()).fold(0.0f64, |m, v| m.max(v.abs()));
            let sup_norms = vec![sup(0, 1), sup(1, n + 1), sup(n + 1, table[0][k].len())];
            let col: Vec<Vec<f64>> = table.iter().map(|row| row[k][n + 1..].to_vec()).collect();
            let (semi, pairs, worst) = pair_sweep(&pts, &col, exponent, h_min);
            out.push(GroupHolder {
                group: g,
                label: labels[g].clone(),
                class,
                estimate: HolderEstimate {
                    order: 2,
                    exponent,
                    sup_norms,
                    seminorm: semi,
                    samples: pts.len(),
                    pairs,
                    min_separation: h_min,
                    worst_pair: worst.map(|(i, j)| (pts[i].clone(), pts[j].clone())),
                },
            });
        }
    }
    Ok(out)
}

/// Order-2 Hölder estimate of a single root over explicit points.
pub fn root_holder(d: &Arc<Decomposition>, k: usize, pts: &[Vec<f64>]) -> Result<HolderEstimate> {
    let g = d.group_handle(k);
    holder_on_points(&g, 2, *d.deltas.last().unwrap(), pts, 20.0 * d.fd_step())
}
