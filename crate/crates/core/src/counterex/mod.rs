//! The five-variable family phi(t) L(W) + psi(t) + phi(|W|) h_rho(t/|W|):
//! log-space functionals R, S, T, the monotone two-sided bound, the
//! SOS-failure ratio and the quadratic-form gap delta_nu.

mod gap;

pub use gap::{estimate_delta_nu, quartic_l, sphere_points, DeltaNu, DeltaNuOptions};

use crate::calculus::{FunctionHandle, Modulus};
use crate::cover::plateau;
use crate::error::{Error, Result};
use crate::exprlang::parse_with_vars;
use crate::geometry::{halton, Ball};
use crate::par;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

type LnFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A positive one-variable function known through its logarithm, so that
/// values far below the double range stay usable.
#[derive(Clone)]
pub struct LogProfile {
    pub label: String,
    ln: LnFn,
}

impl std::fmt::Debug for LogProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LogProfile({})", self.label)
    }
}

impl LogProfile {
    pub fn new(label: &str, ln: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        LogProfile { label: label.to_string(), ln: Arc::new(ln) }
    }

    /// phi(t) = exp(-1/t^2).
    pub fn flat_exp_sq() -> Self {
        LogProfile::new("exp(-1/t^2)", |t| -1.0 / (t * t))
    }

    /// psi(t) = phi(t/2)^{1/s'} t^{4/s'} for a phi given in log form.
    pub fn closed_psi(phi: &LogProfile, s_prime: f64) -> Self {
        let ph = phi.ln.clone();
        LogProfile::new(&format!("phi(t/2)^(1/{s_prime}) t^(4/{s_prime})"), move |t| {
            (ph(t / 2.0) + 4.0 * t.abs().ln()) / s_prime
        })
    }

    /// Logarithm of an expression in `t`; underflows where the expression
    /// does.
    pub fn from_expr(src: &str) -> Result<Self> {
        let e = parse_with_vars(src, &["t".to_string()])?;
        let tape = crate::exprlang::Tape::compile(&e, &["t".to_string()])?;
        Ok(LogProfile::new(src, move |t| tape.eval(&[t]).ln()))
    }

    pub fn ln(&self, t: f64) -> f64 {
        (self.ln)(t)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.ln(t).exp()
    }
}

#[derive(Debug, Clone)]
pub struct FamilyParams {
    pub phi: LogProfile,
    pub psi: Option<LogProfile>,
    pub rho: f64,
}

impl FamilyParams {
    /// phi = exp(-1/t^2) with the closed-form psi for `s_prime`.
    pub fn standard(s_prime: Option<f64>, rho: f64) -> Result<Self> {
        let phi = LogProfile::flat_exp_sq();
        let psi = match s_prime {
            Some(sp) if !(sp > 0.0 && sp < 1.0) => {
                return Err(Error::ParamRange { name: "s_prime".into(), value: sp, range: "(0, 1)".into() })
            }
            Some(sp) => Some(LogProfile::closed_psi(&phi, sp)),
            None => None,
        };
        let p = FamilyParams { phi, psi, rho };
        p.validate()?;
        Ok(p)
    }

    /// rho in (0,1), and psi / (phi t^4) nonincreasing towards 0 along
    /// t = 2^-1, ..., 2^-8, ending below 1e-3.
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::ParamRange { name: "rho".into(), value: self.rho, range: "(0, 1)".into() });
        }
        if let Some(psi) = &self.psi {
            let v: Vec<f64> = (1..=8)
                .map(|j| {
                    let t = 0.5f64.powi(j);
                    psi.ln(t) - self.phi.ln(t) - 4.0 * t.ln()
                })
                .collect();
            let mono = v.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            if !mono || v[v.len() - 1] > 1e-3f64.ln() {
                return Err(Error::Invalid(format!("psi = {} is not o(phi(t) t^4) on the dyadic grid", psi.label)));
            }
        }
        Ok(())
    }

    pub fn psi(&self) -> Result<&LogProfile> {
        self.psi.as_ref().ok_or(Error::MissingPsi)
    }
}

/// The plateau h_rho: 1 on |a| <= rho, 0 on |a| >= 1.
pub fn bump_h(rho: f64, a: f64) -> f64 {
    let a = a.abs();
    if a <= rho {
        return 1.0;
    }
    plateau(0.5 + 0.5 * (a - rho) / (1.0 - rho))
}

fn logsumexp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// ln f(W, t) for a point p = (w, x, y, z, t).
pub fn family_ln(p: &FamilyParams, q: &[f64]) -> f64 {
    let (w, t) = (&q[..4], q[4].abs());
    let r = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut terms = Vec::with_capacity(3);
    if t > 0.0 {
        let l = quartic_l(w);
        if l > 0.0 {
            terms.push(p.phi.ln(t) + l.ln());
        }
        if let Some(psi) = &p.psi {
            terms.push(psi.ln(t));
        }
    }
    if r > 0.0 {
        let h = bump_h(p.rho, t / r);
        if h > 0.0 {
            terms.push(p.phi.ln(r) + h.ln());
        }
    }
    logsumexp(&terms)
}

/// The family as a five-variable handle on the unit ball.
pub fn build_family(p: &FamilyParams) -> Result<FunctionHandle> {
    p.validate()?;
    let q = p.clone();
    Ok(FunctionHandle::from_fn("family_f", 5, Ball::unit(5), 1.0, move |x| family_ln(&q, x).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Functional {
    R,
    S,
    T,
}

impl std::str::FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "r" => Ok(Functional::R),
            "S" | "s" => Ok(Functional::S),
            "T" | "t" => Ok(Functional::T),
            _ => Err(Error::Invalid(format!("unknown functional `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub name: Functional,
    pub gamma: f64,
    pub modulus: String,
    pub ln_sup: f64,
    pub sup: f64,
    pub argmax_t: f64,
    /// ln sup over the grid points t >= 4 t_min.
    pub ln_sup_truncated: f64,
    pub t_min: f64,
    pub divergent: bool,
}

/// Geometric grid from 1 down to t_min with `per_octave` points per
/// halving; t_min itself is included.
pub fn log_grid(t_min: f64, per_octave: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let q = 0.5f64.powf(1.0 / per_octave.max(1) as f64);
    let mut t = 1.0;
    while t > t_min * (1.0 + 1e-12) {
        out.push(t);
        t *= q;
    }
    out.push(t_min);
    out
}

/// ln of the integrand of R, S or T at t.
pub fn functional_integrand(p: &FamilyParams, which: Functional, gamma: f64, m: &Modulus, t: f64) -> Result<f64> {
    let lt = t.ln();
    Ok(match which {
        Functional::R => {
            let psi = p.psi()?;
            let lp = psi.ln(t);
            lp - p.phi.ln(t) + p.phi.ln(gamma * t) - m.ln_eval(lp.min(0.0))
        }
        Functional::S => {
            let lp = p.psi()?.ln(t);
            p.phi.ln(gamma * t) + 4.0 * lt - m.ln_eval(lp.min(0.0))
        }
        Functional::T => {
            let a = p.phi.ln(t) + 4.0 * lt;
            p.phi.ln(gamma * t) + 4.0 * lt - m.ln_eval(a.min(0.0))
        }
    })
}

/// Grid supremum in log space. Divergent when the supremum over the whole
/// grid exceeds ten times the supremum over t >= 4 t_min.
pub fn functional(p: &FamilyParams, which: Functional, gamma: f64, m: &Modulus, t_grid: &[f64]) -> Result<FunctionalReport> {
    if !(gamma > 0.0) {
        return Err(Error::ParamRange { name: "gamma".into(), value: gamma, range: "(0, inf)".into() });
    }
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::Invalid("t grid must be a nonempty subset of (0, 1]".into()));
    }
    let t_min = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut best, mut arg, mut trunc) = (f64::NEG_INFINITY, t_grid[0], f64::NEG_INFINITY);
    for &t in t_grid {
        let v = functional_integrand(p, which, gamma, m, t)?;
        if v > best || (v == best && t > arg) {
            best = v;
            arg = t;
        }
        if t >= 4.0 * t_min * (1.0 - 1e-12) {
            trunc = trunc.max(v);
        }
    }
    Ok(FunctionalReport {
        name: which,
        gamma,
        modulus: m.label(),
        ln_sup: best,
        sup: best.exp(),
        argmax_t: arg,
        ln_sup_truncated: trunc,
        t_min,
        divergent: best - trunc > 10f64.ln(),
    })
}

/// (1 + sqrt(1 + a^2)) / (2a).
pub fn gamma_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::ParamRange { name: "alpha".into(), value: alpha, range: "(0, inf)".into() });
    }
    Ok((1.0 + (1.0 + alpha * alpha).sqrt()) / (2.0 * alpha))
}

/// s_0 = gamma_alpha^-2, where the exponent of the T integrand for
/// phi = exp(-1/t^2) and omega_s changes sign.
pub fn threshold(alpha: f64) -> Result<f64> {
    Ok(gamma_alpha(alpha)?.powi(-2))
}

/// Points Q = (z W/|W|, u) on the sphere of B(P/2, |P|/2) whose W-part is
/// parallel to that of P = (W, t):
/// (z - r/2)^2 + (u - t/2)^2 = (r^2 + t^2)/4. For W = 0 the w axis is used.
pub fn boundary_points(p: &[f64], thetas: &[f64]) -> Vec<Vec<f64>> {
    let w = &p[..4];
    let t = p[4];
    let r = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let dir: Vec<f64> = if r > 0.0 { w.iter().map(|v| v / r).collect() } else { vec![1.0, 0.0, 0.0, 0.0] };
    let big_r = (r * r + t * t).sqrt() / 2.0;
    thetas
        .iter()
        .map(|th| {
            let z = r / 2.0 + big_r * th.cos();
            let u = t / 2.0 + big_r * th.sin();
            let mut q: Vec<f64> = dir.iter().map(|d| d * z).collect();
            q.push(u);
            q
        })
        .collect()
}

/// P1 = (0, t), Q1 = (W, t/2) with |W| = t/2, and P2 = (W, |W|),
/// Q2 = (W/2, (1/2 + 1/sqrt 2)|W|) with |W| = t, both along the w axis.
pub fn witness_pairs(t: f64) -> [(Vec<f64>, Vec<f64>); 2] {
    let g1 = 0.5 + 0.5f64.sqrt();
    [
        (vec![0.0, 0.0, 0.0, 0.0, t], vec![t / 2.0, 0.0, 0.0, 0.0, t / 2.0]),
        (vec![t, 0.0, 0.0, 0.0, t], vec![t / 2.0, 0.0, 0.0, 0.0, g1 * t]),
    ]
}

/// ln f(Q) - ln omega(f(P)).
pub fn pair_ratio_ln(p: &FamilyParams, m: &Modulus, pt: &[f64], q: &[f64]) -> f64 {
    let lp = family_ln(p, pt);
    let lq = family_ln(p, q);
    if lq == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    lq - m.ln_eval(lp.min(0.0))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapeFit {
    /// Mean of ln(witness ratio) - ln(functional integrand).
    pub ln_constant: f64,
    /// Max minus min of that difference across the t range.
    pub spread: f64,
    pub t_range: (f64, f64),
    pub matches: bool,
}

fn shape_fit(diffs: &[f64], t_range: (f64, f64)) -> ShapeFit {
    let lo = diffs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    ShapeFit { ln_constant: mean, spread: hi - lo, t_range, matches: hi - lo <= 2f64.ln() }
}

/// Compares the two witness ratios with the S(1/2) and T(gamma_1)
/// integrands on a decade [t0, 10 t0].
pub fn witness_shapes(p: &FamilyParams, m: &Modulus, t0: f64) -> Result<(ShapeFit, ShapeFit)> {
    let g1 = gamma_alpha(1.0)?;
    let ts: Vec<f64> = (0..=20).map(|i| t0 * 10f64.powf(i as f64 / 20.0)).collect();
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    for &t in &ts {
        let [(p1, q1), (p2, q2)] = witness_pairs(t);
        d1.push(pair_ratio_ln(p, m, &p1, &q1) - functional_integrand(p, Functional::S, 0.5, m, t)?);
        d2.push(pair_ratio_ln(p, m, &p2, &q2) - functional_integrand(p, Functional::T, g1, m, t)?);
    }
    let range = (t0, 10.0 * t0);
    Ok((shape_fit(&d1, range), shape_fit(&d2, range)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsOptions {
    pub t_grid: Vec<f64>,
    /// |W| / t ratios of the searched points P.
    pub ratios: Vec<f64>,
    pub thetas: usize,
    pub directions: usize,
    pub witness_t0: f64,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        BoundsOptions {
            t_grid: log_grid(10f64.powf(-2.5), 8),
            ratios: vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0],
            thetas: 64,
            directions: 8,
            witness_t0: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsReport {
    pub modulus: String,
    pub delta: f64,
    pub lower: Vec<FunctionalReport>,
    pub upper: Vec<FunctionalReport>,
    pub ln_estimate: f64,
    pub estimate_pair: (Vec<f64>, Vec<f64>),
    pub witness_s: ShapeFit,
    pub witness_t: ShapeFit,
    pub divergent: bool,
    /// Some(true) when 1e-3 (lower sum) <= estimate <= 1e3 (upper sum).
    pub sandwich: Option<bool>,
    pub notes: Vec<String>,
}

/// Sup of f(Q) / omega(f(P)) over P = (r e, t) with r / t in `ratios`,
/// |P| <= 1, e in a few sphere directions (the w axis first), and Q on the
/// parallel boundary circle.
pub fn boundary_search(p: &FamilyParams, m: &Modulus, o: &BoundsOptions) -> (f64, (Vec<f64>, Vec<f64>)) {
    let mut dirs = vec![vec![1.0, 0.0, 0.0, 0.0]];
    let mut k = 1u64;
    while dirs.len() < o.directions.max(1) {
        let u: Vec<f64> = halton(k, 4).iter().map(|v| 2.0 * v - 1.0).collect();
        k += 1;
        let n = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            dirs.push(u.iter().map(|v| v / n).collect());
        }
    }
    let thetas: Vec<f64> = (0..o.thetas).map(|i| 2.0 * std::f64::consts::PI * i as f64 / o.thetas as f64).collect();
    let mut starts = Vec::new();
    for &t in &o.t_grid {
        for &k in &o.ratios {
            if t * (1.0 + k * k).sqrt() > 1.0 + 1e-12 {
                continue;
            }
            for d in &dirs {
                let mut pt: Vec<f64> = d.iter().map(|v| v * k * t).collect();
                pt.push(t);
                starts.push(pt);
            }
        }
    }
    let rows: Vec<(f64, usize, usize)> = par::map_range(starts.len(), |i| {
        let qs = boundary_points(&starts[i], &thetas);
        let mut best = (f64::NEG_INFINITY, i, 0);
        for (j, q) in qs.iter().enumerate() {
            let v = pair_ratio_ln(p, m, &starts[i], q);
            if v > best.0 {
                best = (v, i, j);
            }
        }
        best
    });
    let best = rows.into_iter().fold((f64::NEG_INFINITY, 0, 0), |a, b| if b.0 > a.0 { b } else { a });
    let pt = starts[best.1].clone();
    let q = boundary_points(&pt, &thetas[best.2..=best.2]).remove(0);
    (best.0, (pt, q))
}

/// Lower functionals S(1/2), T(gamma_1), upper functionals R(1 + delta),
/// S(1/2 + delta), T(gamma_rho + delta), the boundary-pair estimate of the
/// monotone functional and the witness shapes.
pub fn monotone_bounds(p: &FamilyParams, m: &Modulus, delta: f64, o: &BoundsOptions) -> Result<BoundsReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::ParamRange { name: "delta".into(), value: delta, range: "(0, 1)".into() });
    }
    let g1 = gamma_alpha(1.0)?;
    let gr = gamma_alpha(p.rho)?;
    let lower = vec![
        functional(p, Functional::S, 0.5, m, &o.t_grid)?,
        functional(p, Functional::T, g1, m, &o.t_grid)?,
    ];
    let upper = vec![
        functional(p, Functional::R, 1.0 + delta, m, &o.t_grid)?,
        functional(p, Functional::S, 0.5 + delta, m, &o.t_grid)?,
        functional(p, Functional::T, gr + delta, m, &o.t_grid)?,
    ];
    let (ln_est, pair) = boundary_search(p, m, o);
    let (ws, wt) = witness_shapes(p, m, o.witness_t0)?;
    let divergent = lower.iter().chain(&upper).any(|f| f.divergent);
    let mut notes = Vec::new();
    let sandwich = if divergent {
        notes.push("a functional diverges; sandwich not evaluated".into());
        None
    } else {
        let lo = logsumexp(&lower.iter().map(|f| f.ln_sup).collect::<Vec<_>>());
        let hi = logsumexp(&upper.iter().map(|f| f.ln_sup).collect::<Vec<_>>());
        let k = 1e3f64.ln();
        Some(ln_est >= lo - k && ln_est <= hi + k)
    };
    Ok(BoundsReport {
        modulus: m.label(),
        delta,
        lower,
        upper,
        ln_estimate: ln_est,
        estimate_pair: pair,
        witness_s: ws,
        witness_t: wt,
        divergent,
        sandwich,
        notes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SosVerdict {
    FailsSos,
    Inconclusive,
    DoesNotTrigger,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SosFailure {
    pub beta: f64,
    pub verdict: SosVerdict,
    pub ln_ratio: Vec<(f64, f64)>,
}

/// ln [psi / (phi^{4/beta} t^{16/beta})] along the grid (taken in
/// decreasing t). Only the tail t <= sqrt(t_max t_min) is judged: fails
/// SOS in C^{2,beta} when the ratio decreases there and ends at least a
/// factor 1e3 below its value at the start of the tail; the mirror
/// condition gives DoesNotTrigger.
pub fn sos_failure_criterion(p: &FamilyParams, beta: f64, t_grid: &[f64]) -> Result<SosFailure> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::ParamRange { name: "beta".into(), value: beta, range: "(0, 1)".into() });
    }
    if t_grid.len() < 2 {
        return Err(Error::Invalid("t grid needs at least two points".into()));
    }
    let psi = p.psi()?;
    let mut ts = t_grid.to_vec();
    ts.sort_by(|a, b| b.total_cmp(a));
    let v: Vec<(f64, f64)> = ts
        .iter()
        .map(|&t| (t, psi.ln(t) - 4.0 / beta * p.phi.ln(t) - 16.0 / beta * t.ln()))
        .collect();
    let mid = (ts[0] * ts[ts.len() - 1]).sqrt();
    let tail: Vec<f64> = v.iter().filter(|(t, _)| *t <= mid).map(|(_, r)| *r).collect();
    let tail = if tail.len() >= 2 { tail } else { v.iter().map(|(_, r)| *r).collect() };
    let k = 1e3f64.ln();
    let tol = 1e-9;
    let down = tail.windows(2).all(|w| w[1] <= w[0] + tol * (1.0 + w[0].abs()));
    let up = tail.windows(2).all(|w| w[1] >= w[0] - tol * (1.0 + w[0].abs()));
    let (first, last) = (tail[0], tail[tail.len() - 1]);
    let verdict = if down && last < first - k {
        SosVerdict::FailsSos
    } else if up && last > first + k {
        SosVerdict::DoesNotTrigger
    } else {
        SosVerdict::Inconclusive
    };
    Ok(SosFailure { beta, verdict, ln_ratio: v })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Curve {
    pub exponent: f64,
    pub points: Vec<(f64, f64)>,
}

/// (delta_nu / C)^{2/(4-beta)} tau^{-beta/(8-2beta)} over the tau grid.
pub fn crucial_lower_bound(delta_nu: f64, beta: f64, c: f64, tau_grid: &[f64]) -> Result<Curve> {
    if !(delta_nu > 0.0) {
        return Err(Error::ParamRange { name: "delta_nu".into(), value: delta_nu, range: "(0, inf)".into() });
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::ParamRange { name: "beta".into(), value: beta, range: "(0, 1)".into() });
    }
    let e = -beta / (8.0 - 2.0 * beta);
    let k = (delta_nu / c).powf(2.0 / (4.0 - beta));
    Ok(Curve { exponent: e, points: tau_grid.iter().map(|&t| (t, k * t.powf(e))).collect() })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub s: f64,
    pub beta: f64,
    pub rho: f64,
    pub s_value: f64,
    pub t_value: f64,
    pub verdict_sos: SosVerdict,
    pub verdict_monotone: String,
}

/// For each s: S(1/2) and T(gamma_1) with omega_s, the SOS-failure verdict
/// for beta, and a monotonicity verdict: "divergent" when a lower
/// functional diverges, "finite" when all upper functionals (delta = 0.05)
/// stay finite, "undetermined" otherwise.
pub fn scan(p: &FamilyParams, s_values: &[f64], beta: f64, t_grid: &[f64]) -> Result<Vec<ScanRow>> {
    let g1 = gamma_alpha(1.0)?;
    let gr = gamma_alpha(p.rho)?;
    let sos = sos_failure_criterion(p, beta, t_grid)?.verdict;
    let mut rows = Vec::new();
    for &s in s_values {
        let m = Modulus::scale(s)?;
        let sf = functional(p, Functional::S, 0.5, &m, t_grid)?;
        let tf = functional(p, Functional::T, g1, &m, t_grid)?;
        let d = 0.05;
        let up = [
            functional(p, Functional::R, 1.0 + d, &m, t_grid)?,
            functional(p, Functional::S, 0.5 + d, &m, t_grid)?,
            functional(p, Functional::T, gr + d, &m, t_grid)?,
        ];
        let verdict = if sf.divergent || tf.divergent {
            "divergent"
        } else if up.iter().all(|f| !f.divergent) {
            "finite"
        } else {
            "undetermined"
        };
        rows.push(ScanRow {
            s,
            beta,
            rho: p.rho,
            s_value: sf.sup,
            t_value: tf.sup,
            verdict_sos: sos,
            verdict_monotone: verdict.into(),
        });
    }
    Ok(rows)
}
