use super::FunctionHandle;
use crate::error::{Error, Result};
use crate::geometry::{multi_indices, Ball};
use crate::par;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Common JSON shape of check reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub op: String,
    pub function: String,
    pub region: Option<Ball>,
    pub constants: BTreeMap<String, f64>,
    pub worst_point: Option<Vec<f64>>,
    pub ratio: f64,
    pub pass: bool,
    pub notes: Vec<String>,
    pub details: serde_json::Value,
}

impl Report {
    pub fn new(op: &str, function: &str, region: Option<Ball>) -> Self {
        Report {
            op: op.to_string(),
            function: function.to_string(),
            region,
            constants: BTreeMap::new(),
            worst_point: None,
            ratio: 0.0,
            pass: true,
            notes: Vec::new(),
            details: serde_json::Value::Null,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Writes rows as CSV with a header line.
pub fn to_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Largest eigenvalue of a symmetric matrix with its unit eigenvector.
pub fn top_eigen(h: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let n = h.nrows();
    if n == 1 {
        return (h[(0, 0)], vec![1.0]);
    }
    let eig = SymmetricEigen::new(h.clone());
    let mut best = 0;
    for i in 1..n {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    let mut v: Vec<f64> = eig.eigenvectors.column(best).iter().copied().collect();
    if let Some(first) = v.iter().find(|c| c.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
    (eig.eigenvalues[best], v)
}

/// [lambda_max(Hess f(x))]_+, the supremum over unit directions of the
/// positive part of the second directional derivative.
pub fn directional_hessian_plus(f: &FunctionHandle, x: &[f64]) -> Result<f64> {
    let h = f.hessian(x)?;
    Ok(top_eigen(&h).0.max(0.0))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityStat {
    pub name: String,
    pub constant: f64,
    pub worst_ratio: f64,
    pub worst_point: Option<Vec<f64>>,
    pub violations: usize,
    pub checked: usize,
}

impl InequalityStat {
    fn new(name: &str, constant: f64) -> Self {
        InequalityStat {
            name: name.into(),
            constant,
            worst_ratio: 0.0,
            worst_point: None,
            violations: 0,
            checked: 0,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64, p: &[f64]) {
        self.checked += 1;
        let r = if rhs > 0.0 {
            lhs / rhs
        } else if lhs <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        if lhs > rhs * (1.0 + 1e-9) + 1e-12 {
            self.violations += 1;
        }
        if r > self.worst_ratio {
            self.worst_ratio = r;
            self.worst_point = Some(p.to_vec());
        }
    }

    fn merge(&mut self, o: &InequalityStat) {
        self.checked += o.checked;
        self.violations += o.violations;
        if o.worst_ratio > self.worst_ratio {
            self.worst_ratio = o.worst_ratio;
            self.worst_point = o.worst_point.clone();
        }
    }
}

/// sup |nabla^4 f| over samples of a ball, by max tensor entry.
pub fn sup_fourth(f: &FunctionHandle, region: &Ball, samples: usize) -> Result<f64> {
    let pts = region.sample(samples);
    let vals: Vec<Result<f64>> = par::map(&pts, |p| f.tensor_norm(4, p));
    let mut m: f64 = 0.0;
    for v in vals {
        m = m.max(v?);
    }
    Ok(m)
}

/// Checks the one-dimensional odd/even control inequalities on every
/// coordinate line through each sample, after dividing f by
/// M = sup |nabla^4 f| over the doubled region when M > 1 so that
/// |f''''| <= 1:
///
/// |f'| <= 8/3 f^{3/4} + 8/3 f^{1/2}|f''|^{1/2},
/// |f'''| <= 8 f^{1/4} + 8 |f''|^{1/2},
/// -f'' <= 5/3 f^{1/2},
///
/// plus the variants with (f'')_+ valid where the normalised f <= 1. The
/// n-dimensional forms are reported with their empirical constants.
pub fn verify_odd_even_control(f: &FunctionHandle, region: &Ball, samples: usize) -> Result<Report> {
    let n = f.arity();
    let m = sup_fourth(f, &region.scaled(2.0), samples.max(64))?;
    let scale = 1.0 / m.max(1.0);
    let g = f.scaled(scale);
    let pts = region.sample(samples);
    let names = [
        ("first", 8.0 / 3.0),
        ("third", 8.0),
        ("second", 5.0 / 3.0),
        ("first_plus", 8.0),
        ("third_plus", 24.0),
        ("nd_gradient", f64::NAN),
        ("nd_third", f64::NAN),
        ("nd_hessian", f64::NAN),
    ];
    let per: Vec<Result<Vec<InequalityStat>>> = par::map(&pts, |p| {
        let mut st: Vec<InequalityStat> = names.iter().map(|(k, c)| InequalityStat::new(k, *c)).collect();
        let v = g.value(p);
        if v < -1e-14 {
            return Err(Error::Negative { point: p.clone(), value: v });
        }
        let v = v.max(0.0);
        let (q1, q2, q3) = (v.powf(0.75), v.sqrt(), v.powf(0.25));
        let mut alpha = vec![0u8; n];
        for i in 0..n {
            let mut d = [0.0; 4];
            for (k, dk) in d.iter_mut().enumerate().skip(1) {
                alpha[i] = k as u8;
                *dk = g.derivative(&alpha, p)?;
            }
            alpha[i] = 0;
            let a2 = d[2].abs().sqrt();
            st[0].record(d[1].abs(), 8.0 / 3.0 * q1 + 8.0 / 3.0 * q2 * a2, p);
            st[1].record(d[3].abs(), 8.0 * q3 + 8.0 * a2, p);
            st[2].record(-d[2], 5.0 / 3.0 * q2, p);
            if v <= 1.0 {
                let p2 = d[2].max(0.0).sqrt();
                st[3].record(d[1].abs(), 8.0 * q1 + 8.0 / 3.0 * q2 * p2, p);
                st[4].record(d[3].abs(), 24.0 * q3 + 8.0 * p2, p);
            }
        }
        let g1 = g.tensor_norm(1, p)?;
        let g2 = g.tensor_norm(2, p)?;
        let g3 = g.tensor_norm(3, p)?;
        let hp = directional_hessian_plus(&g, p)?;
        // Implicit constants: record lhs/rhs without a violation threshold.
        let nd = [(g1, q1 + q2 * g2.sqrt()), (g3, q3 + g2.sqrt()), (g2, hp + q2)];
        for (k, (l, r)) in nd.iter().enumerate() {
            let s = &mut st[5 + k];
            s.checked += 1;
            let ratio = if *r > 0.0 { l / r } else if *l <= 1e-12 { 0.0 } else { f64::INFINITY };
            if ratio > s.worst_ratio {
                s.worst_ratio = ratio;
                s.worst_point = Some(p.clone());
            }
        }
        Ok(st)
    });
    let mut total: Vec<InequalityStat> = names.iter().map(|(k, c)| InequalityStat::new(k, *c)).collect();
    for r in per {
        for (t, s) in total.iter_mut().zip(r?) {
            t.merge(&s);
        }
    }
    let mut rep = Report::new("odd_even_control", &f.name, Some(region.clone()));
    rep.constants.insert("fourth_derivative_sup".into(), m);
    rep.constants.insert("rescale".into(), scale);
    let mut worst: f64 = 0.0;
    for s in &total[..5] {
        rep.constants.insert(format!("{}_worst_ratio", s.name), s.worst_ratio);
        if s.worst_ratio > worst {
            worst = s.worst_ratio;
            rep.worst_point = s.worst_point.clone();
        }
        if s.violations > 0 {
            rep.pass = false;
        }
    }
    for s in &total[5..] {
        rep.constants.insert(format!("{}_constant", s.name), s.worst_ratio);
    }
    rep.ratio = worst;
    rep.details = serde_json::to_value(&total).unwrap();
    Ok(rep)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Smallest C with max|nabla^m f| <= C [l(B)^{-m} T + T^{1-m/k} (max|nabla^k f|)^{m/k}]
/// on the samples, where T is the largest order-m Taylor remainder over
/// sample pairs and l(B) the diameter of B.
pub fn verify_interpolation_bound(f: &FunctionHandle, b: &Ball, m: usize, k: usize, samples: usize) -> Result<Report> {
    if m == 0 || m > k {
        return Err(Error::Invalid(format!("need 1 <= m <= k, got m = {m}, k = {k}")));
    }
    if b.radius <= 0.0 {
        return Err(Error::Invalid("degenerate ball".into()));
    }
    let n = f.arity();
    let pts = b.sample(samples.max(2));
    let lower: Vec<Vec<Vec<u8>>> = (0..m).map(|j| multi_indices(n, j)).collect();
    type Row = (f64, f64, Vec<Vec<f64>>);
    let data: Vec<Result<Row>> = par::map(&pts, |p| {
        let dm = f.tensor_norm(m, p)?;
        let dk = f.tensor_norm(k, p)?;
        let mut ders = Vec::with_capacity(m);
        for set in &lower {
            let mut row = Vec::with_capacity(set.len());
            for a in set {
                row.push(f.derivative(a, p)?);
            }
            ders.push(row);
        }
        Ok((dm, dk, ders))
    });
    let mut rows = Vec::with_capacity(pts.len());
    for d in data {
        rows.push(d?);
    }
    let lhs = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let kmax = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let vals: Vec<f64> = pts.iter().map(|p| f.value(p)).collect();
    let tds: Vec<f64> = par::map_range(pts.len(), |i| {
        let mut best: f64 = 0.0;
        for (j, pj) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            let hvec: Vec<f64> = pts[i].iter().zip(pj).map(|(a, c)| a - c).collect();
            let mut taylor = 0.0;
            for (jj, set) in lower.iter().enumerate() {
                for (a, d) in set.iter().zip(&rows[j].2[jj]) {
                    let mut term = *d;
                    for (ax, &e) in a.iter().enumerate() {
                        term *= hvec[ax].powi(e as i32) / factorial(e as usize);
                    }
                    taylor += term;
                }
            }
            best = best.max((vals[i] - taylor).abs());
        }
        best
    });
    let td = tds.iter().copied().fold(0.0, f64::max);
    let ell = 2.0 * b.radius;
    let theta = m as f64 / k as f64;
    let denom = td / ell.powi(m as i32) + td.powf(1.0 - theta) * kmax.powf(theta);
    let c = if denom > 0.0 {
        lhs / denom
    } else if lhs <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    };
    let mut rep = Report::new("interpolation_bound", &f.name, Some(b.clone()));
    rep.constants.insert("lhs_max_nabla_m".into(), lhs);
    rep.constants.insert("taylor_difference_max".into(), td);
    rep.constants.insert("max_nabla_k".into(), kmax);
    rep.constants.insert("diameter".into(), ell);
    rep.constants.insert("constant".into(), c);
    rep.ratio = c;
    rep.pass = c.is_finite();
    rep.details = serde_json::json!({"m": m, "k": k, "samples": pts.len(), "pairs": pts.len() * (pts.len() - 1)});
    Ok(rep)
}

/// Dyadic grid 2^{-1}, ..., 2^{-count}.
pub fn dyadic_grid(count: usize) -> Vec<f64> {
    (1..=count).map(|j| 0.5f64.powi(j as i32)).collect()
}

/// Flatness test at the origin: for each N <= n_max, |x|^{-N}|f(x)| must be
/// nonincreasing along the descending grid on every coordinate ray, down to
/// a 1e-14 noise floor. With `derivatives` the first partials are tested too.
pub fn is_flat(f: &FunctionHandle, n_max: usize, t_grid: &[f64], derivatives: bool) -> Result<Report> {
    let n = f.arity();
    let mut funcs: Vec<(String, Box<dyn Fn(&[f64]) -> Result<f64> + '_>)> =
        vec![("f".into(), Box::new(|p: &[f64]| Ok(f.value(p))))];
    if derivatives {
        for i in 0..n {
            let mut a = vec![0u8; n];
            a[i] = 1;
            funcs.push((format!("d{i}"), Box::new(move |p: &[f64]| f.derivative(&a, p))));
        }
    }
    let mut rep = Report::new("is_flat", &f.name, None);
    let mut failures = Vec::new();
    let mut first_fail: Option<usize> = None;
    for (label, g) in &funcs {
        for axis in 0..n {
            for sign in [1.0, -1.0] {
                for big_n in 0..=n_max {
                    let mut prev: Option<f64> = None;
                    for &t in t_grid {
                        let mut p = vec![0.0; n];
                        p[axis] = sign * t;
                        let a = g(&p)?.abs() * t.powi(-(big_n as i32));
                        if let Some(pv) = prev {
                            if a > pv * (1.0 + 1e-9) + 1e-14 {
                                failures.push(serde_json::json!({
                                    "function": label, "axis": axis, "sign": sign, "N": big_n, "t": t
                                }));
                                first_fail = Some(first_fail.map_or(big_n, |m: usize| m.min(big_n)));
                                break;
                            }
                        }
                        prev = Some(a);
                    }
                }
            }
        }
    }
    rep.pass = failures.is_empty();
    if let Some(m) = first_fail {
        rep.constants.insert("first_failing_N".into(), m as f64);
    }
    rep.details = serde_json::json!({ "n_max": n_max, "grid": t_grid, "failures": failures });
    Ok(rep)
}
