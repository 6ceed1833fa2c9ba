use crate::error::{Error, Result};
use crate::geometry::halton;
use crate::par;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// L(w, x, y, z) = w^4 + x^2 y^2 + y^2 z^2 + z^2 x^2 - 2 wxyz.
pub fn quartic_l(v: &[f64]) -> f64 {
    let (w, x, y, z) = (v[0], v[1], v[2], v[3]);
    w.powi(4) + x * x * y * y + y * y * z * z + z * z * x * x - 2.0 * w * x * y * z
}

/// Deterministic points on the unit sphere of R^4: Halton points of the
/// cube kept inside the unit ball and normalized.
pub fn sphere_points(count: usize) -> Vec<[f64; 4]> {
    let mut out = Vec::with_capacity(count);
    let mut k = 1u64;
    while out.len() < count {
        let h = halton(k, 4);
        k += 1;
        let u = [2.0 * h[0] - 1.0, 2.0 * h[1] - 1.0, 2.0 * h[2] - 1.0, 2.0 * h[3] - 1.0];
        let n = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-2 && n <= 1.0 {
            out.push([u[0] / n, u[1] / n, u[2] / n, u[3] / n]);
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaNuOptions {
    pub nu: usize,
    pub c0: f64,
    pub sphere_samples: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Descent steps per smoothing stage.
    pub iterations: usize,
    /// Points of the sphere used for the final maximum.
    pub final_samples: usize,
    pub certificate_points: usize,
}

impl DeltaNuOptions {
    pub fn new(nu: usize, c0: f64) -> Self {
        DeltaNuOptions {
            nu,
            c0,
            sphere_samples: 2000,
            restarts: 20,
            seed: 0,
            iterations: 300,
            final_samples: 20000,
            certificate_points: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaNu {
    pub nu: usize,
    pub c0: f64,
    /// Smallest max_W |L(W) - sum Q_l(W)^2| reached, on the final sphere
    /// set.
    pub estimate: f64,
    pub per_restart: Vec<f64>,
    /// At least half of the restarts end within 20% of the best.
    pub stable: bool,
    /// Coefficient matrices of the best forms.
    pub forms: Vec<[[f64; 4]; 4]>,
    /// Sphere points where the best misfit is largest.
    pub certificate: Vec<[f64; 4]>,
    /// Some restart ran out of steps before its step size collapsed.
    pub stalled: bool,
}

const PAIRS: [(usize, usize); 10] = [(0, 0), (1, 1), (2, 2), (3, 3), (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn monomials(w: &[f64; 4]) -> [f64; 10] {
    let mut m = [0.0; 10];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        m[k] = if i == j { w[i] * w[i] } else { 2.0 * w[i] * w[j] };
    }
    m
}

struct Problem {
    nu: usize,
    mono: Vec<[f64; 10]>,
    target: Vec<f64>,
}

impl Problem {
    fn new(nu: usize, pts: &[[f64; 4]]) -> Self {
        Problem { nu, mono: pts.iter().map(monomials).collect(), target: pts.iter().map(|w| quartic_l(w)).collect() }
    }

    /// Residuals e_i and form values Q_l(W_i).
    fn residuals(&self, c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.mono.len();
        let mut e = self.target.clone();
        let mut q = vec![0.0; n * self.nu];
        for (i, m) in self.mono.iter().enumerate() {
            for l in 0..self.nu {
                let v: f64 = (0..10).map(|k| c[10 * l + k] * m[k]).sum();
                q[i * self.nu + l] = v;
                e[i] -= v * v;
            }
        }
        (e, q)
    }

    fn max_abs(&self, c: &[f64]) -> (f64, Vec<f64>) {
        let (e, _) = self.residuals(c);
        (e.iter().fold(0.0f64, |a, v| a.max(v.abs())), e)
    }

    /// (mean e^{2k})^{1/2k} and its gradient.
    fn smooth(&self, c: &[f64], k: i32) -> (f64, Vec<f64>) {
        let (e, q) = self.residuals(c);
        let n = e.len() as f64;
        let m = e.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut g = vec![0.0; c.len()];
        if m == 0.0 {
            return (0.0, g);
        }
        let s: f64 = e.iter().map(|v| (v / m).powi(2 * k)).sum::<f64>() / n;
        let fm = s.powf(1.0 / (2 * k) as f64);
        let denom = n * fm.powi(2 * k - 1);
        for (i, ei) in e.iter().enumerate() {
            let w = (ei / m).powi(2 * k - 1) / denom;
            if w == 0.0 {
                continue;
            }
            for l in 0..self.nu {
                let a = -2.0 * q[i * self.nu + l] * w;
                for kk in 0..10 {
                    g[10 * l + kk] += a * self.mono[i][kk];
                }
            }
        }
        (m * fm, g)
    }
}

fn project(c: &mut [f64], c0: f64) {
    for v in c.iter_mut() {
        *v = v.clamp(-c0, c0);
    }
}

/// Projected descent with Armijo backtracking through the smoothing
/// exponents 2, 8, 32. Returns the coefficients and whether the step
/// budget ran out.
fn descend(p: &Problem, mut c: Vec<f64>, c0: f64, iters: usize) -> (Vec<f64>, bool) {
    let mut stalled = false;
    for k in [2, 8, 32] {
        let mut eta = 1e-2;
        let (mut f, mut g) = p.smooth(&c, k);
        let mut done = false;
        for _ in 0..iters {
            eta *= 2.0;
            loop {
                let mut trial: Vec<f64> = c.iter().zip(&g).map(|(a, b)| a - eta * b).collect();
                project(&mut trial, c0);
                let dec: f64 = g.iter().zip(c.iter().zip(&trial)).map(|(gi, (a, b))| gi * (a - b)).sum();
                let (ft, gt) = p.smooth(&trial, k);
                if ft <= f - 1e-4 * dec {
                    c = trial;
                    f = ft;
                    g = gt;
                    break;
                }
                eta /= 2.0;
                if eta < 1e-14 {
                    done = true;
                    break;
                }
            }
            if done {
                break;
            }
        }
        stalled |= !done;
    }
    (c, stalled)
}

/// Multi-start estimate of inf over nu quadratic forms Q_l with matrix
/// entries in [-C0, C0] of max over the sphere of |L - sum Q_l^2|.
/// Restarts draw nonnegative diagonals, as Q and -Q have the same square.
pub fn estimate_delta_nu(o: &DeltaNuOptions) -> Result<DeltaNu> {
    if o.nu > 4 {
        return Err(Error::ParamRange { name: "nu".into(), value: o.nu as f64, range: "[0, 4]".into() });
    }
    if !(o.c0 > 0.0) {
        return Err(Error::ParamRange { name: "C0".into(), value: o.c0, range: "(0, inf)".into() });
    }
    if o.restarts == 0 || o.sphere_samples == 0 {
        return Err(Error::Invalid("need at least one restart and one sphere sample".into()));
    }
    let train = Problem::new(o.nu, &sphere_points(o.sphere_samples));
    let fine_pts = sphere_points(o.final_samples.max(o.sphere_samples));
    let fine = Problem::new(o.nu, &fine_pts);
    let runs: Vec<(f64, Vec<f64>, bool)> = if o.nu == 0 {
        vec![(fine.max_abs(&[]).0, vec![], false)]
    } else {
        par::map_range(o.restarts, |i| {
            let mut rng = ChaCha8Rng::seed_from_u64(o.seed.wrapping_add(i as u64));
            let a = o.c0.min(1.0);
            let c0: Vec<f64> = (0..10 * o.nu)
                .map(|k| if k % 10 < 4 { rng.gen_range(0.0..=a) } else { rng.gen_range(-a / 4.0..=a / 4.0) })
                .collect();
            let (c, stalled) = descend(&train, c0, o.c0, o.iterations);
            (fine.max_abs(&c).0, c, stalled)
        })
    };
    let best = runs.iter().enumerate().min_by(|a, b| a.1 .0.total_cmp(&b.1 .0)).map(|(i, _)| i).unwrap();
    let (est, coef, _) = &runs[best];
    let per: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let near = per.iter().filter(|v| **v <= 1.2 * est).count();
    let (_, e) = fine.max_abs(coef);
    let mut idx: Vec<usize> = (0..e.len()).collect();
    idx.sort_by(|a, b| e[*b].abs().total_cmp(&e[*a].abs()));
    let forms = (0..o.nu)
        .map(|l| {
            let mut m = [[0.0; 4]; 4];
            for (k, &(i, j)) in PAIRS.iter().enumerate() {
                m[i][j] = coef[10 * l + k];
                m[j][i] = coef[10 * l + k];
            }
            m
        })
        .collect();
    Ok(DeltaNu {
        nu: o.nu,
        c0: o.c0,
        estimate: *est,
        stable: 2 * near >= per.len(),
        per_restart: per,
        forms,
        certificate: idx.iter().take(o.certificate_points).map(|&i| fine_pts[i]).collect(),
        stalled: runs.iter().any(|r| r.2),
    })
}
