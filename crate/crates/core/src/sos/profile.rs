use crate::calculus::{fd, FunctionHandle, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::Ball;
use nalgebra::{DMatrix, DVector};
use std::cell::RefCell;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

/// Local orthonormal frame of a cell: x = center + R y, with the last
/// column of R the chosen axis.
#[derive(Debug, Clone)]
pub struct Frame {
    pub center: Vec<f64>,
    pub rot: DMatrix<f64>,
    pub radius: f64,
}

impl Frame {
    /// Householder reflection taking e_n to `axis`.
    pub fn new(center: Vec<f64>, axis: &[f64], radius: f64) -> Frame {
        let n = axis.len();
        let mut v = DVector::from_iterator(n, axis.iter().map(|a| -a));
        v[n - 1] += 1.0;
        let nv2 = v.norm_squared();
        let rot = if nv2 < 1e-24 {
            DMatrix::identity(n, n)
        } else {
            DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / nv2)
        };
        Frame { center, rot, radius }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn axis(&self) -> Vec<f64> {
        self.rot.column(self.dim() - 1).iter().copied().collect()
    }

    pub fn to_global(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| self.center[i] + (0..n).map(|j| self.rot[(i, j)] * y[j]).sum::<f64>()).collect()
    }

    pub fn to_local(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|j| (0..n).map(|i| self.rot[(i, j)] * (x[i] - self.center[i])).sum::<f64>()).collect()
    }

    fn join(&self, xi: &[f64], t: f64) -> Vec<f64> {
        let mut y = xi.to_vec();
        y.push(t);
        self.to_global(&y)
    }
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        out.push(((1.0 - z) / 2.0, w / 2.0));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

static NEXT_ID: AtomicUsize = AtomicUsize::new(1);

thread_local! {
    static CACHE: RefCell<Vec<(usize, Vec<f64>, f64)>> = const { RefCell::new(Vec::new()) };
}

const CACHE_LEN: usize = 16;

/// Fiberwise minimizer t = X(xi) of f(center + R(xi, t)) over |t| <= 2r,
/// with the reduced profile F(xi) = f(xi, X(xi)) and Taylor factor
/// H(xi, t) = int_0^1 (1 - u) d_t^2 f(xi, X + u(t - X)) du.
pub struct Profile {
    id: usize,
    pub cell: usize,
    pub parent: FunctionHandle,
    pub frame: Frame,
    pub x0: f64,
    nodes: Vec<(f64, f64)>,
}

impl std::fmt::Debug for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Profile(cell {}, {:?})", self.cell, self.parent)
    }
}

impl Profile {
    pub fn new(cell: usize, parent: FunctionHandle, frame: Frame) -> Result<Profile> {
        let mut p = Profile {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            cell,
            parent,
            frame,
            x0: 0.0,
            nodes: gauss_legendre(10),
        };
        let n = p.frame.dim();
        p.x0 = p.solve(&vec![0.0; n - 1])?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn bracket(&self) -> f64 {
        2.0 * self.frame.radius
    }

    /// (d_t f, d_t^2 f) at local coordinates (xi, t).
    pub fn partials_t(&self, xi: &[f64], t: f64) -> Result<(f64, f64)> {
        let x = self.frame.join(xi, t);
        let a = self.frame.axis();
        let g = self.parent.gradient(&x)?;
        let h = self.parent.hessian(&x)?;
        let gt: f64 = a.iter().zip(&g).map(|(u, v)| u * v).sum();
        let av = DVector::from_vec(a);
        let htt = (av.transpose() * &h * &av)[(0, 0)];
        Ok((gt, htt))
    }

    fn second_t(&self, xi: &[f64], t: f64) -> Result<f64> {
        Ok(self.partials_t(xi, t)?.1)
    }

    /// X(xi) by Newton steps safeguarded with bisection on [-2r, 2r].
    pub fn solve(&self, xi: &[f64]) -> Result<f64> {
        let hit = CACHE.with(|c| {
            c.borrow().iter().find(|e| e.0 == self.id && e.1.as_slice() == xi).map(|e| e.2)
        });
        if let Some(v) = hit {
            return Ok(v);
        }
        let v = self.solve_uncached(xi)?;
        CACHE.with(|c| {
            let mut c = c.borrow_mut();
            if c.len() >= CACHE_LEN {
                c.remove(0);
            }
            c.push((self.id, xi.to_vec(), v));
        });
        Ok(v)
    }

    fn solve_uncached(&self, xi: &[f64]) -> Result<f64> {
        let b = self.bracket();
        let err = || Error::BoundaryRoot { cell: self.cell, xi: xi.to_vec() };
        let (ga, _) = self.partials_t(xi, -b)?;
        let (gb, _) = self.partials_t(xi, b)?;
        if !(ga < 0.0 && gb > 0.0) {
            return Err(err());
        }
        let (mut lo, mut hi) = (-b, b);
        let tol = 1e-13 * self.frame.radius;
        let mut t = self.x0.clamp(-b, b);
        for _ in 0..200 {
            let (g, q) = self.partials_t(xi, t)?;
            if g == 0.0 {
                return Ok(t);
            }
            if g < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let mut next = if q > 0.0 { t - g / q } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= tol || hi - lo <= tol {
                return Ok(next);
            }
            t = next;
        }
        Ok(t)
    }

    /// F(xi).
    pub fn reduced(&self, xi: &[f64]) -> Result<f64> {
        let x = self.solve(xi)?;
        Ok(self.parent.value(&self.frame.join(xi, x)))
    }

    /// H(xi, t) given X = X(xi).
    pub fn factor_at(&self, xi: &[f64], t: f64, x: f64) -> Result<f64> {
        let mut acc = 0.0;
        for &(u, w) in &self.nodes {
            acc += w * (1.0 - u) * self.second_t(xi, x + u * (t - x))?;
        }
        Ok(acc)
    }

    pub fn factor(&self, xi: &[f64], t: f64) -> Result<f64> {
        let x = self.solve(xi)?;
        self.factor_at(xi, t, x)
    }

    /// f(xi, t) - F(xi) - H(xi, t)(t - X(xi))^2 at local coordinates y.
    pub fn identity_defect(&self, y: &[f64]) -> Result<f64> {
        let n = self.dim();
        let (xi, t) = (&y[..n - 1], y[n - 1]);
        let x = self.solve(xi)?;
        let f = self.parent.value(&self.frame.to_global(y));
        let big_f = self.parent.value(&self.frame.join(xi, x));
        let h = self.factor_at(xi, t, x)?;
        Ok(f - big_f - h * (t - x) * (t - x))
    }

    /// Local gradient and Hessian of f at (xi, X(xi)).
    fn local_jets(&self, xi: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let x = self.solve(xi)?;
        let p = self.frame.join(xi, x);
        let g = DVector::from_vec(self.parent.gradient(&p)?);
        let h = self.parent.hessian(&p)?;
        let r = &self.frame.rot;
        let gl = r.transpose() * g;
        let hl = r.transpose() * h * r;
        Ok((gl.iter().copied().collect(), hl))
    }

    /// Hessian of F: f_ij - f_in f_jn / f_nn at (xi, X(xi)).
    pub fn reduced_hessian(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        let m = self.dim() - 1;
        let (_, h) = self.local_jets(xi)?;
        let hnn = h[(m, m)];
        Ok(DMatrix::from_fn(m, m, |i, j| h[(i, j)] - h[(i, m)] * h[(j, m)] / hnn))
    }

    pub fn reduced_gradient(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let m = self.dim() - 1;
        let (g, _) = self.local_jets(xi)?;
        Ok(g[..m].to_vec())
    }

    /// F as a function handle on B(0, 2r) in R^{n-1}.
    pub fn reduced_handle(self: &Arc<Self>, name: &str) -> FunctionHandle {
        let m = self.dim() - 1;
        let domain = Ball::new(vec![0.0; m], self.bracket());
        FunctionHandle::new(name, Arc::new(ReducedField(self.clone())), domain)
    }

    /// H as a function handle of the local coordinates (xi, t).
    pub fn factor_handle(self: &Arc<Self>, name: &str) -> FunctionHandle {
        let n = self.dim();
        let p = self.clone();
        let scale = self.frame.radius;
        FunctionHandle::from_fn(name, n, Ball::new(vec![0.0; n], self.frame.radius), scale, move |y| {
            p.factor(&y[..n - 1], y[n - 1]).unwrap_or(f64::NAN)
        })
    }
}

struct ReducedField(Arc<Profile>);

impl ScalarField for ReducedField {
    fn arity(&self) -> usize {
        self.0.dim() - 1
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.0.reduced(x).unwrap_or(f64::NAN)
    }

    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(self.0.reduced_gradient(x))
    }

    fn hessian(&self, x: &[f64]) -> Option<Result<DMatrix<f64>>> {
        Some(self.0.reduced_hessian(x))
    }

    fn exact_derivative(&self, alpha: &[u8], x: &[f64]) -> Option<Result<f64>> {
        let dirs = crate::geometry::directions(alpha);
        match dirs.len() {
            1 => Some(self.0.reduced_gradient(x).map(|g| g[dirs[0]])),
            2 => Some(self.0.reduced_hessian(x).map(|h| h[(dirs[0], dirs[1])])),
            _ => {
                let (i, j) = (dirs[0], dirs[1]);
                let mut beta = alpha.to_vec();
                beta[i] -= 1;
                beta[j] -= 1;
                let p = &self.0;
                let entry = |y: &[f64]| p.reduced_hessian(y).map(|h| h[(i, j)]).unwrap_or(f64::NAN);
                Some(Ok(fd::derivative(&entry, &beta, x, self.fd_scale())))
            }
        }
    }

    fn fd_scale(&self) -> f64 {
        self.0.frame.radius
    }
}
