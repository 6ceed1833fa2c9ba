use super::fd;
use crate::error::{Error, Result};
use crate::exprlang::{parse_with_vars, FunctionDef, Symbolic};
use crate::geometry::{multi_indices, Ball};
use nalgebra::DMatrix;
use std::sync::Arc;

/// A real function on a subset of R^n with derivative access.
///
/// Implementors provide values; exact derivatives, gradients and Hessians
/// are optional fast paths. Anything missing falls back to nested central
/// differences.
pub trait ScalarField: Send + Sync {
    fn arity(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn exact_derivative(&self, _alpha: &[u8], _x: &[f64]) -> Option<Result<f64>> {
        None
    }

    fn gradient(&self, _x: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }

    fn hessian(&self, _x: &[f64]) -> Option<Result<DMatrix<f64>>> {
        None
    }

    /// True when every derivative is computed symbolically.
    fn is_exact(&self) -> bool {
        false
    }

    /// Length scale multiplying the finite-difference step schedule.
    fn fd_scale(&self) -> f64 {
        1.0
    }
}

struct SymbolicField(Symbolic);

impl ScalarField for SymbolicField {
    fn arity(&self) -> usize {
        self.0.arity()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x)
    }

    fn exact_derivative(&self, alpha: &[u8], x: &[f64]) -> Option<Result<f64>> {
        Some(self.0.derivative(alpha, x))
    }

    fn is_exact(&self) -> bool {
        self.0.is_exact()
    }
}

struct ClosureField<F: Fn(&[f64]) -> f64 + Send + Sync> {
    n: usize,
    f: F,
    scale: f64,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> ScalarField for ClosureField<F> {
    fn arity(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn fd_scale(&self) -> f64 {
        self.scale
    }
}

struct ScaledField {
    inner: Arc<dyn ScalarField>,
    k: f64,
}

impl ScalarField for ScaledField {
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.k * self.inner.value(x)
    }

    fn exact_derivative(&self, alpha: &[u8], x: &[f64]) -> Option<Result<f64>> {
        self.inner.exact_derivative(alpha, x).map(|r| r.map(|v| self.k * v))
    }

    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        self.inner.gradient(x).map(|r| r.map(|g| g.into_iter().map(|v| self.k * v).collect()))
    }

    fn hessian(&self, x: &[f64]) -> Option<Result<DMatrix<f64>>> {
        self.inner.hessian(x).map(|r| r.map(|h| h * self.k))
    }

    fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }

    fn fd_scale(&self) -> f64 {
        self.inner.fd_scale()
    }
}

/// Shared handle to a [`ScalarField`] with a name and a home ball.
#[derive(Clone)]
pub struct FunctionHandle {
    pub name: String,
    pub field: Arc<dyn ScalarField>,
    pub domain: Ball,
    pub flat: Option<bool>,
}

impl std::fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FunctionHandle({}, n={})", self.name, self.arity())
    }
}

impl FunctionHandle {
    pub fn new(name: &str, field: Arc<dyn ScalarField>, domain: Ball) -> Self {
        FunctionHandle { name: name.to_string(), field, domain, flat: None }
    }

    pub fn from_def(def: &FunctionDef) -> Result<Self> {
        let sym = Symbolic::new(def.variables.clone(), def.body.clone())?;
        Ok(FunctionHandle::new(&def.name, Arc::new(SymbolicField(sym)), def.domain.clone()))
    }

    /// Parses `src` over `vars` on the unit ball.
    pub fn from_expr(src: &str, vars: &[&str]) -> Result<Self> {
        let v: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let e = parse_with_vars(src, &v)?;
        let n = v.len();
        let def = FunctionDef::new(src, v, e, Ball::unit(n))?;
        Self::from_def(&def)
    }

    /// Procedure-backed handle; derivatives come from finite differences
    /// with the given step scale.
    pub fn from_fn<F>(name: &str, n: usize, domain: Ball, scale: f64, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        FunctionHandle::new(name, Arc::new(ClosureField { n, f, scale }), domain)
    }

    pub fn with_domain(mut self, domain: Ball) -> Self {
        self.domain = domain;
        self
    }

    /// `k * f`, derivatives scaled alike.
    pub fn scaled(&self, k: f64) -> Self {
        FunctionHandle {
            name: self.name.clone(),
            field: Arc::new(ScaledField { inner: self.field.clone(), k }),
            domain: self.domain.clone(),
            flat: self.flat,
        }
    }

    pub fn arity(&self) -> usize {
        self.field.arity()
    }

    pub fn is_exact(&self) -> bool {
        self.field.is_exact()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.field.value(x)
    }

    pub fn derivative(&self, alpha: &[u8], x: &[f64]) -> Result<f64> {
        if alpha.iter().all(|&a| a == 0) {
            return Ok(self.value(x));
        }
        let v = match self.field.exact_derivative(alpha, x) {
            Some(r) => r?,
            None => fd::derivative(&|p: &[f64]| self.field.value(p), alpha, x, self.field.fd_scale()),
        };
        if v.is_nan() {
            return Err(Error::Derivative { point: x.to_vec(), msg: format!("NaN for multi-index {alpha:?}") });
        }
        Ok(v)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        if let Some(g) = self.field.gradient(x) {
            return g;
        }
        let n = self.arity();
        let mut out = Vec::with_capacity(n);
        let mut alpha = vec![0u8; n];
        for i in 0..n {
            alpha[i] = 1;
            out.push(self.derivative(&alpha, x)?);
            alpha[i] = 0;
        }
        Ok(out)
    }

    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if let Some(h) = self.field.hessian(x) {
            return h;
        }
        let n = self.arity();
        let mut h = DMatrix::zeros(n, n);
        let mut alpha = vec![0u8; n];
        for i in 0..n {
            for j in i..n {
                alpha[i] += 1;
                alpha[j] += 1;
                let v = self.derivative(&alpha, x)?;
                alpha[i] -= 1;
                alpha[j] -= 1;
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        Ok(h)
    }

    /// Max absolute entry of the order-`k` derivative tensor.
    pub fn tensor_norm(&self, k: usize, x: &[f64]) -> Result<f64> {
        if k == 0 {
            return Ok(self.value(x).abs());
        }
        if k == 2 {
            return Ok(self.hessian(x)?.amax());
        }
        let mut m: f64 = 0.0;
        for a in multi_indices(self.arity(), k) {
            m = m.max(self.derivative(&a, x)?.abs());
        }
        Ok(m)
    }
}
