//! Expression language: parsing, printing, symbolic differentiation,
//! compiled evaluation and the built-in function catalog.

mod ast;
mod catalog;
mod diff;
mod parse;
mod print;
mod tape;

pub use ast::{add, cond, cos, exp, ln, mul, mul2, neg, pow, powr, quot, sin, sub, Expr, Node};
pub use catalog::{catalog_entries, catalog_function, glaeser_stub, CatalogEntry};
pub use diff::{d1, differentiate};
pub use parse::{parse_expression, parse_function_file, parse_with_vars, Definition};
pub use tape::Tape;

use crate::error::{Error, Result};
use crate::geometry::Ball;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

pub type SamplePredicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A named function of ordered variables with a home ball.
#[derive(Clone)]
pub struct FunctionDef {
    pub name: String,
    pub variables: Vec<String>,
    pub body: Expr,
    pub domain: Ball,
    pub smoothness: u32,
    pub nonnegative: bool,
    /// Points accepted by this predicate stay away from seams and flat
    /// points; oracle comparisons sample there.
    pub interior: SamplePredicate,
}

impl std::fmt::Debug for FunctionDef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionDef")
            .field("name", &self.name)
            .field("variables", &self.variables)
            .field("body", &self.body.to_string())
            .field("domain", &self.domain)
            .finish()
    }
}

impl FunctionDef {
    pub fn new(name: &str, variables: Vec<String>, body: Expr, domain: Ball) -> Result<Self> {
        for v in body.free_vars() {
            if !variables.contains(&v) {
                return Err(Error::Invalid(format!("free variable `{v}` not among {variables:?}")));
            }
        }
        if domain.center.len() != variables.len() {
            return Err(Error::Invalid("domain dimension differs from variable count".into()));
        }
        Ok(FunctionDef {
            name: name.to_string(),
            variables,
            body,
            domain,
            smoothness: 8,
            nonnegative: false,
            interior: Arc::new(|_| true),
        })
    }

    /// Parses `body` over the given variables with the unit ball as domain.
    pub fn parse(name: &str, variables: &[&str], body: &str) -> Result<Self> {
        let vars: Vec<String> = variables.iter().map(|s| s.to_string()).collect();
        let e = parse_with_vars(body, &vars)?;
        let n = vars.len();
        FunctionDef::new(name, vars, e, Ball::unit(n))
    }

    pub fn arity(&self) -> usize {
        self.variables.len()
    }

    pub fn with_domain(mut self, domain: Ball) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_interior(mut self, p: SamplePredicate) -> Self {
        self.interior = p;
        self
    }

    pub fn nonnegative(mut self, yes: bool) -> Self {
        self.nonnegative = yes;
        self
    }
}

/// Compiled function with a lazily filled cache of derivative tapes keyed by
/// multi-index.
pub struct Symbolic {
    vars: Vec<String>,
    exact: bool,
    base: Arc<Tape>,
    exprs: RwLock<HashMap<Vec<u8>, Expr>>,
    tapes: RwLock<HashMap<Vec<u8>, Arc<Tape>>>,
}

impl Symbolic {
    pub fn new(vars: Vec<String>, body: Expr) -> Result<Self> {
        let exact = !body.has_cond();
        let tape = Arc::new(Tape::compile(&body, &vars)?);
        let zero = vec![0u8; vars.len()];
        let mut exprs = HashMap::new();
        exprs.insert(zero.clone(), body);
        let mut tapes = HashMap::new();
        tapes.insert(zero, tape.clone());
        Ok(Symbolic { vars, exact, base: tape, exprs: RwLock::new(exprs), tapes: RwLock::new(tapes) })
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// False when the body contains conditional nodes; derivatives are then
    /// exact only away from the seams.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn derivative_expr(&self, alpha: &[u8]) -> Result<Expr> {
        if let Some(e) = self.exprs.read().unwrap().get(alpha) {
            return Ok(e.clone());
        }
        let order: usize = alpha.iter().map(|&a| a as usize).sum();
        if order > 8 {
            return Err(Error::UnsupportedOrder(order));
        }
        let i = alpha.iter().rposition(|&a| a > 0).expect("nonzero multi-index");
        let mut parent = alpha.to_vec();
        parent[i] -= 1;
        let pe = self.derivative_expr(&parent)?;
        let e = d1(&pe, &self.vars[i]);
        self.exprs.write().unwrap().insert(alpha.to_vec(), e.clone());
        Ok(e)
    }

    pub fn tape(&self, alpha: &[u8]) -> Result<Arc<Tape>> {
        if let Some(t) = self.tapes.read().unwrap().get(alpha) {
            return Ok(t.clone());
        }
        let e = self.derivative_expr(alpha)?;
        let t = Arc::new(Tape::compile(&e, &self.vars)?);
        self.tapes.write().unwrap().insert(alpha.to_vec(), t.clone());
        Ok(t)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.base.eval(x)
    }

    pub fn derivative(&self, alpha: &[u8], x: &[f64]) -> Result<f64> {
        Ok(self.tape(alpha)?.eval(x))
    }
}
