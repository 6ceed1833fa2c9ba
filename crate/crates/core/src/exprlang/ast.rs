use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Expression node. Children are shared through [`Expr`], so derivative
/// trees reuse the subtrees of the expression they came from.
#[derive(Debug, Clone)]
pub enum Node {
    Const(f64),
    Var(String),
    Neg(Expr),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Quot(Expr, Expr),
    Pow(Expr, f64),
    Exp(Expr),
    Ln(Expr),
    Sin(Expr),
    Cos(Expr),
    /// `pos` where `test > 0`, `neg` elsewhere.
    Cond { test: Expr, pos: Expr, neg: Expr },
}

#[derive(Clone)]
pub struct Expr(pub(crate) Arc<Node>);

impl Expr {
    pub fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(v: f64) -> Self {
        Expr::new(Node::Const(v))
    }

    pub fn var(name: &str) -> Self {
        Expr::new(Node::Var(name.to_string()))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Const(_) | Node::Var(_) => vec![],
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Ln(a) | Node::Sin(a) | Node::Cos(a) => {
                vec![a]
            }
            Node::Sum(v) | Node::Product(v) => v.iter().collect(),
            Node::Quot(a, b) => vec![a, b],
            Node::Cond { test, pos, neg } => vec![test, pos, neg],
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        let mut seen = std::collections::HashSet::new();
        while let Some(e) = stack.pop() {
            if !seen.insert(e.ptr_id()) {
                continue;
            }
            if let Node::Var(n) = e.node() {
                out.insert(n.clone());
            }
            stack.extend(e.children());
        }
        out
    }

    pub fn has_cond(&self) -> bool {
        let mut stack = vec![self];
        let mut seen = std::collections::HashSet::new();
        while let Some(e) = stack.pop() {
            if !seen.insert(e.ptr_id()) {
                continue;
            }
            if matches!(e.node(), Node::Cond { .. }) {
                return true;
            }
            stack.extend(e.children());
        }
        false
    }

    /// Number of distinct nodes reachable from the root.
    pub fn dag_size(&self) -> usize {
        let mut stack = vec![self];
        let mut seen = std::collections::HashSet::new();
        while let Some(e) = stack.pop() {
            if seen.insert(e.ptr_id()) {
                stack.extend(e.children());
            }
        }
        seen.len()
    }

    /// Tree-walking evaluation with variables looked up by name.
    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Option<f64> {
        Some(match self.node() {
            Node::Const(v) => *v,
            Node::Var(n) => lookup(n)?,
            Node::Neg(a) => -a.eval_with(lookup)?,
            Node::Sum(v) => {
                let mut s = 0.0;
                for c in v {
                    s += c.eval_with(lookup)?;
                }
                s
            }
            Node::Product(v) => {
                let mut s = 1.0;
                for c in v {
                    s *= c.eval_with(lookup)?;
                }
                s
            }
            Node::Quot(a, b) => a.eval_with(lookup)? / b.eval_with(lookup)?,
            Node::Pow(a, p) => powr(a.eval_with(lookup)?, *p),
            Node::Exp(a) => a.eval_with(lookup)?.exp(),
            Node::Ln(a) => a.eval_with(lookup)?.ln(),
            Node::Sin(a) => a.eval_with(lookup)?.sin(),
            Node::Cos(a) => a.eval_with(lookup)?.cos(),
            Node::Cond { test, pos, neg } => {
                if test.eval_with(lookup)? > 0.0 {
                    pos.eval_with(lookup)?
                } else {
                    neg.eval_with(lookup)?
                }
            }
        })
    }

    /// Evaluates with variables bound positionally to `names`.
    pub fn eval(&self, names: &[String], x: &[f64]) -> Option<f64> {
        self.eval_with(&|n| names.iter().position(|m| m == n).map(|i| x[i]))
    }
}

/// Real power with integer exponents routed through `powi`, so that
/// negative bases work for whole exponents.
pub fn powr(x: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= 64.0 {
        x.powi(p as i32)
    } else if p == 0.5 {
        x.sqrt()
    } else {
        x.powf(p)
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => a.to_bits() == b.to_bits() || a == b,
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Neg(a), Node::Neg(b))
            | (Node::Exp(a), Node::Exp(b))
            | (Node::Ln(a), Node::Ln(b))
            | (Node::Sin(a), Node::Sin(b))
            | (Node::Cos(a), Node::Cos(b)) => a == b,
            (Node::Sum(a), Node::Sum(b)) | (Node::Product(a), Node::Product(b)) => a == b,
            (Node::Quot(a, b), Node::Quot(c, d)) => a == c && b == d,
            (Node::Pow(a, p), Node::Pow(b, q)) => a == b && p == q,
            (
                Node::Cond { test: a, pos: b, neg: c },
                Node::Cond { test: d, pos: e, neg: f },
            ) => a == d && b == e && c == f,
            _ => false,
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(v) => write!(f, "{v}"),
            Node::Var(n) => write!(f, "Var {n}"),
            Node::Neg(a) => write!(f, "Neg({a:?})"),
            Node::Sum(v) => write_list(f, "Sum", v),
            Node::Product(v) => write_list(f, "Product", v),
            Node::Quot(a, b) => write!(f, "Quot({a:?}, {b:?})"),
            Node::Pow(a, p) => write!(f, "Pow({a:?},{p})"),
            Node::Exp(a) => write!(f, "Exp({a:?})"),
            Node::Ln(a) => write!(f, "Ln({a:?})"),
            Node::Sin(a) => write!(f, "Sin({a:?})"),
            Node::Cos(a) => write!(f, "Cos({a:?})"),
            Node::Cond { test, pos, neg } => write!(f, "Cond({test:?}, {pos:?}, {neg:?})"),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, name: &str, v: &[Expr]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, e) in v.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{e:?}")?;
    }
    write!(f, ")")
}

// Smart constructors used by differentiation. They fold constants and drop
// additive zeros and multiplicative ones, nothing more.

pub fn neg(a: Expr) -> Expr {
    match a.node() {
        Node::Const(v) => Expr::constant(-v),
        Node::Neg(inner) => inner.clone(),
        _ => Expr::new(Node::Neg(a)),
    }
}

pub fn add(terms: Vec<Expr>) -> Expr {
    let mut c = 0.0;
    let mut rest = Vec::with_capacity(terms.len());
    for t in terms {
        match t.node() {
            Node::Const(v) => c += v,
            Node::Sum(inner) => {
                for s in inner {
                    if let Some(v) = s.as_const() {
                        c += v;
                    } else {
                        rest.push(s.clone());
                    }
                }
            }
            _ => rest.push(t),
        }
    }
    if c != 0.0 {
        rest.push(Expr::constant(c));
    }
    match rest.len() {
        0 => Expr::constant(0.0),
        1 => rest.pop().unwrap(),
        _ => Expr::new(Node::Sum(rest)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    add(vec![a, neg(b)])
}

pub fn mul(factors: Vec<Expr>) -> Expr {
    let mut c = 1.0;
    let mut rest = Vec::with_capacity(factors.len());
    for t in factors {
        match t.node() {
            Node::Const(v) => c *= v,
            Node::Product(inner) => {
                for s in inner {
                    if let Some(v) = s.as_const() {
                        c *= v;
                    } else {
                        rest.push(s.clone());
                    }
                }
            }
            Node::Neg(inner) => {
                c = -c;
                rest.push(inner.clone());
            }
            _ => rest.push(t),
        }
    }
    if c == 0.0 {
        return Expr::constant(0.0);
    }
    if rest.is_empty() {
        return Expr::constant(c);
    }
    let body = if rest.len() == 1 { rest.pop().unwrap() } else { Expr::new(Node::Product(rest)) };
    if c == 1.0 {
        body
    } else if c == -1.0 {
        Expr::new(Node::Neg(body))
    } else {
        match body.node() {
            Node::Product(v) => {
                let mut all = vec![Expr::constant(c)];
                all.extend(v.iter().cloned());
                Expr::new(Node::Product(all))
            }
            _ => Expr::new(Node::Product(vec![Expr::constant(c), body])),
        }
    }
}

pub fn mul2(a: Expr, b: Expr) -> Expr {
    mul(vec![a, b])
}

pub fn quot(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        return a;
    }
    if b.is_one() {
        return a;
    }
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        return Expr::constant(x / y);
    }
    Expr::new(Node::Quot(a, b))
}

pub fn pow(a: Expr, p: f64) -> Expr {
    if p == 0.0 {
        return Expr::constant(1.0);
    }
    if p == 1.0 {
        return a;
    }
    if let Some(v) = a.as_const() {
        return Expr::constant(powr(v, p));
    }
    if let Node::Pow(b, q) = a.node() {
        if q.fract() == 0.0 && p.fract() == 0.0 {
            return Expr::new(Node::Pow(b.clone(), p * q));
        }
    }
    Expr::new(Node::Pow(a, p))
}

pub fn exp(a: Expr) -> Expr {
    match a.as_const() {
        Some(v) => Expr::constant(v.exp()),
        None => Expr::new(Node::Exp(a)),
    }
}

pub fn ln(a: Expr) -> Expr {
    match a.as_const() {
        Some(v) => Expr::constant(v.ln()),
        None => Expr::new(Node::Ln(a)),
    }
}

pub fn sin(a: Expr) -> Expr {
    match a.as_const() {
        Some(v) => Expr::constant(v.sin()),
        None => Expr::new(Node::Sin(a)),
    }
}

pub fn cos(a: Expr) -> Expr {
    match a.as_const() {
        Some(v) => Expr::constant(v.cos()),
        None => Expr::new(Node::Cos(a)),
    }
}

pub fn cond(test: Expr, pos: Expr, neg: Expr) -> Expr {
    if let Some(t) = test.as_const() {
        return if t > 0.0 { pos } else { neg };
    }
    if pos.ptr_id() == neg.ptr_id() || (pos.as_const().is_some() && pos.as_const() == neg.as_const()) {
        return pos;
    }
    Expr::new(Node::Cond { test, pos, neg })
}
