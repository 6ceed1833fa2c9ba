use super::ast::*;
use crate::error::{Error, Result};
use std::collections::HashMap;

/// Symbolic partial derivative of `e` with respect to `var`, applied `order`
/// times. Conditional nodes are differentiated branch by branch.
pub fn differentiate(e: &Expr, var: &str, order: usize) -> Result<Expr> {
    if order == 0 || order > 8 {
        return Err(Error::UnsupportedOrder(order));
    }
    let mut out = e.clone();
    for _ in 0..order {
        out = d1(&out, var);
    }
    Ok(out)
}

/// One derivative, memoized over shared subtrees.
pub fn d1(e: &Expr, var: &str) -> Expr {
    let mut memo = HashMap::new();
    d_memo(e, var, &mut memo)
}

fn d_memo(e: &Expr, var: &str, memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(d) = memo.get(&e.ptr_id()) {
        return d.clone();
    }
    let d = match e.node() {
        Node::Const(_) => Expr::constant(0.0),
        Node::Var(n) => Expr::constant(if n == var { 1.0 } else { 0.0 }),
        Node::Neg(a) => neg(d_memo(a, var, memo)),
        Node::Sum(v) => add(v.iter().map(|c| d_memo(c, var, memo)).collect()),
        Node::Product(v) => {
            let mut terms = Vec::new();
            for i in 0..v.len() {
                let di = d_memo(&v[i], var, memo);
                if di.is_zero() {
                    continue;
                }
                let mut fs: Vec<Expr> = Vec::with_capacity(v.len());
                for (j, c) in v.iter().enumerate() {
                    fs.push(if i == j { di.clone() } else { c.clone() });
                }
                terms.push(mul(fs));
            }
            add(terms)
        }
        Node::Quot(a, b) => {
            let da = d_memo(a, var, memo);
            let db = d_memo(b, var, memo);
            let first = quot(da, b.clone());
            if db.is_zero() {
                first
            } else {
                sub(first, quot(mul2(a.clone(), db), pow(b.clone(), 2.0)))
            }
        }
        Node::Pow(a, p) => {
            let da = d_memo(a, var, memo);
            if da.is_zero() {
                Expr::constant(0.0)
            } else {
                mul(vec![Expr::constant(*p), pow(a.clone(), p - 1.0), da])
            }
        }
        Node::Exp(a) => {
            let da = d_memo(a, var, memo);
            if da.is_zero() {
                Expr::constant(0.0)
            } else {
                mul2(e.clone(), da)
            }
        }
        Node::Ln(a) => {
            let da = d_memo(a, var, memo);
            quot(da, a.clone())
        }
        Node::Sin(a) => {
            let da = d_memo(a, var, memo);
            if da.is_zero() {
                Expr::constant(0.0)
            } else {
                mul2(cos(a.clone()), da)
            }
        }
        Node::Cos(a) => {
            let da = d_memo(a, var, memo);
            if da.is_zero() {
                Expr::constant(0.0)
            } else {
                neg(mul2(sin(a.clone()), da))
            }
        }
        Node::Cond { test, pos, neg: ng } => {
            let dp = d_memo(pos, var, memo);
            let dn = d_memo(ng, var, memo);
            cond(test.clone(), dp, dn)
        }
    };
    memo.insert(e.ptr_id(), d.clone());
    d
}
