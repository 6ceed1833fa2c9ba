use super::ast::{Expr, Node};
use std::fmt;

fn num(v: f64) -> String {
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        format!("(-{})", -v)
    } else {
        format!("{v}")
    }
}

fn is_atomic(e: &Expr) -> bool {
    match e.node() {
        Node::Const(v) => *v >= 0.0 && !v.is_sign_negative(),
        Node::Var(_) | Node::Exp(_) | Node::Ln(_) | Node::Sin(_) | Node::Cos(_) | Node::Cond { .. } => true,
        _ => false,
    }
}

/// Prints `e` so that it parses back as a single factor.
fn factor(e: &Expr) -> String {
    if is_atomic(e) || matches!(e.node(), Node::Pow(..)) {
        expr(e)
    } else {
        format!("({})", expr(e))
    }
}

/// Prints `e` so that it parses back as a single term.
fn term(e: &Expr) -> String {
    match e.node() {
        Node::Sum(_) => format!("({})", expr(e)),
        _ => expr(e),
    }
}

fn quot_left(e: &Expr) -> String {
    match e.node() {
        Node::Product(_) | Node::Quot(..) => expr(e),
        _ => factor(e),
    }
}

pub fn expr(e: &Expr) -> String {
    match e.node() {
        Node::Const(v) => num(*v),
        Node::Var(n) => n.clone(),
        Node::Neg(a) => format!("-{}", term(a)),
        Node::Sum(v) => {
            let mut s = String::new();
            for (i, c) in v.iter().enumerate() {
                match (i, c.node()) {
                    (0, _) => s.push_str(&term(c)),
                    (_, Node::Neg(inner)) => {
                        s.push_str(" - ");
                        s.push_str(&term(inner));
                    }
                    _ => {
                        s.push_str(" + ");
                        s.push_str(&term(c));
                    }
                }
            }
            s
        }
        Node::Product(v) => {
            let mut s = String::new();
            for (i, c) in v.iter().enumerate() {
                if i == 0 {
                    s.push_str(&quot_left(c));
                } else {
                    s.push('*');
                    s.push_str(&factor(c));
                }
            }
            s
        }
        Node::Quot(a, b) => format!("{}/{}", quot_left(a), factor(b)),
        Node::Pow(a, p) => {
            let base = if is_atomic(a) { expr(a) } else { format!("({})", expr(a)) };
            format!("{base}^{}", num(*p))
        }
        Node::Exp(a) => format!("exp({})", expr(a)),
        Node::Ln(a) => format!("ln({})", expr(a)),
        Node::Sin(a) => format!("sin({})", expr(a)),
        Node::Cos(a) => format!("cos({})", expr(a)),
        Node::Cond { test, pos, neg } => format!("if({}, {}, {})", expr(test), expr(pos), expr(neg)),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&expr(self))
    }
}
