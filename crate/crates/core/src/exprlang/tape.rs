use super::ast::{powr, Expr, Node};
use crate::error::{Error, Result};
use std::cell::RefCell;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Var(u32),
    Neg(u32),
    Add(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Powi(u32, i32),
    Sqrt(u32),
    Powf(u32, f64),
    Exp(u32),
    Ln(u32),
    Sin(u32),
    Cos(u32),
    Select(u32, u32, u32),
}

#[derive(Hash, PartialEq, Eq)]
enum Key {
    Const(u64),
    Var(u32),
    Un(u8, u32),
    Bin(u8, u32, u32),
    Pow(u32, u64),
    Sel(u32, u32, u32),
}

/// Straight-line program compiled from an [`Expr`] with common
/// subexpressions merged.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
}

struct Builder<'a> {
    ops: Vec<Op>,
    keys: HashMap<Key, u32>,
    by_ptr: HashMap<usize, u32>,
    vars: &'a [String],
}

impl<'a> Builder<'a> {
    fn push(&mut self, key: Key, op: Op) -> u32 {
        if let Some(&r) = self.keys.get(&key) {
            return r;
        }
        let r = self.ops.len() as u32;
        self.ops.push(op);
        self.keys.insert(key, r);
        r
    }

    fn build(&mut self, e: &Expr) -> Result<u32> {
        if let Some(&r) = self.by_ptr.get(&e.ptr_id()) {
            return Ok(r);
        }
        let r = match e.node() {
            Node::Const(v) => self.push(Key::Const(v.to_bits()), Op::Const(*v)),
            Node::Var(n) => {
                let i = self
                    .vars
                    .iter()
                    .position(|m| m == n)
                    .ok_or_else(|| Error::Invalid(format!("free variable `{n}` not declared")))?
                    as u32;
                self.push(Key::Var(i), Op::Var(i))
            }
            Node::Neg(a) => {
                let a = self.build(a)?;
                self.push(Key::Un(0, a), Op::Neg(a))
            }
            Node::Sum(v) => {
                let mut acc = self.build(&v[0])?;
                for c in &v[1..] {
                    let b = self.build(c)?;
                    acc = self.push(Key::Bin(0, acc, b), Op::Add(acc, b));
                }
                acc
            }
            Node::Product(v) => {
                let mut acc = self.build(&v[0])?;
                for c in &v[1..] {
                    let b = self.build(c)?;
                    acc = self.push(Key::Bin(1, acc, b), Op::Mul(acc, b));
                }
                acc
            }
            Node::Quot(a, b) => {
                let a = self.build(a)?;
                let b = self.build(b)?;
                self.push(Key::Bin(2, a, b), Op::Div(a, b))
            }
            Node::Pow(a, p) => {
                let a = self.build(a)?;
                let op = if p.fract() == 0.0 && p.abs() <= 64.0 {
                    Op::Powi(a, *p as i32)
                } else if *p == 0.5 {
                    Op::Sqrt(a)
                } else {
                    Op::Powf(a, *p)
                };
                self.push(Key::Pow(a, p.to_bits()), op)
            }
            Node::Exp(a) => {
                let a = self.build(a)?;
                self.push(Key::Un(1, a), Op::Exp(a))
            }
            Node::Ln(a) => {
                let a = self.build(a)?;
                self.push(Key::Un(2, a), Op::Ln(a))
            }
            Node::Sin(a) => {
                let a = self.build(a)?;
                self.push(Key::Un(3, a), Op::Sin(a))
            }
            Node::Cos(a) => {
                let a = self.build(a)?;
                self.push(Key::Un(4, a), Op::Cos(a))
            }
            Node::Cond { test, pos, neg } => {
                let t = self.build(test)?;
                let p = self.build(pos)?;
                let n = self.build(neg)?;
                self.push(Key::Sel(t, p, n), Op::Select(t, p, n))
            }
        };
        self.by_ptr.insert(e.ptr_id(), r);
        Ok(r)
    }
}

thread_local! {
    static SCRATCH: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

impl Tape {
    pub fn compile(e: &Expr, vars: &[String]) -> Result<Tape> {
        let mut b = Builder { ops: Vec::new(), keys: HashMap::new(), by_ptr: HashMap::new(), vars };
        let root = b.build(e)? as usize;
        let mut ops = b.ops;
        // The root is the last instruction pushed unless it was deduplicated.
        if root + 1 != ops.len() {
            let op = ops[root];
            ops.push(op);
        }
        Ok(Tape { ops })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        SCRATCH.with(|s| {
            let mut r = s.borrow_mut();
            r.clear();
            r.reserve(self.ops.len());
            for op in &self.ops {
                let v = match *op {
                    Op::Const(c) => c,
                    Op::Var(i) => x[i as usize],
                    Op::Neg(a) => -r[a as usize],
                    Op::Add(a, b) => r[a as usize] + r[b as usize],
                    Op::Mul(a, b) => r[a as usize] * r[b as usize],
                    Op::Div(a, b) => r[a as usize] / r[b as usize],
                    Op::Powi(a, p) => r[a as usize].powi(p),
                    Op::Sqrt(a) => r[a as usize].sqrt(),
                    Op::Powf(a, p) => powr(r[a as usize], p),
                    Op::Exp(a) => r[a as usize].exp(),
                    Op::Ln(a) => r[a as usize].ln(),
                    Op::Sin(a) => r[a as usize].sin(),
                    Op::Cos(a) => r[a as usize].cos(),
                    Op::Select(t, p, n) => {
                        if r[t as usize] > 0.0 {
                            r[p as usize]
                        } else {
                            r[n as usize]
                        }
                    }
                };
                r.push(v);
            }
            *r.last().unwrap_or(&f64::NAN)
        })
    }
}
