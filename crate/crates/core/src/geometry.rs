//! Balls, low-discrepancy point sets and multi-index bookkeeping.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Ball { center, radius }
    }

    pub fn unit(n: usize) -> Self {
        Ball { center: vec![0.0; n], radius: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dist(&self.center, x) <= self.radius
    }

    pub fn scaled(&self, k: f64) -> Ball {
        Ball { center: self.center.clone(), radius: self.radius * k }
    }

    /// Nearest point of the closed ball.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let d = dist(&self.center, x);
        if d <= self.radius {
            return x.to_vec();
        }
        let k = self.radius / d;
        self.center.iter().zip(x).map(|(c, xi)| c + (xi - c) * k).collect()
    }

    /// `count` points of the ball: a uniform grid with endpoints in one
    /// dimension, Halton points accepted inside the ball otherwise.
    pub fn sample(&self, count: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        if count == 0 {
            return vec![];
        }
        if n == 0 {
            return vec![vec![]];
        }
        if n == 1 {
            if count == 1 {
                return vec![self.center.clone()];
            }
            let (c, r) = (self.center[0], self.radius);
            return (0..count).map(|i| vec![c - r + 2.0 * r * i as f64 / (count - 1) as f64]).collect();
        }
        let mut out = Vec::with_capacity(count);
        let mut k = 1u64;
        while out.len() < count {
            let u = halton(k, n);
            k += 1;
            let p: Vec<f64> = u.iter().zip(&self.center).map(|(ui, c)| c + self.radius * (2.0 * ui - 1.0)).collect();
            if self.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    /// Halton points of the ball, skipping the first `skip` accepted ones.
    pub fn halton_points(&self, count: usize, skip: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(count);
        let mut seen = 0usize;
        let mut k = 1u64;
        while out.len() < count {
            let u = halton(k, n);
            k += 1;
            let p: Vec<f64> = u.iter().zip(&self.center).map(|(ui, c)| c + self.radius * (2.0 * ui - 1.0)).collect();
            if self.contains(&p) {
                if seen >= skip {
                    out.push(p);
                }
                seen += 1;
            }
        }
        out
    }

    /// Regular grid of the bounding cube with `per_axis` points per axis,
    /// restricted to the ball.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = Vec::new();
        if per_axis == 0 || n == 0 {
            return out;
        }
        let step = if per_axis > 1 { 2.0 * self.radius / (per_axis - 1) as f64 } else { 0.0 };
        let mut idx = vec![0usize; n];
        loop {
            let p: Vec<f64> = (0..n)
                .map(|i| {
                    if per_axis > 1 {
                        self.center[i] - self.radius + step * idx[i] as f64
                    } else {
                        self.center[i]
                    }
                })
                .collect();
            if dist(&p, &self.center) <= self.radius * (1.0 + 1e-12) {
                out.push(p);
            }
            let mut d = 0;
            loop {
                if d == n {
                    return out;
                }
                idx[d] += 1;
                if idx[d] < per_axis {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

pub fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * f;
        k /= base;
        f *= inv;
    }
    out
}

/// The `k`-th Halton point of the unit cube in dimension `n <= 12`.
pub fn halton(k: u64, n: usize) -> Vec<f64> {
    (0..n).map(|i| radical_inverse(k, PRIMES[i])).collect()
}

/// All multi-indices of total order `k` in `n` variables, in lexicographic
/// order of their expanded direction lists.
pub fn multi_indices(n: usize, k: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; n];
    fn rec(i: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        let n = cur.len();
        if i + 1 == n {
            cur[i] = left as u8;
            out.push(cur.clone());
            return;
        }
        for a in (0..=left).rev() {
            cur[i] = a as u8;
            rec(i + 1, left - a, cur, out);
        }
        cur[i] = 0;
    }
    if n == 0 {
        if k == 0 {
            out.push(vec![]);
        }
        return out;
    }
    rec(0, k, &mut cur, &mut out);
    out
}

/// Expands a multi-index to its list of directions, e.g. (2,0,1) -> [0,0,2].
pub fn directions(alpha: &[u8]) -> Vec<usize> {
    let mut d = Vec::new();
    for (i, &a) in alpha.iter().enumerate() {
        for _ in 0..a {
            d.push(i);
        }
    }
    d
}

pub fn order(alpha: &[u8]) -> usize {
    alpha.iter().map(|&a| a as usize).sum()
}

/// Lexicographic comparison used for deterministic tie-breaking.
pub fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}
