#![allow(dead_code)]

//! Oracles shared by the integration tests. Nothing here calls into the
//! library's own differentiation or root finding.

/// Ridders' polynomial extrapolation of the central difference
/// (g(x+h) - g(x-h)) / 2h. Returns the estimate and its error estimate.
pub fn ridders(g: &dyn Fn(f64) -> f64, x: f64, h0: f64) -> (f64, f64) {
    const N: usize = 10;
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    let mut a = [[0.0f64; N]; N];
    let mut h = h0;
    a[0][0] = (g(x + h) - g(x - h)) / (2.0 * h);
    let mut best = a[0][0];
    let mut err = f64::INFINITY;
    for i in 1..N {
        h /= CON;
        a[0][i] = (g(x + h) - g(x - h)) / (2.0 * h);
        let mut fac = CON2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    (best, err)
}

/// Mixed partial D^alpha f at x by nesting Ridders one direction at a time.
pub fn nested_partial(f: &dyn Fn(&[f64]) -> f64, alpha: &[u8], x: &[f64], h0: f64) -> f64 {
    let Some(i) = alpha.iter().position(|&a| a > 0) else {
        return f(x);
    };
    let mut rest = alpha.to_vec();
    rest[i] -= 1;
    let g = |t: f64| {
        let mut y = x.to_vec();
        y[i] = t;
        nested_partial(f, &rest, &y, h0)
    };
    ridders(&g, x[i], h0).0
}

/// |a - b| <= tol max(1, |a|, |b|).
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Root of a sign-changing g on [lo, hi] by plain bisection.
pub fn bisect(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let glo = g(lo);
    assert!(glo * g(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Exact rational p/q with q > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac(pub i128, pub i128);

impl Frac {
    pub fn new(p: i128, q: i128) -> Frac {
        let g = gcd(p, q).max(1);
        let s = if q < 0 { -1 } else { 1 };
        Frac(s * p / g, s * q / g)
    }
    pub fn add(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }
    pub fn sub(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1 - o.0 * self.1, self.1 * o.1)
    }
    pub fn mul(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.0, self.1 * o.1)
    }
    pub fn div(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1, self.1 * o.0)
    }
    pub fn le(self, o: Frac) -> bool {
        self.0 * o.1 <= o.0 * self.1
    }
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

/// delta_{k+1} = 2u / (1 - u), u = eta delta_k / (1 + delta_k), in exact
/// arithmetic.
pub fn exact_delta_sequence(delta: Frac, eta: Frac, n: usize) -> Vec<Frac> {
    let one = Frac(1, 1);
    let mut out = vec![delta];
    for _ in 1..n {
        let d = *out.last().unwrap();
        let u = eta.mul(d).div(one.add(d));
        out.push(Frac(2, 1).mul(u).div(one.sub(u)));
    }
    out
}
