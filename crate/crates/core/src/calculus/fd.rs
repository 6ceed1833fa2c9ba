//! Nested central differences with one Richardson step.

/// Base step before scaling: max(1e-3, cbrt(machine epsilon)).
pub fn base_step() -> f64 {
    1e-3f64.max(f64::EPSILON.cbrt())
}

/// Step used for a derivative of total order `p`.
pub fn step(p: usize, scale: f64) -> f64 {
    base_step() * scale * 2f64.powi(p.max(1) as i32 - 1)
}

fn binom(n: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Product stencil of central differences with step `h`: along axis i the
/// order-a_i difference sum_j (-1)^j C(a_i, j) f(x + (a_i/2 - j) h e_i).
pub fn central(f: &dyn Fn(&[f64]) -> f64, alpha: &[u8], x: &[f64], h: f64) -> f64 {
    let axes: Vec<(usize, usize)> =
        alpha.iter().enumerate().filter(|(_, &a)| a > 0).map(|(i, &a)| (i, a as usize)).collect();
    let p: usize = axes.iter().map(|a| a.1).sum();
    let mut idx = vec![0usize; axes.len()];
    let mut pt = x.to_vec();
    let mut acc = 0.0;
    loop {
        let mut coef = 1.0;
        for (k, &(i, a)) in axes.iter().enumerate() {
            let j = idx[k];
            pt[i] = x[i] + (a as f64 / 2.0 - j as f64) * h;
            coef *= binom(a, j) * if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        }
        acc += coef * f(&pt);
        let mut d = 0;
        loop {
            if d == axes.len() {
                return acc / h.powi(p as i32);
            }
            idx[d] += 1;
            if idx[d] <= axes[d].1 {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Derivative D^alpha f(x) from the step schedule [`step`] and one
/// Richardson extrapolation (h, h/2).
pub fn derivative(f: &dyn Fn(&[f64]) -> f64, alpha: &[u8], x: &[f64], scale: f64) -> f64 {
    let p: usize = alpha.iter().map(|&a| a as usize).sum();
    if p == 0 {
        return f(x);
    }
    let h = step(p, scale);
    let d1 = central(f, alpha, x, h);
    let d2 = central(f, alpha, x, h / 2.0);
    (4.0 * d2 - d1) / 3.0
}
