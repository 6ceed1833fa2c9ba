use crate::calculus::FunctionHandle;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Root x = h(xi) of G(xi, x) = 0 with its first and second derivatives
/// from implicit differentiation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImplicitRoot {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

/// Newton iteration on x -> G(xi, x) from `guess`. The last variable of
/// `g` is the unknown.
pub fn newton_root(g: &FunctionHandle, xi: &[f64], guess: f64) -> Result<f64> {
    let m = xi.len();
    let mut p = xi.to_vec();
    p.push(guess);
    let mut alpha = vec![0u8; m + 1];
    alpha[m] = 1;
    for _ in 0..100 {
        let v = g.value(&p);
        let d = g.derivative(&alpha, &p)?;
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Invalid(format!("vanishing x-derivative at {p:?}")));
        }
        let step = v / d;
        p[m] -= step;
        if step.abs() <= 1e-15 * (1.0 + p[m].abs()) {
            return Ok(p[m]);
        }
    }
    Err(Error::Invalid(format!("Newton did not converge at xi = {xi:?}")))
}

/// h, Dh and D^2 h at xi:
/// h_i = -G_i / G_x,
/// h_ij = -(G_ij + G_ix h_j + G_jx h_i + G_xx h_i h_j) / G_x.
pub fn implicit_root(g: &FunctionHandle, xi: &[f64], guess: f64) -> Result<ImplicitRoot> {
    let m = xi.len();
    if g.arity() != m + 1 {
        return Err(Error::Invalid("implicit function needs one more variable than xi".into()));
    }
    let x = newton_root(g, xi, guess)?;
    let mut p = xi.to_vec();
    p.push(x);
    let grad = g.gradient(&p)?;
    let hess: DMatrix<f64> = g.hessian(&p)?;
    let gx = grad[m];
    let dh: Vec<f64> = (0..m).map(|i| -grad[i] / gx).collect();
    let d2h = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    -(hess[(i, j)] + hess[(i, m)] * dh[j] + hess[(j, m)] * dh[i] + hess[(m, m)] * dh[i] * dh[j]) / gx
                })
                .collect()
        })
        .collect();
    Ok(ImplicitRoot { value: x, gradient: dh, hessian: d2h })
}
