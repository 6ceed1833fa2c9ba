//! Numerical calculus on function handles: finite differences, moduli of
//! continuity, Hölder seminorms and pointwise inequality checks.

mod checks;
pub mod fd;
mod handle;
mod holder;
mod modulus;

pub use checks::{
    directional_hessian_plus, dyadic_grid, is_flat, sup_fourth, to_csv, top_eigen, verify_interpolation_bound,
    verify_odd_even_control, InequalityStat, Report,
};
pub use handle::{FunctionHandle, ScalarField};
pub use holder::{default_separation, holder_on_points, holder_seminorm, pair_sweep, HolderEstimate};
pub use modulus::Modulus;

/// Evaluates a modulus at t.
pub fn modulus_eval(m: &Modulus, t: f64) -> crate::Result<f64> {
    m.eval(t)
}
