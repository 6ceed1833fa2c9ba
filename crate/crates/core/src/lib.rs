//! Sum-of-squares decomposition of nonnegative smooth functions, together
//! with numerical checks of the inequalities behind it: control distances,
//! Whitney-type covers, implicit-function reductions, Hölder seminorm
//! estimates, monotonicity functionals and a counterexample family.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod calculus;
pub mod counterex;
pub mod cover;
pub mod error;
pub mod exprlang;
pub mod geometry;
pub mod monotone;
pub mod par;
pub mod roots;
pub mod sos;

pub use calculus::{FunctionHandle, Modulus, ScalarField};
pub use error::{Error, Result};
pub use geometry::Ball;
