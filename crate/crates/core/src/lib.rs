//! Solving, factorizing and verifying solutions of the linear differential
//! equation f″ + A f = 0 in the unit disc.
//!
//! The building blocks are organised bottom-up:
//!
//! - [`disc`]: Möbius maps, the pseudo-hyperbolic metric, polar grids.
//! - [`afn`]: analytic functions (expressions, series, composites).
//! - [`blaschke`]: finite Blaschke products and separation diagnostics.
//! - [`spaces`]: growth, Bloch, BMOA, Hardy and Carleson estimators.
//! - [`ode`]: the linear equation and the Riccati equation as initial value problems.
//! - [`factor`]: the factorization f = B·e^g and everything built on it.
//! - [`cli`]: configuration and report handling for the command-line tool.

pub mod afn;
pub mod blaschke;
pub mod cli;
pub mod disc;
pub mod error;
pub mod factor;
pub mod ode;
pub mod quad;
pub mod spaces;

pub use error::{Error, Result};
pub use num_complex::Complex64;

use rayon::prelude::*;

/// Order-preserving parallel map.
pub(crate) fn par_map<T: Sync, U: Send, F: Fn(&T) -> U + Sync>(items: &[T], f: F) -> Vec<U> {
    items.par_iter().map(|x| f(x)).collect()
}
