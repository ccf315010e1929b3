//! Analytic functions in the disc: expressions with symbolic derivatives,
//! Maclaurin series, and composites.

pub mod expr;
pub mod function;
pub mod series;

use num_complex::Complex64;

use crate::disc::DiscPoint;
use crate::error::Result;
use crate::quad::adaptive_gk;

pub use expr::{differentiate, parse_expression, Expression, Func};
pub use function::{Analytic, AnalyticFunction, Derivs, ExprFunction, MAX_ORDER};
pub use series::{maclaurin_of, SeriesFunction};

const MAX_SUBDIVISIONS: usize = 4000;

/// ∫ f over the straight segment [from, to], adaptive Gauss-Kronrod panels.
pub fn path_integral(
    f: &AnalyticFunction,
    from: DiscPoint,
    to: DiscPoint,
    tol: f64,
) -> Result<Complex64> {
    path_integral_c(f, from.z(), to.z(), tol)
}

pub(crate) fn path_integral_c(
    f: &AnalyticFunction,
    from: Complex64,
    to: Complex64,
    tol: f64,
) -> Result<Complex64> {
    path_integral_with(|z| f.value(z), from, to, tol)
}

/// Segment integral of a plain closure.
pub fn path_integral_with<F: Fn(Complex64) -> Complex64>(
    f: F,
    from: Complex64,
    to: Complex64,
    tol: f64,
) -> Result<Complex64> {
    let d = to - from;
    if d.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (v, _) = adaptive_gk(|t| f(from + d * t) * d, 0.0, 1.0, tol, tol, MAX_SUBDIVISIONS)?;
    Ok(v)
}
