#![allow(dead_code)]

use std::sync::Arc;

use disc_ode::afn::AnalyticFunction;
use disc_ode::ode::{OdeProblem, SolutionField, SolverConfig};
use disc_ode::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn expr(text: &str) -> AnalyticFunction {
    AnalyticFunction::expr(text).unwrap()
}

pub fn solve(a: &str, f0: Complex64, f1: Complex64, r_max: f64) -> Arc<SolutionField> {
    let p = OdeProblem::from_expr(a, f0, f1).unwrap();
    Arc::new(SolutionField::new(p, SolverConfig { r_max, ..SolverConfig::default() }).unwrap())
}

/// sin(4z): A = 16.
pub fn sine(r_max: f64) -> Arc<SolutionField> {
    solve("16", c(0.0, 0.0), c(4.0, 0.0), r_max)
}

/// z e^{z²}: A = −(6 + 4z²).
pub fn gaussian(r_max: f64) -> Arc<SolutionField> {
    solve("-(6+4*z^2)", c(0.0, 0.0), c(1.0, 0.0), r_max)
}

/// (1 − z)^{1/2}: A = ¼(1 − z)^{−2}.
pub fn root(r_max: f64) -> Arc<SolutionField> {
    solve("1/(4*(1-z)^2)", c(1.0, 0.0), c(-0.5, 0.0), r_max)
}

/// Samples on |z| ≤ r: a sunflower plus a boundary ring.
pub fn disc_samples(n: usize, r: f64) -> Vec<Complex64> {
    let mut pts = disc_ode::disc::sunflower(n, r);
    pts.extend((0..64).map(|j| Complex64::from_polar(r, std::f64::consts::TAU * (j as f64 + 0.5) / 64.0)));
    pts
}
