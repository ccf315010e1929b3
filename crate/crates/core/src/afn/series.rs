use num_complex::Complex64;
use serde::Serialize;

use super::function::{Analytic, AnalyticFunction};
use crate::error::{Error, Result};
use crate::quad::cauchy_coefficients;

pub const DEFAULT_SAFETY_FACTOR: f64 = 0.75;

/// Truncated Taylor series Σ c_k (z − center)^k.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesFunction {
    pub center: Complex64,
    pub coefficients: Vec<Complex64>,
    pub radius_hint: f64,
    pub safety_factor: f64,
}

impl SeriesFunction {
    pub fn new(center: Complex64, coefficients: Vec<Complex64>, radius_hint: f64) -> Self {
        SeriesFunction {
            center,
            coefficients,
            radius_hint,
            safety_factor: DEFAULT_SAFETY_FACTOR,
        }
    }

    /// Radius around `center` inside which evaluation is supported.
    pub fn safe_radius(&self) -> f64 {
        self.safety_factor * self.radius_hint
    }

    /// Horner evaluation of the derivative of the given order.
    pub fn eval_unchecked(&self, z: Complex64, order: usize) -> Complex64 {
        let u = z - self.center;
        let n = self.coefficients.len();
        if order >= n {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for j in (order..n).rev() {
            let falling: f64 = (0..order).map(|i| (j - i) as f64).product();
            acc = acc * u + self.coefficients[j] * falling;
        }
        acc
    }

    /// Evaluates inside the safe radius, rejecting points beyond it.
    pub fn eval_checked(&self, z: Complex64, order: usize) -> Result<Complex64> {
        if (z - self.center).norm() > self.safe_radius() {
            return Err(Error::InvalidArgument(format!(
                "series evaluation at {z} beyond safe radius {}",
                self.safe_radius()
            )));
        }
        Ok(self.eval_unchecked(z, order))
    }

    /// Tail estimate |Σ_{k≥N} c_k u^k| from a geometric fit to the last
    /// coefficients, assuming the coefficient growth rate 1/radius_hint.
    pub fn tail_bound(&self, z: Complex64) -> f64 {
        let u = (z - self.center).norm();
        let n = self.coefficients.len();
        if n == 0 {
            return 0.0;
        }
        let q = u / self.radius_hint;
        if q >= 1.0 {
            return f64::INFINITY;
        }
        let last = self.coefficients[n.saturating_sub(4)..]
            .iter()
            .enumerate()
            .map(|(i, c)| c.norm() * self.radius_hint.powi((n.saturating_sub(4) + i) as i32))
            .fold(0.0, f64::max);
        last * q.powi(n as i32) / (1.0 - q)
    }
}

impl Analytic for SeriesFunction {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        self.eval_unchecked(z, order)
    }

    fn describe(&self) -> String {
        format!(
            "series about {} with {} terms",
            self.center,
            self.coefficients.len()
        )
    }
}

/// Maclaurin coefficients of `f` from the trapezoid-discretized Cauchy
/// integral on |z| = probe_radius, certified against direct evaluation at
/// half the probe radius.
pub fn maclaurin_of(
    f: &AnalyticFunction,
    n_terms: usize,
    probe_radius: f64,
) -> Result<SeriesFunction> {
    if n_terms == 0 || !(probe_radius > 0.0 && probe_radius < 1.0) {
        return Err(Error::InvalidArgument(
            "maclaurin_of needs n_terms > 0 and probe radius in (0, 1)".into(),
        ));
    }
    let nodes = (4 * n_terms).max(128).next_power_of_two();
    let origin = Complex64::new(0.0, 0.0);
    let all = cauchy_coefficients(|z| f.value(z), origin, probe_radius, nodes);
    if all.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonAnalytic("non-finite samples on the probe circle".into()));
    }

    // Normalized magnitudes |c_k| ρ^k; analytic functions decay in k, while
    // singularities inside the circle alias into the top indices.
    let scaled: Vec<f64> = all
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm() * probe_radius.powi(k as i32))
        .collect();
    let head = scaled[..nodes / 4].iter().cloned().fold(0.0, f64::max);
    let top = scaled[3 * nodes / 4..].iter().cloned().fold(0.0, f64::max);
    if head > 0.0 && top > 1e-6 * head {
        return Err(Error::NonAnalytic(format!(
            "coefficients fail to decay within radius {probe_radius} (tail/head = {:e})",
            top / head
        )));
    }

    let full = SeriesFunction::new(origin, all[..nodes / 2].to_vec(), 1.0);
    for j in 0..8 {
        let z = Complex64::from_polar(0.5 * probe_radius, 0.3 + j as f64 * 0.785);
        let direct = f.value(z);
        let series = full.eval_unchecked(z, 0);
        if (direct - series).norm() > 1e-7 * (1.0 + direct.norm()) {
            return Err(Error::NonAnalytic(format!(
                "series disagrees with direct evaluation at {z}: {series} vs {direct}"
            )));
        }
    }

    let mut coefficients = all;
    coefficients.truncate(n_terms);
    Ok(SeriesFunction::new(origin, coefficients, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn exponential_coefficients() {
        let f = AnalyticFunction::expr("exp(z)").unwrap();
        let s = maclaurin_of(&f, 5, 0.9).unwrap();
        let expected = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (got, want) in s.coefficients.iter().zip(expected) {
            assert!((got - want).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_and_geometric() {
        let s = maclaurin_of(&AnalyticFunction::expr("3").unwrap(), 6, 0.9).unwrap();
        assert!((s.coefficients[0] - 3.0).norm() < 1e-14);
        assert!(s.coefficients[1..].iter().all(|v| v.norm() < 1e-14));
        let g = maclaurin_of(&AnalyticFunction::expr("1/(1-z)").unwrap(), 4, 0.5).unwrap();
        for v in &g.coefficients {
            assert!((v - 1.0).norm() < 1e-8);
        }
    }

    #[test]
    fn detects_interior_pole() {
        let f = AnalyticFunction::expr("1/(z-0.3)").unwrap();
        assert!(matches!(maclaurin_of(&f, 8, 0.6), Err(Error::NonAnalytic(_))));
    }

    #[test]
    fn series_matches_expression_inside_safe_radius() {
        let f = AnalyticFunction::expr("1/(1-z)^2 + sin(3*z)").unwrap();
        let s = maclaurin_of(&f, 200, 0.95).unwrap();
        for k in 0..50 {
            let z = Complex64::from_polar(0.5, k as f64 * 0.37);
            let v = s.eval_checked(z, 0).unwrap();
            assert!((v - f.value(z)).norm() < 1e-8, "{z}");
            let d = s.eval_unchecked(z, 1);
            assert!((d - f.derivative(z, 1)).norm() < 1e-7 * (1.0 + d.norm()));
        }
        assert!(s.eval_checked(c(0.8), 0).is_err());
        assert!(s.tail_bound(c(0.5)) < 1e-10);
    }
}
