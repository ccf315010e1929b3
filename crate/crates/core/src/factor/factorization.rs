//! Forward factorization f = B e^g of a solution and the converse
//! construction of the coefficient from (B, g).

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::afn::function::{quotient_derivs, Analytic, Derivs};
use crate::afn::{path_integral_with, AnalyticFunction};
use crate::blaschke::BlaschkeProduct;
use crate::disc::{rho_c, DiscPoint, PolarGrid, ProbeGrid};
use crate::error::{Error, Result};
use crate::ode::field::{solve_recurrence, SolutionField};
use crate::ode::zeros::circle_count;
use crate::quad::cauchy_coefficients;
use crate::spaces::{bloch_seminorm, bmoa_carleson_norm, NormEstimate};

const NAN: Complex64 = Complex64::new(f64::NAN, f64::NAN);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Points closer than this pseudo-hyperbolic distance to a zero are
/// evaluated through local series with the zero divided out.
pub const DEFLATION_RHO: f64 = 0.05;

const LOCAL_TERMS: usize = 48;
const LOCAL_NODES: usize = 128;

fn local_radius(center: Complex64) -> f64 {
    0.5 * (1.0 - center.norm())
}

/// Horner evaluation of Σ c_k (z − center)^k returning p, p′, p″/2, p‴/6.
fn series_derivs(coeffs: &[Complex64], center: Complex64, z: Complex64) -> Derivs {
    let w = z - center;
    let mut out = [ZERO; 4];
    for c in coeffs.iter().rev() {
        out[3] = out[3] * w + out[2];
        out[2] = out[2] * w + out[1];
        out[1] = out[1] * w + out[0];
        out[0] = out[0] * w + c;
    }
    out
}

/// Derivatives (orders 0..=2) of d′/d.
fn log_derivative(d: &Derivs) -> Derivs {
    quotient_derivs(&[d[1], d[2], d[3], NAN], d, 2)
}

/// g′ = f′/f − B′/B with the zeros divided out near each zero.
pub struct LogQuotientDerivative {
    field: Arc<SolutionField>,
    b: BlaschkeProduct,
    /// Taylor coefficients of f(z)/(z − z_n) about each zero z_n.
    local: Vec<Vec<Complex64>>,
}

impl LogQuotientDerivative {
    fn new(field: Arc<SolutionField>, b: BlaschkeProduct) -> Result<Self> {
        let a = field.coefficient().clone();
        let mut local = Vec::with_capacity(b.zeros().len());
        for &zn in b.zeros() {
            let [f, fp] = field.state(zn)?;
            if f.norm() > 1e-6 * (1.0 + fp.norm()) {
                return Err(Error::InvalidArgument(format!("{zn} is not a zero of the solution (|f| = {:e})", f.norm())));
            }
            let ak = cauchy_coefficients(|w| a.value(w), zn, local_radius(zn), LOCAL_NODES);
            let c = solve_recurrence(&ak[..LOCAL_TERMS], ZERO, fp, LOCAL_TERMS + 1);
            local.push(c[1..].to_vec());
        }
        Ok(LogQuotientDerivative { field, b, local })
    }

    /// Numerator and denominator stacks of f/B at z, zero divided out of both
    /// when z is close to one.
    fn quotient_parts(&self, z: Complex64, state: Option<[Complex64; 2]>) -> Result<(Derivs, Derivs)> {
        if let Some((idx, rho)) = self.b.nearest_zero(z) {
            if rho < DEFLATION_RHO {
                let center = self.b.zeros()[idx];
                return Ok((taylor_stack(&self.local[idx], center, z), self.b.deflated_derivs(idx, z, 3)));
            }
        }
        let [f, fp] = match state {
            Some(y) => y,
            None => self.field.state(z)?,
        };
        let a = self.field.coefficient().derivs(z, 1);
        Ok(([f, fp, -a[0] * f, -a[1] * f - a[0] * fp], self.b.derivs(z, 3)))
    }

    fn derivs_with(&self, z: Complex64, state: Option<[Complex64; 2]>) -> Result<Derivs> {
        let (num, den) = self.quotient_parts(z, state)?;
        let (p, q) = (log_derivative(&num), log_derivative(&den));
        Ok([p[0] - q[0], p[1] - q[1], p[2] - q[2], NAN])
    }

    /// f/B at z (a limit at the zeros).
    fn quotient_value(&self, z: Complex64) -> Result<Complex64> {
        let (num, den) = self.quotient_parts(z, None)?;
        Ok(num[0] / den[0])
    }
}

/// Value and first three derivatives of a local Taylor series.
fn taylor_stack(coeffs: &[Complex64], center: Complex64, z: Complex64) -> Derivs {
    let d = series_derivs(coeffs, center, z);
    [d[0], d[1], 2.0 * d[2], 6.0 * d[3]]
}

impl Analytic for LogQuotientDerivative {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        match self.derivs_with(z, None) {
            Ok(d) if order <= 2 => d[order],
            _ => NAN,
        }
    }

    fn derivs(&self, z: Complex64, _n: usize) -> Derivs {
        self.derivs_with(z, None).unwrap_or([NAN; 4])
    }

    fn sample_circle_order(&self, r: f64, n: usize, order: usize) -> Vec<Complex64> {
        if order > 2 {
            return vec![NAN; n];
        }
        let states = match self.field.circle_states(r, n) {
            Ok(s) => s,
            Err(_) => return vec![NAN; n],
        };
        let idx: Vec<usize> = (0..n).collect();
        crate::par_map(&idx, |&k| {
            let z = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
            self.derivs_with(z, Some(states[k])).map_or(NAN, |d| d[order])
        })
    }

    fn describe(&self) -> String {
        format!("f'/f - B'/B for {}", self.field.describe())
    }
}

/// g = g(0) + ∫₀^z g′ along the segment; derivatives delegate to g′.
struct Primitive {
    derivative: AnalyticFunction,
    base: Complex64,
    tol: f64,
}

impl Analytic for Primitive {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        if order == 0 {
            let d = &self.derivative;
            path_integral_with(|w| d.value(w), ZERO, z, self.tol).map_or(NAN, |v| self.base + v)
        } else {
            self.derivative.derivative(z, order - 1)
        }
    }

    fn sample_circle_order(&self, r: f64, n: usize, order: usize) -> Vec<Complex64> {
        if order == 0 {
            let pts: Vec<Complex64> = (0..n)
                .map(|k| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
                .collect();
            crate::par_map(&pts, |z| self.eval(*z, 0))
        } else {
            self.derivative.inner().sample_circle_order(r, n, order - 1)
        }
    }

    fn describe(&self) -> String {
        format!("primitive of {}", self.derivative.describe())
    }
}

/// Bloch and BMOA estimates for g.
#[derive(Debug, Clone, Serialize)]
pub struct SpaceReport {
    pub bloch: NormEstimate,
    pub bmoa: NormEstimate,
}

/// f = B e^g for a solution f with zero set Λ.
#[derive(Clone)]
pub struct Factorization {
    pub b: BlaschkeProduct,
    pub g_prime: AnalyticFunction,
    /// g itself (values by path integration of g′ from 0).
    pub g: AnalyticFunction,
    pub g0: Complex64,
    pub interpolation_residuals: Vec<Complex64>,
    pub space_report: Option<SpaceReport>,
    field: Arc<SolutionField>,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization")
            .field("zeros", &self.b.zeros())
            .field("g0", &self.g0)
            .field("interpolation_residuals", &self.interpolation_residuals)
            .finish()
    }
}

impl Factorization {
    pub fn field(&self) -> &Arc<SolutionField> {
        &self.field
    }

    pub fn max_residual(&self) -> f64 {
        self.interpolation_residuals.iter().map(|r| r.norm()).fold(0.0, f64::max)
    }

    /// max |B(z) e^{g(z)} − f(z)| / (1 + |f(z)|) over the points.
    pub fn reconstruction_error(&self, points: &[Complex64]) -> Result<f64> {
        let errs = crate::par_map(points, |&z| -> Result<f64> {
            let f = self.field.state(z)?[0];
            let rebuilt = self.b.derivs(z, 0)[0] * self.g.value(z).exp();
            let e = (rebuilt - f).norm() / (1.0 + f.norm());
            if e.is_finite() {
                Ok(e)
            } else {
                Err(Error::NonFinite { z })
            }
        });
        errs.into_iter().try_fold(0.0f64, |m, e| Ok(m.max(e?)))
    }

    /// Fills `space_report` with the Bloch seminorm and BMOA Carleson
    /// quantity of g.
    pub fn estimate_spaces(&mut self, bloch_grid: &PolarGrid, probes: &ProbeGrid, area_grid: &PolarGrid) -> Result<&SpaceReport> {
        let report = SpaceReport {
            bloch: bloch_seminorm(&self.g, bloch_grid)?,
            bmoa: bmoa_carleson_norm(&self.g, probes, area_grid)?,
        };
        Ok(self.space_report.insert(report))
    }

    pub fn summary(&self) -> FactorizationSummary {
        FactorizationSummary {
            zeros: self.b.zeros().to_vec(),
            g0: self.g0,
            interpolation_residuals: self.interpolation_residuals.clone(),
            max_residual: self.max_residual(),
            space_report: self.space_report.clone(),
        }
    }
}

/// Serializable view of a factorization.
#[derive(Debug, Clone, Serialize)]
pub struct FactorizationSummary {
    pub zeros: Vec<Complex64>,
    pub g0: Complex64,
    pub interpolation_residuals: Vec<Complex64>,
    pub max_residual: f64,
    pub space_report: Option<SpaceReport>,
}

/// Factorizes the solution over the given zeros: B from the zeros, g′ from
/// f′/f − B′/B with the singularities cancelled, g(0) the principal log of
/// lim f/B at 0.
pub fn extract_factorization(s: &Arc<SolutionField>, zeros: &[DiscPoint], tol: f64) -> Result<Factorization> {
    let zc: Vec<Complex64> = zeros.iter().map(|p| p.z()).collect();
    for (i, a) in zc.iter().enumerate() {
        if zc[..i].iter().any(|b| rho_c(*a, *b) < 1e-8) {
            return Err(Error::MultipleZero { z: *a, multiplicity: 2 });
        }
    }
    let r = s.config().r_max;
    let inside = zc.iter().filter(|z| z.norm() < r).count();
    let winding = (0..6)
        .map(|k| r - k as f64 * 0.01 * (1.0 - r))
        .find_map(|rr| match circle_count(s, rr) {
            Ok(Some((n, _))) => Some(Ok((rr, n))),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        })
        .ok_or(Error::ContourThroughZero { attempts: 6 })??;
    let inside_contour = zc.iter().filter(|z| z.norm() < winding.0).count();
    if winding.1 != inside_contour {
        return Err(Error::CountMismatch { winding: winding.1, located: inside.min(inside_contour) });
    }
    let b = BlaschkeProduct::from_complex(&zc)?;
    let lqd = LogQuotientDerivative::new(Arc::clone(s), b.clone())?;
    let q0 = lqd.quotient_value(ZERO)?;
    if !(q0.norm() > 0.0) || !q0.re.is_finite() {
        return Err(Error::MissedZero { z: ZERO });
    }
    let g0 = q0.ln();
    let g_prime = AnalyticFunction::new(lqd);
    let g = AnalyticFunction::new(Primitive { derivative: g_prime.clone(), base: g0, tol: tol.max(1e-14) });
    let interpolation_residuals = verify_interpolation(&b, &g_prime, &zc)?;
    Ok(Factorization {
        b,
        g_prime,
        g,
        g0,
        interpolation_residuals,
        space_report: None,
        field: Arc::clone(s),
    })
}

/// rₙ = g′(zₙ) + ½ B″(zₙ)/B′(zₙ) at each zero.
pub fn verify_interpolation(b: &BlaschkeProduct, g_prime: &AnalyticFunction, zeros: &[Complex64]) -> Result<Vec<Complex64>> {
    zeros
        .iter()
        .map(|&z| {
            let d = b.derivs(z, 2);
            if d[1].norm() < 1e-14 {
                return Err(Error::MultipleZero { z, multiplicity: 2 });
            }
            Ok(g_prime.value(z) + 0.5 * d[2] / d[1])
        })
        .collect()
}

/// The coefficient −[(B″ + 2B′g′)/B + (g′)² + g″] of the equation solved by
/// B e^g. Near each zero the quotient is evaluated from the Taylor series of
/// the numerator with the zero divided out.
pub struct ConstructedCoefficient {
    b: BlaschkeProduct,
    g: AnalyticFunction,
    local: Vec<Vec<Complex64>>,
}

impl ConstructedCoefficient {
    fn g_stack(&self, z: Complex64) -> [Complex64; 3] {
        [self.g.derivative(z, 1), self.g.derivative(z, 2), self.g.derivative(z, 3)]
    }

    fn numerator(b: &Derivs, g: &[Complex64; 3]) -> Derivs {
        [b[2] + 2.0 * b[1] * g[0], b[3] + 2.0 * b[2] * g[0] + 2.0 * b[1] * g[1], NAN, NAN]
    }

    fn derivs_at(&self, z: Complex64) -> Derivs {
        let g = self.g_stack(z);
        let quotient = match self.b.nearest_zero(z) {
            Some((idx, rho)) if rho < DEFLATION_RHO => {
                let num = taylor_stack(&self.local[idx], self.b.zeros()[idx], z);
                quotient_derivs(&num, &self.b.deflated_derivs(idx, z, 1), 1)
            }
            Some(_) => {
                let bd = self.b.derivs(z, 3);
                quotient_derivs(&Self::numerator(&bd, &g), &bd, 1)
            }
            None => [ZERO; 4],
        };
        [
            -(quotient[0] + g[0] * g[0] + g[1]),
            -(quotient[1] + 2.0 * g[0] * g[1] + g[2]),
            NAN,
            NAN,
        ]
    }
}

impl Analytic for ConstructedCoefficient {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        if order <= 1 {
            self.derivs_at(z)[order]
        } else {
            NAN
        }
    }

    fn derivs(&self, z: Complex64, _n: usize) -> Derivs {
        self.derivs_at(z)
    }

    fn describe(&self) -> String {
        format!("coefficient built from {} and g = {}", self.b.describe(), self.g.describe())
    }
}

/// Builds the coefficient from (B, g); refuses when g misses the
/// interpolation condition at a zero by more than `tol`.
pub fn construct_coefficient(b: &BlaschkeProduct, g: &AnalyticFunction, tol: f64) -> Result<AnalyticFunction> {
    let g_prime = g.derived();
    let residuals = verify_interpolation(b, &g_prime, b.zeros())?;
    for (z, r) in b.zeros().iter().zip(&residuals) {
        if !(r.norm() <= tol) {
            return Err(Error::GenuinePole { z: *z, residual: r.norm(), tol });
        }
    }
    let mut local = Vec::with_capacity(b.zeros().len());
    for &zn in b.zeros() {
        let numerator = |w: Complex64| {
            let bd = b.derivs(w, 2);
            bd[2] + 2.0 * bd[1] * g.derivative(w, 1)
        };
        let c = cauchy_coefficients(numerator, zn, local_radius(zn), LOCAL_NODES);
        local.push(c[1..=LOCAL_TERMS].to_vec());
    }
    Ok(AnalyticFunction::new(ConstructedCoefficient { b: b.clone(), g: g.clone(), local }))
}

/// max over the points of |A_built − A| / (1 + |A|).
pub fn roundtrip_check(a_original: &AnalyticFunction, b: &BlaschkeProduct, g: &AnalyticFunction, points: &[Complex64], tol: f64) -> Result<f64> {
    let built = construct_coefficient(b, g, tol)?;
    let errs = crate::par_map(points, |&z| {
        let a = a_original.value(z);
        (built.value(z) - a).norm() / (1.0 + a.norm())
    });
    let mut worst = 0.0f64;
    for (z, e) in points.iter().zip(errs) {
        if !e.is_finite() {
            return Err(Error::NonFinite { z: *z });
        }
        worst = worst.max(e);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::sunflower;
    use crate::ode::field::{OdeProblem, SolverConfig};
    use crate::ode::zeros::find_zeros;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn field(a: &str, f0: f64, f1: f64) -> Arc<SolutionField> {
        let p = OdeProblem::from_expr(a, c(f0, 0.0), c(f1, 0.0)).unwrap();
        Arc::new(SolutionField::new(p, SolverConfig::default()).unwrap())
    }

    fn factorize(s: &Arc<SolutionField>) -> Factorization {
        let zeros = find_zeros(s, 0.95, 1e-10).unwrap();
        extract_factorization(s, &zeros, 1e-12).unwrap()
    }

    #[test]
    fn taylor_stack_matches_polynomial() {
        // 1 + 2w + 3w² + 4w³ at w = 0.1
        let d = taylor_stack(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)], ZERO, c(0.1, 0.0));
        assert!((d[0] - 1.234).norm() < 1e-14);
        assert!((d[1] - (2.0 + 0.6 + 0.12)).norm() < 1e-14);
        assert!((d[2] - (6.0 + 2.4)).norm() < 1e-14);
        assert!((d[3] - 24.0).norm() < 1e-14);
    }

    #[test]
    fn identity_solution() {
        let s = field("0", 0.0, 1.0);
        let f = factorize(&s);
        assert_eq!(f.b.zeros().len(), 1);
        assert!(f.g0.norm() < 1e-12);
        assert!(f.max_residual() < 1e-12);
        for z in [c(0.3, 0.2), c(-0.7, 0.1), c(0.001, 0.0)] {
            assert!(f.g_prime.value(z).norm() < 1e-10);
        }
    }

    #[test]
    fn sine_two_factorization() {
        let s = field("4", 0.0, 2.0);
        let f = factorize(&s);
        assert!((f.g0 - 2f64.ln()).norm() < 1e-10);
        assert!(f.g_prime.value(ZERO).norm() < 1e-10);
        // e^g = sin(2z)/z
        for z in [c(0.3, 0.2), c(-0.5, 0.5), c(0.02, -0.01)] {
            let want = (2.0 * z).sin() / z;
            assert!((f.g.value(z).exp() - want).norm() < 1e-9, "{z}");
        }
    }

    #[test]
    fn sine_four_factorization() {
        let s = field("16", 0.0, 4.0);
        let f = factorize(&s);
        assert_eq!(f.b.zeros().len(), 3);
        assert!(f.max_residual() < 1e-8, "{:?}", f.interpolation_residuals);
        let pts = sunflower(200, 0.9);
        assert!(f.reconstruction_error(&pts).unwrap() < 1e-7);
        let err = roundtrip_check(s.coefficient(), &f.b, &f.g, &sunflower(300, 0.9), 1e-6).unwrap();
        assert!(err < 1e-7, "{err}");
        // points right next to the zeros
        let near: Vec<Complex64> = f.b.zeros().iter().map(|z| z + c(1e-4, 2e-4)).collect();
        assert!(roundtrip_check(s.coefficient(), &f.b, &f.g, &near, 1e-6).unwrap() < 1e-7);
    }

    #[test]
    fn zero_free_factorization() {
        let s = field("0.25/(1-z)^2", 1.0, -0.5);
        let zeros = find_zeros(&s, 0.95, 1e-10).unwrap();
        assert!(zeros.is_empty());
        let f = extract_factorization(&s, &zeros, 1e-12).unwrap();
        for z in [c(0.5, 0.1), c(-0.8, 0.3)] {
            assert!((f.g.value(z) - 0.5 * (1.0 - z).ln()).norm() < 1e-9);
        }
    }

    #[test]
    fn interpolation_examples() {
        let g = AnalyticFunction::expr("z^2").unwrap();
        let b = BlaschkeProduct::from_complex(&[ZERO]).unwrap();
        assert!(verify_interpolation(&b, &g.derived(), b.zeros()).unwrap()[0].norm() < 1e-15);
        let b = BlaschkeProduct::from_complex(&[ZERO, c(0.5, 0.0)]).unwrap();
        let g = AnalyticFunction::expr("1.5*z").unwrap();
        assert!(verify_interpolation(&b, &g.derived(), &[ZERO]).unwrap()[0].norm() < 1e-14);
    }

    #[test]
    fn converse_examples() {
        let z = BlaschkeProduct::from_complex(&[ZERO]).unwrap();
        let a = construct_coefficient(&z, &AnalyticFunction::expr("0").unwrap(), 1e-10).unwrap();
        let zsq = construct_coefficient(&z, &AnalyticFunction::expr("z^2").unwrap(), 1e-10).unwrap();
        let root = construct_coefficient(
            &BlaschkeProduct::empty(),
            &AnalyticFunction::expr("0.5*log(1-z)").unwrap(),
            1e-10,
        )
        .unwrap();
        for w in sunflower(100, 0.9).into_iter().chain([c(1e-9, 0.0), c(0.01, 0.02)]) {
            assert!(a.value(w).norm() < 1e-10);
            assert!((zsq.value(w) + 6.0 + 4.0 * w * w).norm() < 1e-10, "{w}");
            assert!((root.value(w) - 0.25 / ((1.0 - w) * (1.0 - w))).norm() < 1e-10);
        }
        let bad = construct_coefficient(&z, &AnalyticFunction::expr("z").unwrap(), 1e-8);
        assert!(matches!(bad, Err(Error::GenuinePole { .. })));
    }
}
