//! The Riccati equation g″ = A + B g′ + C (g′)².
//!
//! With Q = B + C′/C the product v = C g′ satisfies v′ = AC + Q v + v², whose
//! coefficients stay analytic even where A and B alone do not. Alongside v we
//! carry L with L′ = −v − Q/2, so that f = e^L solves f″ + a f = 0 with
//! a = AC + Q′/2 − Q²/4.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::field::RayContinuation;
use super::rk::{integrate_segment, State};
use crate::afn::function::{Analytic, Derivs};
use crate::afn::AnalyticFunction;
use crate::error::{Error, Result};
use crate::quad::five_point;

/// Blow-up threshold on |g′| (on |C g′| and |g| in the transformed form).
pub const BLOW_UP_GUARD: f64 = 1e12;

const NAN: Complex64 = Complex64::new(f64::NAN, f64::NAN);
const PATH_SAMPLES: usize = 257;

/// AC and B + C′/C, supplied analytic.
#[derive(Debug, Clone)]
pub struct TransformedCoefficients {
    pub ac: AnalyticFunction,
    pub b_plus_cpc: AnalyticFunction,
}

/// A and B, when both are analytic.
#[derive(Debug, Clone)]
pub struct DirectCoefficients {
    pub a: AnalyticFunction,
    pub b: AnalyticFunction,
}

#[derive(Debug, Clone)]
pub struct RiccatiProblem {
    pub c: AnalyticFunction,
    pub transformed: Option<TransformedCoefficients>,
    pub direct: Option<DirectCoefficients>,
    pub g0: Complex64,
    pub g1: Complex64,
}

impl RiccatiProblem {
    pub fn transformed(
        ac: AnalyticFunction,
        b_plus_cpc: AnalyticFunction,
        c: AnalyticFunction,
        g0: Complex64,
        g1: Complex64,
    ) -> Self {
        RiccatiProblem {
            c,
            transformed: Some(TransformedCoefficients { ac, b_plus_cpc }),
            direct: None,
            g0,
            g1,
        }
    }

    pub fn direct(
        a: AnalyticFunction,
        b: AnalyticFunction,
        c: AnalyticFunction,
        g0: Complex64,
        g1: Complex64,
    ) -> Self {
        RiccatiProblem {
            c,
            transformed: None,
            direct: Some(DirectCoefficients { a, b }),
            g0,
            g1,
        }
    }

    pub fn with_direct(mut self, a: AnalyticFunction, b: AnalyticFunction) -> Self {
        self.direct = Some(DirectCoefficients { a, b });
        self
    }

    /// Samples the supplied coefficients on a few circles and rejects
    /// non-finite values.
    pub fn check_coefficients(&self, r_max: f64) -> Result<()> {
        let mut fns = vec![("C", &self.c)];
        if let Some(t) = &self.transformed {
            fns.push(("AC", &t.ac));
            fns.push(("B + C'/C", &t.b_plus_cpc));
        }
        if let Some(d) = &self.direct {
            fns.push(("A", &d.a));
            fns.push(("B", &d.b));
        }
        for (name, f) in fns {
            for r in [0.0, 0.5 * r_max, r_max] {
                for v in f.sample_circle(r, 64) {
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(Error::NonAnalytic(format!(
                            "{name} = {} is not finite on |z| = {r}",
                            f.describe()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// a = AC + Q′/2 − Q²/4, the coefficient of the linear equation solved by e^L.
    pub fn linear_coefficient(&self) -> Result<AnalyticFunction> {
        let t = self.require_transformed()?;
        let q = &t.b_plus_cpc;
        Ok(t.ac
            .add(&q.derived().scale(Complex64::new(0.5, 0.0)))
            .sub(&q.mul(q).scale(Complex64::new(0.25, 0.0))))
    }

    fn require_transformed(&self) -> Result<&TransformedCoefficients> {
        self.transformed.as_ref().ok_or_else(|| {
            Error::InvalidArgument("AC and B + C'/C are required for the transformed form".into())
        })
    }

    fn c_vanishes_on(&self, z: Complex64) -> Option<Complex64> {
        let scale = self.c.value(Complex64::new(0.0, 0.0)).norm().max(1.0);
        (0..PATH_SAMPLES)
            .map(|k| z * (k as f64 / (PATH_SAMPLES - 1) as f64))
            .find(|w| self.c.value(*w).norm() < 1e-8 * scale)
    }
}

fn direct_rhs(d: &DirectCoefficients, c: &AnalyticFunction) -> impl Fn(Complex64, &State<2>) -> State<2> + Sync {
    let (a, b, c) = (d.a.clone(), d.b.clone(), c.clone());
    move |z, y| [y[1], a.value(z) + b.value(z) * y[1] + c.value(z) * y[1] * y[1]]
}

/// (g, C g′) with g′ = v/C; requires C ≠ 0 along the path.
fn transformed_rhs(
    t: &TransformedCoefficients,
    c: &AnalyticFunction,
) -> impl Fn(Complex64, &State<2>) -> State<2> + Sync {
    let (ac, q, c) = (t.ac.clone(), t.b_plus_cpc.clone(), c.clone());
    move |z, y| {
        let v = y[1];
        [v / c.value(z), ac.value(z) + q.value(z) * v + v * v]
    }
}

fn blow_up(e: Error) -> Error {
    match e {
        Error::BlowUp { reached, .. } => Error::BlowUp { reached, guard: BLOW_UP_GUARD },
        other => other,
    }
}

/// (g, g′) at z by integration along the segment from 0. The transformed form
/// is used when available and C does not vanish on the segment; otherwise the
/// direct form.
pub fn riccati_solve(p: &RiccatiProblem, z: Complex64, tol: f64) -> Result<(Complex64, Complex64)> {
    if z.norm() >= 1.0 {
        return Err(Error::OutsideDisc { re: z.re, im: z.im });
    }
    let zero = Complex64::new(0.0, 0.0);
    let vanishing = p.c_vanishes_on(z);
    match (&p.transformed, vanishing, &p.direct) {
        (Some(t), None, _) => {
            let rhs = transformed_rhs(t, &p.c);
            let guard = |y: &State<2>| y[0].norm() > BLOW_UP_GUARD || y[1].norm() > BLOW_UP_GUARD;
            let y0 = [p.g0, p.c.value(zero) * p.g1];
            let y = integrate_segment(&rhs, zero, z, y0, tol, Some(&guard)).map_err(blow_up)?;
            Ok((y[0], y[1] / p.c.value(z)))
        }
        (_, _, Some(d)) => {
            let rhs = direct_rhs(d, &p.c);
            let guard = |y: &State<2>| y[1].norm() > BLOW_UP_GUARD;
            let y = integrate_segment(&rhs, zero, z, [p.g0, p.g1], tol, Some(&guard)).map_err(blow_up)?;
            Ok((y[0], y[1]))
        }
        (Some(_), Some(w), None) => Err(Error::CoefficientVanishes { z: w }),
        (None, _, None) => Err(Error::InvalidArgument(
            "Riccati problem needs either (AC, B + C'/C) or (A, B)".into(),
        )),
    }
}

/// max over checkpoints on [0, z] of the defect of the equation, with g″
/// from five-point differences of integrated g′: |g″ − A − Bg′ − C g′²| in the
/// direct form, |C g″ + C′g′ − AC − Q C g′ − (C g′)²| in the transformed form.
pub fn riccati_residual(p: &RiccatiProblem, z: Complex64, tol: f64, checkpoints: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 1..=checkpoints {
        let w = z * (k as f64 / (checkpoints + 1) as f64);
        let h = 0.01 * (1.0 - w.norm()).min(0.1);
        let (_, gp) = riccati_solve(p, w, tol)?;
        let err = std::cell::RefCell::new(None);
        let gpp = five_point(
            |x| match riccati_solve(p, x, tol) {
                Ok(v) => v.1,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    NAN
                }
            },
            w,
            h,
        );
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        let c = p.c.derivs(w, 1);
        let use_direct = p.transformed.is_none() || p.c_vanishes_on(z).is_some();
        let defect = match (&p.transformed, &p.direct) {
            (_, Some(d)) if use_direct => {
                (gpp - d.a.value(w) - d.b.value(w) * gp - c[0] * gp * gp).norm()
            }
            (Some(t), _) => {
                let v = c[0] * gp;
                (c[0] * gpp + c[1] * gp - t.ac.value(w) - t.b_plus_cpc.value(w) * v - v * v).norm()
            }
            _ => unreachable!("riccati_solve rejects problems without usable coefficients"),
        };
        worst = worst.max(defect / (1.0 + gp.norm()));
    }
    Ok(worst)
}

/// The pair (C g′, L) continued over the disc from exact data at 0, with
/// f = e^L. Needs only the transformed coefficients, so C may vanish.
pub struct TransformedField {
    problem: RiccatiProblem,
    continuation: RayContinuation<2>,
}

impl std::fmt::Debug for TransformedField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TransformedField(C = {})", self.problem.c.describe())
    }
}

impl TransformedField {
    pub fn new(problem: RiccatiProblem, tol: f64, rays: usize) -> Result<Self> {
        let t = problem.require_transformed()?.clone();
        let q = t.b_plus_cpc.clone();
        let rhs = Arc::new(move |z: Complex64, y: &State<2>| {
            let qz = q.value(z);
            [t.ac.value(z) + qz * y[0] + y[0] * y[0], -y[0] - 0.5 * qz]
        });
        let guard = Arc::new(|y: &State<2>| y[0].norm() > BLOW_UP_GUARD || y[1].re > 700.0);
        let origin = [problem.c.value(Complex64::new(0.0, 0.0)) * problem.g1, Complex64::new(0.0, 0.0)];
        let continuation = RayContinuation::new(rhs, Some(guard), origin, tol, rays.max(1));
        Ok(TransformedField { problem, continuation })
    }

    pub fn problem(&self) -> &RiccatiProblem {
        &self.problem
    }

    /// (C g′, L) at z.
    pub fn state(&self, z: Complex64) -> Result<State<2>> {
        if z.norm() >= 1.0 {
            return Err(Error::OutsideDisc { re: z.re, im: z.im });
        }
        self.continuation.state_at(z).map_err(blow_up)
    }

    pub fn circle_states(&self, r: f64, n: usize) -> Result<Vec<State<2>>> {
        self.continuation.circle_states(r, n).map_err(blow_up)
    }

    fn v_derivs(&self, z: Complex64, v: Complex64) -> Derivs {
        let t = self.problem.transformed.as_ref().expect("checked in new");
        let ac = t.ac.derivs(z, 1);
        let q = t.b_plus_cpc.derivs(z, 1);
        let v1 = ac[0] + q[0] * v + v * v;
        let v2 = ac[1] + q[1] * v + q[0] * v1 + 2.0 * v * v1;
        [v, v1, v2, NAN]
    }

    /// f = e^L and its first two derivatives at z.
    pub fn exp_solution_derivs(&self, z: Complex64) -> Result<Derivs> {
        let [v, l] = self.state(z)?;
        let t = self.problem.require_transformed()?;
        let q = t.b_plus_cpc.derivs(z, 1);
        let d = self.v_derivs(z, v);
        let l1 = -v - 0.5 * q[0];
        let l2 = -d[1] - 0.5 * q[1];
        let f = l.exp();
        Ok([f, l1 * f, (l2 + l1 * l1) * f, NAN])
    }

    /// f = e^L as an analytic function (orders 0..=2).
    pub fn exp_solution(self: &Arc<Self>) -> AnalyticFunction {
        let me = Arc::clone(self);
        AnalyticFunction::from_fn("exp(L) from the Riccati transform", move |z, order| {
            match me.exp_solution_derivs(z) {
                Ok(d) if order <= 2 => d[order],
                _ => NAN,
            }
        })
    }
}

/// C g′ as an analytic function (orders 0..=2).
impl Analytic for TransformedField {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        match self.state(z) {
            Ok([v, _]) if order <= 2 => self.v_derivs(z, v)[order],
            _ => NAN,
        }
    }

    fn sample_circle_order(&self, r: f64, n: usize, order: usize) -> Vec<Complex64> {
        match self.circle_states(r, n) {
            Ok(states) if order <= 2 => states
                .iter()
                .enumerate()
                .map(|(k, y)| {
                    let z = Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64);
                    self.v_derivs(z, y[0])[order]
                })
                .collect(),
            _ => vec![NAN; n],
        }
    }

    fn describe(&self) -> String {
        format!("C g' for C = {}", self.problem.c.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn f(s: &str) -> AnalyticFunction {
        AnalyticFunction::expr(s).unwrap()
    }

    #[test]
    fn linear_solution_without_coefficients() {
        let p = RiccatiProblem::direct(f("0"), f("0"), f("0"), c(0.5, 0.0), c(0.3, -0.2));
        for z in [c(0.5, 0.0), c(-0.3, 0.7), c(0.0, -0.9)] {
            let (g, gp) = riccati_solve(&p, z, 1e-12).unwrap();
            assert!((g - (c(0.5, 0.0) + c(0.3, -0.2) * z)).norm() < 1e-12);
            assert!((gp - c(0.3, -0.2)).norm() < 1e-12);
        }
    }

    #[test]
    fn pole_type_solution() {
        let p = RiccatiProblem::direct(f("0"), f("2/(1-z)"), f("0"), c(1.0, 0.0), c(1.0, 0.0));
        let (g, gp) = riccati_solve(&p, c(0.5, 0.0), 1e-12).unwrap();
        assert!((g - 2.0).norm() < 1e-9 && (gp - 4.0).norm() < 1e-9, "{g} {gp}");
        assert!(riccati_residual(&p, c(0.5, 0.0), 1e-12, 4).unwrap() < 1e-6);
    }

    #[test]
    fn transformed_fixture_self_converges() {
        let p = RiccatiProblem::transformed(f("1/(1-z)"), f("0"), f("1-z"), c(0.0, 0.0), c(0.0, 0.0));
        let coarse = riccati_solve(&p, c(0.9, 0.0), 1e-9).unwrap();
        let fine = riccati_solve(&p, c(0.9, 0.0), 0.5e-9).unwrap();
        assert!((coarse.0 - fine.0).norm() < 1e-7 && (coarse.1 - fine.1).norm() < 1e-7);
        assert!(riccati_residual(&p, c(0.9, 0.0), 1e-11, 4).unwrap() < 1e-6);
        // both forms agree where A = (1-z)^-2, B = 1/(1-z) are analytic
        let q = p.clone().with_direct(f("(1-z)^(-2)"), f("1/(1-z)"));
        let mut direct_only = q.clone();
        direct_only.transformed = None;
        let a = riccati_solve(&q, c(0.6, 0.3), 1e-11).unwrap();
        let b = riccati_solve(&direct_only, c(0.6, 0.3), 1e-11).unwrap();
        assert!((a.0 - b.0).norm() < 1e-8 && (a.1 - b.1).norm() < 1e-8);
    }

    #[test]
    fn vanishing_coefficient_needs_direct_form() {
        let p = RiccatiProblem::transformed(f("z"), f("1"), f("z"), c(0.0, 0.0), c(0.0, 0.0));
        assert!(matches!(riccati_solve(&p, c(0.5, 0.0), 1e-10), Err(Error::CoefficientVanishes { .. })));
        let field = TransformedField::new(p, 1e-10, 16).unwrap();
        assert!(field.state(c(0.5, 0.2)).unwrap()[0].norm().is_finite());
    }

    #[test]
    fn blow_up_reports_guard() {
        // g′′ = (g′)², g′(0) = 2: g′ = 2/(1-2z) escapes at z = 1/2
        let p = RiccatiProblem::direct(f("0"), f("0"), f("1"), c(0.0, 0.0), c(2.0, 0.0));
        match riccati_solve(&p, c(0.9, 0.0), 1e-10) {
            Err(Error::BlowUp { reached, guard }) => {
                assert_eq!(guard, BLOW_UP_GUARD);
                assert!((reached.re - 0.5).abs() < 1e-3);
            }
            Err(Error::StepUnderflow { reached }) => assert!((reached.re - 0.5).abs() < 1e-3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exp_solution_solves_linear_equation() {
        let p = RiccatiProblem::transformed(f("1/(1-z)"), f("0"), f("1-z"), c(0.0, 0.0), c(0.0, 0.0));
        let a = p.linear_coefficient().unwrap();
        let field = Arc::new(TransformedField::new(p, 1e-11, 16).unwrap());
        let sol = field.exp_solution();
        for z in [c(0.3, 0.1), c(0.8, -0.4), c(-0.6, 0.6)] {
            let d = sol.derivs(z, 2);
            assert!((d[2] + a.value(z) * d[0]).norm() < 1e-9 * (1.0 + d[0].norm()));
            // f′′ by differences of integrated f′
            let fpp = five_point(|w| sol.derivative(w, 1), z, 1e-3);
            assert!((fpp + a.value(z) * d[0]).norm() < 1e-6 * (1.0 + d[0].norm()), "{z}");
        }
    }
}
