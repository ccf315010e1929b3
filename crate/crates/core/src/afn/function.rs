use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::expr::{differentiate, parse_expression, Expression};
use crate::disc::mobius_deriv_c;
use crate::error::Result;

/// Highest derivative order supported by every backing.
pub const MAX_ORDER: usize = 3;

/// Value and derivatives up to order 3; entries above the requested order are NaN.
pub type Derivs = [Complex64; 4];

const NAN: Complex64 = Complex64::new(f64::NAN, f64::NAN);

/// A function analytic in (a neighbourhood of the evaluation set in) the unit disc.
///
/// Evaluation is infallible: failures surface as non-finite values, which
/// the estimators report together with the offending node.
pub trait Analytic: Send + Sync {
    /// Derivative of the given order (0 = value), `order <= MAX_ORDER`.
    fn eval(&self, z: Complex64, order: usize) -> Complex64;

    /// Derivatives of orders `0..=n`.
    fn derivs(&self, z: Complex64, n: usize) -> Derivs {
        let mut out = [NAN; 4];
        for (k, slot) in out.iter_mut().enumerate().take(n + 1) {
            *slot = self.eval(z, k);
        }
        out
    }

    /// Values on `n` equispaced points of |z| = r, starting at θ = 0.
    fn sample_circle(&self, r: f64, n: usize) -> Vec<Complex64> {
        self.sample_circle_order(r, n, 0)
    }

    /// Derivative of the given order on the same points as `sample_circle`.
    fn sample_circle_order(&self, r: f64, n: usize, order: usize) -> Vec<Complex64> {
        let pts: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / n as f64))
            .collect();
        crate::par_map(&pts, |z| self.eval(*z, order))
    }

    fn describe(&self) -> String {
        "analytic function".into()
    }
}

/// Shared handle to an analytic function with combinators.
#[derive(Clone)]
pub struct AnalyticFunction(Arc<dyn Analytic>);

impl fmt::Debug for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnalyticFunction({})", self.0.describe())
    }
}

impl<T: Analytic + 'static> From<T> for AnalyticFunction {
    fn from(value: T) -> Self {
        AnalyticFunction(Arc::new(value))
    }
}

impl AnalyticFunction {
    pub fn new<T: Analytic + 'static>(inner: T) -> Self {
        AnalyticFunction(Arc::new(inner))
    }

    pub fn from_arc(inner: Arc<dyn Analytic>) -> Self {
        AnalyticFunction(inner)
    }

    /// Parses an expression and wraps it with exact symbolic derivatives.
    pub fn expr(text: &str) -> Result<Self> {
        Ok(Self::new(ExprFunction::new(parse_expression(text)?)))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(ExprFunction::new(Expression::Const(c)))
    }

    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }

    /// Function defined by a closure `(z, order) -> value`.
    pub fn from_fn<F>(name: &str, f: F) -> Self
    where
        F: Fn(Complex64, usize) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(FnAnalytic {
            name: name.to_string(),
            f: Box::new(f),
        })
    }

    pub fn inner(&self) -> &Arc<dyn Analytic> {
        &self.0
    }

    #[inline]
    pub fn value(&self, z: Complex64) -> Complex64 {
        self.0.eval(z, 0)
    }

    #[inline]
    pub fn derivative(&self, z: Complex64, order: usize) -> Complex64 {
        self.0.eval(z, order)
    }

    #[inline]
    pub fn derivs(&self, z: Complex64, n: usize) -> Derivs {
        self.0.derivs(z, n)
    }

    pub fn sample_circle(&self, r: f64, n: usize) -> Vec<Complex64> {
        self.0.sample_circle(r, n)
    }

    pub fn describe(&self) -> String {
        self.0.describe()
    }

    pub fn add(&self, other: &AnalyticFunction) -> Self {
        Self::new(Linear {
            a: self.clone(),
            b: other.clone(),
            sign: 1.0,
        })
    }

    pub fn sub(&self, other: &AnalyticFunction) -> Self {
        Self::new(Linear {
            a: self.clone(),
            b: other.clone(),
            sign: -1.0,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(Scaled { c, a: self.clone() })
    }

    pub fn mul(&self, other: &AnalyticFunction) -> Self {
        Self::new(Product {
            a: self.clone(),
            b: other.clone(),
        })
    }

    pub fn div(&self, other: &AnalyticFunction) -> Self {
        Self::new(Quotient {
            a: self.clone(),
            b: other.clone(),
        })
    }

    pub fn exp(&self) -> Self {
        Self::new(ExpOf { a: self.clone() })
    }

    /// The derivative as a function in its own right (orders shift by one;
    /// order 3 of the result falls back to a Cauchy integral).
    pub fn derived(&self) -> Self {
        Self::new(Derived { a: self.clone() })
    }

    /// z ↦ base + ∫₀^z self along the segment from 0.
    pub fn antiderivative(&self, base: Complex64, tol: f64) -> Self {
        Self::new(Antiderivative {
            integrand: self.clone(),
            base,
            tol,
        })
    }

    /// z ↦ self(φ_a(s·z)).
    pub fn compose_mobius(&self, a: Complex64, s: f64) -> Self {
        Self::new(MobiusCompose {
            outer: self.clone(),
            a,
            s,
        })
    }
}

/// Expression-backed function with symbolic derivatives up to order 3.
#[derive(Debug, Clone)]
pub struct ExprFunction {
    trees: [Expression; 4],
}

impl ExprFunction {
    pub fn new(e: Expression) -> Self {
        let d1 = differentiate(&e);
        let d2 = differentiate(&d1);
        let d3 = differentiate(&d2);
        ExprFunction { trees: [e, d1, d2, d3] }
    }

    pub fn expression(&self) -> &Expression {
        &self.trees[0]
    }
}

impl Analytic for ExprFunction {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        self.trees[order].eval(z)
    }

    fn describe(&self) -> String {
        format!("expr {}", self.trees[0])
    }
}

struct FnAnalytic {
    name: String,
    f: Box<dyn Fn(Complex64, usize) -> Complex64 + Send + Sync>,
}

impl Analytic for FnAnalytic {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        (self.f)(z, order)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

struct Linear {
    a: AnalyticFunction,
    b: AnalyticFunction,
    sign: f64,
}

impl Analytic for Linear {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        self.a.derivative(z, order) + self.sign * self.b.derivative(z, order)
    }

    fn derivs(&self, z: Complex64, n: usize) -> Derivs {
        let a = self.a.derivs(z, n);
        let b = self.b.derivs(z, n);
        std::array::from_fn(|k| a[k] + self.sign * b[k])
    }

    fn describe(&self) -> String {
        let op = if self.sign > 0.0 { "+" } else { "-" };
        format!("({} {op} {})", self.a.describe(), self.b.describe())
    }
}

struct Scaled {
    c: Complex64,
    a: AnalyticFunction,
}

impl Analytic for Scaled {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        self.c * self.a.derivative(z, order)
    }

    fn derivs(&self, z: Complex64, n: usize) -> Derivs {
        self.a.derivs(z, n).map(|v| self.c * v)
    }

    fn describe(&self) -> String {
        format!("{} * {}", self.c, self.a.describe())
    }
}

const BINOM: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0],
    [1.0, 3.0, 3.0, 1.0],
];

/// Leibniz rule for the product of two derivative stacks.
pub fn product_derivs(a: &Derivs, b: &Derivs, n: usize) -> Derivs {
    let mut out = [NAN; 4];
    for m in 0..=n {
        out[m] = (0..=m).map(|k| BINOM[m][k] * a[k] * b[m - k]).sum();
    }
    out
}

/// Derivatives of a/b given the stacks of a and b.
pub fn quotient_derivs(a: &Derivs, b: &Derivs, n: usize) -> Derivs {
    let mut q = [NAN; 4];
    for m in 0..=n {
        let mut acc = a[m];
        for k in 0..m {
            acc -= BINOM[m][k] * q[k] * b[m - k];
        }
        q[m] = acc / b[0];
    }
    q
}

/// Derivatives of exp(a) given the stack of a.
pub fn exp_derivs(a: &Derivs, n: usize) -> Derivs {
    let e = a[0].exp();
    let mut out = [NAN; 4];
    out[0] = e;
    if n >= 1 {
        out[1] = a[1] * e;
    }
    if n >= 2 {
        out[2] = (a[2] + a[1] * a[1]) * e;
    }
    if n >= 3 {
        out[3] = (a[3] + 3.0 * a[1] * a[2] + a[1] * a[1] * a[1]) * e;
    }
    out
}

struct Product {
    a: AnalyticFunction,
    b: AnalyticFunction,
}

impl Analytic for Product {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        self.derivs(z, order)[order]
    }

    fn derivs(&self, z: Complex64, n: usize) -> Derivs {
        product_derivs(&self.a.derivs(z, n), &self.b.derivs(z, n), n)
    }

    fn describe(&self) -> String {
        format!("({} * {})", self.a.describe(), self.b.describe())
    }
}

struct Quotient {
    a: AnalyticFunction,
    b: AnalyticFunction,
}

impl Analytic for Quotient {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        self.derivs(z, order)[order]
    }

    fn derivs(&self, z: Complex64, n: usize) -> Derivs {
        quotient_derivs(&self.a.derivs(z, n), &self.b.derivs(z, n), n)
    }

    fn describe(&self) -> String {
        format!("({} / {})", self.a.describe(), self.b.describe())
    }
}

struct ExpOf {
    a: AnalyticFunction,
}

impl Analytic for ExpOf {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        self.derivs(z, order)[order]
    }

    fn derivs(&self, z: Complex64, n: usize) -> Derivs {
        exp_derivs(&self.a.derivs(z, n), n)
    }

    fn describe(&self) -> String {
        format!("exp({})", self.a.describe())
    }
}

struct Derived {
    a: AnalyticFunction,
}

impl Analytic for Derived {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        if order < MAX_ORDER {
            self.a.derivative(z, order + 1)
        } else {
            let r = 0.25 * (1.0 - z.norm()).max(1e-6);
            crate::quad::cauchy_derivative(|w| self.a.derivative(w, 1), z, order, r)
        }
    }

    fn sample_circle_order(&self, r: f64, n: usize, order: usize) -> Vec<Complex64> {
        if order < MAX_ORDER {
            self.a.inner().sample_circle_order(r, n, order + 1)
        } else {
            let pts: Vec<Complex64> = (0..n)
                .map(|j| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / n as f64))
                .collect();
            crate::par_map(&pts, |z| self.eval(*z, order))
        }
    }

    fn describe(&self) -> String {
        format!("d/dz {}", self.a.describe())
    }
}

struct Antiderivative {
    integrand: AnalyticFunction,
    base: Complex64,
    tol: f64,
}

impl Analytic for Antiderivative {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        if order == 0 {
            match super::path_integral_c(&self.integrand, Complex64::new(0.0, 0.0), z, self.tol) {
                Ok(v) => self.base + v,
                Err(_) => NAN,
            }
        } else {
            self.integrand.derivative(z, order - 1)
        }
    }

    fn describe(&self) -> String {
        format!("∫₀^z {}", self.integrand.describe())
    }
}

/// Derivatives of ψ(z) = φ_a(s z).
pub fn scaled_mobius_derivs(a: Complex64, s: f64, z: Complex64) -> Derivs {
    let w = s * z;
    [
        mobius_deriv_c(a, w, 0),
        s * mobius_deriv_c(a, w, 1),
        s * s * mobius_deriv_c(a, w, 2),
        s * s * s * mobius_deriv_c(a, w, 3),
    ]
}

/// Faà di Bruno up to order 3: derivatives of F∘ψ from F's stack at ψ(z) and ψ's stack.
pub fn compose_derivs(outer: &Derivs, inner: &Derivs, n: usize) -> Derivs {
    let mut out = [NAN; 4];
    out[0] = outer[0];
    if n >= 1 {
        out[1] = outer[1] * inner[1];
    }
    if n >= 2 {
        out[2] = outer[2] * inner[1] * inner[1] + outer[1] * inner[2];
    }
    if n >= 3 {
        out[3] = outer[3] * inner[1].powi(3)
            + 3.0 * outer[2] * inner[1] * inner[2]
            + outer[1] * inner[3];
    }
    out
}

struct MobiusCompose {
    outer: AnalyticFunction,
    a: Complex64,
    s: f64,
}

impl Analytic for MobiusCompose {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        self.derivs(z, order)[order]
    }

    fn derivs(&self, z: Complex64, n: usize) -> Derivs {
        let inner = scaled_mobius_derivs(self.a, self.s, z);
        let outer = self.outer.derivs(inner[0], n);
        compose_derivs(&outer, &inner, n)
    }

    fn describe(&self) -> String {
        format!("{} ∘ φ_{}({}·z)", self.outer.describe(), self.a, self.s)
    }
}
