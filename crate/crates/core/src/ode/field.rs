use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use super::rk::{integrate_path, integrate_segment, State};
use crate::afn::function::{Analytic, Derivs};
use crate::afn::{maclaurin_of, AnalyticFunction, SeriesFunction};
use crate::disc::DiscPoint;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const NAN: Complex64 = Complex64::new(f64::NAN, f64::NAN);

/// f″ + A f = 0 with f(0) = f0, f′(0) = f1.
#[derive(Debug, Clone)]
pub struct OdeProblem {
    pub a: AnalyticFunction,
    pub f0: Complex64,
    pub f1: Complex64,
}

impl OdeProblem {
    pub fn new(a: AnalyticFunction, f0: Complex64, f1: Complex64) -> Result<Self> {
        if f0 == ZERO && f1 == ZERO {
            return Err(Error::InvalidArgument(
                "initial values f(0) = f'(0) = 0 give the trivial solution".into(),
            ));
        }
        Ok(OdeProblem { a, f0, f1 })
    }

    pub fn from_expr(a: &str, f0: Complex64, f1: Complex64) -> Result<Self> {
        Self::new(AnalyticFunction::expr(a)?, f0, f1)
    }
}

/// Numerical settings shared by the solution machinery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub r_max: f64,
    pub tol: f64,
    /// Maclaurin series is used for |z| ≤ series_radius.
    pub series_radius: f64,
    pub series_terms: usize,
    /// Radius of the circle on which A's Taylor coefficients are extracted.
    pub coefficient_probe: f64,
    pub rays: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            r_max: 0.99,
            tol: 1e-10,
            series_radius: 0.5,
            series_terms: 128,
            coefficient_probe: 0.9,
            rays: 16,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return Err(Error::InvalidArgument(format!("r_max must lie in (0,1), got {}", self.r_max)));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument(format!("tol must lie in (0,1), got {}", self.tol)));
        }
        if !(self.series_radius >= 0.0 && self.series_radius < self.coefficient_probe)
            || !(self.coefficient_probe < 1.0)
        {
            return Err(Error::InvalidArgument(
                "need 0 <= series_radius < coefficient_probe < 1".into(),
            ));
        }
        if self.series_terms < 2 || self.rays == 0 {
            return Err(Error::InvalidArgument("series_terms >= 2 and rays >= 1 required".into()));
        }
        Ok(())
    }
}

/// Maclaurin series of the solution from the coefficient recurrence
/// c_{n+2} = −Σ_{k≤n} a_k c_{n−k} / ((n+2)(n+1)).
pub fn maclaurin_solve(p: &OdeProblem, n_terms: usize) -> Result<SeriesFunction> {
    maclaurin_solve_with_probe(p, n_terms, 0.9)
}

pub(crate) fn maclaurin_solve_with_probe(
    p: &OdeProblem,
    n_terms: usize,
    probe: f64,
) -> Result<SeriesFunction> {
    let n_terms = n_terms.max(2);
    let a = maclaurin_of(&p.a, n_terms.max(128), probe)?;
    Ok(SeriesFunction::new(
        ZERO,
        solve_recurrence(&a.coefficients, p.f0, p.f1, n_terms),
        a.radius_hint,
    ))
}

/// Taylor coefficients of a solution about a point from those of A there.
pub(crate) fn solve_recurrence(
    a: &[Complex64],
    f0: Complex64,
    f1: Complex64,
    n_terms: usize,
) -> Vec<Complex64> {
    let mut c = vec![ZERO; n_terms.max(2)];
    c[0] = f0;
    c[1] = f1;
    for n in 0..n_terms.saturating_sub(2) {
        let mut s = ZERO;
        for k in 0..=n {
            if let Some(ak) = a.get(k) {
                s += ak * c[n - k];
            }
        }
        c[n + 2] = -s / ((n + 2) as f64 * (n + 1) as f64);
    }
    c.truncate(n_terms);
    c
}

pub(crate) type SharedRhs<const N: usize> = Arc<dyn Fn(Complex64, &State<N>) -> State<N> + Send + Sync>;
pub(crate) type SharedGuard<const N: usize> = Arc<dyn Fn(&State<N>) -> bool + Send + Sync>;

/// Radii of the cached waypoints: steps of 0.05 up to 0.95, then halving
/// distances to the boundary.
pub fn waypoint_radius(level: usize) -> f64 {
    match level {
        0 => 0.0,
        1..=19 => 0.05 * level as f64,
        m => 1.0 - 0.05 * 0.5f64.powi((m - 19) as i32),
    }
}

fn level_below(r: f64) -> usize {
    let mut m = 0;
    while waypoint_radius(m + 1) <= r * (1.0 + 1e-14) {
        m += 1;
        if m > 60 {
            break;
        }
    }
    m
}

/// Integrates a system outward from exact data at the origin, caching states
/// at waypoints on equally spaced rays.
pub(crate) struct RayContinuation<const N: usize> {
    rhs: SharedRhs<N>,
    guard: Option<SharedGuard<N>>,
    origin: State<N>,
    tol: f64,
    rays: usize,
    cache: RwLock<HashMap<(usize, usize), State<N>>>,
}

impl<const N: usize> RayContinuation<N> {
    pub(crate) fn new(
        rhs: SharedRhs<N>,
        guard: Option<SharedGuard<N>>,
        origin: State<N>,
        tol: f64,
        rays: usize,
    ) -> Self {
        RayContinuation {
            rhs,
            guard,
            origin,
            tol,
            rays,
            cache: RwLock::new(HashMap::new()),
        }
    }

    fn ray_angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.rays as f64
    }

    fn ray_point(&self, j: usize, m: usize) -> Complex64 {
        Complex64::from_polar(waypoint_radius(m), self.ray_angle(j))
    }

    pub(crate) fn nearest_ray(&self, z: Complex64) -> usize {
        let t = z.arg().rem_euclid(2.0 * PI);
        ((t / (2.0 * PI / self.rays as f64)).round() as usize) % self.rays
    }

    pub(crate) fn segment(&self, from: Complex64, y0: State<N>, to: Complex64, tol: f64) -> Result<State<N>> {
        let guard = self.guard.as_deref().map(|g| g as &(dyn Fn(&State<N>) -> bool + Sync));
        integrate_segment(&*self.rhs, from, to, y0, tol, guard)
    }

    pub(crate) fn waypoint(&self, j: usize, m: usize) -> Result<(Complex64, State<N>)> {
        if m == 0 {
            return Ok((ZERO, self.origin));
        }
        if let Some(y) = self.cache.read().get(&(j, m)) {
            return Ok((self.ray_point(j, m), *y));
        }
        let (mut level, mut y) = {
            let cache = self.cache.read();
            let mut start = (0, self.origin);
            for k in (1..m).rev() {
                if let Some(y) = cache.get(&(j, k)) {
                    start = (k, *y);
                    break;
                }
            }
            start
        };
        while level < m {
            let next = self.segment(self.ray_point(j, level), y, self.ray_point(j, level + 1), self.tol)?;
            level += 1;
            y = *self.cache.write().entry((j, level)).or_insert(next);
        }
        Ok((self.ray_point(j, m), y))
    }

    /// Base waypoint for z: nearest ray, outermost level not beyond |z|.
    pub(crate) fn base_for(&self, z: Complex64) -> Result<(Complex64, State<N>)> {
        self.waypoint(self.nearest_ray(z), level_below(z.norm()))
    }

    pub(crate) fn state_at_with(&self, z: Complex64, tol: f64) -> Result<State<N>> {
        let (w, y) = self.base_for(z)?;
        self.segment(w, y, z, tol)
    }

    pub(crate) fn state_at(&self, z: Complex64) -> Result<State<N>> {
        self.state_at_with(z, self.tol)
    }

    /// States at the `n` equispaced points of |z| = r: radial continuation to
    /// each ray, then integration along the arc to the next ray.
    pub(crate) fn circle_states(&self, r: f64, n: usize) -> Result<Vec<State<N>>> {
        let rays = self.rays;
        let arcs: Vec<usize> = (0..rays).collect();
        let pieces = crate::par_map(&arcs, |&j| -> Result<Vec<State<N>>> {
            let first = (j * n).div_ceil(rays);
            let end = ((j + 1) * n).div_ceil(rays);
            if first >= end {
                return Ok(Vec::new());
            }
            let t0 = self.ray_angle(j);
            let start = self.state_at(Complex64::from_polar(r, t0))?;
            let outputs: Vec<f64> = (first..end).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
            let path = move |t: f64| {
                let z = Complex64::from_polar(r, t);
                (z, Complex64::new(0.0, 1.0) * z)
            };
            let guard = self.guard.as_deref().map(|g| g as &(dyn Fn(&State<N>) -> bool + Sync));
            integrate_path(&*self.rhs, &path, t0, start, &outputs, self.tol, guard)
        });
        let mut out = Vec::with_capacity(n);
        for p in pieces {
            out.extend(p?);
        }
        Ok(out)
    }
}

/// A solved instance of f″ + A f = 0: Maclaurin series near the origin and
/// cached ray continuation beyond.
pub struct SolutionField {
    problem: OdeProblem,
    config: SolverConfig,
    maclaurin: SeriesFunction,
    continuation: RayContinuation<2>,
    endpoints: RwLock<HashMap<(u64, u64), (State<2>, f64)>>,
    residual_certificate: RwLock<Option<f64>>,
}

impl std::fmt::Debug for SolutionField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SolutionField(A = {}, f0 = {}, f1 = {})", self.problem.a.describe(), self.problem.f0, self.problem.f1)
    }
}

pub(crate) fn linear_rhs(a: AnalyticFunction) -> SharedRhs<2> {
    Arc::new(move |z: Complex64, y: &State<2>| [y[1], -a.value(z) * y[0]])
}

impl SolutionField {
    pub fn new(problem: OdeProblem, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let maclaurin =
            maclaurin_solve_with_probe(&problem, config.series_terms, config.coefficient_probe)?;
        let continuation = RayContinuation::new(
            linear_rhs(problem.a.clone()),
            None,
            [problem.f0, problem.f1],
            config.tol,
            config.rays,
        );
        Ok(SolutionField {
            problem,
            config,
            maclaurin,
            continuation,
            endpoints: RwLock::new(HashMap::new()),
            residual_certificate: RwLock::new(None),
        })
    }

    pub fn problem(&self) -> &OdeProblem {
        &self.problem
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn maclaurin(&self) -> &SeriesFunction {
        &self.maclaurin
    }

    pub fn coefficient(&self) -> &AnalyticFunction {
        &self.problem.a
    }

    pub fn residual_certificate(&self) -> Option<f64> {
        *self.residual_certificate.read()
    }

    fn series_state(&self, z: Complex64) -> State<2> {
        [self.maclaurin.eval_unchecked(z, 0), self.maclaurin.eval_unchecked(z, 1)]
    }

    /// (f, f′) at z: series inside the series radius, continuation beyond.
    pub fn state(&self, z: Complex64) -> Result<State<2>> {
        if z.norm() >= 1.0 {
            return Err(Error::OutsideDisc { re: z.re, im: z.im });
        }
        if z.norm() <= self.config.series_radius {
            Ok(self.series_state(z))
        } else {
            self.continuation.state_at(z)
        }
    }

    /// (f, f′) at z by continuation only, never by the series.
    pub fn continuation_state(&self, z: Complex64) -> Result<State<2>> {
        self.continuation.state_at(z)
    }

    /// (f, f′) at z by integrating from an explicit starting state.
    pub fn state_from(&self, from: Complex64, y0: State<2>, to: Complex64) -> Result<State<2>> {
        self.continuation.segment(from, y0, to, self.config.tol)
    }

    /// Cached waypoint on ray `j` at level `m`.
    pub fn waypoint(&self, ray: usize, level: usize) -> Result<(Complex64, State<2>)> {
        self.continuation.waypoint(ray % self.config.rays, level)
    }

    /// f, f′, f″ = −Af and f‴ = −A′f − Af′.
    pub fn derivs_at(&self, z: Complex64) -> Result<Derivs> {
        let [f, fp] = self.state(z)?;
        let a = self.problem.a.derivs(z, 1);
        Ok([f, fp, -a[0] * f, -a[1] * f - a[0] * fp])
    }

    /// (f, f′) on the `n` equispaced points of |z| = r.
    pub fn circle_states(&self, r: f64, n: usize) -> Result<Vec<State<2>>> {
        if r <= self.config.series_radius {
            let pts: Vec<Complex64> =
                (0..n).map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64)).collect();
            Ok(crate::par_map(&pts, |z| self.series_state(*z)))
        } else {
            self.continuation.circle_states(r, n)
        }
    }

    /// Segment derivatives f′ at the five-point stencil around z, each
    /// integrated from z itself so integration noise cancels.
    pub(crate) fn stencil_second_derivative(&self, z: Complex64, y: State<2>, h: f64) -> Result<Complex64> {
        let mut fp = [ZERO; 4];
        for (slot, k) in fp.iter_mut().zip([-2.0, -1.0, 1.0, 2.0]) {
            let w = z + Complex64::new(k * h, 0.0);
            *slot = self.state_from(z, y, w)?[1];
        }
        Ok((-fp[3] + 8.0 * fp[2] - 8.0 * fp[1] + fp[0]) / (12.0 * h))
    }
}

impl Analytic for SolutionField {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        match self.derivs_at(z) {
            Ok(d) if order <= 3 => d[order],
            _ => NAN,
        }
    }

    fn derivs(&self, z: Complex64, _n: usize) -> Derivs {
        self.derivs_at(z).unwrap_or([NAN; 4])
    }

    fn sample_circle_order(&self, r: f64, n: usize, order: usize) -> Vec<Complex64> {
        let states = match self.circle_states(r, n) {
            Ok(s) => s,
            Err(_) => return vec![NAN; n],
        };
        match order {
            0 => states.iter().map(|y| y[0]).collect(),
            1 => states.iter().map(|y| y[1]).collect(),
            _ => states
                .iter()
                .enumerate()
                .map(|(k, y)| {
                    let z = Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64);
                    let a = self.problem.a.derivs(z, 1);
                    if order == 2 {
                        -a[0] * y[0]
                    } else {
                        -a[1] * y[0] - a[0] * y[1]
                    }
                })
                .collect(),
        }
    }

    fn describe(&self) -> String {
        format!(
            "solution of f'' + ({}) f = 0, f(0) = {}, f'(0) = {}",
            self.problem.a.describe(),
            self.problem.f0,
            self.problem.f1
        )
    }
}

/// Result of `continue_to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuedValue {
    pub f: Complex64,
    pub fp: Complex64,
    /// Difference between the run at `tol` and the rerun at `tol/32`.
    pub error_estimate: f64,
}

/// (f, f′) at z by continuation from the nearest waypoint, cross-checked by a
/// rerun at a 32 times tighter tolerance; endpoints are cached.
pub fn continue_to(s: &SolutionField, z: DiscPoint, tol: f64) -> Result<ContinuedValue> {
    let zc = z.z();
    if zc.norm() > s.config.r_max * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "|z| = {} exceeds r_max = {}",
            zc.norm(),
            s.config.r_max
        )));
    }
    let key = (zc.re.to_bits(), zc.im.to_bits());
    if let Some((y, err)) = s.endpoints.read().get(&key) {
        if *err <= tol * (1.0 + y[0].norm().max(y[1].norm())) {
            return Ok(ContinuedValue { f: y[0], fp: y[1], error_estimate: *err });
        }
    }
    let (w, y0) = s.continuation.base_for(zc)?;
    let coarse = s.continuation.segment(w, y0, zc, tol)?;
    let fine = s.continuation.segment(w, y0, zc, tol / 32.0)?;
    let err = (coarse[0] - fine[0]).norm().max((coarse[1] - fine[1]).norm());
    s.endpoints.write().insert(key, (fine, err));
    Ok(ContinuedValue { f: fine[0], fp: fine[1], error_estimate: err })
}

/// max |f″ + A f| / (1 + |f|) over the samples, with f″ from five-point
/// differences of integrated f′. Stored as the field's certificate.
pub fn residual_check(s: &SolutionField, samples: &[Complex64]) -> Result<f64> {
    let vals = crate::par_map(samples, |&z| -> Result<f64> {
        let y = s.state(z)?;
        let h = 0.01 * (1.0 - z.norm()).min(0.1);
        let fpp = s.stencil_second_derivative(z, y, h)?;
        let r = (fpp + s.problem.a.value(z) * y[0]).norm() / (1.0 + y[0].norm());
        if !r.is_finite() {
            return Err(Error::NonFinite { z });
        }
        Ok(r)
    });
    let mut worst = 0.0f64;
    for v in vals {
        worst = worst.max(v?);
    }
    *s.residual_certificate.write() = Some(worst);
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn field(a: &str, f0: Complex64, f1: Complex64) -> SolutionField {
        SolutionField::new(OdeProblem::from_expr(a, f0, f1).unwrap(), SolverConfig::default()).unwrap()
    }

    fn random_points(n: usize, r_max: f64, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::from_polar(r_max * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI)))
            .collect()
    }

    #[test]
    fn recurrence_examples() {
        let p = OdeProblem::from_expr("0", c(1.0, 0.0), c(2.0, 0.0)).unwrap();
        let s = maclaurin_solve(&p, 6).unwrap();
        let want = [1.0, 2.0, 0.0, 0.0, 0.0, 0.0];
        for (g, w) in s.coefficients.iter().zip(want) {
            assert!((g - w).norm() < 1e-14);
        }
        let p = OdeProblem::from_expr("4", c(0.0, 0.0), c(2.0, 0.0)).unwrap();
        let s = maclaurin_solve(&p, 6).unwrap();
        let want = [0.0, 2.0, 0.0, -4.0 / 3.0, 0.0, 4.0 / 15.0];
        for (g, w) in s.coefficients.iter().zip(want) {
            assert!((g - w).norm() < 1e-13, "{g} {w}");
        }
        let p = OdeProblem::from_expr("1", c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let s = maclaurin_solve(&p, 5).unwrap();
        let want = [1.0, 0.0, -0.5, 0.0, 1.0 / 24.0];
        for (g, w) in s.coefficients.iter().zip(want) {
            assert!((g - w).norm() < 1e-14);
        }
        assert!(OdeProblem::from_expr("1", c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn continuation_examples() {
        let s = field("4", c(0.0, 0.0), c(2.0, 0.0));
        let v = continue_to(&s, DiscPoint::new(0.9, 0.0).unwrap(), 1e-10).unwrap();
        assert!((v.f - 1.8f64.sin()).norm() < 1e-9);
        assert!((v.fp - 2.0 * 1.8f64.cos()).norm() < 1e-9);
        assert!((v.f.re - 0.973848).abs() < 1e-6 && (v.fp.re + 0.454404).abs() < 1e-6);
        let o = continue_to(&s, DiscPoint::origin(), 1e-10).unwrap();
        assert_eq!((o.f, o.fp), (c(0.0, 0.0), c(2.0, 0.0)));

        let e = field("-(6+4*z^2)", c(0.0, 0.0), c(1.0, 0.0));
        let v = continue_to(&e, DiscPoint::new(0.5, 0.0).unwrap(), 1e-10).unwrap();
        assert!((v.f - 0.5 * 0.25f64.exp()).norm() < 1e-9);
        assert!((v.f.re - 0.642013).abs() < 1e-6);
        assert!(continue_to(&e, DiscPoint::new(0.995, 0.0).unwrap(), 1e-10).is_err());
    }

    #[test]
    fn closed_forms_on_random_points() {
        let s = field("4", c(0.0, 0.0), c(2.0, 0.0));
        let e = field("-(6+4*z^2)", c(0.0, 0.0), c(1.0, 0.0));
        for z in random_points(200, 0.9, 1) {
            assert!((s.eval(z, 0) - (2.0 * z).sin()).norm() < 1e-8);
            let want = z * (z * z).exp();
            assert!((e.eval(z, 0) - want).norm() < 1e-8 * (1.0 + want.norm()), "{z}");
        }
    }

    #[test]
    fn series_agrees_with_continuation() {
        for (a, f0, f1) in [
            ("4", 0.0, 2.0),
            ("-(6+4*z^2)", 0.0, 1.0),
            ("0.25/(1-z)^2", 1.0, -0.5),
            ("16", 0.0, 4.0),
            ("1/(1-z)", 1.0, 0.0),
        ] {
            let s = field(a, c(f0, 0.0), c(f1, 0.0));
            for z in random_points(1000, 0.5, 2) {
                let series = s.state(z).unwrap();
                let cont = s.continuation_state(z).unwrap();
                assert!((series[0] - cont[0]).norm() < 1e-9, "{a} {z}");
                assert!((series[1] - cont[1]).norm() < 1e-9, "{a} {z}");
            }
        }
    }

    #[test]
    fn wronskian_is_conserved() {
        let a = "1/(1-z)^2 + exp(z)";
        let f = field(a, c(1.0, 0.0), c(0.0, 0.0));
        let g = field(a, c(0.0, 0.0), c(1.0, 0.0));
        for z in random_points(1000, 0.95, 3) {
            let (x, y) = (f.state(z).unwrap(), g.state(z).unwrap());
            let w = x[0] * y[1] - x[1] * y[0];
            assert!((w - 1.0).norm() < 1e-8, "{z}: {w}");
        }
    }

    #[test]
    fn path_independence() {
        let s = field("1/(1-z)^2", c(1.0, 0.0), c(0.3, 0.1));
        let tol = s.config().tol;
        for z in random_points(100, 0.95, 4) {
            let direct = s.continuation_state(z).unwrap();
            // detour through the waypoint on the neighbouring ray
            let j = s.continuation.nearest_ray(z) + 1;
            let m = level_below(z.norm());
            let (w, y) = s.waypoint(j, m).unwrap();
            let other = s.state_from(w, y, z).unwrap();
            let scale = 1.0 + direct[0].norm();
            assert!((direct[0] - other[0]).norm() < 2.0 * tol * scale * 50.0, "{z}");
        }
    }

    #[test]
    fn circle_sampling_matches_pointwise() {
        let s = field("1/(1-z)^2", c(1.0, 0.0), c(0.3, 0.0));
        for r in [0.3, 0.9, 0.99] {
            let n = 100;
            let ring = s.circle_states(r, n).unwrap();
            for (k, y) in ring.iter().enumerate().step_by(7) {
                let z = Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64);
                let p = s.state(z).unwrap();
                assert!((p[0] - y[0]).norm() < 1e-8 * (1.0 + p[0].norm()), "{r} {k}");
            }
        }
    }

    #[test]
    fn residual_certificates() {
        let pts = random_points(200, 0.9, 5);
        let zero = field("0", c(1.0, 0.0), c(0.0, 0.0));
        assert!(residual_check(&zero, &pts).unwrap() < 1e-10);
        assert!(zero.residual_certificate().is_some());
        let s = field("4", c(0.0, 0.0), c(2.0, 0.0));
        assert!(residual_check(&s, &pts).unwrap() < 1e-8);
        let e = field("-(6+4*z^2)", c(0.0, 0.0), c(1.0, 0.0));
        assert!(residual_check(&e, &pts).unwrap() < 1e-8);
    }
}
