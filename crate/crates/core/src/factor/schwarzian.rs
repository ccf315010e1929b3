//! Pre-Schwarzian and Schwarzian derivatives, the univalence radius, and the
//! local behaviour of a solution on pseudo-hyperbolic discs around its zeros.

use num_complex::Complex64;
use serde::Serialize;

use crate::afn::function::{Analytic, Derivs};
use crate::afn::AnalyticFunction;
use crate::disc::{mobius_c, mobius_deriv_c, DiscPoint, PolarGrid};
use crate::error::{Error, Result};
use crate::ode::field::SolutionField;
use crate::spaces::hinf_alpha_norm;

const NAN: Complex64 = Complex64::new(f64::NAN, f64::NAN);

/// P_w = w″/w′ (orders 0..=1).
struct PreSchwarzian(AnalyticFunction);

/// S_w = P_w′ − ½P_w² (order 0).
struct Schwarzian(AnalyticFunction);

impl Analytic for PreSchwarzian {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        let w = self.0.derivs(z, 3);
        let p = w[2] / w[1];
        match order {
            0 => p,
            1 => w[3] / w[1] - p * p,
            _ => NAN,
        }
    }

    fn describe(&self) -> String {
        format!("pre-Schwarzian of {}", self.0.describe())
    }
}

impl Analytic for Schwarzian {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        if order > 0 {
            return NAN;
        }
        let w = self.0.derivs(z, 3);
        let p = w[2] / w[1];
        w[3] / w[1] - 1.5 * p * p
    }

    fn describe(&self) -> String {
        format!("Schwarzian of {}", self.0.describe())
    }
}

pub fn preschwarzian(w: &AnalyticFunction) -> AnalyticFunction {
    AnalyticFunction::new(PreSchwarzian(w.clone()))
}

pub fn schwarzian(w: &AnalyticFunction) -> AnalyticFunction {
    AnalyticFunction::new(Schwarzian(w.clone()))
}

/// S_w at a single point, refusing critical points of w.
pub fn schwarzian_at(w: &AnalyticFunction, z: Complex64) -> Result<Complex64> {
    let d = w.derivs(z, 3);
    if !(d[1].norm() > 1e-14 * (1.0 + d[0].norm())) {
        return Err(Error::CriticalPoint { z });
    }
    let p = d[2] / d[1];
    Ok(d[3] / d[1] - 1.5 * p * p)
}

/// η = min{1, √2 ‖S_w‖^{−1/2}}.
pub fn local_univalence_radius(s_w_norm: f64) -> f64 {
    if s_w_norm <= 2.0 {
        1.0
    } else {
        (2.0 / s_w_norm).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct SchwarzianReport {
    pub p_w: AnalyticFunction,
    pub s_w: AnalyticFunction,
    /// sup |S_w|(1 − |z|²)² on the grid.
    pub s_w_norm: f64,
    pub eta: f64,
}

pub fn schwarzian_report(w: &AnalyticFunction, grid: &PolarGrid) -> Result<SchwarzianReport> {
    let s_w = schwarzian(w);
    let norm = hinf_alpha_norm(&s_w, 2.0, grid)?.value;
    Ok(SchwarzianReport {
        p_w: preschwarzian(w),
        s_w,
        s_w_norm: norm,
        eta: local_univalence_radius(norm),
    })
}

/// Local behaviour of f on the pseudo-hyperbolic disc Δ(z_n, δ).
#[derive(Debug, Clone, Serialize)]
pub struct LocalUnivalenceEntry {
    pub zero: Complex64,
    pub delta: f64,
    /// sup over the grid of |h″/h′| with h(z) = f(φ_{z_n}(δz)).
    pub sup_ratio: f64,
    /// Point of Δ(z_n, δ) where h′ (numerically) vanishes, if any.
    pub critical_point: Option<Complex64>,
    /// Smallest |f(u) − f(v)| over pairs of the sample net, when the net was checked.
    pub injectivity_margin: Option<f64>,
}

fn h_ratio(s: &SolutionField, zn: Complex64, delta: f64, z: Complex64) -> Result<(Complex64, Complex64)> {
    let u = delta * z;
    let w = mobius_c(zn, u);
    let d: Derivs = s.derivs_at(w)?;
    let p1 = mobius_deriv_c(zn, u, 1) * delta;
    let p2 = mobius_deriv_c(zn, u, 2) * delta * delta;
    let h1 = d[1] * p1;
    let h2 = d[2] * p1 * p1 + d[1] * p2;
    Ok((h1, h2))
}

/// Points of a polar net with `n_r` radii and `n_t` angles in |u| ≤ r_max
/// (the origin included).
fn net(n_r: usize, n_t: usize, r_max: f64) -> Vec<Complex64> {
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    for i in 1..=n_r {
        let r = r_max * i as f64 / n_r as f64;
        for j in 0..n_t {
            let t = 2.0 * std::f64::consts::PI * (j as f64 + 0.5 * (i % 2) as f64) / n_t as f64;
            pts.push(Complex64::from_polar(r, t));
        }
    }
    pts
}

/// For each zero and δ: sup |h″/h′| over the grid nodes (|z| ≤ grid radius),
/// and, at δ = `injectivity_delta`, the smallest separation of f over a
/// 1000-point net of Δ(z_n, δ).
pub fn local_univalence_check(
    s: &SolutionField,
    zeros: &[DiscPoint],
    delta_list: &[f64],
    grid: &PolarGrid,
    injectivity_delta: Option<f64>,
) -> Result<Vec<LocalUnivalenceEntry>> {
    let nodes: Vec<Complex64> = grid.nodes().into_iter().map(|(z, _)| z).collect();
    let mut out = Vec::new();
    for zn in zeros.iter().map(|p| p.z()) {
        for &delta in delta_list {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::InvalidArgument(format!("delta must lie in (0,1), got {delta}")));
            }
            let ratios = crate::par_map(&nodes, |&z| h_ratio(s, zn, delta, z));
            let mut sup = 0.0f64;
            let mut critical = None;
            let scale = s.state(zn)?[1].norm() * delta * (1.0 - zn.norm_sqr());
            for (z, r) in nodes.iter().zip(ratios) {
                let (h1, h2) = r?;
                if h1.norm() <= 1e-12 * scale {
                    critical.get_or_insert(mobius_c(zn, delta * z));
                    continue;
                }
                sup = sup.max((h2 / h1).norm());
            }
            let injectivity_margin = match injectivity_delta {
                Some(d) if (d - delta).abs() < 1e-15 => Some(injectivity(s, zn, delta)?),
                _ => None,
            };
            out.push(LocalUnivalenceEntry {
                zero: zn,
                delta,
                sup_ratio: sup,
                critical_point: critical,
                injectivity_margin,
            });
        }
    }
    Ok(out)
}

fn injectivity(s: &SolutionField, zn: Complex64, delta: f64) -> Result<f64> {
    let pts: Vec<Complex64> = net(27, 37, 0.99).into_iter().map(|u| mobius_c(zn, delta * u)).collect();
    let vals = crate::par_map(&pts, |&w| s.state(w).map(|y| y[0]));
    let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
    let idx: Vec<usize> = (0..vals.len()).collect();
    let mins = crate::par_map(&idx, |&i| {
        vals[i + 1..].iter().map(|v| (v - vals[i]).norm()).fold(f64::INFINITY, f64::min)
    });
    Ok(mins.into_iter().fold(f64::INFINITY, f64::min))
}

/// Ratios sup(2δ)/sup(δ) for consecutive entries of one zero with doubled δ.
pub fn doubling_ratios(entries: &[LocalUnivalenceEntry]) -> Vec<(Complex64, f64, f64)> {
    let mut out = Vec::new();
    for a in entries {
        for b in entries {
            if a.zero == b.zero && (b.delta - 2.0 * a.delta).abs() < 1e-12 {
                out.push((a.zero, a.delta, b.sup_ratio / a.sup_ratio));
            }
        }
    }
    out
}
