//! Norm and measure estimators: growth spaces, Bloch, BMOA in Carleson form,
//! Hardy means and the Littlewood-Paley identity, each reported with the
//! truncation trace it was computed from.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::afn::AnalyticFunction;
use crate::disc::{GridSpec, PolarGrid, ProbeGrid};
use crate::error::{Error, Result};

/// Boundedness verdict for a truncation trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Finite,
    Divergent,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Finite => "finite",
            Verdict::Divergent => "divergent",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Thresholds comparing the last two trace values: relative increment below
/// `tau` is finite, ratio above `gamma` is divergent. Traces whose last two
/// values lie below `zero_floor` are rounding noise of a vanishing quantity
/// and count as finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerdictRule {
    pub tau: f64,
    pub gamma: f64,
    pub zero_floor: f64,
}

impl Default for VerdictRule {
    fn default() -> Self {
        VerdictRule { tau: 0.1, gamma: 1.5, zero_floor: 1e-10 }
    }
}

impl VerdictRule {
    pub fn classify(&self, trace: &[(f64, f64)]) -> Verdict {
        let n = trace.len();
        if n < 2 {
            return Verdict::Inconclusive;
        }
        let (prev, last) = (trace[n - 2].1, trace[n - 1].1);
        if !prev.is_finite() || !last.is_finite() {
            return Verdict::Divergent;
        }
        let scale = prev.abs().max(last.abs());
        if scale <= f64::MIN_POSITIVE.max(self.zero_floor) {
            return Verdict::Finite;
        }
        if prev.abs() <= f64::MIN_POSITIVE {
            return Verdict::Divergent;
        }
        let increment = (last - prev) / prev.abs();
        if increment < self.tau {
            Verdict::Finite
        } else if last / prev > self.gamma {
            Verdict::Divergent
        } else {
            Verdict::Inconclusive
        }
    }
}

/// A discretized supremum or integral with its truncation trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub grid_meta: String,
    /// (truncation radius, value) pairs in increasing radius.
    pub refinement_trace: Vec<(f64, f64)>,
    pub verdict: Verdict,
}

impl NormEstimate {
    pub fn from_trace(trace: Vec<(f64, f64)>, grid_meta: String, rule: VerdictRule) -> Self {
        NormEstimate {
            value: trace.last().map_or(0.0, |t| t.1),
            verdict: rule.classify(&trace),
            grid_meta,
            refinement_trace: trace,
        }
    }

    /// Ratios of successive trace values.
    pub fn trace_ratios(&self) -> Vec<f64> {
        self.refinement_trace
            .windows(2)
            .map(|w| w[1].1 / w[0].1)
            .collect()
    }
}

const STANDARD_CUTS: [f64; 4] = [0.9, 0.99, 0.999, 0.9999];

/// Truncation radii reported in traces: the standard cuts inside the grid
/// and the grid's outer radius.
pub fn trace_cuts(r_max: f64) -> Vec<f64> {
    let mut cuts: Vec<f64> = STANDARD_CUTS
        .iter()
        .copied()
        .filter(|&c| c <= r_max * (1.0 + 1e-12))
        .collect();
    if cuts.last().map_or(true, |&c| c < r_max * (1.0 - 1e-12)) {
        cuts.push(r_max);
    }
    cuts
}

fn cut_index(cuts: &[f64], r: f64) -> usize {
    cuts.iter()
        .position(|&c| r <= c * (1.0 + 1e-12))
        .unwrap_or(cuts.len() - 1)
}

fn ring_points(r: f64, n: usize) -> impl Iterator<Item = Complex64> {
    (0..n).map(move |j| Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64))
}

/// Running supremum over rings of a per-node quantity computed ring by ring.
fn ring_sup_trace<F>(grid: &PolarGrid, per_ring: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64, usize) -> Vec<Complex64>,
{
    let cuts = trace_cuts(grid.r_max());
    let mut sups = vec![0.0f64; cuts.len()];
    for ring in grid.rings() {
        let samples = per_ring(ring.radius, ring.n_angles);
        let k = cut_index(&cuts, ring.radius);
        for (z, v) in ring_points(ring.radius, ring.n_angles).zip(&samples) {
            let m = v.re;
            if !m.is_finite() {
                return Err(Error::NonFinite { z });
            }
            sups[k] = sups[k].max(m);
        }
    }
    let mut running = 0.0f64;
    Ok(cuts
        .into_iter()
        .zip(sups)
        .map(|(c, s)| {
            running = running.max(s);
            (c, running)
        })
        .collect())
}

/// sup |f(z)|(1 − |z|²)^α over the grid.
pub fn hinf_alpha_norm(f: &AnalyticFunction, alpha: f64, grid: &PolarGrid) -> Result<NormEstimate> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
    }
    let trace = ring_sup_trace(grid, |r, n| {
        let w = (1.0 - r * r).powf(alpha);
        f.sample_circle(r, n)
            .into_iter()
            .map(|v| Complex64::new(v.norm() * w, 0.0))
            .collect()
    })?;
    Ok(NormEstimate::from_trace(trace, grid.fingerprint(), VerdictRule::default()))
}

/// sup |g′(z)|(1 − |z|²) over the grid.
pub fn bloch_seminorm(g: &AnalyticFunction, grid: &PolarGrid) -> Result<NormEstimate> {
    hinf_alpha_norm(&g.derived(), 1.0, grid)
}

#[derive(Clone)]
enum DensityTerm {
    /// scale · |f|² (1 − |z|²)^exponent
    Weighted {
        f: AnalyticFunction,
        exponent: f64,
        scale: f64,
    },
    Closure(Arc<dyn Fn(Complex64) -> f64 + Send + Sync>),
}

/// Nonnegative density w of a measure dμ = w dm.
#[derive(Clone)]
pub struct MeasureDensity {
    terms: Vec<DensityTerm>,
    label: String,
}

impl fmt::Debug for MeasureDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MeasureDensity({})", self.label)
    }
}

impl MeasureDensity {
    pub fn zero() -> Self {
        MeasureDensity {
            terms: Vec::new(),
            label: "0".into(),
        }
    }

    pub fn from_fn<F>(label: &str, w: F) -> Self
    where
        F: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        MeasureDensity {
            terms: vec![DensityTerm::Closure(Arc::new(w))],
            label: label.into(),
        }
    }

    /// |f(z)|² (1 − |z|²)^exponent.
    pub fn weighted(f: &AnalyticFunction, exponent: f64) -> Self {
        MeasureDensity {
            terms: vec![DensityTerm::Weighted {
                f: f.clone(),
                exponent,
                scale: 1.0,
            }],
            label: format!("|{}|^2 (1-|z|^2)^{exponent}", f.describe()),
        }
    }

    /// |A(z)|² (1 − |z|²)³, the coefficient measure.
    pub fn coefficient(a: &AnalyticFunction) -> Self {
        Self::weighted(a, 3.0)
    }

    /// |g′(z)|² (1 − |z|²), the BMOA measure.
    pub fn bmoa(g: &AnalyticFunction) -> Self {
        Self::weighted(&g.derived(), 1.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                DensityTerm::Weighted { f, exponent, scale } => DensityTerm::Weighted {
                    f: f.clone(),
                    exponent: *exponent,
                    scale: scale * c,
                },
                DensityTerm::Closure(w) => {
                    let w = w.clone();
                    DensityTerm::Closure(Arc::new(move |z| c * w(z)))
                }
            })
            .collect();
        MeasureDensity {
            terms,
            label: format!("{c} * ({})", self.label),
        }
    }

    pub fn plus(&self, other: &MeasureDensity) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        MeasureDensity {
            terms,
            label: format!("{} + {}", self.label, other.label),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        let s = 1.0 - z.norm_sqr();
        self.terms
            .iter()
            .map(|t| match t {
                DensityTerm::Weighted { f, exponent, scale } => {
                    scale * f.value(z).norm_sqr() * s.powf(*exponent)
                }
                DensityTerm::Closure(w) => w(z),
            })
            .sum()
    }

    /// Density on the `n` equispaced points of |z| = r.
    pub fn ring_values(&self, r: f64, n: usize) -> Vec<f64> {
        let s = 1.0 - r * r;
        let mut out = vec![0.0; n];
        for t in &self.terms {
            match t {
                DensityTerm::Weighted { f, exponent, scale } => {
                    let w = scale * s.powf(*exponent);
                    for (o, v) in out.iter_mut().zip(f.sample_circle(r, n)) {
                        *o += w * v.norm_sqr();
                    }
                }
                DensityTerm::Closure(w) => {
                    for (o, z) in out.iter_mut().zip(ring_points(r, n)) {
                        *o += w(z);
                    }
                }
            }
        }
        out
    }
}

/// A probe enters the truncation at radius r once its kernel scale 1 − |a|
/// is at least this multiple of the gap 1 − r.
pub const PROBE_CLEARANCE: f64 = 10.0;

fn probe_resolved(a: Complex64, cut: f64) -> bool {
    1.0 - a.norm() >= PROBE_CLEARANCE * (1.0 - cut) * (1.0 - 1e-12)
}

/// Area grid reaching two decades past the outermost default probe, so that
/// probe enters the trace twice.
pub fn carleson_area_grid() -> GridSpec {
    GridSpec {
        r_max: 0.99999,
        levels: 100,
        angular_density: 8.0,
        max_angles: 1 << 17,
        angle_multiple: 64,
    }
}

/// sup over probes a of ∫ w(z) (1 − |a|²)/|1 − āz|² dm(z) on the area grid,
/// traced over area-grid truncations. At truncation r only probes with
/// 1 − |a| ≥ PROBE_CLEARANCE·(1 − r) take part, so a probe is counted once
/// the truncation no longer cuts into its kernel.
pub fn carleson_sup(
    mu: &MeasureDensity,
    probes: &ProbeGrid,
    area_grid: &PolarGrid,
) -> Result<NormEstimate> {
    let cuts = trace_cuts(area_grid.r_max());
    let rings = area_grid.rings();
    let mut weighted: Vec<Vec<f64>> = Vec::with_capacity(rings.len());
    for ring in rings {
        let values = mu.ring_values(ring.radius, ring.n_angles);
        for (z, w) in ring_points(ring.radius, ring.n_angles).zip(&values) {
            if !w.is_finite() {
                return Err(Error::NonFinite { z });
            }
        }
        weighted.push(values.into_iter().map(|w| w * ring.node_weight).collect());
    }
    let angles = probes.angles();
    let aligned = angles > 0 && rings.iter().all(|r| r.n_angles % angles == 0);
    let idx: Vec<usize> = (0..rings.len()).collect();
    let ring_sums: Vec<Vec<f64>> = crate::par_map(&idx, |&i| {
        if aligned {
            ring_kernel_sums_fft(&weighted[i], rings[i].radius, probes)
        } else {
            ring_kernel_sums_direct(&weighted[i], rings[i].radius, probes)
        }
    });
    let n_probes = probes.points().len();
    let mut sums = vec![vec![0.0f64; cuts.len()]; n_probes];
    for (ring, rs) in rings.iter().zip(&ring_sums) {
        let k = cut_index(&cuts, ring.radius);
        for (p, v) in rs.iter().enumerate() {
            sums[p][k] += v;
        }
    }
    for s in sums.iter_mut() {
        for k in 1..s.len() {
            s[k] += s[k - 1];
        }
    }
    let trace = cuts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let sup = probes
                .points()
                .iter()
                .zip(&sums)
                .filter(|(a, _)| probe_resolved(**a, c))
                .map(|(_, s)| s[k])
                .fold(0.0, f64::max);
            (c, sup)
        })
        .collect();
    Ok(NormEstimate::from_trace(
        trace,
        format!("{};{};{}", mu.label(), probes.label(), area_grid.fingerprint()),
        VerdictRule::default(),
    ))
}

/// Σ_j v_j (1 − |a|²)/|1 − ā z_j|² over one ring, for every probe a.
fn ring_kernel_sums_direct(values: &[f64], r: f64, probes: &ProbeGrid) -> Vec<f64> {
    let n = values.len();
    let nodes: Vec<Complex64> = ring_points(r, n).collect();
    probes
        .points()
        .iter()
        .map(|a| {
            let ac = a.conj();
            let scale = 1.0 - a.norm_sqr();
            nodes
                .iter()
                .zip(values)
                .map(|(z, v)| v * scale / (1.0 - ac * z).norm_sqr())
                .sum()
        })
        .collect()
}

/// Same sums through the Poisson expansion
/// (1 − ρ²)/|1 − q e^{it}|² = (1 − ρ²)/(1 − q²) Σ_m q^|m| e^{imt}, q = ρr.
/// With probe angles 2πl/L and L dividing the ring size, the aliased
/// geometric series fold in closed form onto L bins.
fn ring_kernel_sums_fft(values: &[f64], r: f64, probes: &ProbeGrid) -> Vec<f64> {
    use rustfft::FftPlanner;
    let n = values.len();
    let l = probes.angles();
    let mut spectrum: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut spectrum);
    let total = values.iter().sum::<f64>();
    let mut out = Vec::with_capacity(probes.points().len());
    for &rho in probes.radii() {
        if rho == 0.0 {
            out.push(total);
            continue;
        }
        let q = rho * r;
        let mut pw = Vec::with_capacity(n + 1);
        let mut acc = 1.0;
        for _ in 0..=n {
            pw.push(acc);
            acc *= q;
        }
        let qn = pw[n];
        let pref = (1.0 - rho * rho) / (1.0 - q * q);
        let mut bins = vec![Complex64::new(0.0, 0.0); l];
        for (k, x) in spectrum.iter().enumerate() {
            bins[k % l] += x * ((pw[k] + pw[n - k]) / (1.0 - qn));
        }
        for j in 0..l {
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, y) in bins.iter().enumerate() {
                let t = 2.0 * PI * ((b * j) % l) as f64 / l as f64;
                acc += y * Complex64::from_polar(1.0, t);
            }
            out.push(pref * acc.re);
        }
    }
    out
}

/// The BMOA Carleson quantity: carleson_sup of |g′|²(1 − |z|²).
pub fn bmoa_carleson_norm(
    g: &AnalyticFunction,
    probes: &ProbeGrid,
    area_grid: &PolarGrid,
) -> Result<NormEstimate> {
    let mut est = carleson_sup(&MeasureDensity::bmoa(g), probes, area_grid)?;
    est.grid_meta = format!("BMOA Carleson quantity;{}", est.grid_meta);
    Ok(est)
}

/// Trapezoid node count resolving features of width 1 − r.
pub fn default_n_theta(r: f64) -> usize {
    let want = (64.0 / (1.0 - r)).ceil().clamp(256.0, (1u64 << 20) as f64) as usize;
    want.next_power_of_two()
}

/// ((1/2π) ∫ |f(re^{iθ})|^p dθ)^{1/p} by the trapezoid rule.
pub fn hardy_mean(f: &AnalyticFunction, p: f64, r: f64, n_theta: usize) -> Result<f64> {
    if !(p > 0.0) || !(0.0..1.0).contains(&r) || n_theta == 0 {
        return Err(Error::InvalidArgument(format!(
            "hardy mean needs p > 0, 0 <= r < 1 and nodes > 0 (p={p}, r={r})"
        )));
    }
    let samples = f.sample_circle(r, n_theta);
    let mut sum = 0.0;
    for (z, v) in ring_points(r, n_theta).zip(&samples) {
        let m = v.norm();
        if !m.is_finite() {
            return Err(Error::NonFinite { z });
        }
        sum += m.powf(p);
    }
    Ok((sum / n_theta as f64).powf(1.0 / p))
}

pub const DEFAULT_HARDY_RADII: [f64; 4] = [0.9, 0.99, 0.999, 0.9999];

fn check_radii(r_list: &[f64]) -> Result<()> {
    if r_list.is_empty() || r_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "radius list must be nonempty and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Trace of hardy_mean over the radii with its verdict.
pub fn hp_membership_verdict(
    f: &AnalyticFunction,
    p: f64,
    r_list: &[f64],
    rule: VerdictRule,
) -> Result<NormEstimate> {
    check_radii(r_list)?;
    let trace = r_list
        .iter()
        .map(|&r| Ok((r, hardy_mean(f, p, r, default_n_theta(r))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormEstimate::from_trace(
        trace,
        format!("hardy mean p={p}, trapezoid nodes 64/(1-r)"),
        rule,
    ))
}

/// Trace of hardy_mean(f, p, r)·(1 − r)^{p‖g‖²} with its verdict.
pub fn hardy_growth_check(
    f: &AnalyticFunction,
    g_bloch_norm: f64,
    p: f64,
    r_list: &[f64],
    rule: VerdictRule,
) -> Result<NormEstimate> {
    check_radii(r_list)?;
    let exponent = p * g_bloch_norm * g_bloch_norm;
    let trace = r_list
        .iter()
        .map(|&r| {
            let m = hardy_mean(f, p, r, default_n_theta(r))?;
            Ok((r, m * (1.0 - r).powf(exponent)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormEstimate::from_trace(
        trace,
        format!("hardy mean p={p} damped by (1-r)^{exponent}"),
        rule,
    ))
}

/// Default grid for the Littlewood-Paley integral.
pub fn littlewood_paley_grid() -> PolarGrid {
    PolarGrid::gauss(1.0, 40, 16, 512).expect("valid Littlewood-Paley grid")
}

/// |g(0)|² + (2/π) ∫ |g′|² log(1/|z|) dm, traced over grid truncations.
pub fn hardy2_littlewood_paley(g: &AnalyticFunction, grid: &PolarGrid) -> Result<NormEstimate> {
    let cuts = trace_cuts(grid.r_max());
    let dg = g.derived();
    let mut sums = vec![0.0f64; cuts.len()];
    for ring in grid.rings() {
        if ring.radius <= 0.0 {
            continue;
        }
        let k = cut_index(&cuts, ring.radius);
        let weight = ring.node_weight * (1.0 / ring.radius).ln();
        let mut ring_sum = 0.0;
        for (z, v) in ring_points(ring.radius, ring.n_angles).zip(dg.sample_circle(ring.radius, ring.n_angles)) {
            let m = v.norm_sqr();
            if !m.is_finite() {
                return Err(Error::NonFinite { z });
            }
            ring_sum += m;
        }
        sums[k] += weight * ring_sum;
    }
    let g0 = g.value(Complex64::new(0.0, 0.0)).norm_sqr();
    let mut running = 0.0;
    let trace = cuts
        .into_iter()
        .zip(sums)
        .map(|(c, s)| {
            running += s;
            (c, g0 + 2.0 / PI * running)
        })
        .collect();
    Ok(NormEstimate::from_trace(trace, grid.fingerprint(), VerdictRule::default()))
}
