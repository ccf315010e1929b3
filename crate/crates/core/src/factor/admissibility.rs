//! The operator g ↦ R(g), the double primitive of −g″ − (g′)², and the suites
//! built on it: zero-free solutions e^g, the growth-space counterexample,
//! pre-Schwarzian/Schwarzian verdict agreement, and the Riccati transform.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::afn::function::Analytic;
use crate::afn::{path_integral_with, AnalyticFunction};
use crate::disc::{sunflower, GridSpec, PolarGrid, ProbeGrid};
use crate::error::{Error, Result};
use crate::ode::riccati::{RiccatiProblem, TransformedField};
use crate::quad::five_point;
use crate::spaces::{
    bloch_seminorm, bmoa_carleson_norm, carleson_area_grid, carleson_sup, hardy2_littlewood_paley,
    hinf_alpha_norm, littlewood_paley_grid, trace_cuts, MeasureDensity, NormEstimate, Verdict,
    VerdictRule,
};

use super::schwarzian::{preschwarzian, schwarzian};

const NAN: Complex64 = Complex64::new(f64::NAN, f64::NAN);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const PRIMITIVE_TOL: f64 = 1e-13;

/// R(g)(z) = ∫₀^z (z − ξ)(−g″(ξ) − g′(ξ)²) dξ: R(0) = R′(0) = 0 and
/// R″ = −g″ − (g′)², the coefficient of the equation solved by e^g.
struct CoefficientPrimitive {
    g: AnalyticFunction,
    g1_at_zero: Complex64,
}

impl CoefficientPrimitive {
    fn kernel(&self, w: Complex64) -> Complex64 {
        let g1 = self.g.derivative(w, 1);
        -self.g.derivative(w, 2) - g1 * g1
    }
}

impl Analytic for CoefficientPrimitive {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        let g = &self.g;
        match order {
            0 => path_integral_with(|w| (z - w) * self.kernel(w), ZERO, z, PRIMITIVE_TOL).unwrap_or(NAN),
            1 => {
                let sq = path_integral_with(
                    |w| {
                        let d = g.derivative(w, 1);
                        d * d
                    },
                    ZERO,
                    z,
                    PRIMITIVE_TOL,
                );
                sq.map_or(NAN, |sq| -(g.derivative(z, 1) - self.g1_at_zero) - sq)
            }
            2 => self.kernel(z),
            3 => {
                let d = g.derivs(z, 3);
                -g.derivative(z, 3) - 2.0 * d[1] * d[2]
            }
            _ => NAN,
        }
    }

    fn describe(&self) -> String {
        format!("double primitive of -g'' - g'^2 for g = {}", self.g.describe())
    }
}

pub fn coefficient_primitive(g: &AnalyticFunction) -> AnalyticFunction {
    AnalyticFunction::new(CoefficientPrimitive {
        g: g.clone(),
        g1_at_zero: g.derivative(ZERO, 1),
    })
}

/// −g″ − (g′)².
pub fn zero_free_coefficient(g: &AnalyticFunction) -> AnalyticFunction {
    let d = g.derived();
    d.derived().add(&d.mul(&d)).scale(Complex64::new(-1.0, 0.0))
}

/// Concrete function spaces standing in for an admissible class X, with
/// X′ and X″ the classes of first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceTag {
    Bloch,
    Bmoa,
    HinfAlpha(f64),
    BlochCapH2,
}

impl std::fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpaceTag::Bloch => write!(f, "bloch"),
            SpaceTag::Bmoa => write!(f, "bmoa"),
            SpaceTag::HinfAlpha(a) => write!(f, "hinf_alpha({a})"),
            SpaceTag::BlochCapH2 => write!(f, "bloch_cap_h2"),
        }
    }
}

/// Grids used by the space quantities.
#[derive(Debug, Clone)]
pub struct SpaceGrids {
    /// Suprema and area integrals.
    pub sup: PolarGrid,
    /// Carleson area integrals.
    pub area: PolarGrid,
    pub probes: ProbeGrid,
    pub littlewood_paley: PolarGrid,
}

impl SpaceGrids {
    pub fn standard() -> Result<Self> {
        Ok(SpaceGrids {
            sup: GridSpec::default().build()?,
            area: carleson_area_grid().build()?,
            probes: ProbeGrid::default(),
            littlewood_paley: littlewood_paley_grid(),
        })
    }

    /// Cheaper grids for smoke runs.
    pub fn coarse() -> Result<Self> {
        Ok(SpaceGrids {
            sup: GridSpec { r_max: 0.99, levels: 40, ..GridSpec::default() }.build()?,
            area: GridSpec { r_max: 0.999, levels: 60, angular_density: 8.0, max_angles: 1 << 14, angle_multiple: 64 }.build()?,
            probes: ProbeGrid::default(),
            littlewood_paley: littlewood_paley_grid(),
        })
    }
}

/// Σ |f|²(1 − |z|²)^exponent · weight over the grid, traced over truncations.
pub fn weighted_area_integral(f: &AnalyticFunction, exponent: f64, grid: &PolarGrid) -> Result<NormEstimate> {
    let cuts = trace_cuts(grid.r_max());
    let mut partial = vec![0.0f64; cuts.len()];
    for ring in grid.rings() {
        let w = (1.0 - ring.radius * ring.radius).powf(exponent) * ring.node_weight;
        let vals = f.sample_circle(ring.radius, ring.n_angles);
        let mut s = 0.0;
        for (j, v) in vals.iter().enumerate() {
            let m = v.norm_sqr();
            if !m.is_finite() {
                let t = 2.0 * std::f64::consts::PI * j as f64 / ring.n_angles as f64;
                return Err(Error::NonFinite { z: Complex64::from_polar(ring.radius, t) });
            }
            s += m;
        }
        let k = cuts.iter().position(|&c| ring.radius <= c * (1.0 + 1e-12)).unwrap_or(cuts.len() - 1);
        partial[k] += s * w;
    }
    let mut running = 0.0;
    let trace = cuts
        .into_iter()
        .zip(partial)
        .map(|(c, p)| {
            running += p;
            (c, running)
        })
        .collect();
    Ok(NormEstimate::from_trace(
        trace,
        format!("area integral |f|^2 (1-|z|^2)^{exponent};{}", grid.fingerprint()),
        VerdictRule::default(),
    ))
}

fn labelled(mut e: NormEstimate, label: &str) -> NormEstimate {
    e.grid_meta = format!("{label};{}", e.grid_meta);
    e
}

/// Estimates whose joint finiteness measures membership of f in the class
/// X (level 0), X′ (level 1) or X″ (level 2).
pub fn space_quantities(tag: SpaceTag, level: usize, f: &AnalyticFunction, grids: &SpaceGrids) -> Result<Vec<NormEstimate>> {
    let weight = level as f64;
    Ok(match tag {
        SpaceTag::Bloch => match level {
            0 => vec![labelled(bloch_seminorm(f, &grids.sup)?, "Bloch seminorm")],
            _ => vec![labelled(hinf_alpha_norm(f, weight, &grids.sup)?, &format!("H^inf_{weight}"))],
        },
        SpaceTag::Bmoa => match level {
            0 => vec![bmoa_carleson_norm(f, &grids.probes, &grids.area)?],
            _ => {
                let exponent = 2.0 * weight - 1.0;
                let mu = MeasureDensity::weighted(f, exponent);
                vec![labelled(
                    carleson_sup(&mu, &grids.probes, &grids.area)?,
                    &format!("Carleson |f|^2 (1-|z|^2)^{exponent}"),
                )]
            }
        },
        SpaceTag::HinfAlpha(alpha) => vec![labelled(
            hinf_alpha_norm(f, alpha + weight, &grids.sup)?,
            &format!("H^inf_{}", alpha + weight),
        )],
        SpaceTag::BlochCapH2 => {
            let mut out = space_quantities(SpaceTag::Bloch, level, f, grids)?;
            out.push(match level {
                0 => labelled(hardy2_littlewood_paley(f, &grids.littlewood_paley)?, "H^2 Littlewood-Paley"),
                _ => weighted_area_integral(f, 2.0 * weight - 1.0, &grids.sup)?,
            });
            out
        }
    })
}

/// Divergent if any estimate diverges, finite if all are finite.
pub fn joint_verdict(estimates: &[NormEstimate]) -> Verdict {
    if estimates.iter().any(|e| e.verdict == Verdict::Divergent) {
        Verdict::Divergent
    } else if estimates.iter().all(|e| e.verdict == Verdict::Finite) {
        Verdict::Finite
    } else {
        Verdict::Inconclusive
    }
}

fn max_over<F: Fn(Complex64) -> f64 + Sync>(points: &[Complex64], f: F) -> Result<f64> {
    let vals = crate::par_map(points, |z| f(*z));
    let mut worst = 0.0f64;
    for (z, v) in points.iter().zip(vals) {
        if !v.is_finite() {
            return Err(Error::NonFinite { z: *z });
        }
        worst = worst.max(v);
    }
    Ok(worst)
}

/// max over the points of |R(g)″ − A|, R(g)″ from five-point differences of R(g)′.
pub fn primitive_identity_defect(g: &AnalyticFunction, a: &AnalyticFunction, points: &[Complex64]) -> Result<f64> {
    let r = coefficient_primitive(g);
    max_over(points, |z| {
        let h = 1e-3 * (1.0 - z.norm()).min(0.1) * 10.0;
        let second = five_point(|w| r.derivative(w, 1), z, h);
        (second - a.value(z)).norm() / (1.0 + a.value(z).norm())
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroFreeReport {
    pub tag: SpaceTag,
    /// Quantities for g in X.
    pub g_quantities: Vec<NormEstimate>,
    pub g_verdict: Verdict,
    /// Quantities for A = −g″ − (g′)² in X″.
    pub coefficient_quantities: Vec<NormEstimate>,
    pub coefficient_verdict: Verdict,
    /// max |R(g)″ − A| / (1 + |A|) on samples.
    pub identity_defect: f64,
}

/// For f = e^g: the X-quantities of g next to the X″-quantities of its
/// coefficient A = −g″ − (g′)² = R(g)″.
pub fn zero_free_correspondence(g: &AnalyticFunction, tag: SpaceTag, grids: &SpaceGrids) -> Result<ZeroFreeReport> {
    let a = zero_free_coefficient(g);
    let g_quantities = space_quantities(tag, 0, g, grids)?;
    let coefficient_quantities = space_quantities(tag, 2, &a, grids)?;
    Ok(ZeroFreeReport {
        tag,
        g_verdict: joint_verdict(&g_quantities),
        coefficient_verdict: joint_verdict(&coefficient_quantities),
        g_quantities,
        coefficient_quantities,
        identity_defect: primitive_identity_defect(g, &a, &sunflower(64, 0.9))?,
    })
}

/// One catalog entry of the pre-Schwarzian/Schwarzian comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub label: String,
    pub pre_schwarzian: Vec<NormEstimate>,
    pub pre_schwarzian_verdict: Verdict,
    pub schwarzian: Vec<NormEstimate>,
    pub schwarzian_verdict: Verdict,
    pub agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilitySuite {
    pub tag: SpaceTag,
    /// Growth-space probe: g = (1 − z)^{−α}.
    pub g_estimate: Option<NormEstimate>,
    /// Growth-space probe: R(g) in the same space.
    pub primitive_estimate: Option<NormEstimate>,
    pub catalog: Vec<CatalogEntry>,
    pub pass: bool,
}

/// P_w = u′ and S_w = u″ − ½(u′)² for w with w′ = e^u.
fn from_log_derivative(u: &str) -> Result<(AnalyticFunction, AnalyticFunction)> {
    let u = AnalyticFunction::expr(u)?;
    let p = u.derived();
    let s = p.derived().sub(&p.mul(&p).scale(Complex64::new(0.5, 0.0)));
    Ok((p, s))
}

fn from_map(w: &str) -> Result<(AnalyticFunction, AnalyticFunction)> {
    let w = AnalyticFunction::expr(w)?;
    Ok((preschwarzian(&w), schwarzian(&w)))
}

fn catalog(tag: SpaceTag) -> Result<Vec<(String, AnalyticFunction, AnalyticFunction)>> {
    let mut out = vec![
        ("w = z/(1-z)".to_string(), from_map("z/(1-z)")?),
        ("w' = exp(z^2)".to_string(), from_log_derivative("z^2")?),
        ("w' = exp(1/(1-z))".to_string(), from_log_derivative("1/(1-z)")?),
    ];
    if tag == SpaceTag::Bloch {
        out.push(("w = tan(2z)".to_string(), from_map("sin(2*z)/cos(2*z)")?));
    }
    Ok(out.into_iter().map(|(l, (p, s))| (l, p, s)).collect())
}

/// Growth-space probe for HinfAlpha(α): g = (1 − z)^{−α} is in the space
/// while R(g) is not (its trace must grow by more than 1.5 per step). For
/// the other tags: the X′ verdict of P_w and the X″ verdict of S_w agree on
/// every catalog map w.
pub fn admissibility_probe(tag: SpaceTag, grids: &SpaceGrids) -> Result<AdmissibilitySuite> {
    match tag {
        SpaceTag::HinfAlpha(alpha) => {
            if !(alpha > 0.0) {
                return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
            }
            let g = AnalyticFunction::expr(&format!("exp(-({alpha:?})*log(1-z))"))?;
            let ge = hinf_alpha_norm(&g, alpha, &grids.sup)?;
            let re = hinf_alpha_norm(&coefficient_primitive(&g), alpha, &grids.sup)?;
            let trace = &re.refinement_trace;
            let growing = trace.len() >= 2 && re.trace_ratios().iter().all(|&q| q > 1.5);
            let pass = ge.verdict == Verdict::Finite && growing;
            Ok(AdmissibilitySuite {
                tag,
                g_estimate: Some(ge),
                primitive_estimate: Some(re),
                catalog: Vec::new(),
                pass,
            })
        }
        _ => {
            let mut entries = Vec::new();
            for (label, p, s) in catalog(tag)? {
                let pq = space_quantities(tag, 1, &p, grids)?;
                let sq = space_quantities(tag, 2, &s, grids)?;
                let (pv, sv) = (joint_verdict(&pq), joint_verdict(&sq));
                entries.push(CatalogEntry {
                    label,
                    agree: pv == sv && pv != Verdict::Inconclusive,
                    pre_schwarzian: pq,
                    pre_schwarzian_verdict: pv,
                    schwarzian: sq,
                    schwarzian_verdict: sv,
                });
            }
            let pass = entries.iter().all(|e| e.agree);
            Ok(AdmissibilitySuite {
                tag,
                g_estimate: None,
                primitive_estimate: None,
                catalog: entries,
                pass,
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RiccatiTransformReport {
    pub tag: SpaceTag,
    /// max |a − AC − R(h)″| / (1 + |a|) with R(h)″ by finite differences.
    pub identity_defect: f64,
    /// max |f″ + a f| / (1 + |f|) with f″ by finite differences of f′.
    pub linear_residual: f64,
    /// X′-quantities of C g′.
    pub cg_prime: Vec<NormEstimate>,
    pub cg_prime_verdict: Verdict,
    pub pass: bool,
}

/// With h = −½∫₀^z (B + C′/C), f = e^L and a = AC + Q′/2 − Q²/4: certifies
/// a = AC + R(h)″ and f″ + a f = 0 on the sample points, and estimates the
/// X′-quantities of C g′.
pub fn riccati_transform(
    p: &RiccatiProblem,
    tag: SpaceTag,
    grids: &SpaceGrids,
    points: &[Complex64],
    tol: f64,
) -> Result<RiccatiTransformReport> {
    let t = p
        .transformed
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("the transform needs AC and B + C'/C".into()))?;
    let a = p.linear_coefficient()?;
    let h = t.b_plus_cpc.scale(Complex64::new(-0.5, 0.0)).antiderivative(ZERO, PRIMITIVE_TOL);
    let rh = coefficient_primitive(&h);
    let ac = t.ac.clone();
    let identity_defect = max_over(points, |z| {
        let step = 1e-2 * (1.0 - z.norm()).min(0.1);
        let second = five_point(|w| rh.derivative(w, 1), z, step);
        let av = a.value(z);
        (av - ac.value(z) - second).norm() / (1.0 + av.norm())
    })?;
    let field = Arc::new(TransformedField::new(p.clone(), tol, 16)?);
    let f = field.exp_solution();
    let states = crate::par_map(points, |&z| field.state(z));
    for s in states {
        s?;
    }
    let linear_residual = max_over(points, |z| {
        let step = 1e-2 * (1.0 - z.norm()).min(0.1);
        let second = five_point(|w| f.derivative(w, 1), z, step);
        let fz = f.value(z);
        (second + a.value(z) * fz).norm() / (1.0 + fz.norm())
    })?;
    let cg = AnalyticFunction::from_arc(field);
    let cg_prime = space_quantities(tag, 1, &cg, grids)?;
    let cg_prime_verdict = joint_verdict(&cg_prime);
    Ok(RiccatiTransformReport {
        tag,
        identity_defect,
        linear_residual,
        pass: identity_defect < 1e-7 && linear_residual < 1e-7 && cg_prime_verdict == Verdict::Finite,
        cg_prime,
        cg_prime_verdict,
    })
}
