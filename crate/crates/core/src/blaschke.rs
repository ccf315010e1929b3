//! Finite Blaschke products and the separation diagnostics behind
//! "uniformly separated" zero sequences.

use num_complex::Complex64;
use serde::Serialize;

use crate::afn::function::{product_derivs, Analytic, Derivs};
use crate::disc::{mobius_deriv_c, rho_c, DiscPoint, PolarGrid, ProbeGrid};
use crate::error::{Error, Result};
use crate::spaces::{NormEstimate, VerdictRule};

/// B(z) = Π b_{z_n}(z) with b_a(z) = (|a|/a)(a − z)/(1 − āz) and b_0(z) = z.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlaschkeProduct {
    zeros: Vec<Complex64>,
}

fn unimodular(a: Complex64) -> Complex64 {
    if a == Complex64::new(0.0, 0.0) {
        Complex64::new(-1.0, 0.0)
    } else {
        a.norm() / a
    }
}

/// Derivatives of a single factor b_a (orders 0..=3).
pub fn factor_derivs(a: Complex64, z: Complex64) -> Derivs {
    let c = unimodular(a);
    std::array::from_fn(|k| c * mobius_deriv_c(a, z, k))
}

/// Derivatives of b_a(z)/(z − a), which is analytic and zero-free near a.
fn reduced_factor_derivs(a: Complex64, z: Complex64) -> Derivs {
    let c = unimodular(a);
    let ab = a.conj();
    let d = 1.0 - ab * z;
    [
        -c / d,
        -c * ab / (d * d),
        -2.0 * c * ab * ab / (d * d * d),
        -6.0 * c * ab * ab * ab / (d * d * d * d),
    ]
}

const ONE: Derivs = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(0.0, 0.0),
];

impl BlaschkeProduct {
    pub fn new(zeros: &[DiscPoint]) -> Self {
        BlaschkeProduct {
            zeros: zeros.iter().map(|p| p.z()).collect(),
        }
    }

    pub fn from_complex(zeros: &[Complex64]) -> Result<Self> {
        for z in zeros {
            DiscPoint::from_complex(*z)?;
        }
        Ok(BlaschkeProduct {
            zeros: zeros.to_vec(),
        })
    }

    pub fn empty() -> Self {
        BlaschkeProduct { zeros: Vec::new() }
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Derivatives of B up to order `n` by the product rule over factors.
    pub fn derivs(&self, z: Complex64, n: usize) -> Derivs {
        self.zeros.iter().fold(ONE, |acc, &a| {
            product_derivs(&acc, &factor_derivs(a, z), n.min(3))
        })
    }

    /// Derivatives of B(z)/(z − z_idx).
    pub fn deflated_derivs(&self, idx: usize, z: Complex64, n: usize) -> Derivs {
        self.zeros.iter().enumerate().fold(ONE, |acc, (k, &a)| {
            let fac = if k == idx {
                reduced_factor_derivs(a, z)
            } else {
                factor_derivs(a, z)
            };
            product_derivs(&acc, &fac, n.min(3))
        })
    }

    /// Index and pseudo-hyperbolic distance of the nearest zero.
    pub fn nearest_zero(&self, z: Complex64) -> Option<(usize, f64)> {
        self.zeros
            .iter()
            .enumerate()
            .map(|(i, &a)| (i, rho_c(z, a)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
    }

    /// |B(z)|/ρ(z, Λ) with the nearest factor cancelled (|b_a(z)| = ρ(z, a)).
    pub fn separation_ratio(&self, z: Complex64) -> f64 {
        match self.nearest_zero(z) {
            None => 1.0,
            Some((idx, _)) => self
                .zeros
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != idx)
                .map(|(_, &a)| rho_c(z, a))
                .product(),
        }
    }
}

impl Analytic for BlaschkeProduct {
    fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        self.derivs(z, order)[order]
    }

    fn derivs(&self, z: Complex64, n: usize) -> Derivs {
        BlaschkeProduct::derivs(self, z, n)
    }

    fn describe(&self) -> String {
        format!("Blaschke product with {} zeros", self.zeros.len())
    }
}

/// B or one of its first two derivatives at z.
pub fn blaschke_eval(b: &BlaschkeProduct, z: DiscPoint, order: usize) -> Complex64 {
    b.derivs(z.z(), order)[order]
}

/// Minimum pairwise pseudo-hyperbolic distance (1 for fewer than two zeros).
/// Duplicate zeros give 0 and are reported through the flag.
pub fn separation_delta(zeros: &[Complex64]) -> (f64, bool) {
    let mut delta: f64 = 1.0;
    for i in 0..zeros.len() {
        for j in (i + 1)..zeros.len() {
            delta = delta.min(rho_c(zeros[i], zeros[j]));
        }
    }
    (delta, delta == 0.0 && zeros.len() > 1)
}

/// sup over probe points a of Σ (1 − |z_n|)(1 − |a|²)/|1 − ā z_n|².
/// The trace records the running supremum over probe radii in increasing order.
pub fn pointmass_carleson_sup(zeros: &[Complex64], probes: &ProbeGrid) -> NormEstimate {
    let kernel_sum = |a: Complex64| -> f64 {
        zeros
            .iter()
            .map(|zn| (1.0 - zn.norm()) * (1.0 - a.norm_sqr()) / (1.0 - a.conj() * zn).norm_sqr())
            .sum()
    };
    let mut by_radius: Vec<(f64, f64)> = Vec::new();
    for &a in probes.points() {
        let r = a.norm();
        let v = kernel_sum(a);
        match by_radius.iter_mut().find(|(rr, _)| (rr - r).abs() < 1e-12) {
            Some(entry) => entry.1 = entry.1.max(v),
            None => by_radius.push((r, v)),
        }
    }
    by_radius.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut running = 0.0f64;
    let trace: Vec<(f64, f64)> = by_radius
        .into_iter()
        .map(|(r, v)| {
            running = running.max(v);
            (r, running)
        })
        .collect();
    NormEstimate::from_trace(trace, probes.label().to_string(), VerdictRule::default())
}

/// min |B| over grid nodes with ρ(z, Λ) ≥ delta.
pub fn weak_embedding_inf(b: &BlaschkeProduct, delta: f64, grid: &PolarGrid) -> Result<f64> {
    let mut inf = f64::INFINITY;
    let mut count = 0usize;
    for (z, _) in grid.nodes() {
        let far = b.nearest_zero(z).map_or(true, |(_, d)| d >= delta);
        if far {
            count += 1;
            inf = inf.min(b.derivs(z, 0)[0].norm());
        }
    }
    if count == 0 {
        return Err(Error::EmptyGrid(format!(
            "no grid node with pseudo-hyperbolic distance >= {delta} from the zeros"
        )));
    }
    Ok(inf)
}

/// Separation diagnostics of a zero set.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    pub delta: f64,
    pub duplicate_zeros: bool,
    pub pointmass_carleson_sup: NormEstimate,
    /// Grid infimum of |B(z)|/ρ(z, Λ).
    pub lower_bound_c: f64,
    /// inf |B| off the pseudo-hyperbolic discs of radius delta/2 around the zeros.
    pub weak_embedding_inf: Option<f64>,
    /// Informational: inf_n Π_{k≠n} ρ(z_n, z_k).
    pub product_constant: f64,
}

pub fn separation_report(
    b: &BlaschkeProduct,
    probes: &ProbeGrid,
    grid: &PolarGrid,
) -> SeparationReport {
    let (delta, duplicate_zeros) = separation_delta(b.zeros());
    let lower_bound_c = grid
        .nodes()
        .iter()
        .map(|(z, _)| b.separation_ratio(*z))
        .fold(f64::INFINITY, f64::min);
    let product_constant = (0..b.zeros().len())
        .map(|n| {
            b.zeros()
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != n)
                .map(|(_, &zk)| rho_c(b.zeros()[n], zk))
                .product::<f64>()
        })
        .fold(1.0, f64::min);
    SeparationReport {
        delta,
        duplicate_zeros,
        pointmass_carleson_sup: pointmass_carleson_sup(b.zeros(), probes),
        lower_bound_c,
        weak_embedding_inf: weak_embedding_inf(b, 0.5 * delta, grid).ok(),
        product_constant,
    }
}
