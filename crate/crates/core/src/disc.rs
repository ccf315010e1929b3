//! Geometry of the unit disc: Möbius automorphisms, the pseudo-hyperbolic
//! metric, and the polar grids every estimator integrates over.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// A point of the open unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct DiscPoint(Complex64);

impl DiscPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::from_complex(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        if z.re.is_finite() && z.im.is_finite() && z.norm_sqr() < 1.0 {
            Ok(DiscPoint(z))
        } else {
            Err(Error::OutsideDisc { re: z.re, im: z.im })
        }
    }

    pub fn origin() -> Self {
        DiscPoint(Complex64::new(0.0, 0.0))
    }

    #[inline]
    pub fn z(self) -> Complex64 {
        self.0
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }

    pub fn modulus(self) -> f64 {
        self.0.norm()
    }
}

impl TryFrom<[f64; 2]> for DiscPoint {
    type Error = Error;
    fn try_from(p: [f64; 2]) -> Result<Self> {
        DiscPoint::new(p[0], p[1])
    }
}

impl From<DiscPoint> for [f64; 2] {
    fn from(p: DiscPoint) -> Self {
        [p.0.re, p.0.im]
    }
}

impl From<DiscPoint> for Complex64 {
    fn from(p: DiscPoint) -> Self {
        p.0
    }
}

/// φ_a(z) = (a − z)/(1 − āz).
pub fn mobius(a: DiscPoint, z: DiscPoint) -> Complex64 {
    mobius_c(a.z(), z.z())
}

#[inline]
pub fn mobius_c(a: Complex64, z: Complex64) -> Complex64 {
    (a - z) / (1.0 - a.conj() * z)
}

/// Derivatives of φ_a of order 1, 2 or 3 (closed forms).
pub fn mobius_deriv(a: DiscPoint, z: DiscPoint, order: usize) -> Complex64 {
    mobius_deriv_c(a.z(), z.z(), order)
}

pub fn mobius_deriv_c(a: Complex64, z: Complex64, order: usize) -> Complex64 {
    let ab = a.conj();
    let d = 1.0 - ab * z;
    let k = a.norm_sqr() - 1.0;
    match order {
        0 => mobius_c(a, z),
        1 => k / (d * d),
        2 => 2.0 * ab * k / (d * d * d),
        3 => 6.0 * ab * ab * k / (d * d * d * d),
        _ => panic!("mobius_deriv supports orders 0..=3, got {order}"),
    }
}

/// Pseudo-hyperbolic distance |z − w|/|1 − z̄w|.
pub fn rho(z: DiscPoint, w: DiscPoint) -> f64 {
    rho_c(z.z(), w.z())
}

#[inline]
pub fn rho_c(z: Complex64, w: Complex64) -> f64 {
    ((z - w) / (1.0 - z.conj() * w)).norm()
}

pub const DEFAULT_MAX_ANGLES: usize = 16_384;

/// One ring of a polar grid: `n_angles` equispaced nodes at `radius`, starting at θ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ring {
    pub radius: f64,
    pub n_angles: usize,
    /// Area weight carried by each node of the ring.
    pub node_weight: f64,
}

/// Polar quadrature grid over a disc of radius `r_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarGrid {
    rings: Vec<Ring>,
    r_max: f64,
    label: String,
}

/// Parameters of a boundary-clustered grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_max: f64,
    pub levels: usize,
    pub angular_density: f64,
    #[serde(default = "default_max_angles")]
    pub max_angles: usize,
    /// Ring node counts are rounded up to a multiple of this.
    #[serde(default = "default_angle_multiple")]
    pub angle_multiple: usize,
}

fn default_angle_multiple() -> usize {
    1
}

fn default_max_angles() -> usize {
    DEFAULT_MAX_ANGLES
}

impl Default for GridSpec {
    /// Radii hit 0.9, 0.99 and 0.999 exactly (levels 20, 40, 60).
    fn default() -> Self {
        GridSpec {
            r_max: 0.999,
            levels: 60,
            angular_density: 8.0,
            max_angles: DEFAULT_MAX_ANGLES,
            angle_multiple: 1,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<PolarGrid> {
        PolarGrid::clustered(
            self.r_max,
            self.levels,
            self.angular_density,
            self.max_angles,
            self.angle_multiple,
        )
    }
}

/// Boundary-clustered grid with the default angular cap.
pub fn make_polar_grid(r_max: f64, levels: usize, angular_density: f64) -> Result<PolarGrid> {
    PolarGrid::clustered(r_max, levels, angular_density, DEFAULT_MAX_ANGLES, 1)
}

impl PolarGrid {
    /// Radii r_i = 1 − (1 − r_max)^(i/levels), i = 1..=levels. Ring i carries
    /// the annulus between the midpoints to its neighbours (the innermost cell
    /// reaches the origin, the outermost stops at r_max), so the total weight
    /// equals π r_max².
    pub fn clustered(
        r_max: f64,
        levels: usize,
        angular_density: f64,
        max_angles: usize,
        angle_multiple: usize,
    ) -> Result<Self> {
        if !(r_max > 0.0 && r_max < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "r_max must lie in (0, 1), got {r_max}"
            )));
        }
        if levels == 0 || !(angular_density > 0.0) || max_angles == 0 || angle_multiple == 0 {
            return Err(Error::InvalidArgument(
                "levels, angular_density, max_angles and angle_multiple must be positive".into(),
            ));
        }
        let gap = 1.0 - r_max;
        let radii: Vec<f64> = (1..=levels)
            .map(|i| {
                if i == levels {
                    r_max
                } else {
                    1.0 - gap.powf(i as f64 / levels as f64)
                }
            })
            .collect();
        let mut rings = Vec::with_capacity(levels);
        let mut inner = 0.0;
        for (i, &r) in radii.iter().enumerate() {
            let outer = if i + 1 < levels {
                0.5 * (r + radii[i + 1])
            } else {
                r_max
            };
            let n = ((angular_density / (1.0 - r)).ceil() as usize)
                .clamp(1, max_angles)
                .div_ceil(angle_multiple)
                * angle_multiple;
            let area = PI * (outer * outer - inner * inner);
            rings.push(Ring {
                radius: r,
                n_angles: n,
                node_weight: area / n as f64,
            });
            inner = outer;
        }
        Ok(PolarGrid {
            rings,
            r_max,
            label: format!(
                "clustered(r_max={r_max},levels={levels},density={angular_density},max_angles={max_angles},multiple={angle_multiple})"
            ),
        })
    }

    /// High-order grid: Gauss-Legendre in r on panels graded geometrically
    /// toward the origin, trapezoid in θ. `r_max` may equal 1 since all
    /// nodes are interior.
    pub fn gauss(r_max: f64, panels: usize, order: usize, n_theta: usize) -> Result<Self> {
        if !(r_max > 0.0 && r_max <= 1.0) || panels == 0 || order == 0 || n_theta == 0 {
            return Err(Error::InvalidArgument(
                "gauss grid needs 0 < r_max <= 1 and positive sizes".into(),
            ));
        }
        let (x, w) = gauss_legendre(order);
        let mut edges: Vec<f64> = (0..panels).map(|k| r_max * 0.5f64.powi(k as i32)).collect();
        edges.push(0.0);
        edges.reverse();
        let mut rings = Vec::new();
        for win in edges.windows(2) {
            let (a, b) = (win[0], win[1]);
            let h = 0.5 * (b - a);
            for (xi, wi) in x.iter().zip(&w) {
                let r = a + h * (xi + 1.0);
                rings.push(Ring {
                    radius: r,
                    n_angles: n_theta,
                    node_weight: wi * h * r * 2.0 * PI / n_theta as f64,
                });
            }
        }
        Ok(PolarGrid {
            rings,
            r_max,
            label: format!("gauss(r_max={r_max},panels={panels},order={order},n_theta={n_theta})"),
        })
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn radii(&self) -> Vec<f64> {
        self.rings.iter().map(|r| r.radius).collect()
    }

    pub fn len(&self) -> usize {
        self.rings.iter().map(|r| r.n_angles).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total_weight(&self) -> f64 {
        self.rings
            .iter()
            .map(|r| r.node_weight * r.n_angles as f64)
            .sum()
    }

    /// Nodes and weights in fixed ring-major order.
    pub fn nodes(&self) -> Vec<(Complex64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for ring in &self.rings {
            for j in 0..ring.n_angles {
                let t = 2.0 * PI * j as f64 / ring.n_angles as f64;
                out.push((Complex64::from_polar(ring.radius, t), ring.node_weight));
            }
        }
        out
    }

    /// Restriction to rings with radius ≤ r (nested truncation).
    pub fn truncated(&self, r: f64) -> PolarGrid {
        PolarGrid {
            rings: self
                .rings
                .iter()
                .copied()
                .filter(|ring| ring.radius <= r * (1.0 + 1e-12))
                .collect(),
            r_max: r.min(self.r_max),
            label: format!("{}|r<={r}", self.label),
        }
    }

    /// Short deterministic description: label, node count and an FNV-1a hash
    /// of the ring data.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bits: u64| {
            for byte in bits.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for ring in &self.rings {
            feed(ring.radius.to_bits());
            feed(ring.n_angles as u64);
            feed(ring.node_weight.to_bits());
        }
        format!("{};nodes={};fnv={:016x}", self.label, self.len(), h)
    }
}

/// Deterministic, roughly uniform sample of `n` points in |z| <= r_max
/// (sunflower arrangement).
pub fn sunflower(n: usize, r_max: f64) -> Vec<Complex64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let r = r_max * ((k as f64 + 0.5) / n as f64).sqrt();
            Complex64::from_polar(r, golden * k as f64)
        })
        .collect()
}

/// Weighted sum of `integrand` over the grid nodes, in grid order.
pub fn integrate_area<F: Fn(Complex64) -> f64 + Sync>(grid: &PolarGrid, integrand: F) -> Result<f64> {
    let nodes = grid.nodes();
    let values = crate::par_map(&nodes, |(z, _)| integrand(*z));
    let mut sum = 0.0;
    for ((z, w), v) in nodes.iter().zip(values) {
        if !v.is_finite() {
            return Err(Error::NonFinite { z: *z });
        }
        sum += w * v;
    }
    Ok(sum)
}

/// Probe points a used to discretize suprema over the disc.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeGrid {
    points: Vec<Complex64>,
    radii: Vec<f64>,
    angles: usize,
    label: String,
}

impl ProbeGrid {
    pub fn new(radii: &[f64], angles: usize) -> Result<Self> {
        let mut points = Vec::new();
        for &r in radii {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidArgument(format!("probe radius {r} not in [0,1)")));
            }
            if r == 0.0 {
                points.push(Complex64::new(0.0, 0.0));
            } else {
                for j in 0..angles {
                    points.push(Complex64::from_polar(r, 2.0 * PI * j as f64 / angles as f64));
                }
            }
        }
        Ok(ProbeGrid {
            points,
            radii: radii.to_vec(),
            angles,
            label: format!("probe(radii={radii:?},angles={angles})"),
        })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Radii in construction order; a zero radius contributes one point,
    /// every other radius `angles` points starting at θ = 0.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angles(&self) -> usize {
        self.angles
    }
}

impl Default for ProbeGrid {
    fn default() -> Self {
        ProbeGrid::new(&[0.0, 0.5, 0.9, 0.99, 0.999], 64).expect("valid default probes")
    }
}

/// Circle used as an integration contour; its closure must lie in the disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourCircle {
    pub center: Complex64,
    pub radius: f64,
    pub nodes: usize,
}

impl ContourCircle {
    pub fn new(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0) || nodes == 0 || center.norm() + radius >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "circle |z - {center}| = {radius} does not lie in the disc"
            )));
        }
        Ok(ContourCircle { center, radius, nodes })
    }

    pub fn points(&self) -> Vec<Complex64> {
        (0..self.nodes)
            .map(|j| {
                self.center
                    + Complex64::from_polar(self.radius, 2.0 * PI * j as f64 / self.nodes as f64)
            })
            .collect()
    }
}
