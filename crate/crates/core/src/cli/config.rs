//! Per-command run configurations. Unknown keys are rejected and every
//! config carries `schema_version`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disc::GridSpec;
use crate::factor::SpaceTag;
use crate::ode::SolverConfig;
use crate::spaces::Verdict;

pub const SCHEMA_VERSION: u32 = 1;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Radii × equally spaced angles at which sampled values are exported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleGrid {
    pub radii: Vec<f64>,
    pub angles: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid {
            radii: (1..=9).map(|k| k as f64 / 10.0).collect(),
            angles: 32,
        }
    }
}

impl SampleGrid {
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for &r in &self.radii {
            for j in 0..self.angles {
                out.push(Complex64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / self.angles as f64));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveAssertions {
    /// Bound on max |f″ + A f| / (1 + |f|).
    pub max_residual: f64,
}

impl Default for SolveAssertions {
    fn default() -> Self {
        SolveAssertions { max_residual: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub schema_version: u32,
    /// Expression for A.
    pub coefficient: String,
    pub f0: Complex64,
    pub f1: Complex64,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Points at which f and f′ are reported.
    #[serde(default)]
    pub points: Vec<Complex64>,
    #[serde(default = "default_residual_samples")]
    pub residual_samples: usize,
    /// Grid for the CSV export.
    #[serde(default)]
    pub samples: SampleGrid,
    #[serde(default)]
    pub assertions: SolveAssertions,
}

fn default_residual_samples() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FactorizeAssertions {
    pub max_interpolation_residual: f64,
    /// Bound on max |A_built − A| / (1 + |A|) on |z| ≤ roundtrip_radius.
    pub max_roundtrip_error: f64,
    /// Bound on max |B e^g − f| / (1 + |f|).
    pub max_reconstruction_error: f64,
    pub zero_count: Option<usize>,
}

impl Default for FactorizeAssertions {
    fn default() -> Self {
        FactorizeAssertions {
            max_interpolation_residual: 1e-8,
            max_roundtrip_error: 1e-7,
            max_reconstruction_error: 1e-7,
            zero_count: None,
        }
    }
}

/// Grids for the Bloch and BMOA estimates of g; defaults follow the solver radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorGrids {
    pub bloch: GridSpec,
    pub area: GridSpec,
    pub probe_radii: Vec<f64>,
    pub probe_angles: usize,
}

impl FactorGrids {
    pub fn for_radius(r_max: f64) -> Self {
        FactorGrids {
            bloch: GridSpec { r_max, levels: 40, ..GridSpec::default() },
            area: GridSpec { r_max, levels: 60, angular_density: 8.0, max_angles: 1 << 14, angle_multiple: 64 },
            probe_radii: vec![0.0, 0.5, 0.9],
            probe_angles: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorizeConfig {
    pub schema_version: u32,
    pub coefficient: String,
    pub f0: Complex64,
    pub f1: Complex64,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Radius of the zero search; defaults to the solver radius.
    #[serde(default)]
    pub zero_radius: Option<f64>,
    #[serde(default = "default_roundtrip_radius")]
    pub roundtrip_radius: f64,
    #[serde(default = "default_residual_samples")]
    pub roundtrip_samples: usize,
    #[serde(default = "default_hardy_exponents")]
    pub hardy_exponents: Vec<f64>,
    /// Radii of the Hardy traces; defaults to the standard cuts inside the solver radius.
    #[serde(default)]
    pub hardy_radii: Option<Vec<f64>>,
    /// Run the Bloch/BMOA estimates of g and the growth check.
    #[serde(default = "yes")]
    pub spaces: bool,
    #[serde(default)]
    pub grids: Option<FactorGrids>,
    #[serde(default)]
    pub samples: SampleGrid,
    #[serde(default)]
    pub assertions: FactorizeAssertions,
}

fn yes() -> bool {
    true
}

fn default_roundtrip_radius() -> f64 {
    0.9
}

fn default_hardy_exponents() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

/// One verification check on an explicit function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    Bloch {
        function: String,
        #[serde(default)]
        expect: Option<Verdict>,
    },
    HinfAlpha {
        function: String,
        alpha: f64,
        #[serde(default)]
        expect: Option<Verdict>,
    },
    Bmoa {
        function: String,
        #[serde(default)]
        expect: Option<Verdict>,
    },
    /// Carleson verdict of |f|²(1 − |z|²)^exponent dm.
    Carleson {
        function: String,
        exponent: f64,
        #[serde(default)]
        expect: Option<Verdict>,
    },
    Hardy {
        function: String,
        p: f64,
        #[serde(default)]
        radii: Option<Vec<f64>>,
        #[serde(default)]
        expect: Option<Verdict>,
    },
    LittlewoodPaley {
        function: String,
        /// Expected ‖f‖²_{H²}, compared to relative `rel_tol`.
        #[serde(default)]
        expect_value: Option<f64>,
        #[serde(default = "default_rel_tol")]
        rel_tol: f64,
    },
    /// Separation diagnostics of a finite zero set.
    Separation { zeros: Vec<Complex64> },
}

fn default_rel_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub schema_version: u32,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "crate::spaces::carleson_area_grid")]
    pub area_grid: GridSpec,
    #[serde(default = "default_probe_radii")]
    pub probe_radii: Vec<f64>,
    #[serde(default = "default_probe_angles")]
    pub probe_angles: usize,
}

fn default_probe_radii() -> Vec<f64> {
    vec![0.0, 0.5, 0.9, 0.99, 0.999]
}

fn default_probe_angles() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RiccatiAssertions {
    pub max_identity_defect: f64,
    pub max_linear_residual: f64,
    pub expect: Option<Verdict>,
}

impl Default for RiccatiAssertions {
    fn default() -> Self {
        RiccatiAssertions {
            max_identity_defect: 1e-7,
            max_linear_residual: 1e-7,
            expect: Some(Verdict::Finite),
        }
    }
}

/// Either the transformed pair (AC, B + C′/C) or the direct pair (A, B), or both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiccatiConfig {
    pub schema_version: u32,
    pub c: String,
    #[serde(default)]
    pub ac: Option<String>,
    #[serde(default)]
    pub b_plus_c_log_derivative: Option<String>,
    #[serde(default)]
    pub a: Option<String>,
    #[serde(default)]
    pub b: Option<String>,
    #[serde(default = "zero")]
    pub g0: Complex64,
    #[serde(default = "zero")]
    pub g1: Complex64,
    #[serde(default = "default_tag")]
    pub tag: SpaceTag,
    #[serde(default = "default_riccati_tol")]
    pub tol: f64,
    /// Outer radius of the space-quantity grid.
    #[serde(default = "default_riccati_radius")]
    pub r_max: f64,
    #[serde(default = "default_riccati_samples")]
    pub samples: usize,
    /// Points at which g and g′ are reported.
    #[serde(default)]
    pub points: Vec<Complex64>,
    #[serde(default)]
    pub assertions: RiccatiAssertions,
}

fn default_tag() -> SpaceTag {
    SpaceTag::Bloch
}

fn default_riccati_tol() -> f64 {
    1e-11
}

fn default_riccati_radius() -> f64 {
    0.999
}

fn default_riccati_samples() -> usize {
    64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridChoice {
    Standard,
    Coarse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilityConfig {
    pub schema_version: u32,
    pub tag: SpaceTag,
    /// Expressions g whose zero-free solutions e^g are reported.
    #[serde(default)]
    pub zero_free: Vec<String>,
    #[serde(default = "default_grid_choice")]
    pub grids: GridChoice,
}

fn default_grid_choice() -> GridChoice {
    GridChoice::Standard
}
