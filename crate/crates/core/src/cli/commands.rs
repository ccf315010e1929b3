//! The pipelines behind each subcommand.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::*;
use super::report::samples_csv;
use super::CliError;
use crate::afn::AnalyticFunction;
use crate::blaschke::{separation_report, BlaschkeProduct};
use crate::disc::{sunflower, DiscPoint, ProbeGrid};
use crate::error::Error;
use crate::factor::{
    admissibility_probe, extract_factorization, riccati_transform, roundtrip_check, zero_free_correspondence,
    SpaceGrids, SpaceTag,
};
use crate::ode::field::residual_check;
use crate::ode::{locate_zeros, riccati_residual, riccati_solve, OdeProblem, RiccatiProblem, SolutionField};
use crate::spaces::{
    bloch_seminorm, bmoa_carleson_norm, carleson_sup, hardy2_littlewood_paley, hardy_growth_check,
    hinf_alpha_norm, hp_membership_verdict, littlewood_paley_grid, trace_cuts, MeasureDensity, NormEstimate,
    Verdict, VerdictRule, DEFAULT_HARDY_RADII,
};

/// A checked claim with the bound it was checked against.
#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub value: Value,
    pub limit: Value,
    pub pass: bool,
}

impl Assertion {
    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Assertion { name: name.into(), value: json!(value), limit: json!(limit), pass: value <= limit }
    }

    fn equals<T: Serialize + PartialEq>(name: impl Into<String>, value: T, want: T) -> Self {
        Assertion {
            name: name.into(),
            pass: value == want,
            value: json!(value),
            limit: json!(want),
        }
    }
}

/// What a command produced before it is wrapped into a report.
pub struct Outcome {
    pub results: Value,
    pub assertions: Vec<Assertion>,
    pub csv: Option<String>,
}

fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

/// Parses an expression, turning syntax errors into a caret diagnostic.
pub fn expression(field: &str, text: &str) -> Result<AnalyticFunction, CliError> {
    AnalyticFunction::expr(text).map_err(|e| match e {
        Error::Syntax { offset, .. } | Error::UnknownIdentifier { offset, .. } | Error::NonIntegerExponent { offset } => {
            CliError::Input(format!("{field}: {e}\n  {text}\n  {}^", " ".repeat(offset.min(text.len()))))
        }
        other => CliError::Input(format!("{field}: {other}")),
    })
}

fn check_radius(label: &str, z: Complex64, r_max: f64) -> Result<(), CliError> {
    if z.norm() > r_max * (1.0 + 1e-12) {
        return Err(CliError::Input(format!("{label} {z} lies outside the solver radius {r_max}")));
    }
    Ok(())
}

fn solution(coefficient: &str, f0: Complex64, f1: Complex64, solver: crate::ode::SolverConfig) -> Result<Arc<SolutionField>, CliError> {
    let a = expression("coefficient", coefficient)?;
    let problem = OdeProblem::new(a, f0, f1)?;
    Ok(Arc::new(SolutionField::new(problem, solver)?))
}

fn sampled_rows(field: &SolutionField, grid: &SampleGrid) -> Result<String, CliError> {
    let pts = grid.points();
    for z in &pts {
        check_radius("sample point", *z, field.config().r_max)?;
    }
    let states = crate::par_map(&pts, |&z| field.state(z));
    let mut rows = Vec::with_capacity(pts.len());
    for (z, s) in pts.into_iter().zip(states) {
        let s = s?;
        rows.push((z, s[0], s[1]));
    }
    Ok(samples_csv(&rows))
}

fn point_values(field: &SolutionField, points: &[Complex64]) -> Result<Vec<Value>, CliError> {
    points
        .iter()
        .map(|&z| {
            check_radius("point", z, field.config().r_max)?;
            let s = field.state(z)?;
            Ok(json!({"z": value(&z), "f": value(&s[0]), "f_prime": value(&s[1])}))
        })
        .collect()
}

pub fn solve(cfg: &SolveConfig, want_csv: bool) -> Result<Outcome, CliError> {
    let field = solution(&cfg.coefficient, cfg.f0, cfg.f1, cfg.solver)?;
    let radius = 0.9f64.min(cfg.solver.r_max);
    let residual = residual_check(&field, &sunflower(cfg.residual_samples, radius))?;
    let results = json!({
        "residual_certificate": {
            "max_relative_residual": residual,
            "samples": cfg.residual_samples,
            "sample_radius": radius,
            "method": "five-point differences of integrated f', relative to 1 + |f|",
        },
        "maclaurin_terms": field.maclaurin().coefficients.len(),
        "points": point_values(&field, &cfg.points)?,
    });
    Ok(Outcome {
        results,
        assertions: vec![Assertion::at_most("residual", residual, cfg.assertions.max_residual)],
        csv: if want_csv { Some(sampled_rows(&field, &cfg.samples)?) } else { None },
    })
}

pub fn factorize(cfg: &FactorizeConfig, want_csv: bool) -> Result<Outcome, CliError> {
    let r_max = cfg.solver.r_max;
    let tol = cfg.solver.tol;
    let zero_radius = cfg.zero_radius.unwrap_or(r_max);
    if !(zero_radius > 0.0 && zero_radius <= r_max) {
        return Err(CliError::Input(format!("zero_radius must lie in (0, {r_max}]")));
    }
    if !(cfg.roundtrip_radius > 0.0 && cfg.roundtrip_radius <= r_max) {
        return Err(CliError::Input(format!("roundtrip_radius must lie in (0, {r_max}]")));
    }
    let field = solution(&cfg.coefficient, cfg.f0, cfg.f1, cfg.solver)?;
    let residual = residual_check(&field, &sunflower(200, 0.9f64.min(r_max)))?;
    let zero_report = locate_zeros(&field, zero_radius, tol)?;
    let zeros: Vec<DiscPoint> = zero_report.zeros.clone();
    let grids = cfg.grids.clone().unwrap_or_else(|| FactorGrids::for_radius(r_max));
    let probes = ProbeGrid::new(&grids.probe_radii, grids.probe_angles)?;
    let bloch_grid = grids.bloch.build()?;
    let area_grid = grids.area.build()?;
    let separation = if zeros.is_empty() {
        None
    } else {
        Some(separation_report(&BlaschkeProduct::new(&zeros), &probes, &bloch_grid))
    };
    let mut fact = extract_factorization(&field, &zeros, tol)?;
    let roundtrip_points = sunflower(cfg.roundtrip_samples, cfg.roundtrip_radius);
    let roundtrip = roundtrip_check(
        field.coefficient(),
        &fact.b,
        &fact.g,
        &roundtrip_points,
        cfg.assertions.max_interpolation_residual,
    )?;
    let ray_points: Vec<Complex64> = (0..8)
        .flat_map(|k| {
            (1..=9).map(move |j| Complex64::from_polar(j as f64 / 10.0, std::f64::consts::PI * k as f64 / 4.0))
        })
        .filter(|z| z.norm() <= r_max)
        .collect();
    let reconstruction = fact.reconstruction_error(&ray_points)?;

    let mut hardy = Vec::new();
    let mut growth = None;
    if cfg.spaces {
        let space = fact.estimate_spaces(&bloch_grid, &probes, &area_grid)?.clone();
        let f = AnalyticFunction::from_arc(field.clone());
        let radii = cfg.hardy_radii.clone().unwrap_or_else(|| trace_cuts(r_max));
        for &p in &cfg.hardy_exponents {
            hardy.push(json!({"p": p, "estimate": value(&hp_membership_verdict(&f, p, &radii, VerdictRule::default())?)}));
        }
        growth = Some(hardy_growth_check(&f, space.bloch.value, 2.0, &radii, VerdictRule::default())?);
    }
    let summary = fact.summary();
    let results = json!({
        "residual_certificate": residual,
        "zeros": value(&zero_report),
        "separation": value(&separation),
        "factorization": value(&summary),
        "roundtrip": {"max_relative_error": roundtrip, "radius": cfg.roundtrip_radius, "samples": cfg.roundtrip_samples},
        "reconstruction": {"max_relative_error": reconstruction, "points": ray_points.len()},
        "hardy": hardy,
        "growth_check": value(&growth),
    });
    let mut assertions = vec![
        Assertion::at_most("interpolation residual", summary.max_residual, cfg.assertions.max_interpolation_residual),
        Assertion::at_most("coefficient round-trip", roundtrip, cfg.assertions.max_roundtrip_error),
        Assertion::at_most("B e^g reconstruction", reconstruction, cfg.assertions.max_reconstruction_error),
    ];
    if let Some(n) = cfg.assertions.zero_count {
        assertions.push(Assertion::equals("zero count", zeros.len(), n));
    }
    Ok(Outcome {
        results,
        assertions,
        csv: if want_csv { Some(sampled_rows(&field, &cfg.samples)?) } else { None },
    })
}

fn expect_assertion(label: &str, est: &NormEstimate, expect: Option<Verdict>) -> Option<Assertion> {
    expect.map(|v| Assertion::equals(format!("{label} verdict"), est.verdict, v))
}

pub fn verify(cfg: &VerifyConfig) -> Result<Outcome, CliError> {
    let grid = cfg.grid.build()?;
    let area = cfg.area_grid.build()?;
    let probes = ProbeGrid::new(&cfg.probe_radii, cfg.probe_angles)?;
    let mut results = Vec::new();
    let mut assertions = Vec::new();
    for (i, check) in cfg.checks.iter().enumerate() {
        let label = format!("check {i}");
        let (kind, payload) = match check {
            Check::Bloch { function, expect } => {
                let est = bloch_seminorm(&expression(&label, function)?, &grid)?;
                assertions.extend(expect_assertion(&format!("{label} bloch"), &est, *expect));
                ("bloch", value(&est))
            }
            Check::HinfAlpha { function, alpha, expect } => {
                let est = hinf_alpha_norm(&expression(&label, function)?, *alpha, &grid)?;
                assertions.extend(expect_assertion(&format!("{label} hinf_alpha"), &est, *expect));
                ("hinf_alpha", value(&est))
            }
            Check::Bmoa { function, expect } => {
                let est = bmoa_carleson_norm(&expression(&label, function)?, &probes, &area)?;
                assertions.extend(expect_assertion(&format!("{label} bmoa"), &est, *expect));
                ("bmoa", value(&est))
            }
            Check::Carleson { function, exponent, expect } => {
                let mu = MeasureDensity::weighted(&expression(&label, function)?, *exponent);
                let est = carleson_sup(&mu, &probes, &area)?;
                assertions.extend(expect_assertion(&format!("{label} carleson"), &est, *expect));
                ("carleson", value(&est))
            }
            Check::Hardy { function, p, radii, expect } => {
                let radii = radii.clone().unwrap_or_else(|| DEFAULT_HARDY_RADII.to_vec());
                let est = hp_membership_verdict(&expression(&label, function)?, *p, &radii, VerdictRule::default())?;
                assertions.extend(expect_assertion(&format!("{label} hardy"), &est, *expect));
                ("hardy", value(&est))
            }
            Check::LittlewoodPaley { function, expect_value, rel_tol } => {
                let est = hardy2_littlewood_paley(&expression(&label, function)?, &littlewood_paley_grid())?;
                if let Some(want) = expect_value {
                    let rel = (est.value - want).abs() / want.abs().max(f64::MIN_POSITIVE);
                    assertions.push(Assertion::at_most(format!("{label} littlewood_paley relative error"), rel, *rel_tol));
                }
                ("littlewood_paley", value(&est))
            }
            Check::Separation { zeros } => {
                let b = BlaschkeProduct::from_complex(zeros)?;
                ("separation", value(&separation_report(&b, &probes, &grid)))
            }
        };
        results.push(json!({"kind": kind, "result": payload}));
    }
    Ok(Outcome { results: json!({"checks": results}), assertions, csv: None })
}

fn pair(
    first: &Option<String>,
    second: &Option<String>,
    names: (&str, &str),
) -> Result<Option<(AnalyticFunction, AnalyticFunction)>, CliError> {
    match (first, second) {
        (Some(a), Some(b)) => Ok(Some((expression(names.0, a)?, expression(names.1, b)?))),
        (None, None) => Ok(None),
        _ => Err(CliError::Input(format!("{} and {} must be given together", names.0, names.1))),
    }
}

pub fn riccati(cfg: &RiccatiConfig) -> Result<Outcome, CliError> {
    let c = expression("c", &cfg.c)?;
    let transformed = pair(&cfg.ac, &cfg.b_plus_c_log_derivative, ("ac", "b_plus_c_log_derivative"))?;
    let direct = pair(&cfg.a, &cfg.b, ("a", "b"))?;
    let problem = match (transformed, direct) {
        (Some((ac, q)), direct) => {
            let p = RiccatiProblem::transformed(ac, q, c, cfg.g0, cfg.g1);
            match direct {
                Some((a, b)) => p.with_direct(a, b),
                None => p,
            }
        }
        (None, Some((a, b))) => RiccatiProblem::direct(a, b, c, cfg.g0, cfg.g1),
        (None, None) => {
            return Err(CliError::Input("supply ac and b_plus_c_log_derivative, or a and b".into()));
        }
    };
    if !(cfg.r_max > 0.0 && cfg.r_max < 1.0) {
        return Err(CliError::Input(format!("r_max must lie in (0,1), got {}", cfg.r_max)));
    }
    problem.check_coefficients(cfg.r_max)?;
    let mut points = Vec::new();
    for &z in &cfg.points {
        check_radius("point", z, cfg.r_max)?;
        let (g, gp) = riccati_solve(&problem, z, cfg.tol)?;
        points.push(json!({"z": value(&z), "g": value(&g), "g_prime": value(&gp)}));
    }
    let mut assertions = Vec::new();
    let results = if problem.transformed.is_some() {
        let grids = SpaceGrids {
            sup: crate::disc::GridSpec { r_max: cfg.r_max, ..Default::default() }.build()?,
            ..SpaceGrids::standard()?
        };
        let rep = riccati_transform(&problem, cfg.tag, &grids, &sunflower(cfg.samples, 0.9f64.min(cfg.r_max)), cfg.tol)?;
        assertions.push(Assertion::at_most("coefficient identity", rep.identity_defect, cfg.assertions.max_identity_defect));
        assertions.push(Assertion::at_most("linear residual", rep.linear_residual, cfg.assertions.max_linear_residual));
        if let Some(v) = cfg.assertions.expect {
            assertions.push(Assertion::equals("C g' verdict", rep.cg_prime_verdict, v));
        }
        json!({"transform": value(&rep), "points": points})
    } else {
        let samples = sunflower(cfg.samples.min(16), 0.9f64.min(cfg.r_max));
        let mut worst = 0.0f64;
        for &z in &samples {
            worst = worst.max(riccati_residual(&problem, z, cfg.tol, 8)?);
        }
        assertions.push(Assertion::at_most("riccati residual", worst, cfg.assertions.max_linear_residual));
        json!({"riccati_residual": worst, "points": points})
    };
    Ok(Outcome { results, assertions, csv: None })
}

pub fn admissibility(cfg: &AdmissibilityConfig) -> Result<Outcome, CliError> {
    if let SpaceTag::HinfAlpha(a) = cfg.tag {
        if !(a > 0.0) {
            return Err(CliError::Input(format!("hinf_alpha needs a positive exponent, got {a}")));
        }
    }
    let grids = match cfg.grids {
        GridChoice::Standard => SpaceGrids::standard()?,
        GridChoice::Coarse => SpaceGrids::coarse()?,
    };
    let suite = admissibility_probe(cfg.tag, &grids)?;
    let mut assertions = vec![Assertion::equals("probe", suite.pass, true)];
    let mut zero_free = Vec::new();
    for (i, text) in cfg.zero_free.iter().enumerate() {
        let rep = zero_free_correspondence(&expression(&format!("zero_free[{i}]"), text)?, cfg.tag, &grids)?;
        assertions.push(Assertion::at_most(format!("zero_free[{i}] identity"), rep.identity_defect, 1e-6));
        if !matches!(cfg.tag, SpaceTag::HinfAlpha(_)) {
            assertions.push(Assertion::equals(format!("zero_free[{i}] verdicts agree"), rep.g_verdict, rep.coefficient_verdict));
        }
        zero_free.push(value(&rep));
    }
    Ok(Outcome {
        results: json!({"probe": value(&suite), "zero_free": zero_free}),
        assertions,
        csv: None,
    })
}
