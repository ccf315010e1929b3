//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

mod common;

use std::f64::consts::{FRAC_PI_4, SQRT_2};
use std::time::Instant;

use common::*;
use disc_ode::afn::AnalyticFunction;
use disc_ode::blaschke::BlaschkeProduct;
use disc_ode::disc::{mobius_c, rho_c, GridSpec, ProbeGrid};
use disc_ode::factor::{
    admissibility_probe, coefficient_primitive, construct_coefficient, doubling_ratios, extract_factorization,
    local_univalence_check, local_univalence_radius, riccati_transform, schwarzian, space_quantities,
    verify_interpolation, zero_free_coefficient, SpaceGrids, SpaceTag,
};
use disc_ode::ode::{continue_to, find_zeros, RiccatiProblem};
use disc_ode::spaces::{
    bloch_seminorm, carleson_area_grid, carleson_sup, hardy2_littlewood_paley, hardy_growth_check, hardy_mean,
    hinf_alpha_norm, hp_membership_verdict, littlewood_paley_grid, MeasureDensity, Verdict, VerdictRule,
    DEFAULT_HARDY_RADII,
};
use disc_ode::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

trait Ctx<T> {
    fn ctx(self, what: &str) -> Result<T, String>;
}

impl<T, E: std::fmt::Display> Ctx<T> for Result<T, E> {
    fn ctx(self, what: &str) -> Result<T, String> {
        self.map_err(|e| format!("{what}: {e}"))
    }
}

fn require(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn max_abs<F: Fn(Complex64) -> f64>(pts: &[Complex64], f: F) -> f64 {
    pts.iter().map(|&z| f(z)).fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) })
}

fn criterion_1() -> Outcome {
    let s = sine(0.95);
    let zeros = find_zeros(&s, 0.95, 1e-10).ctx("zeros")?;
    let mut got: Vec<Complex64> = zeros.iter().map(|p| p.z()).collect();
    got.sort_by(|a, b| a.re.total_cmp(&b.re));
    let want = [c(-FRAC_PI_4, 0.0), c(0.0, 0.0), c(FRAC_PI_4, 0.0)];
    require(got.len() == 3, format!("found {} zeros", got.len()))?;
    let zero_err = got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    require(zero_err < 1e-10, format!("zero error {zero_err:e}"))?;
    let fact = extract_factorization(&s, &zeros, 1e-10).ctx("factorization")?;
    let residual = fact.max_residual();
    require(residual < 1e-8, format!("interpolation residual {residual:e}"))?;
    let built = construct_coefficient(&fact.b, &fact.g, 1e-8).ctx("construct")?;
    let pts = disc_samples(600, 0.9);
    let err = max_abs(&pts, |z| (built.value(z) - 16.0).norm());
    require(err < 1e-7, format!("|A_built - 16| = {err:e}"))?;
    Ok(format!("zeros within {zero_err:.1e}, residual {residual:.1e}, |A_built - 16| {err:.1e}"))
}

fn criterion_2() -> Outcome {
    let b = BlaschkeProduct::from_complex(&[c(0.0, 0.0)]).ctx("B")?;
    let g = expr("z^2");
    let residual = verify_interpolation(&b, &g.derived(), &[c(0.0, 0.0)]).ctx("interpolation")?[0].norm();
    require(residual == 0.0, format!("interpolation residual {residual:e}"))?;
    let built = construct_coefficient(&b, &g, 1e-10).ctx("construct")?;
    let pts = disc_samples(600, 0.9);
    let a_err = max_abs(&pts, |z| (built.value(z) + 6.0 + 4.0 * z * z).norm());
    require(a_err < 1e-10, format!("|A_built + 6 + 4z^2| = {a_err:e}"))?;
    let s = gaussian(0.95);
    let mut f_err = 0.0f64;
    for &z in &pts {
        let f = s.state(z).ctx("solve")?[0];
        f_err = f_err.max((f - z * (z * z).exp()).norm());
    }
    require(f_err < 1e-8, format!("|f - z e^(z^2)| = {f_err:e}"))?;
    Ok(format!("|A_built + 6 + 4z^2| {a_err:.1e}, |f - z e^(z^2)| {f_err:.1e}"))
}

fn criterion_3() -> Outcome {
    let sin = AnalyticFunction::from_arc(solve("4", c(0.0, 0.0), c(2.0, 0.0), 0.99));
    let cos = AnalyticFunction::from_arc(solve("4", c(1.0, 0.0), c(0.0, 0.0), 0.99));
    let s = schwarzian(&sin.div(&cos));
    let poles = [c(FRAC_PI_4, 0.0), c(-FRAC_PI_4, 0.0)];
    let pts: Vec<Complex64> = disc_samples(1500, 0.95)
        .into_iter()
        .filter(|&z| poles.iter().all(|&p| rho_c(z, p) > 0.1))
        .collect();
    let err = max_abs(&pts, |z| (s.value(z) - 8.0).norm());
    require(err < 1e-7, format!("|S - 8| = {err:e}"))?;
    let eta = local_univalence_radius(8.0);
    require(eta == 0.5, format!("univalence radius {eta}"))?;
    Ok(format!("|S_tan(2z) - 8| {err:.1e} on {} samples, radius {eta}", pts.len()))
}

fn criterion_4() -> Outcome {
    let g = expr("0.5*log(1-z)");
    let a = zero_free_coefficient(&g);
    let pts = disc_samples(400, 0.99);
    let a_err = max_abs(&pts, |z| {
        let w = 0.25 / ((1.0 - z) * (1.0 - z));
        (a.value(z) - w).norm() / w.norm()
    });
    require(a_err < 1e-12, format!("A differs from (1-z)^-2/4 by {a_err:e}"))?;
    let grid = GridSpec::default().build().ctx("grid")?;
    let bloch = bloch_seminorm(&g, &grid).ctx("bloch")?.value;
    let hinf = hinf_alpha_norm(&a, 2.0, &grid).ctx("hinf")?.value;
    require((bloch - 1.0).abs() <= 0.02, format!("Bloch seminorm {bloch}"))?;
    require((hinf - 1.0).abs() <= 0.02, format!("H^inf_2 norm {hinf}"))?;
    let area = carleson_area_grid().build().ctx("area grid")?;
    let carleson = carleson_sup(&MeasureDensity::coefficient(&a), &ProbeGrid::default(), &area).ctx("carleson")?;
    require(carleson.verdict == Verdict::Finite, format!("Carleson trace {:?}", carleson.refinement_trace))?;
    Ok(format!("Bloch {bloch:.4}, H^inf_2 {hinf:.4}, Carleson {:.4} finite", carleson.value))
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    for (name, s) in [("sin(4z)", sine(0.9999)), ("z e^(z^2)", gaussian(0.9999)), ("(1-z)^(1/2)", root(0.9999))] {
        let f = AnalyticFunction::from_arc(s);
        for p in [0.5, 1.0, 2.0] {
            let est = hp_membership_verdict(&f, p, &DEFAULT_HARDY_RADII, VerdictRule::default()).ctx(name)?;
            require(est.verdict == Verdict::Finite, format!("{name} p={p}: {:?}", est.refinement_trace))?;
        }
        lines.push(name);
    }
    let pole = hp_membership_verdict(&expr("1/(1-z)"), 2.0, &DEFAULT_HARDY_RADII, VerdictRule::default()).ctx("pole")?;
    require(pole.verdict == Verdict::Divergent, format!("1/(1-z): {:?}", pole.refinement_trace))?;
    Ok(format!("{} finite at p = 0.5, 1, 2; 1/(1-z) divergent at p = 2", lines.join(", ")))
}

fn lacunary(k_max: u32) -> AnalyticFunction {
    let terms: Vec<String> = (0..=k_max).map(|k| format!("z^{}", 1u64 << k)).collect();
    expr(&terms.join(" + "))
}

fn criterion_6() -> Outcome {
    let grids = SpaceGrids::standard().ctx("grids")?;
    let mut bloch = Vec::new();
    let mut carleson = Vec::new();
    for k in [4, 8, 12] {
        let g = lacunary(k);
        bloch.push(bloch_seminorm(&g, &grids.sup).ctx("bloch")?.value);
        let a = zero_free_coefficient(&g);
        carleson.push(space_quantities(SpaceTag::Bmoa, 2, &a, &grids).ctx("carleson")?[0].value);
    }
    let lo = bloch.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = bloch.iter().copied().fold(0.0, f64::max);
    require(hi / lo < 1.2, format!("Bloch seminorms {bloch:?}"))?;
    let growth = carleson[2] / carleson[0];
    require(growth >= 1.5, format!("Carleson quantities {carleson:?}"))?;
    Ok(format!(
        "Bloch {:.3}/{:.3}/{:.3} (spread {:.1}%), Carleson of A_K {:.3}/{:.3}/{:.3} (x{growth:.2})",
        bloch[0],
        bloch[1],
        bloch[2],
        100.0 * (hi / lo - 1.0),
        carleson[0],
        carleson[1],
        carleson[2]
    ))
}

fn criterion_7() -> Outcome {
    let r = coefficient_primitive(&expr("z"));
    let pts = disc_samples(400, 0.99);
    let err = max_abs(&pts, |z| (r.value(z) + 0.5 * z * z).norm());
    require(err < 1e-10, format!("|R(z) + z^2/2| = {err:e}"))?;
    let grids = SpaceGrids::standard().ctx("grids")?;
    let suite = admissibility_probe(SpaceTag::HinfAlpha(0.5), &grids).ctx("probe")?;
    let g = suite.g_estimate.as_ref().expect("growth probe");
    let rg = suite.primitive_estimate.as_ref().expect("growth probe");
    require((g.value - SQRT_2).abs() <= 0.03, format!("H^inf_1/2 norm of g {}", g.value))?;
    let trace: Vec<f64> = rg.refinement_trace.iter().map(|t| t.1).collect();
    let cuts: Vec<f64> = rg.refinement_trace.iter().map(|t| t.0).collect();
    require(cuts == [0.9, 0.99, 0.999], format!("trace radii {cuts:?}"))?;
    require(rg.trace_ratios().iter().all(|&q| q > 1.5), format!("R(g) trace {trace:?}"))?;
    Ok(format!(
        "|R(z) + z^2/2| {err:.1e}, |g| {:.4}, R(g) trace {:.3}/{:.3}/{:.3}",
        g.value, trace[0], trace[1], trace[2]
    ))
}

fn criterion_8() -> Outcome {
    let p = RiccatiProblem::transformed(expr("1/(1-z)"), expr("0"), expr("1-z"), c(0.0, 0.0), c(0.0, 0.0));
    let grids = SpaceGrids { sup: GridSpec::default().build().ctx("grid")?, ..SpaceGrids::coarse().ctx("grids")? };
    let rep = riccati_transform(&p, SpaceTag::Bloch, &grids, &disc_samples(100, 0.9), 1e-11).ctx("transform")?;
    require(rep.identity_defect < 1e-7, format!("identity defect {:e}", rep.identity_defect))?;
    require(rep.linear_residual < 1e-7, format!("linear residual {:e}", rep.linear_residual))?;
    let est = &rep.cg_prime[0];
    let n = est.refinement_trace.len();
    let (r_last, last) = est.refinement_trace[n - 1];
    let prev = est.refinement_trace[n - 2].1;
    let inc = (last - prev) / prev;
    require(
        est.verdict == Verdict::Finite && (r_last - 0.999).abs() < 1e-12 && inc < 0.1,
        format!("sup |C g'|(1-|z|^2) trace {:?}", est.refinement_trace),
    )?;
    Ok(format!(
        "identity {:.1e}, residual {:.1e}, sup |C g'|(1-|z|^2) = {last:.4} (increment {inc:.1e})",
        rep.identity_defect, rep.linear_residual
    ))
}

fn criterion_9() -> Outcome {
    let s = sine(0.95);
    let zeros = find_zeros(&s, 0.95, 1e-10).ctx("zeros")?;
    let grid = GridSpec { r_max: 0.99, levels: 40, ..GridSpec::default() }.build().ctx("grid")?;
    let entries = local_univalence_check(&s, &zeros, &[0.05, 0.1, 0.2], &grid, Some(0.1)).ctx("check")?;
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for e in entries.iter().filter(|e| e.delta == 0.1) {
        let margin = e.injectivity_margin.unwrap_or(0.0);
        if !(margin > 1e-10) || e.critical_point.is_some() {
            failures.push(format!("injectivity at {:.4}: margin {margin:e}", e.zero));
        }
    }
    for (zero, delta, ratio) in doubling_ratios(&entries) {
        notes.push(format!("z={:+.4}: {delta}->{}: {ratio:.3}", zero.re, 2.0 * delta));
        if !(1.2..=3.5).contains(&ratio) {
            failures.push(format!("ratio {ratio:.3} at zero {:+.4}, delta {delta}", zero.re));
        }
    }
    if failures.is_empty() {
        Ok(format!("doubling ratios {}", notes.join(", ")))
    } else {
        Err(format!("{} (all ratios: {})", failures.join("; "), notes.join(", ")))
    }
}

fn criterion_10() -> Outcome {
    let grid = littlewood_paley_grid();
    let mut worst = 0.0f64;
    for (text, want) in [("z", 1.0), ("z^2", 1.0), ("1 + 3*z + 2*z^5", 14.0)] {
        let got = hardy2_littlewood_paley(&expr(text), &grid).ctx(text)?.value;
        let rel = (got - want).abs() / want;
        require(rel < 1e-6, format!("{text}: {got} vs {want}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("max relative error {worst:.1e}"))
}

fn criterion_11() -> Outcome {
    let s = gaussian(0.999);
    let zeros = find_zeros(&s, 0.999, 1e-10).ctx("zeros")?;
    require(zeros.len() == 1, format!("{} zeros", zeros.len()))?;
    let fact = extract_factorization(&s, &zeros, 1e-10).ctx("factorization")?;
    let grid = GridSpec::default().build().ctx("grid")?;
    let norm = bloch_seminorm(&fact.g, &grid).ctx("bloch")?.value;
    let want = 4.0 / (3.0 * 3f64.sqrt());
    require((norm - want).abs() < 1e-2, format!("Bloch seminorm of g {norm} vs {want}"))?;
    let f = AnalyticFunction::from_arc(s);
    let est = hardy_growth_check(&f, norm, 2.0, &[0.9, 0.99, 0.999], VerdictRule::default()).ctx("growth")?;
    require(est.verdict == Verdict::Finite, format!("trace {:?}", est.refinement_trace))?;
    let t: Vec<String> = est.refinement_trace.iter().map(|x| format!("{:.4}", x.1)).collect();
    Ok(format!("|g|_B = {norm:.5}, damped trace {}", t.join("/")))
}

fn criterion_12() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut point = |r: f64| -> Complex64 {
        let rad = r * rng.gen::<f64>().sqrt();
        Complex64::from_polar(rad, rng.gen_range(0.0..std::f64::consts::TAU))
    };
    let n = 1000;
    let samples: Vec<(Complex64, Complex64, Complex64)> = (0..n).map(|_| (point(0.99), point(0.99), point(0.99))).collect();
    let mut involution = 0.0f64;
    let mut invariance = 0.0f64;
    for &(a, z, w) in &samples {
        involution = involution.max((mobius_c(a, mobius_c(a, z)) - z).norm());
        invariance = invariance.max((rho_c(mobius_c(a, z), mobius_c(a, w)) - rho_c(z, w)).abs());
    }
    require(involution < 1e-12, format!("involution error {involution:e}"))?;
    require(invariance < 1e-10, format!("rho invariance error {invariance:e}"))?;

    let sin = sine(0.95);
    let cos = solve("16", c(1.0, 0.0), c(0.0, 0.0), 0.95);
    let mut wronskian = 0.0f64;
    for &(z, _, _) in samples.iter().filter(|s| s.0.norm() <= 0.95) {
        let (u, v) = (sin.state(z).ctx("sin")?, cos.state(z).ctx("cos")?);
        wronskian = wronskian.max((u[0] * v[1] - u[1] * v[0] + 4.0).norm());
    }
    require(wronskian < 1e-8, format!("Wronskian drift {wronskian:e}"))?;

    let mut agreement = 0.0f64;
    for k in 0..n {
        let z = point(0.5);
        let s = if k % 2 == 0 { &sin } else { &cos };
        let cont = continue_to(s, disc_ode::disc::DiscPoint::from_complex(z).unwrap(), 1e-11).ctx("continue")?;
        agreement = agreement.max((s.maclaurin().eval_unchecked(z, 0) - cont.f).norm());
    }
    require(agreement < 1e-9, format!("series/continuation gap {agreement:e}"))?;

    let f = AnalyticFunction::from_arc(gaussian(0.95));
    let mut violations = 0;
    let mut radii: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..0.95)).collect();
    radii.sort_by(f64::total_cmp);
    let means: Vec<f64> = radii
        .iter()
        .map(|&r| hardy_mean(&f, 2.0, r, 256))
        .collect::<Result<_, _>>()
        .ctx("hardy mean")?;
    for w in means.windows(2) {
        if w[1] < w[0] * (1.0 - 1e-12) {
            violations += 1;
        }
    }
    require(violations == 0, format!("{violations} monotonicity violations"))?;
    Ok(format!(
        "involution {involution:.1e}, rho {invariance:.1e}, Wronskian {wronskian:.1e}, series/continuation {agreement:.1e}, hardy monotone on {n} radii"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("factorization round-trip", criterion_1),
        ("converse construction", criterion_2),
        ("Schwarzian identity", criterion_3),
        ("zero-free correspondence", criterion_4),
        ("H^p membership", criterion_5),
        ("BMOA vs Bloch discrimination", criterion_6),
        ("operator R and admissibility failure", criterion_7),
        ("Riccati transform", criterion_8),
        ("local univalence near zeros", criterion_9),
        ("Littlewood-Paley", criterion_10),
        ("growth of Hardy means", criterion_11),
        ("infrastructure invariants", criterion_12),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let k = i + 1;
        if only.is_some_and(|o| o != k) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {k:>2} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                println!("criterion {k:>2} FAIL  {name}: {detail} [{secs:.1}s]");
                failed.push(k);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
