mod common;

use std::f64::consts::TAU;
use std::sync::Arc;

use common::*;
use disc_ode::afn::{maclaurin_of, path_integral_with, AnalyticFunction};
use disc_ode::blaschke::{blaschke_eval, separation_report, BlaschkeProduct};
use disc_ode::cli::report::format_float;
use disc_ode::disc::{
    integrate_area, make_polar_grid, mobius_c, mobius_deriv_c, rho_c, sunflower, DiscPoint, GridSpec, ProbeGrid,
};
use disc_ode::factor::{
    admissibility::primitive_identity_defect, extract_factorization, schwarzian, zero_free_coefficient,
};
use disc_ode::ode::{continue_to, find_zeros, OdeProblem, SolutionField, SolverConfig};
use disc_ode::quad::five_point;
use disc_ode::spaces::{
    bloch_seminorm, carleson_sup, hardy2_littlewood_paley, hardy_mean, hinf_alpha_norm, littlewood_paley_grid,
    MeasureDensity,
};
use disc_ode::Complex64;
use proptest::prelude::*;

fn disc_point(r_max: f64) -> impl Strategy<Value = Complex64> {
    (0.0..1.0f64, 0.0..TAU).prop_map(move |(s, t)| Complex64::from_polar(r_max * s.sqrt(), t))
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n)
}

fn poly_text(cs: &[(f64, f64)]) -> String {
    cs.iter()
        .enumerate()
        .map(|(k, (re, im))| format!("({re:?} + {im:?}*i)*z^{k}"))
        .collect::<Vec<_>>()
        .join(" + ")
}

proptest! {
    #[test]
    fn mobius_is_an_involution(a in disc_point(0.999), z in disc_point(0.999)) {
        prop_assert!((mobius_c(a, mobius_c(a, z)) - z).norm() < 1e-12);
    }

    #[test]
    fn pseudo_hyperbolic_metric_is_invariant(a in disc_point(0.99), z in disc_point(0.99), w in disc_point(0.99)) {
        let lhs = rho_c(mobius_c(a, z), mobius_c(a, w));
        prop_assert!((lhs - rho_c(z, w)).abs() < 1e-12);
    }

    #[test]
    fn mobius_derivative_modulus(a in disc_point(0.99), z in disc_point(0.99)) {
        let want = (1.0 - a.norm_sqr()) / (1.0 - a.conj() * z).norm_sqr();
        prop_assert!((mobius_deriv_c(a, z, 1).norm() - want).abs() < 1e-12 * want.max(1.0));
    }

    #[test]
    fn single_zero_blaschke_modulus_is_the_metric(a in disc_point(0.99), z in disc_point(0.99)) {
        let b = BlaschkeProduct::from_complex(&[a]).unwrap();
        prop_assert!((b.derivs(z, 0)[0].norm() - rho_c(z, a)).abs() < 1e-12);
    }

    #[test]
    fn blaschke_products_are_contractive(zeros in prop::collection::vec(disc_point(0.95), 1..6), z in disc_point(0.999)) {
        let b = BlaschkeProduct::from_complex(&zeros).unwrap();
        prop_assert!(b.derivs(z, 0)[0].norm() < 1.0);
    }

    #[test]
    fn blaschke_derivatives_match_differences(zeros in prop::collection::vec(disc_point(0.8), 1..5), z in disc_point(0.9)) {
        let b = BlaschkeProduct::from_complex(&zeros).unwrap();
        let p = DiscPoint::from_complex(z).unwrap();
        let h = 1e-3 * (1.0 - z.norm());
        let d1 = five_point(|w| b.derivs(w, 0)[0], z, h);
        let d2 = five_point(|w| b.derivs(w, 1)[1], z, h);
        let (e1, e2) = (blaschke_eval(&b, p, 1), blaschke_eval(&b, p, 2));
        prop_assert!((d1 - e1).norm() <= 1e-8 * (1.0 + e1.norm()), "{d1} vs {e1}");
        prop_assert!((d2 - e2).norm() <= 1e-8 * (1.0 + e2.norm()), "{d2} vs {e2}");
    }

    #[test]
    fn expression_derivatives_match_differences(cs in coeffs(3), k in 0.5..3.0f64, z in disc_point(0.95)) {
        let f = expr(&format!("{} + exp({k:?}*z)*sin(z) - log(1-z)/(2-z)", poly_text(&cs)));
        let h = 1e-3 * (1.0 - z.norm()).max(0.05);
        let fd = five_point(|w| f.value(w), z, h);
        let d = f.derivative(z, 1);
        prop_assert!((fd - d).norm() / (1.0 + d.norm()) < 1e-6);
    }

    #[test]
    fn series_matches_expression(cs in coeffs(4), z in disc_point(0.6)) {
        let f = expr(&format!("{} + exp(z)/(3-z)", poly_text(&cs)));
        let s = maclaurin_of(&f, 64, 0.9).unwrap();
        let want = f.value(z);
        prop_assert!((s.eval_unchecked(z, 0) - want).norm() < 1e-8 * (1.0 + want.norm()));
    }

    #[test]
    fn path_integrals_are_additive(a in disc_point(0.9), b in disc_point(0.9), t in 0.05..0.95f64) {
        let f = |z: Complex64| (2.0 * z).exp() / (1.5 - z);
        let tol = 1e-12;
        let m = a + (b - a) * t;
        let whole = path_integral_with(f, a, b, tol).unwrap();
        let split = path_integral_with(f, a, m, tol).unwrap() + path_integral_with(f, m, b, tol).unwrap();
        prop_assert!((whole - split).norm() <= 2.0 * tol * (1.0 + whole.norm()));
    }

    #[test]
    fn hardy_means_increase_with_radius(cs in coeffs(6), p in 0.5..4.0f64, r1 in 0.05..0.98f64, r2 in 0.05..0.98f64) {
        let f = expr(&poly_text(&cs));
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        let a = hardy_mean(&f, p, lo, 512).unwrap();
        let b = hardy_mean(&f, p, hi, 512).unwrap();
        prop_assert!(b >= a * (1.0 - 1e-12), "{a} > {b}");
    }

    #[test]
    fn littlewood_paley_is_parseval(cs in coeffs(7)) {
        let f = expr(&poly_text(&cs));
        let want: f64 = cs.iter().map(|(re, im)| re * re + im * im).sum();
        prop_assume!(want > 1e-3);
        let got = hardy2_littlewood_paley(&f, &littlewood_paley_grid()).unwrap().value;
        prop_assert!((got - want).abs() / want < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn floats_round_trip_through_reports(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let back: f64 = format_float(x).parse().unwrap();
        prop_assert_eq!(back, x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn suprema_grow_under_grid_refinement(cs in coeffs(4), alpha in 0.0..2.0f64, levels in 4usize..20) {
        let f = expr(&format!("{} + 1/(1.05-z)", poly_text(&cs)));
        let coarse = make_polar_grid(0.99, levels, 4.0).unwrap();
        let fine = make_polar_grid(0.99, 2 * levels, 4.0).unwrap();
        let a = hinf_alpha_norm(&f, alpha, &coarse).unwrap().value;
        let b = hinf_alpha_norm(&f, alpha, &fine).unwrap().value;
        prop_assert!(b >= a);
        let a = bloch_seminorm(&f, &coarse).unwrap().value;
        let b = bloch_seminorm(&f, &fine).unwrap().value;
        prop_assert!(b >= a);
    }

    #[test]
    fn carleson_sup_is_subadditive(c1 in coeffs(3), c2 in coeffs(3), e1 in 1.0..3.0f64, e2 in 1.0..3.0f64) {
        let (f, g) = (expr(&poly_text(&c1)), expr(&poly_text(&c2)));
        let probes = ProbeGrid::new(&[0.0, 0.5, 0.9], 16).unwrap();
        let grid = make_polar_grid(0.99, 20, 4.0).unwrap();
        let (w1, w2) = (MeasureDensity::weighted(&f, e1), MeasureDensity::weighted(&g, e2));
        let sum = carleson_sup(&w1.plus(&w2), &probes, &grid).unwrap().value;
        let parts = carleson_sup(&w1, &probes, &grid).unwrap().value + carleson_sup(&w2, &probes, &grid).unwrap().value;
        prop_assert!(sum <= parts * (1.0 + 1e-12));
    }

    #[test]
    fn area_integrals_converge(k in 0u32..4, r in 0.3..0.99f64) {
        // ∫_{|z|<r} |z|^{2k} dm = π r^{2k+2} / (k + 1)
        let want = std::f64::consts::PI * r.powi(2 * k as i32 + 2) / (k as f64 + 1.0);
        let errs: Vec<f64> = [8usize, 16, 32, 64]
            .iter()
            .map(|&levels| {
                let grid = make_polar_grid(r, levels, 8.0).unwrap();
                (integrate_area(&grid, |z| z.norm_sqr().powi(k as i32)).unwrap() - want).abs()
            })
            .collect();
        prop_assert!(errs[3] <= errs[0] + 1e-14, "{errs:?}");
        prop_assert!(errs[3] < 0.05 * want + 1e-12, "{errs:?}");
    }

    #[test]
    fn separation_lower_bound_holds_at_nodes(zeros in prop::collection::vec(disc_point(0.9), 1..5)) {
        let b = BlaschkeProduct::from_complex(&zeros).unwrap();
        let grid = make_polar_grid(0.95, 10, 4.0).unwrap();
        let rep = separation_report(&b, &ProbeGrid::new(&[0.0, 0.5], 8).unwrap(), &grid);
        for (z, _) in grid.nodes() {
            let dist = zeros.iter().map(|&a| rho_c(z, a)).fold(1.0, f64::min);
            prop_assert!(b.derivs(z, 0)[0].norm() >= rep.lower_bound_c * dist * (1.0 - 1e-12));
        }
    }

    #[test]
    fn primitive_identity(cs in coeffs(4), k in -1.0..1.0f64) {
        let g = expr(&format!("{} + {k:?}*log(1-z)", poly_text(&cs)));
        let defect = primitive_identity_defect(&g, &zero_free_coefficient(&g), &sunflower(20, 0.9)).unwrap();
        prop_assert!(defect < 1e-6, "{defect}");
    }

    #[test]
    fn schwarzian_chain_rule(a in disc_point(0.6), z in disc_point(0.5), k in 0.5..2.0f64) {
        let w = expr(&format!("sin({k:?}*z)/cos({k:?}*z) + z^3/3"));
        let comp = w.compose_mobius(a, 1.0);
        let phi = mobius_c(a, z);
        let d = mobius_deriv_c(a, z, 1);
        let want = schwarzian(&w).value(phi) * d * d;
        prop_assume!(want.norm() < 1e6 && w.derivative(phi, 1).norm() > 1e-3);
        let got = schwarzian(&comp).value(z);
        prop_assert!((got - want).norm() < 1e-8 * (1.0 + want.norm()), "{got} vs {want}");
    }
}

fn constant_field(k: f64, f0: Complex64, f1: Complex64, r_max: f64) -> Arc<SolutionField> {
    let p = OdeProblem::new(AnalyticFunction::constant(Complex64::new(k * k, 0.0)), f0, f1).unwrap();
    Arc::new(SolutionField::new(p, SolverConfig { r_max, ..SolverConfig::default() }).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn wronskian_is_conserved(k in 0.5..4.0f64, t in 0.0..TAU, pts in prop::collection::vec(disc_point(0.95), 20)) {
        let u0 = Complex64::from_polar(1.0, t);
        let s1 = constant_field(k, u0, c(0.0, 0.0), 0.95);
        let s2 = constant_field(k, c(0.0, 0.0), u0, 0.95);
        let w0 = u0 * u0;
        for z in pts {
            let (u, v) = (s1.state(z).unwrap(), s2.state(z).unwrap());
            let w = u[0] * v[1] - u[1] * v[0];
            prop_assert!((w - w0).norm() < 1e-8 * w0.norm());
        }
    }

    #[test]
    fn series_agrees_with_continuation(cs in coeffs(3), z in disc_point(0.5)) {
        let p = OdeProblem::from_expr(&poly_text(&cs), c(1.0, 0.0), c(0.5, -0.5)).unwrap();
        let s = SolutionField::new(p, SolverConfig::default()).unwrap();
        let cont = continue_to(&s, DiscPoint::from_complex(z).unwrap(), 1e-11).unwrap();
        prop_assert!((s.maclaurin().eval_unchecked(z, 0) - cont.f).norm() < 1e-9);
    }

    #[test]
    fn continuation_is_path_independent(cs in coeffs(3), z in disc_point(0.95), w in disc_point(0.9)) {
        let p = OdeProblem::from_expr(&poly_text(&cs), c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        let s = SolutionField::new(p, SolverConfig::default()).unwrap();
        let direct = s.state(z).unwrap();
        let via = s.state_from(w, s.state(w).unwrap(), z).unwrap();
        let scale = 1.0 + direct[0].norm() + direct[1].norm();
        prop_assert!((direct[0] - via[0]).norm() < 1e-8 * scale);
        prop_assert!((direct[1] - via[1]).norm() < 1e-8 * scale);
    }

    #[test]
    fn factorizations_interpolate_and_reconstruct(k in 1.0..5.0f64, t in 0.0..TAU, m in 0.0..1.0f64) {
        let f0 = Complex64::from_polar(m, t);
        let s = constant_field(k, f0, c(1.0, 0.0), 0.95);
        let zeros = find_zeros(&s, 0.95, 1e-10).unwrap();
        for p in &zeros {
            prop_assert!(s.state(p.z()).unwrap()[1].norm() > 1e-12);
        }
        let fact = extract_factorization(&s, &zeros, 1e-10).unwrap();
        prop_assert!(fact.max_residual() < 1e-8, "{}", fact.max_residual());
        let rays: Vec<Complex64> = (0..8)
            .flat_map(|j| (1..=9).map(move |i| Complex64::from_polar(i as f64 / 10.0, TAU * j as f64 / 8.0)))
            .collect();
        prop_assert!(fact.reconstruction_error(&rays).unwrap() < 1e-7);
        let a = AnalyticFunction::constant(Complex64::new(k * k, 0.0));
        let rt = disc_ode::factor::roundtrip_check(&a, &fact.b, &fact.g, &disc_samples(100, 0.9), 1e-8).unwrap();
        prop_assert!(rt < 1e-7, "{rt}");
    }
}

#[test]
fn grid_refinement_nests_nodes() {
    let a = GridSpec { r_max: 0.99, levels: 10, ..GridSpec::default() }.build().unwrap();
    let b = GridSpec { r_max: 0.99, levels: 20, ..GridSpec::default() }.build().unwrap();
    let radii_b = b.radii();
    for r in a.radii() {
        assert!(radii_b.iter().any(|&s| (s - r).abs() < 1e-15), "{r}");
    }
}
