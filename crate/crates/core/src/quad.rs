//! Quadrature rules shared by the estimators and path integrals.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Globally adaptive Gauss-Kronrod integration of a complex-valued function
/// over a real interval. Stops when the summed error estimate is below
/// `abs_tol + rel_tol * |I|`.
pub fn adaptive_gk<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<(Complex64, f64)> {
    let mut panels: Vec<(f64, f64, Complex64, f64)> = Vec::new();
    let (v, e) = gk15(&f, a, b);
    panels.push((a, b, v, e));
    let mut subdivisions = 0;
    loop {
        let total: Complex64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                subdivisions,
                estimate: f64::INFINITY,
            });
        }
        if err <= abs_tol.max(rel_tol * total.norm()) {
            return Ok((total, err));
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                subdivisions,
                estimate: err,
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (pa, pb, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&f, pa, mid);
        let (v2, e2) = gk15(&f, mid, pb);
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
        subdivisions += 1;
    }
}

/// Central five-point derivative of a complex function along the real direction.
pub fn five_point<F: Fn(Complex64) -> Complex64>(f: F, z: Complex64, h: f64) -> Complex64 {
    let h = Complex64::new(h, 0.0);
    (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h)
}

/// Taylor coefficients of `f` about `center` from the trapezoid rule applied
/// to the Cauchy integral on a circle of the given radius.
pub fn cauchy_coefficients<F: Fn(Complex64) -> Complex64>(
    f: F,
    center: Complex64,
    radius: f64,
    nodes: usize,
) -> Vec<Complex64> {
    let values: Vec<Complex64> = (0..nodes)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / nodes as f64;
            f(center + Complex64::from_polar(radius, t))
        })
        .collect();
    dft_coefficients(&values, radius)
}

/// Converts equispaced samples on a circle of radius `radius` into Taylor
/// coefficients (trapezoid rule, one coefficient per sample).
pub fn dft_coefficients(values: &[Complex64], radius: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    let mut scale = 1.0;
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            let t = -2.0 * std::f64::consts::PI * ((k * j) % n) as f64 / n as f64;
            acc += v * Complex64::from_polar(1.0, t);
        }
        out.push(acc / (n as f64 * scale));
        scale *= radius;
    }
    out
}

/// Derivative of order `order` at `z` from the Cauchy integral on a small circle.
pub fn cauchy_derivative<F: Fn(Complex64) -> Complex64>(
    f: F,
    z: Complex64,
    order: usize,
    radius: f64,
) -> Complex64 {
    let coeffs = cauchy_coefficients(f, z, radius, 32);
    let fact: f64 = (1..=order).map(|k| k as f64).product();
    coeffs[order] * fact
}
