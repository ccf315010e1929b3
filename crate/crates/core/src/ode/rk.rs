//! Dormand-Prince 5(4) for complex systems along a parameterized path.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 2_000_000;

pub type State<const N: usize> = [Complex64; N];

/// Right-hand side y′ = F(z, y) in the complex variable z.
pub type RhsFn<'a, const N: usize> = &'a (dyn Fn(Complex64, &State<N>) -> State<N> + Sync);

/// Returns true when the state should be treated as a blow-up.
pub type GuardFn<'a, const N: usize> = &'a (dyn Fn(&State<N>) -> bool + Sync);

/// A path s ↦ (z(s), z′(s)).
pub type PathFn<'a> = &'a (dyn Fn(f64) -> (Complex64, Complex64) + Sync);

fn combine<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += k[i] * (h * c);
            }
        }
    }
    out
}

/// Integrates y′(z) = F(z, y) along `path` from s0 and returns the state at
/// each parameter in `outputs` (nondecreasing, all ≥ s0). Steps are clipped
/// to land on the outputs. Mixed absolute/relative local error target `tol`.
pub fn integrate_path<const N: usize>(
    rhs: RhsFn<'_, N>,
    path: PathFn<'_>,
    s0: f64,
    y0: State<N>,
    outputs: &[f64],
    tol: f64,
    guard: Option<GuardFn<'_, N>>,
) -> Result<Vec<State<N>>> {
    let f = |s: f64, y: &State<N>| -> State<N> {
        let (z, dz) = path(s);
        let mut v = rhs(z, y);
        for x in v.iter_mut() {
            *x *= dz;
        }
        v
    };
    let span = outputs.last().map_or(0.0, |&e| e - s0);
    let mut out = Vec::with_capacity(outputs.len());
    let mut s = s0;
    let mut y = y0;
    let mut k1 = f(s, &y);
    let mut h = 0.05 * span;
    let h_min = 1e-13 * span.max(1.0);
    let mut steps = 0usize;
    for &target in outputs {
        while s < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::StepUnderflow { reached: path(s).0 });
            }
            let last = target - s <= h * (1.0 + 1e-12);
            let hh = if last { target - s } else { h };
            let k2 = f(s + C2 * hh, &combine(&y, hh, &[(A21, &k1)]));
            let k3 = f(s + C3 * hh, &combine(&y, hh, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(s + C4 * hh, &combine(&y, hh, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                s + C5 * hh,
                &combine(&y, hh, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                s + hh,
                &combine(&y, hh, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = combine(&y, hh, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(s + hh, &y_new);
            let mut err: f64 = 0.0;
            let mut finite = true;
            for i in 0..N {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                    * hh;
                let scale = tol * (1.0 + y[i].norm().max(y_new[i].norm()));
                let ratio = e.norm() / scale;
                if !ratio.is_finite() || !y_new[i].re.is_finite() || !y_new[i].im.is_finite() {
                    finite = false;
                }
                err = err.max(ratio);
            }
            if !finite {
                if hh <= h_min {
                    return Err(Error::NonFinite { z: path(s).0 });
                }
                h = 0.25 * hh;
                continue;
            }
            if err <= 1.0 {
                if let Some(g) = guard {
                    if g(&y_new) {
                        return Err(Error::BlowUp {
                            reached: path(s).0,
                            guard: 0.0,
                        });
                    }
                }
                s = if last { target } else { s + hh };
                y = y_new;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // a clipped final step says nothing about the natural step size
                if !last || fac < 1.0 {
                    h = hh * fac;
                }
            } else {
                h = hh * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < h_min {
                    return Err(Error::StepUnderflow { reached: path(s).0 });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Straight segment from `from` to `to`, parameter s ∈ [0, 1].
pub fn integrate_segment<const N: usize>(
    rhs: RhsFn<'_, N>,
    from: Complex64,
    to: Complex64,
    y0: State<N>,
    tol: f64,
    guard: Option<GuardFn<'_, N>>,
) -> Result<State<N>> {
    let d = to - from;
    if d.norm() == 0.0 {
        return Ok(y0);
    }
    let path = move |s: f64| (from + d * s, d);
    let out = integrate_path(rhs, &path, 0.0, y0, &[1.0], tol, guard)?;
    Ok(out[0])
}
