//! Zeros of a solution inside |z| ≤ r_max by the argument principle.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::field::SolutionField;
use crate::disc::{rho_c, DiscPoint};
use crate::error::{Error, Result};
use crate::quad::adaptive_gk;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const BASE_NODES: usize = 512;
const MAX_NODES: usize = 1 << 16;
const MAX_PERTURBATIONS: usize = 5;
const INNER_FRACTION: f64 = 0.4713;
const ANGLE_OFFSET: f64 = 0.1234;
const SPLIT_FRACTIONS: [f64; 3] = [0.5, 0.437, 0.563];
const DEDUP_RHO: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct ZeroReport {
    /// Radius of the counting contour (r_max unless it had to be perturbed).
    pub contour_radius: f64,
    pub winding: usize,
    pub zeros: Vec<DiscPoint>,
    pub multiplicities: Vec<usize>,
    /// |f′| at each zero.
    pub derivative_moduli: Vec<f64>,
}

/// Zeros of the solution in |z| ≤ r_max, refined until |f| < tol.
pub fn find_zeros(s: &SolutionField, r_max: f64, tol: f64) -> Result<Vec<DiscPoint>> {
    Ok(locate_zeros(s, r_max, tol)?.zeros)
}

/// As `find_zeros`, with the winding count and multiplicities.
pub fn locate_zeros(s: &SolutionField, r_max: f64, tol: f64) -> Result<ZeroReport> {
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(Error::InvalidArgument(format!("r_max must lie in (0,1), got {r_max}")));
    }
    let mut found = None;
    for attempt in 0..=MAX_PERTURBATIONS {
        let r = r_max - attempt as f64 * 0.01 * (1.0 - r_max);
        if let Some((n, _)) = circle_count(s, r)? {
            found = Some((r, n));
            break;
        }
    }
    let (r, winding) = found.ok_or(Error::ContourThroughZero { attempts: MAX_PERTURBATIONS })?;
    let mut report = ZeroReport {
        contour_radius: r,
        winding,
        zeros: Vec::new(),
        multiplicities: Vec::new(),
        derivative_moduli: Vec::new(),
    };
    if winding == 0 {
        return Ok(report);
    }
    let mut raw: Vec<(Complex64, usize)> = Vec::new();
    let mut stack = vec![(Cell::Disc { r }, winding, ZERO)];
    while let Some((cell, count, moment)) = stack.pop() {
        match count {
            0 => {}
            1 => raw.push((newton(s, moment, tol)?, 1)),
            _ if cell.diameter() < 1e-9 => raw.push((newton(s, cell.center(), tol)?, count)),
            _ => stack.extend(split(s, cell, count)?),
        }
    }
    let mut merged: Vec<(Complex64, usize)> = Vec::new();
    for (z, m) in raw {
        match merged.iter_mut().find(|(w, _)| rho_c(*w, z) < DEDUP_RHO) {
            Some(entry) => entry.1 += m,
            None => merged.push((z, m)),
        }
    }
    merged.sort_by(|a, b| a.0.norm().total_cmp(&b.0.norm()).then(a.0.arg().total_cmp(&b.0.arg())));
    let located: usize = merged.iter().map(|e| e.1).sum();
    if located != winding {
        return Err(Error::CountMismatch { winding, located });
    }
    let scale = s.problem().f0.norm().max(s.problem().f1.norm()).max(1.0);
    for (z, m) in merged {
        let fp = s.state(z)?[1].norm();
        if m > 1 || fp <= 1e-12 * scale {
            return Err(Error::MultipleZero { z, multiplicity: m.max(2) });
        }
        report.zeros.push(DiscPoint::from_complex(z)?);
        report.multiplicities.push(m);
        report.derivative_moduli.push(fp);
    }
    Ok(report)
}

/// Winding number of f on |z| = r by the trapezoid rule, doubling the node
/// count until two successive levels agree on an integer. `None` when the
/// contour passes too close to a zero.
pub(crate) fn circle_count(s: &SolutionField, r: f64) -> Result<Option<(usize, Complex64)>> {
    let mut n = BASE_NODES;
    while n <= MAX_NODES {
        let states = s.circle_states(r, n)?;
        let big = states.iter().map(|y| y[0].norm()).fold(0.0, f64::max);
        if states.iter().any(|y| y[0].norm() < 1e-8 * big) {
            return Ok(None);
        }
        let mut full = ZERO;
        let mut half = ZERO;
        let mut moment = ZERO;
        for (k, y) in states.iter().enumerate() {
            let z = Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64);
            let w = z * y[1] / y[0];
            full += w;
            moment += z * w;
            if k % 2 == 0 {
                half += w;
            }
        }
        full /= n as f64;
        half /= (n / 2) as f64;
        let near = |w: Complex64| (w.re - w.re.round()).abs() < 0.1 && w.im.abs() < 0.1;
        if near(full) && near(half) && full.re.round() == half.re.round() {
            let k = full.re.round();
            if k < 0.0 {
                return Ok(None);
            }
            return Ok(Some((k as usize, moment / n as f64)));
        }
        n *= 2;
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy)]
enum Cell {
    Disc { r: f64 },
    Sector { r0: f64, r1: f64, t0: f64, t1: f64 },
}

impl Cell {
    fn diameter(self) -> f64 {
        match self {
            Cell::Disc { r } => 2.0 * r,
            Cell::Sector { r0, r1, t0, t1 } => (r1 - r0) + r1 * (t1 - t0),
        }
    }

    fn center(self) -> Complex64 {
        match self {
            Cell::Disc { .. } => ZERO,
            Cell::Sector { r0, r1, t0, t1 } => Complex64::from_polar(0.5 * (r0 + r1), 0.5 * (t0 + t1)),
        }
    }
}

type Counted = (Cell, usize, Complex64);

fn split(s: &SolutionField, cell: Cell, count: usize) -> Result<Vec<Counted>> {
    let mut last_err = None;
    for frac in SPLIT_FRACTIONS {
        let children: Vec<Cell> = match cell {
            Cell::Disc { r } => {
                let rho = INNER_FRACTION * r * (frac / 0.5);
                let mut v = vec![Cell::Disc { r: rho }];
                for k in 0..4 {
                    let t0 = ANGLE_OFFSET + k as f64 * PI / 2.0;
                    v.push(Cell::Sector { r0: rho, r1: r, t0, t1: t0 + PI / 2.0 });
                }
                v
            }
            Cell::Sector { r0, r1, t0, t1 } => {
                let rm = r0 + frac * (r1 - r0);
                let tm = t0 + frac * (t1 - t0);
                vec![
                    Cell::Sector { r0, r1: rm, t0, t1: tm },
                    Cell::Sector { r0, r1: rm, t0: tm, t1 },
                    Cell::Sector { r0: rm, r1, t0, t1: tm },
                    Cell::Sector { r0: rm, r1, t0: tm, t1 },
                ]
            }
        };
        match count_cells(s, &children) {
            Ok(counted) if counted.iter().map(|c| c.1).sum::<usize>() == count => return Ok(counted),
            Ok(counted) => {
                last_err = Some(Error::CountMismatch {
                    winding: count,
                    located: counted.iter().map(|c| c.1).sum(),
                })
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(Error::ContourThroughZero { attempts: SPLIT_FRACTIONS.len() }))
}

fn count_cells(s: &SolutionField, cells: &[Cell]) -> Result<Vec<Counted>> {
    cells
        .iter()
        .map(|&cell| {
            let (count, moment) = cell_integrals(s, cell)?;
            Ok((cell, count, moment))
        })
        .collect()
}

/// Zero count and first moment (sum of the zeros) of a cell.
fn cell_integrals(s: &SolutionField, cell: Cell) -> Result<(usize, Complex64)> {
    match cell {
        Cell::Disc { r } => {
            let (n, m) = circle_count(s, r)?.ok_or(Error::ContourThroughZero { attempts: 1 })?;
            Ok((n, m))
        }
        Cell::Sector { r0, r1, t0, t1 } => {
            let a = Complex64::from_polar(r0, t0);
            let b = Complex64::from_polar(r1, t0);
            let c = Complex64::from_polar(r1, t1);
            let d = Complex64::from_polar(r0, t1);
            let mut count = ZERO;
            let mut moment = ZERO;
            for edge in [
                Edge::Segment(a, b),
                Edge::Arc { r: r1, from: t0, to: t1 },
                Edge::Segment(c, d),
                Edge::Arc { r: r0, from: t1, to: t0 },
            ] {
                let (n, m) = edge_integrals(s, edge)?;
                count += n;
                moment += m;
            }
            let i2pi = Complex64::new(0.0, 2.0 * PI);
            let count = count / i2pi;
            if (count.re - count.re.round()).abs() > 0.2 || count.im.abs() > 0.2 || count.re.round() < 0.0 {
                return Err(Error::ContourThroughZero { attempts: 1 });
            }
            Ok((count.re.round() as usize, moment / i2pi))
        }
    }
}

#[derive(Clone, Copy)]
enum Edge {
    Segment(Complex64, Complex64),
    Arc { r: f64, from: f64, to: f64 },
}

impl Edge {
    fn at(self, t: f64) -> (Complex64, Complex64) {
        match self {
            Edge::Segment(a, b) => (a + (b - a) * t, b - a),
            Edge::Arc { r, from, to } => {
                let z = Complex64::from_polar(r, from + (to - from) * t);
                (z, Complex64::new(0.0, to - from) * z)
            }
        }
    }
}

/// ∫ f′/f dz and ∫ z f′/f dz along an edge, sharing state evaluations.
fn edge_integrals(s: &SolutionField, edge: Edge) -> Result<(Complex64, Complex64)> {
    let cache: RefCell<HashMap<u64, Complex64>> = RefCell::new(HashMap::new());
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let log_derivative = |t: f64| -> Complex64 {
        if let Some(v) = cache.borrow().get(&t.to_bits()) {
            return *v;
        }
        let (z, dz) = edge.at(t);
        let v = match s.state(z) {
            Ok(y) => y[1] / y[0] * dz,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(f64::NAN, f64::NAN)
            }
        };
        cache.borrow_mut().insert(t.to_bits(), v);
        v
    };
    let run = |g: &dyn Fn(f64) -> Complex64| adaptive_gk(g, 0.0, 1.0, 1e-9, 1e-9, 400);
    let count = run(&|t| log_derivative(t));
    let moment = run(&|t| edge.at(t).0 * log_derivative(t));
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (count, moment) = match (count, moment) {
        (Ok(c), Ok(m)) => (c.0, m.0),
        _ => return Err(Error::ContourThroughZero { attempts: 1 }),
    };
    Ok((count, moment))
}

fn newton(s: &SolutionField, start: Complex64, tol: f64) -> Result<Complex64> {
    let mut z = start;
    for _ in 0..60 {
        let [f, fp] = s.state(z)?;
        if fp.norm() == 0.0 {
            return Err(Error::MultipleZero { z, multiplicity: 2 });
        }
        let step = f / fp;
        z -= step;
        if z.norm() >= 1.0 {
            return Err(Error::OutsideDisc { re: z.re, im: z.im });
        }
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    let [f, fp] = s.state(z)?;
    if f.norm() >= tol * (1.0 + fp.norm()) {
        return Err(Error::MissedZero { z });
    }
    Ok(z)
}
