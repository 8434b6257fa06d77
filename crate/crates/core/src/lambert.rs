//! Zero-revolution Lambert solver and the impulsive transfer baseline.
//!
//! The solver works in canonical units (AU, μ = 1) on the universal
//! variable `z`, using Newton steps kept inside a bisection bracket.

use std::f64::consts::{PI, TAU};

use crate::astro::{CartesianState, ScaleSet, Vec3, G0};
use crate::optctl::TransferProblem;
use crate::{Error, Result};

/// Transfer angles closer than this to π are rejected (plane undefined).
pub const PI_EXCLUSION: f64 = 1e-6;
/// Convergence tolerance on the canonical time-of-flight residual.
pub const TOF_TOL: f64 = 1e-10;

const MAX_ITERS: usize = 200;
const Z_UPPER: f64 = 4.0 * PI * PI;
const Z_FLOOR: f64 = -4.0e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Prograde,
    Retrograde,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambertSolution {
    pub v1: Vec3,
    pub v2: Vec3,
    pub iterations: usize,
    pub converged: bool,
}

/// Impulsive baseline quantities for one transfer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambertBaseline {
    pub delta_v: f64,
    pub mf_lam: f64,
    pub c: f64,
}

fn stumpff(z: f64) -> (f64, f64) {
    if z.abs() < 1e-3 {
        let s = 1.0 / 6.0 - z / 120.0 + z * z / 5040.0 - z * z * z / 362_880.0;
        let c = 0.5 - z / 24.0 + z * z / 720.0 - z * z * z / 40_320.0;
        (s, c)
    } else if z > 0.0 {
        let sz = z.sqrt();
        ((sz - sz.sin()) / (sz * sz * sz), (1.0 - sz.cos()) / z)
    } else {
        let sz = (-z).sqrt();
        ((sz.sinh() - sz) / (sz * sz * sz), (sz.cosh() - 1.0) / (-z))
    }
}

struct Geometry {
    r1: f64,
    r2: f64,
    a: f64,
}

impl Geometry {
    fn y(&self, z: f64) -> (f64, f64, f64) {
        let (s, c) = stumpff(z);
        (self.r1 + self.r2 + self.a * (z * s - 1.0) / c.sqrt(), s, c)
    }

    /// Time of flight at `z`; `None` where `y < 0` (no real solution).
    fn tof(&self, z: f64) -> Option<f64> {
        let (y, s, c) = self.y(z);
        if y < 0.0 {
            return None;
        }
        Some((y / c).powf(1.5) * s + self.a * y.sqrt())
    }

    fn dtof(&self, z: f64) -> f64 {
        let (y, s, c) = self.y(z);
        if z.abs() < 1e-4 {
            let y0 = y;
            2f64.sqrt() / 40.0 * y0.powf(1.5)
                + self.a / 8.0 * (y0.sqrt() + self.a * (0.5 / y0).sqrt())
        } else {
            (y / c).powf(1.5) * ((c - 1.5 * s / c) / (2.0 * z) + 0.75 * s * s / c)
                + self.a / 8.0 * (3.0 * s / c * y.sqrt() + self.a * (c / y).sqrt())
        }
    }
}

/// Solves the zero-revolution Lambert problem between `r1` and `r2` (m) in
/// `dt` seconds. The transfer angle is taken in `[0, 2π)` with the sense of
/// motion set by `direction` relative to the ecliptic +z axis.
pub fn lambert_solve(
    r1: &Vec3,
    r2: &Vec3,
    dt: f64,
    direction: Direction,
) -> Result<LambertSolution> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("lambert_solve: dt = {dt}")));
    }
    let n1 = r1.norm();
    let n2 = r2.norm();
    if !(n1 > 0.0) || !(n2 > 0.0) {
        return Err(Error::invalid("lambert_solve: zero position vector"));
    }
    let sc = ScaleSet::heliocentric(1.0);
    let (r1c, r2c) = (r1 / sc.length, r2 / sc.length);
    let tof = dt / sc.time;
    let (n1, n2) = (n1 / sc.length, n2 / sc.length);

    let cos_t = (r1c.dot(&r2c) / (n1 * n2)).clamp(-1.0, 1.0);
    let mut theta = r1c.cross(&r2c).norm().atan2(r1c.dot(&r2c));
    let cz = r1c.cross(&r2c).z;
    let flip = match direction {
        Direction::Prograde => cz < 0.0,
        Direction::Retrograde => cz >= 0.0,
    };
    if flip {
        theta = TAU - theta;
    }
    if (theta - PI).abs() < PI_EXCLUSION {
        return Err(Error::DegenerateGeometry(format!(
            "transfer angle {theta} within {PI_EXCLUSION} rad of π"
        )));
    }
    let a = theta.sin() * (n1 * n2 / (1.0 - cos_t)).sqrt();
    if !(a.abs() > 0.0) || !a.is_finite() {
        return Err(Error::DegenerateGeometry("zero transfer angle".into()));
    }
    let g = Geometry { r1: n1, r2: n2, a };
    let residual = |z: f64| g.tof(z).map_or(f64::NEG_INFINITY, |t| t - tof);

    // Bracket: F(lo) < 0 < F(hi). F → +∞ as z → 4π²; expand lo downwards.
    let mut hi = Z_UPPER * (1.0 - 1e-12);
    while residual(hi) <= 0.0 {
        // closer to 4π² only possible when tof is enormous
        hi = 0.5 * (hi + Z_UPPER);
        if Z_UPPER - hi < 1e-14 {
            return Err(Error::NoConvergence(
                "Lambert: cannot bracket upper bound".into(),
            ));
        }
    }
    let mut lo = -4.0 * PI * PI;
    while residual(lo) >= 0.0 {
        lo *= 2.0;
        if lo < Z_FLOOR {
            return Err(Error::NoConvergence(
                "Lambert: cannot bracket lower bound".into(),
            ));
        }
    }

    let mut z = if residual(0.0) < 0.0 {
        0.5 * (0.0 + hi).min(10.0)
    } else {
        0.0
    };
    if !(z > lo && z < hi) {
        z = 0.5 * (lo + hi);
    }
    let mut iterations = 0;
    let mut f = residual(z);
    while iterations < MAX_ITERS {
        iterations += 1;
        if f.abs() <= 1e-14 * tof.max(1.0) {
            break;
        }
        if f < 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        if hi - lo <= 4.0 * f64::EPSILON * (1.0 + z.abs()) {
            break;
        }
        let d = if f.is_finite() { g.dtof(z) } else { f64::NAN };
        let newton = z - f / d;
        z = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        f = residual(z);
    }
    let (y, _, _) = g.y(z);
    if !(y > 0.0) || !f.is_finite() {
        return Err(Error::NoConvergence(
            "Lambert: iteration left the physical branch".into(),
        ));
    }
    let ff = 1.0 - y / n1;
    let gg = a * y.sqrt();
    let gdot = 1.0 - y / n2;
    let v1 = (r2c - ff * r1c) / gg * sc.velocity();
    let v2 = (gdot * r2c - r1c) / gg * sc.velocity();
    Ok(LambertSolution {
        v1,
        v2,
        iterations,
        converged: f.abs() <= TOF_TOL,
    })
}

/// Two-impulse ΔV (m/s) for departing `departure` and matching `target`
/// after `dt` seconds along the prograde zero-revolution arc.
pub fn two_impulse_delta_v(
    departure: &CartesianState,
    target: &CartesianState,
    dt: f64,
) -> Result<f64> {
    let sol = lambert_solve(&departure.r, &target.r, dt, Direction::Prograde)?;
    if !sol.converged {
        return Err(Error::NoConvergence(
            "Lambert time of flight not met".into(),
        ));
    }
    Ok((sol.v1 - departure.v).norm() + (target.v - sol.v2).norm())
}

/// Lambert ΔV for a transfer problem (chaser departure state to target state).
pub fn lambert_delta_v(problem: &TransferProblem) -> Result<f64> {
    two_impulse_delta_v(
        &problem.departure_state(),
        &problem.target_state(),
        problem.dt,
    )
}

/// Rocket-equation remaining mass after an impulsive ΔV.
pub fn lambert_remaining_mass(m0: f64, delta_v: f64, isp: f64) -> f64 {
    m0 * (-delta_v / (isp * G0)).exp()
}

/// ΔV heuristic: feasible iff `ΔV < c·ΔT·Tmax/m0`.
pub fn lambert_feasibility(delta_v: f64, dt: f64, tmax: f64, m0: f64, c: f64) -> bool {
    delta_v < c * dt * tmax / m0
}

impl LambertBaseline {
    pub fn for_problem(problem: &TransferProblem, c: f64) -> Result<Self> {
        let delta_v = lambert_delta_v(problem)?;
        Ok(Self {
            delta_v,
            mf_lam: lambert_remaining_mass(problem.m0, delta_v, problem.craft.isp),
            c,
        })
    }
}

/// One labelled case for the feasibility heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineCase {
    pub delta_v: f64,
    pub dt: f64,
    pub tmax: f64,
    pub m0: f64,
    pub feasible: bool,
}

/// Correct rate of the ΔV heuristic at each `c` in `grid`.
pub fn sweep_c(cases: &[BaselineCase], grid: &[f64]) -> Result<Vec<f64>> {
    if cases.is_empty() {
        return Err(Error::invalid("sweep_c: empty test set"));
    }
    if let Some(c) = grid.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(Error::invalid(format!("sweep_c: c = {c} outside [0, 1]")));
    }
    Ok(grid
        .iter()
        .map(|&c| {
            let hits = cases
                .iter()
                .filter(|k| lambert_feasibility(k.delta_v, k.dt, k.tmax, k.m0, c) == k.feasible)
                .count();
            hits as f64 / cases.len() as f64
        })
        .collect())
}

/// `0, step, 2·step, …, 1` inclusive of both endpoints.
pub fn c_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    // k / n is the correctly rounded grid value when step divides 1
    let exact = (n as f64 * step - 1.0).abs() < 1e-9;
    (0..=n)
        .map(|k| {
            if exact {
                k as f64 / n as f64
            } else {
                (k as f64 * step).min(1.0)
            }
        })
        .collect()
}
