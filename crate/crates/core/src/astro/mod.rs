//! Heliocentric two-body astrodynamics.
//!
//! Every public function takes and returns SI units (m, m/s, s, rad).
//! Angles only appear in degrees at file and command-line boundaries.

mod elements;
mod kepler;
mod scale;
mod vvlh;

pub use elements::{
    cartesian_to_elements, elements_to_cartesian, propagate_kepler, propagate_state,
};
pub use kepler::{
    eccentric_to_mean, eccentric_to_true, mean_to_true, solve_kepler, true_to_eccentric,
    true_to_mean, KEPLER_TOL,
};
pub use scale::ScaleSet;
pub use vvlh::{angle_between_positions, vvlh_relative, vvlh_rotation, vvlh_to_inertial};

use nalgebra::Vector3;
use std::f64::consts::TAU;

pub type Vec3 = Vector3<f64>;

/// Heliocentric gravitational parameter, km³/s².
pub const MU_SUN_KM3_S2: f64 = 1.32712440018e11;
/// Heliocentric gravitational parameter, m³/s².
pub const MU_SUN: f64 = 1.32712440018e20;
/// Standard gravity, m/s².
pub const G0: f64 = 9.80665;
/// Astronomical unit, m.
pub const AU: f64 = 1.49597870691e11;
/// Seconds per day.
pub const DAY: f64 = 86_400.0;

/// Classical osculating elements. `a` in metres, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OrbitElements {
    pub a: f64,
    pub e: f64,
    pub i: f64,
    pub raan: f64,
    pub argp: f64,
    pub ta: f64,
}

impl OrbitElements {
    /// Builds a validated element set; angles are wrapped into `[0, 2π)`.
    pub fn new(a: f64, e: f64, i: f64, raan: f64, argp: f64, ta: f64) -> crate::Result<Self> {
        let ele = Self {
            a,
            e,
            i,
            raan: wrap_two_pi(raan),
            argp: wrap_two_pi(argp),
            ta: wrap_two_pi(ta),
        };
        ele.validate()?;
        Ok(ele)
    }

    /// Same as [`OrbitElements::new`] with `a` in AU and angles in degrees.
    pub fn from_au_deg(
        a_au: f64,
        e: f64,
        i_deg: f64,
        raan_deg: f64,
        argp_deg: f64,
        ta_deg: f64,
    ) -> crate::Result<Self> {
        Self::new(
            a_au * AU,
            e,
            i_deg.to_radians(),
            raan_deg.to_radians(),
            argp_deg.to_radians(),
            ta_deg.to_radians(),
        )
    }

    pub fn validate(&self) -> crate::Result<()> {
        let all = [self.a, self.e, self.i, self.raan, self.argp, self.ta];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(crate::Error::invalid("non-finite orbit element"));
        }
        if self.a <= 0.0 {
            return Err(crate::Error::invalid(format!(
                "semi-major axis {} <= 0",
                self.a
            )));
        }
        if !(0.0..1.0).contains(&self.e) {
            return Err(crate::Error::invalid(format!(
                "eccentricity {} outside [0, 1)",
                self.e
            )));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.i) {
            return Err(crate::Error::invalid(format!(
                "inclination {} outside [0, π]",
                self.i
            )));
        }
        Ok(())
    }

    /// Orbital period, s.
    pub fn period(&self) -> f64 {
        TAU * (self.a.powi(3) / MU_SUN).sqrt()
    }

    /// Mean motion, rad/s.
    pub fn mean_motion(&self) -> f64 {
        (MU_SUN / self.a.powi(3)).sqrt()
    }

    /// Elements as `[a, e, i, Ω, ω, f]` in SI/radians.
    pub fn to_array(&self) -> [f64; 6] {
        [self.a, self.e, self.i, self.raan, self.argp, self.ta]
    }
}

/// Heliocentric ecliptic position (m) and velocity (m/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState {
    pub r: Vec3,
    pub v: Vec3,
}

impl CartesianState {
    pub fn new(r: Vec3, v: Vec3) -> Self {
        Self { r, v }
    }

    /// Specific orbital energy, J/kg.
    pub fn energy(&self) -> f64 {
        0.5 * self.v.norm_squared() - MU_SUN / self.r.norm()
    }

    /// Specific angular momentum vector, m²/s.
    pub fn angular_momentum(&self) -> Vec3 {
        self.r.cross(&self.v)
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.r.x, self.r.y, self.r.z, self.v.x, self.v.y, self.v.z]
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Smallest signed difference `a - b` between two angles, in `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}
