//! Equations of motion, costate dynamics and the homotopic control law.

use serde::{Deserialize, Serialize};

use super::integrator::SwitchedSystem;
use super::{SpacecraftConfig, TransferProblem};
use crate::astro::{ScaleSet, Vec3, MU_SUN};

/// Controlled two-body dynamics in SI units: returns `(ṙ, v̇, ṁ)`.
pub fn dynamics(
    r: &Vec3,
    v: &Vec3,
    m: f64,
    u: f64,
    alpha: &Vec3,
    craft: &SpacecraftConfig,
) -> (Vec3, Vec3, f64) {
    let rn = r.norm();
    let acc = -MU_SUN / (rn * rn * rn) * r + (craft.tmax * u / m) * alpha;
    (*v, acc, -craft.tmax * u / craft.exhaust_velocity())
}

/// `ρ = 1 − c‖λv‖/(λ0 m) − λm/λ0`, with `c` the exhaust velocity in the
/// same units as the costates.
pub fn switching_function(lv_norm: f64, lm: f64, l0: f64, m: f64, c: f64) -> f64 {
    1.0 - c * lv_norm / (l0 * m) - lm / l0
}

/// Throttle minimising the homotopic Hamiltonian for switching value `rho`.
pub fn throttle(rho: f64, eps: f64) -> f64 {
    if eps <= 0.0 {
        if rho < 0.0 {
            1.0
        } else {
            0.0
        }
    } else if rho > eps {
        0.0
    } else if rho < -eps {
        1.0
    } else {
        (eps - rho) / (2.0 * eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Control {
    pub u: f64,
    pub alpha: Vec3,
    /// `‖λv‖ = 0`: thrust direction undefined, coasting.
    pub singular: bool,
}

/// Optimal throttle and thrust direction from the costates.
///
/// Costates are expected in a unit system consistent with SI for the
/// exhaust velocity `Isp·g0` (any common scaling of all costates cancels).
pub fn control_law(
    lambda_v: &Vec3,
    lambda_m: f64,
    lambda0: f64,
    m: f64,
    eps: f64,
    craft: &SpacecraftConfig,
) -> Control {
    let lvn = lambda_v.norm();
    if lvn == 0.0 {
        log::debug!("singular arc: ‖λv‖ = 0, coasting");
        return Control {
            u: 0.0,
            alpha: Vec3::zeros(),
            singular: true,
        };
    }
    let rho = switching_function(lvn, lambda_m, lambda0, m, craft.exhaust_velocity());
    Control {
        u: throttle(rho, eps),
        alpha: -lambda_v / lvn,
        singular: false,
    }
}

/// Nondimensional description of a transfer (AU, μ = 1, mass unit m0).
#[derive(Debug, Clone, Copy)]
pub struct Canonical {
    pub scale: ScaleSet,
    /// Maximum thrust.
    pub tm: f64,
    /// Exhaust velocity.
    pub c: f64,
    pub m_dry: f64,
    pub r0: Vec3,
    pub v0: Vec3,
    pub rt: Vec3,
    pub vt: Vec3,
    pub tf: f64,
}

impl Canonical {
    pub fn new(problem: &TransferProblem) -> Self {
        let scale = ScaleSet::heliocentric(problem.m0);
        let dep = problem.departure_state();
        let (lu, vu) = (scale.length, scale.velocity());
        Self {
            scale,
            tm: problem.craft.tmax / scale.force(),
            c: problem.craft.exhaust_velocity() / vu,
            m_dry: problem.craft.m_dry / problem.m0,
            r0: dep.r / lu,
            v0: dep.v / vu,
            rt: problem.target_r / lu,
            vt: problem.target_v / vu,
            tf: problem.dt / scale.time,
        }
    }

    /// Initial 14-state for costates `z = (λr, λv, λm, λ0)`.
    pub fn initial_state(&self, z: &[f64; 8]) -> [f64; 14] {
        let mut y = [0.0; 14];
        y[0..3].copy_from_slice(self.r0.as_slice());
        y[3..6].copy_from_slice(self.v0.as_slice());
        y[M] = 1.0;
        y[LR..LR + 3].copy_from_slice(&z[0..3]);
        y[LV..LV + 3].copy_from_slice(&z[3..6]);
        y[LM] = z[6];
        y
    }
}

pub(crate) const M: usize = 6;
pub(crate) const LR: usize = 7;
pub(crate) const LV: usize = 10;
pub(crate) const LM: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ThrustMode {
    Coast,
    Partial,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    /// Throttle from the switching function at homotopy parameter ε.
    Homotopic,
    /// Full thrust throughout, direction from the primer vector.
    MaxThrust,
}

/// State–costate system `(r, v, m, λr, λv, λm)` in canonical units.
#[derive(Debug, Clone, Copy)]
pub struct ShootingSystem {
    pub tm: f64,
    pub c: f64,
    pub lambda0: f64,
    pub eps: f64,
    pub law: Law,
    /// Mass below which the integration is declared blown up.
    pub m_floor: f64,
}

#[inline]
fn v3(y: &[f64; 14], at: usize) -> Vec3 {
    Vec3::new(y[at], y[at + 1], y[at + 2])
}

impl ShootingSystem {
    pub fn rho(&self, y: &[f64; 14]) -> f64 {
        let lvn = v3(y, LV).norm();
        switching_function(lvn, y[LM], self.lambda0, y[M], self.c)
    }

    pub fn throttle_in(&self, mode: ThrustMode, y: &[f64; 14]) -> f64 {
        match mode {
            ThrustMode::Coast => 0.0,
            ThrustMode::Full => 1.0,
            ThrustMode::Partial => ((self.eps - self.rho(y)) / (2.0 * self.eps)).clamp(0.0, 1.0),
        }
    }

    /// Hamiltonian of the homotopic problem at state `y` in `mode`.
    pub fn hamiltonian(&self, mode: ThrustMode, y: &[f64; 14]) -> f64 {
        let r = v3(y, 0);
        let v = v3(y, 3);
        let lr = v3(y, LR);
        let lv = v3(y, LV);
        let rn = r.norm();
        let u = self.throttle_in(mode, y);
        let m = y[M];
        lr.dot(&v)
            - lv.dot(&r) / (rn * rn * rn)
            - self.tm * u * lv.norm() / m
            - y[LM] * self.tm * u / self.c
            + self.lambda0 * self.tm / self.c * (u - self.eps * u * (1.0 - u))
    }
}

impl SwitchedSystem<14> for ShootingSystem {
    type Mode = ThrustMode;

    #[inline]
    fn rhs(&self, mode: ThrustMode, y: &[f64; 14], dy: &mut [f64; 14]) {
        let (rx, ry, rz) = (y[0], y[1], y[2]);
        let r2 = rx * rx + ry * ry + rz * rz;
        let rn = r2.sqrt();
        let ir3 = 1.0 / (r2 * rn);
        let (lx, ly, lz) = (y[LV], y[LV + 1], y[LV + 2]);
        let lvn = (lx * lx + ly * ly + lz * lz).sqrt();
        let m = y[M];
        let u = if lvn == 0.0 {
            0.0
        } else {
            self.throttle_in(mode, y)
        };
        let a = if u == 0.0 {
            0.0
        } else {
            self.tm * u / (m * lvn)
        };

        dy[0] = y[3];
        dy[1] = y[4];
        dy[2] = y[5];
        dy[3] = -rx * ir3 - a * lx;
        dy[4] = -ry * ir3 - a * ly;
        dy[5] = -rz * ir3 - a * lz;
        dy[M] = -self.tm * u / self.c;
        let rl = (rx * lx + ry * ly + rz * lz) * 3.0 * ir3 / r2;
        dy[LR] = lx * ir3 - rl * rx;
        dy[LR + 1] = ly * ir3 - rl * ry;
        dy[LR + 2] = lz * ir3 - rl * rz;
        dy[LV] = -y[LR];
        dy[LV + 1] = -y[LR + 1];
        dy[LV + 2] = -y[LR + 2];
        dy[LM] = -self.tm * u * lvn / (m * m);
    }

    fn mode(&self, y: &[f64; 14]) -> ThrustMode {
        match self.law {
            Law::MaxThrust => ThrustMode::Full,
            Law::Homotopic => {
                let rho = self.rho(y);
                if self.eps <= 0.0 {
                    if rho < 0.0 {
                        ThrustMode::Full
                    } else {
                        ThrustMode::Coast
                    }
                } else if rho > self.eps {
                    ThrustMode::Coast
                } else if rho < -self.eps {
                    ThrustMode::Full
                } else {
                    ThrustMode::Partial
                }
            }
        }
    }

    fn event_count(&self) -> usize {
        match self.law {
            Law::MaxThrust => 0,
            Law::Homotopic if self.eps <= 0.0 => 1,
            Law::Homotopic => 2,
        }
    }

    fn event(&self, k: usize, y: &[f64; 14]) -> f64 {
        let rho = self.rho(y);
        if self.eps <= 0.0 {
            rho
        } else if k == 0 {
            rho - self.eps
        } else {
            rho + self.eps
        }
    }

    fn admissible(&self, y: &[f64; 14]) -> bool {
        let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        r2 > 1e-4 && y[M] > self.m_floor
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::astro::AU;

    fn craft() -> SpacecraftConfig {
        SpacecraftConfig::default()
    }

    #[test]
    fn coast_is_two_body() {
        let r = Vec3::new(AU, 0.0, 0.0);
        let v = Vec3::new(0.0, 3e4, 0.0);
        let (rd, vd, md) = dynamics(&r, &v, 1500.0, 0.0, &Vec3::x(), &craft());
        assert_eq!(rd, v);
        assert!((vd.x + MU_SUN / (AU * AU)).abs() < 1e-18);
        assert_eq!(md, 0.0);
    }

    #[test]
    fn full_thrust_acceleration_and_flow() {
        let r = Vec3::new(1e15, 0.0, 0.0);
        let (_, vd, md) = dynamics(&r, &Vec3::zeros(), 1500.0, 1.0, &Vec3::y(), &craft());
        assert!((vd.y - 2e-4).abs() < 1e-15);
        // −0.3 / (3000 · 9.80665) = −1.01977e-5 kg/s
        assert!((md + 0.3 / 29_419.95).abs() < 1e-15);
        assert!((md + 1.0198e-5).abs() < 1e-8);
    }

    #[test]
    fn throttle_branches() {
        assert_eq!(throttle(0.25, 0.5), 0.25);
        assert_eq!(throttle(0.6, 0.5), 0.0);
        assert_eq!(throttle(-0.6, 0.5), 1.0);
        assert_eq!(throttle(-1e-9, 0.0), 1.0);
        assert_eq!(throttle(1e-9, 0.0), 0.0);
        // continuity of the ε = 1 law across [−1, 1]
        let mut prev = throttle(-1.0, 1.0);
        for k in 1..=2000 {
            let rho = -1.0 + k as f64 * 1e-3;
            let u = throttle(rho, 1.0);
            assert!((u - prev).abs() <= 5e-4 + 1e-12);
            prev = u;
        }
    }

    #[test]
    fn control_law_direction_and_singularity() {
        let c = control_law(&Vec3::new(0.0, 2.0, 0.0), 0.0, 1.0, 1500.0, 0.0, &craft());
        assert_eq!(c.alpha, Vec3::new(0.0, -1.0, 0.0));
        assert_eq!(c.u, 1.0);
        let s = control_law(&Vec3::zeros(), 0.0, 1.0, 1500.0, 0.0, &craft());
        assert!(s.singular);
        assert_eq!(s.u, 0.0);
    }

    #[test]
    fn hamiltonian_is_constant_along_partial_arc() {
        use crate::optctl::integrator::{integrate, Tolerances};
        let sys = ShootingSystem {
            tm: 0.03,
            c: 1.0,
            lambda0: 0.5,
            eps: 0.5,
            law: Law::Homotopic,
            m_floor: 0.1,
        };
        let y0 = [
            1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.1, 0.2, 0.0, 0.1, -0.3, 0.05, 0.0,
        ];
        let out = integrate(
            &sys,
            0.0,
            &y0,
            3.0,
            Tolerances::TIGHT,
            &[0.0, 1.0, 2.0, 3.0],
        )
        .unwrap();
        let h0 = sys.hamiltonian(out.samples[0].mode, &out.samples[0].y);
        for s in &out.samples {
            let h = sys.hamiltonian(s.mode, &s.y);
            assert!((h - h0).abs() < 1e-9 * h0.abs().max(1e-3), "{h} vs {h0}");
        }
    }
}
