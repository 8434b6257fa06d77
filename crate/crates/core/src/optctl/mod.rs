//! Ground-truth engine: fuel-optimal low-thrust rendezvous by the indirect
//! method with energy-to-fuel homotopy, and the three-way transfer label.
//!
//! The costate formulation uses the homotopic cost
//! `J_ε = λ0·(Tmax/(Isp·g0))·∫[u − ε·u(1−u)]dt`, minimised pointwise by
//! `u = clamp((ε − ρ)/(2ε), 0, 1)` with switching function
//! `ρ = 1 − Isp·g0·‖λv‖/(λ0·m) − λm/λ0`. Initial costates
//! `(λr, λv, λm, λ0)` live on the unit sphere with `λ0 > 0`; the final mass is
//! free so `λm(tf) = 0`.

pub mod de;
pub mod dynamics;
pub mod integrator;
pub mod refine;
mod shooting;
mod solve;

pub use de::{de_search, DeConfig, DeResult};
pub use dynamics::{control_law, dynamics, switching_function, throttle, Control, ThrustMode};
pub use integrator::Tolerances;
pub use refine::{local_refine, LmConfig, RefineFailure, Refined};
pub use shooting::{shoot, trace, ShotFlags, ShotResult};
pub use solve::mix_seed;
pub use solve::{
    classify_transfer, homotopy_to_fuel_optimal, max_thrust_probe, solve_energy_optimal,
    ProbeResult, SolveFailure,
};

use serde::{Deserialize, Serialize};

use crate::astro::{
    elements_to_cartesian, propagate_kepler, vvlh_to_inertial, CartesianState, OrbitElements, Vec3,
    G0,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpacecraftConfig {
    /// Maximum thrust, N.
    pub tmax: f64,
    /// Specific impulse, s.
    pub isp: f64,
    /// Dry mass, kg.
    pub m_dry: f64,
}

impl Default for SpacecraftConfig {
    fn default() -> Self {
        Self {
            tmax: 0.3,
            isp: 3000.0,
            m_dry: 800.0,
        }
    }
}

impl SpacecraftConfig {
    pub fn exhaust_velocity(&self) -> f64 {
        self.isp * G0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tmax > 0.0 && self.isp > 0.0 && self.m_dry > 0.0) {
            return Err(Error::invalid(format!(
                "spacecraft parameters must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// One rendezvous transfer: departure body elements at t0, the target's
/// inertial state at `t0 + dt`, initial mass and spacecraft.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferProblem {
    pub ele_c0: OrbitElements,
    pub target_r: Vec3,
    pub target_v: Vec3,
    pub m0: f64,
    pub dt: f64,
    pub craft: SpacecraftConfig,
}

impl TransferProblem {
    pub fn new(
        ele_c0: OrbitElements,
        target: CartesianState,
        m0: f64,
        dt: f64,
        craft: SpacecraftConfig,
    ) -> Result<Self> {
        let p = Self {
            ele_c0,
            target_r: target.r,
            target_v: target.v,
            m0,
            dt,
            craft,
        };
        p.validate()?;
        Ok(p)
    }

    /// Target defined by VVLH offsets from the coasted departure body.
    pub fn from_offsets(
        ele_c0: OrbitElements,
        dr_vvlh: Vec3,
        dv_vvlh: Vec3,
        m0: f64,
        dt: f64,
        craft: SpacecraftConfig,
    ) -> Result<Self> {
        let coasted = elements_to_cartesian(&propagate_kepler(&ele_c0, dt)?);
        let target = vvlh_to_inertial(&coasted, &dr_vvlh, &dv_vvlh)?;
        Self::new(ele_c0, target, m0, dt, craft)
    }

    pub fn validate(&self) -> Result<()> {
        self.ele_c0.validate()?;
        self.craft.validate()?;
        if !(self.m0 > self.craft.m_dry) {
            return Err(Error::invalid(format!(
                "initial mass {} kg must exceed dry mass {} kg",
                self.m0, self.craft.m_dry
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(format!(
                "transfer time {} s must be positive",
                self.dt
            )));
        }
        let t = self.target_state();
        if !(t.energy() < 0.0) {
            return Err(Error::NotElliptic { energy: t.energy() });
        }
        Ok(())
    }

    pub fn departure_state(&self) -> CartesianState {
        elements_to_cartesian(&self.ele_c0)
    }

    pub fn target_state(&self) -> CartesianState {
        CartesianState::new(self.target_r, self.target_v)
    }

    /// Departure body coasted over the transfer time.
    pub fn coasted_departure(&self) -> Result<CartesianState> {
        Ok(elements_to_cartesian(&propagate_kepler(
            &self.ele_c0,
            self.dt,
        )?))
    }

    pub fn with_m0(&self, m0: f64) -> Self {
        Self { m0, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Optimal,
    HomotopyFailed,
    Infeasible,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Optimal => "optimal",
            Label::HomotopyFailed => "homotopy_failed",
            Label::Infeasible => "infeasible",
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, Label::Infeasible)
    }
}

impl std::str::FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(Label::Optimal),
            "homotopy_failed" => Ok(Label::HomotopyFailed),
            "infeasible" => Ok(Label::Infeasible),
            other => Err(Error::invalid(format!("unknown label {other:?}"))),
        }
    }
}

/// Initial costates `(λr, λv, λm, λ0)` in canonical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostateGuess(pub [f64; 8]);

impl CostateGuess {
    /// Projects onto the unit sphere; `None` if `λ0` is not positive.
    pub fn normalized(z: &[f64; 8]) -> Option<Self> {
        let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 0.0) || !(z[7] > 0.0) {
            return None;
        }
        let mut out = *z;
        out.iter_mut().for_each(|v| *v /= n);
        Some(Self(out))
    }

    pub fn lambda0(&self) -> f64 {
        self.0[7]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Control and state at one output time of an extremal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSample {
    /// Seconds since departure.
    pub t: f64,
    pub u: f64,
    pub alpha: Vec3,
    /// kg.
    pub mass: f64,
    /// Canonical units.
    pub hamiltonian: f64,
    pub r: Vec3,
    pub v: Vec3,
}

#[derive(Debug, Clone)]
pub struct ExtremalSolution {
    pub costates: CostateGuess,
    pub eps: f64,
    pub history: Vec<ControlSample>,
    /// Switch times (s) and the mode entered.
    pub switches: Vec<(f64, ThrustMode)>,
    pub initial_mode: ThrustMode,
    pub pos_error: f64,
    pub vel_error: f64,
    /// kg.
    pub final_mass: f64,
    /// `∫u dt` from the piecewise control history, s.
    pub thrust_integral: f64,
}

impl ExtremalSolution {
    pub fn fuel_used(&self, m0: f64) -> f64 {
        m0 - self.final_mass
    }

    /// Fraction of output samples with throttle strictly inside `(lo, hi)`.
    pub fn intermediate_throttle_fraction(&self, lo: f64, hi: f64) -> f64 {
        let k = self.history.iter().filter(|s| s.u > lo && s.u < hi).count();
        k as f64 / self.history.len().max(1) as f64
    }

    /// Fraction of the transfer time spent at full thrust.
    pub fn full_thrust_fraction(&self) -> f64 {
        let n = self.history.len();
        if n == 0 {
            return 0.0;
        }
        self.history.iter().filter(|s| s.u >= 0.99).count() as f64 / n as f64
    }

    /// Largest relative deviation of the Hamiltonian from its initial value.
    pub fn hamiltonian_drift(&self) -> f64 {
        let Some(first) = self.history.first() else {
            return 0.0;
        };
        let h0 = first.hamiltonian;
        self.history
            .iter()
            .map(|s| (s.hamiltonian - h0).abs())
            .fold(0.0, f64::max)
            / h0.abs()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub attempts: usize,
    pub de_generations: usize,
    pub de_evaluations: usize,
    pub homotopy_steps: usize,
    pub probe_used: bool,
    pub fuel_limited: bool,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct TransferOutcome {
    pub label: Label,
    /// Optimal remaining mass, kg (present iff `Optimal`).
    pub mf_max: Option<f64>,
    /// Best terminal residuals seen, m and m/s.
    pub pos_error: f64,
    pub vel_error: f64,
    pub diagnostics: SolveDiagnostics,
    pub solution: Option<ExtremalSolution>,
    /// Energy-optimal costates the solution was continued from, for warm
    /// starts on neighbouring problems.
    pub energy_costates: Option<CostateGuess>,
}

impl TransferOutcome {
    pub fn full_thrust_fraction(&self) -> Option<f64> {
        self.solution.as_ref().map(|s| s.full_thrust_fraction())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub de: DeConfig,
    /// Scaled DE objective at which local refinement takes over.
    pub de_handoff: f64,
    /// Independent DE + refine attempts before probing for infeasibility.
    pub attempts: usize,
    pub homotopy_schedule: Vec<f64>,
    pub min_homotopy_step: f64,
    pub refine: LmConfig,
    /// Integrator tolerance during global search.
    pub search_rtol: f64,
    /// Integrator tolerance for refinement and verification.
    pub rtol: f64,
    /// Terminal position tolerance, m.
    pub pos_tol: f64,
    /// Terminal velocity tolerance, m/s.
    pub vel_tol: f64,
    /// Weight of `λm(tf)` in the scaled DE objective.
    pub lambda_m_tol: f64,
    /// Output samples recorded along accepted extremals.
    pub record_points: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            de: DeConfig::default(),
            de_handoff: 1e3,
            attempts: 3,
            homotopy_schedule: vec![1.0, 0.8, 0.6, 0.4, 0.2, 0.1, 0.05, 0.02, 0.01, 0.0],
            min_homotopy_step: 1e-4,
            refine: LmConfig::default(),
            search_rtol: 1e-9,
            rtol: 1e-12,
            pos_tol: 1e6,
            vel_tol: 1.0,
            lambda_m_tol: 1e-5,
            record_points: 1001,
        }
    }
}

impl SolverConfig {
    pub fn search_tolerances(&self) -> Tolerances {
        Tolerances {
            rtol: self.search_rtol,
            atol: self.search_rtol,
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rtol: self.rtol,
            atol: self.rtol,
        }
    }
}
