//! Feasibility-boundary sweeps around the reference transfer.

use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use ltx_core::astro::{
    elements_to_cartesian, propagate_kepler, CartesianState, OrbitElements, AU, DAY,
};
use ltx_core::optctl::{classify_transfer, mix_seed, CostateGuess};
use ltx_core::{Label, SolverConfig, SpacecraftConfig, TransferOutcome, TransferProblem, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::InputError;
use crate::report::{write_csv, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Factor {
    M0,
    Dt,
    /// |v_tf| / |v_cf| along the coasted velocity direction.
    Delta,
    DrPlane,
    DvDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    /// dr_z = 0.
    Xy,
    /// dr_x = 0.
    Yz,
}

/// The reference family: departure orbit [2.5 AU, 0.001, 0, 0, 0, 0] and
/// VVLH offsets of the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaseProblem {
    pub m0_kg: f64,
    pub dt_days: f64,
    pub dr_au: [f64; 3],
    pub dv_kms: [f64; 3],
}

impl Default for BaseProblem {
    fn default() -> Self {
        Self {
            m0_kg: 1500.0,
            dt_days: 300.0,
            dr_au: [0.2; 3],
            dv_kms: [1.0; 3],
        }
    }
}

pub fn reference_elements() -> OrbitElements {
    OrbitElements::from_au_deg(2.5, 0.001, 0.0, 0.0, 0.0, 0.0)
        .expect("reference elements are valid")
}

impl BaseProblem {
    pub fn problem(&self, craft: &SpacecraftConfig) -> ltx_core::Result<TransferProblem> {
        TransferProblem::from_offsets(
            reference_elements(),
            Vec3::from(self.dr_au) * AU,
            Vec3::from(self.dv_kms) * 1e3,
            self.m0_kg,
            self.dt_days * DAY,
            *craft,
        )
    }

    /// Coasted departure state at arrival time.
    pub fn coasted(&self) -> ltx_core::Result<CartesianState> {
        Ok(elements_to_cartesian(&propagate_kepler(
            &reference_elements(),
            self.dt_days * DAY,
        )?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub factor: Factor,
    pub base: BaseProblem,
    /// Grid for m0, dt and delta.
    pub from: f64,
    pub to: f64,
    pub step: f64,
    /// Bisection resolution near label changes (none = grid only).
    pub refine: Option<f64>,
    /// Random cases for dr-plane and dv-direction.
    pub samples: usize,
    pub plane: Plane,
    /// Half-width of the dr-plane square, AU.
    pub half_width_au: f64,
}

impl SweepSpec {
    /// Default grid per factor; the m0 and dt grids are the coarse
    /// acceptance grids refined by bisection.
    pub fn defaults(factor: Factor) -> Self {
        let (from, to, step, refine) = match factor {
            Factor::M0 => (1000.0, 2000.0, 10.0, Some(2.0)),
            Factor::Dt => (100.0, 500.0, 5.0, Some(1.0)),
            // 600 cases: 0.700, 0.701, …, 1.299
            Factor::Delta => (0.7, 1.3, 0.001, None),
            Factor::DrPlane | Factor::DvDirection => (0.0, 0.0, 0.0, None),
        };
        Self {
            factor,
            base: BaseProblem::default(),
            from,
            to,
            step,
            refine,
            samples: 3000,
            plane: Plane::Xy,
            half_width_au: 0.5,
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        match self.factor {
            Factor::M0 | Factor::Dt | Factor::Delta => {
                if !(self.step > 0.0 && self.to > self.from) {
                    return Err(InputError(format!(
                        "bad grid {}..{} step {}",
                        self.from, self.to, self.step
                    ))
                    .into());
                }
                if self.refine.is_some_and(|r| !(r > 0.0 && r < self.step)) {
                    return Err(
                        InputError("refinement resolution must lie in (0, step)".into()).into(),
                    );
                }
                if !(self.from > 0.0) {
                    return Err(InputError("grid values must be positive".into()).into());
                }
            }
            Factor::DrPlane | Factor::DvDirection => {
                if self.samples == 0 {
                    return Err(InputError("need at least one sample".into()).into());
                }
                if !(self.half_width_au > 0.0) {
                    return Err(InputError("half width must be positive".into()).into());
                }
            }
        }
        Ok(())
    }

    /// Grid values, end exclusive.
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step - 1e-9).ceil() as usize;
        (0..n).map(|k| self.from + k as f64 * self.step).collect()
    }

    pub fn grid_inclusive(&self) -> Vec<f64> {
        let mut g = self.grid();
        if g.last()
            .is_none_or(|v| (v - self.to).abs() > 1e-9 * self.step)
        {
            g.push(self.to);
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub label: Label,
    pub feasible: bool,
    pub mf_max_kg: Option<f64>,
    pub pos_error_m: f64,
    pub vel_error_ms: f64,
    pub refined: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub last_feasible: f64,
    pub first_infeasible: f64,
    pub midpoint: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub transitions: Vec<Transition>,
    pub n_feasible: usize,
    pub seconds: f64,
}

/// Problem at grid value `v` of a one-dimensional factor.
pub fn grid_problem(
    spec: &SweepSpec,
    v: f64,
    craft: &SpacecraftConfig,
) -> ltx_core::Result<TransferProblem> {
    let b = spec.base;
    match spec.factor {
        Factor::M0 => BaseProblem { m0_kg: v, ..b }.problem(craft),
        Factor::Dt => BaseProblem { dt_days: v, ..b }.problem(craft),
        Factor::Delta => {
            let base = BaseProblem {
                dv_kms: [0.0; 3],
                ..b
            };
            let c = base.coasted()?;
            let target_r = base.problem(craft)?.target_r;
            TransferProblem::new(
                reference_elements(),
                CartesianState::new(target_r, c.v * v),
                b.m0_kg,
                b.dt_days * DAY,
                *craft,
            )
        }
        Factor::DrPlane | Factor::DvDirection => {
            Err(ltx_core::Error::InvalidInput("not a grid factor".into()))
        }
    }
}

fn row(value: f64, xyz: [f64; 3], o: &TransferOutcome, refined: bool, seconds: f64) -> SweepRow {
    SweepRow {
        value,
        x: xyz[0],
        y: xyz[1],
        z: xyz[2],
        label: o.label,
        feasible: o.label.is_feasible(),
        mf_max_kg: o.mf_max,
        pos_error_m: o.pos_error,
        vel_error_ms: o.vel_error,
        refined,
        seconds,
    }
}

struct GridSolver<'a> {
    spec: &'a SweepSpec,
    craft: SpacecraftConfig,
    solver: &'a SolverConfig,
    seed: u64,
}

impl GridSolver<'_> {
    fn solve(&self, v: f64, warm: Option<&CostateGuess>) -> anyhow::Result<(TransferOutcome, f64)> {
        let t = Instant::now();
        let p = grid_problem(self.spec, v, &self.craft)?;
        let o = classify_transfer(&p, mix_seed(self.seed, v.to_bits()), self.solver, warm);
        log::info!("{:?} = {v}: {:?} {:?}", self.spec.factor, o.label, o.mf_max);
        Ok((o, t.elapsed().as_secs_f64()))
    }
}

fn grid_sweep(
    spec: &SweepSpec,
    craft: &SpacecraftConfig,
    solver: &SolverConfig,
    seed: u64,
) -> anyhow::Result<(Vec<SweepRow>, Vec<Transition>)> {
    let gs = GridSolver {
        spec,
        craft: *craft,
        solver,
        seed,
    };
    let mut rows = Vec::new();
    let mut costates: Vec<Option<CostateGuess>> = Vec::new();
    let mut warm: Option<CostateGuess> = None;
    for v in spec.grid() {
        let (o, secs) = gs.solve(v, warm.as_ref())?;
        if o.label.is_feasible() {
            if let Some(z) = o.energy_costates {
                warm = Some(z);
            }
        }
        costates.push(o.energy_costates);
        rows.push(row(v, [0.0; 3], &o, false, secs));
    }
    let mut transitions = Vec::new();
    let coarse = rows.clone();
    for k in 1..coarse.len() {
        let (a, b) = (&coarse[k - 1], &coarse[k]);
        if a.feasible == b.feasible {
            continue;
        }
        // bracket [feasible side, infeasible side]
        let (mut f, mut i, mut z) = if a.feasible {
            (a.value, b.value, costates[k - 1])
        } else {
            (b.value, a.value, costates[k])
        };
        if let Some(res) = spec.refine {
            while (i - f).abs() > res {
                let mid = 0.5 * (f + i);
                let (o, secs) = gs.solve(mid, z.as_ref())?;
                if o.label.is_feasible() {
                    f = mid;
                    z = o.energy_costates.or(z);
                } else {
                    i = mid;
                }
                rows.push(row(mid, [0.0; 3], &o, true, secs));
            }
        }
        transitions.push(Transition {
            last_feasible: f,
            first_infeasible: i,
            midpoint: 0.5 * (f + i),
        });
    }
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok((rows, transitions))
}

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

/// Random cases: dr in a coordinate plane with dv = 0, or the coasted
/// speed in random directions with dr = 0.
fn random_sweep(
    spec: &SweepSpec,
    craft: &SpacecraftConfig,
    solver: &SolverConfig,
    seed: u64,
    workers: usize,
) -> anyhow::Result<Vec<SweepRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = spec.base;
    let coasted = BaseProblem {
        dv_kms: [0.0; 3],
        dr_au: [0.0; 3],
        ..b
    }
    .coasted()?;
    let cases: Vec<([f64; 3], TransferProblem)> = (0..spec.samples)
        .map(|_| {
            let h = spec.half_width_au;
            match spec.factor {
                Factor::DrPlane => {
                    let (u, w) = (rng.gen_range(-h..=h), rng.gen_range(-h..=h));
                    let dr = match spec.plane {
                        Plane::Xy => [u, w, 0.0],
                        Plane::Yz => [0.0, u, w],
                    };
                    let p = BaseProblem {
                        dr_au: dr,
                        dv_kms: [0.0; 3],
                        ..b
                    }
                    .problem(craft)?;
                    Ok((dr, p))
                }
                _ => {
                    let d = unit(&mut rng);
                    let v = d * coasted.v.norm();
                    let p = TransferProblem::new(
                        reference_elements(),
                        CartesianState::new(coasted.r, v),
                        b.m0_kg,
                        b.dt_days * DAY,
                        *craft,
                    )?;
                    Ok(([d.x, d.y, d.z], p))
                }
            }
        })
        .collect::<ltx_core::Result<_>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()?;
    let rows = pool.install(|| {
        cases
            .par_iter()
            .enumerate()
            .map(|(k, (xyz, p))| {
                let t = Instant::now();
                let o = classify_transfer(p, mix_seed(seed, k as u64), solver, None);
                row(k as f64, *xyz, &o, false, t.elapsed().as_secs_f64())
            })
            .collect()
    });
    Ok(rows)
}

pub fn run_sweep(
    spec: &SweepSpec,
    craft: &SpacecraftConfig,
    solver: &SolverConfig,
    seed: u64,
    workers: usize,
) -> anyhow::Result<SweepReport> {
    spec.validate()?;
    let t0 = Instant::now();
    let (rows, transitions) = match spec.factor {
        Factor::M0 | Factor::Dt | Factor::Delta => grid_sweep(spec, craft, solver, seed)?,
        Factor::DrPlane | Factor::DvDirection => (
            random_sweep(spec, craft, solver, seed, workers)?,
            Vec::new(),
        ),
    };
    Ok(SweepReport {
        spec: spec.clone(),
        n_feasible: rows.iter().filter(|r| r.feasible).count(),
        rows,
        transitions,
        seconds: t0.elapsed().as_secs_f64(),
    })
}

pub fn cmd_sweep(
    spec: &SweepSpec,
    craft: &SpacecraftConfig,
    solver: &SolverConfig,
    seed: u64,
    workers: usize,
    out: &Path,
) -> anyhow::Result<SweepReport> {
    let report = run_sweep(spec, craft, solver, seed, workers)?;
    let name = match spec.factor {
        Factor::M0 => "m0",
        Factor::Dt => "dt",
        Factor::Delta => "delta",
        Factor::DrPlane => "dr_plane",
        Factor::DvDirection => "dv_direction",
    };
    write_csv(&out.join(format!("sweep_{name}.csv")), &report.rows)?;
    write_json(
        &out.join(format!("sweep_{name}.json")),
        &serde_json::json!({
            "spec": report.spec,
            "transitions": report.transitions,
            "n": report.rows.len(),
            "n_feasible": report.n_feasible,
            "seconds": report.seconds,
        }),
    )?;
    Ok(report)
}
