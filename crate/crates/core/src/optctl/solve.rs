//! Energy-optimal search, homotopy continuation, the max-thrust probe and
//! transfer labelling.

use super::de::{de_search, DeConfig};
use super::dynamics::{Canonical, Law};
use super::refine::{local_refine, Refined};
use super::shooting::{canonical_residual, record};
use super::{
    CostateGuess, ExtremalSolution, Label, SolveDiagnostics, SolverConfig, TransferOutcome,
    TransferProblem,
};

#[derive(Debug, Clone, PartialEq)]
pub enum SolveFailure {
    /// Global search plus refinement found no extremal within tolerance.
    NoExtremalFound { best_pos: f64, best_vel: f64 },
    /// Continuation step fell below the minimum before reaching ε = 0.
    HomotopyStalled { eps_reached: f64 },
    /// The accepted extremal could not be re-integrated for recording.
    Recording,
}

/// Per-component scales turning canonical residuals into tolerance units.
struct Weights([f64; 7]);

impl Weights {
    fn new(can: &Canonical, cfg: &SolverConfig) -> Self {
        let p = cfg.pos_tol / can.scale.length;
        let v = cfg.vel_tol / can.scale.velocity();
        Self([p, p, p, v, v, v, cfg.lambda_m_tol])
    }

    fn norm(&self, res: &[f64]) -> f64 {
        res.iter()
            .zip(&self.0)
            .map(|(r, w)| (r / w).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Terminal errors in SI of a canonical residual.
fn si_errors(can: &Canonical, res: &[f64]) -> (f64, f64) {
    let p = (res[0] * res[0] + res[1] * res[1] + res[2] * res[2]).sqrt() * can.scale.length;
    let v = (res[3] * res[3] + res[4] * res[4] + res[5] * res[5]).sqrt() * can.scale.velocity();
    (p, v)
}

fn meets(can: &Canonical, cfg: &SolverConfig, res: &[f64; 8]) -> bool {
    let (p, v) = si_errors(can, res);
    p <= cfg.pos_tol && v <= cfg.vel_tol && res[6].abs() <= cfg.lambda_m_tol
}

fn unit(z: &[f64; 8]) -> [f64; 8] {
    let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    z.map(|v| v / n)
}

fn to_z(x: &[f64]) -> Option<[f64; 8]> {
    let mut z = [0.0; 8];
    z.copy_from_slice(x);
    CostateGuess::normalized(&z).map(|g| g.0)
}

pub fn mix_seed(seed: u64, k: u64) -> u64 {
    // splitmix64 finaliser
    let mut x = seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn refine_at(can: &Canonical, z0: &[f64; 8], eps: f64, cfg: &SolverConfig) -> Refined<8, 8> {
    let tol = cfg.tolerances();
    local_refine(
        z0,
        |z| canonical_residual(can, z, eps, Law::Homotopic, tol),
        &cfg.refine,
    )
}

/// Energy-optimal (ε = 1) extremal by DE over the unit costate sphere
/// followed by local refinement. `warm` costates, if given, are refined
/// first and injected into the DE population.
pub fn solve_energy_optimal(
    problem: &TransferProblem,
    seed: u64,
    cfg: &SolverConfig,
    warm: Option<&CostateGuess>,
    diag: &mut SolveDiagnostics,
) -> Result<CostateGuess, SolveFailure> {
    let can = Canonical::new(problem);
    let w = Weights::new(&can, cfg);
    let mut best = (f64::INFINITY, f64::INFINITY);
    let note = |res: &[f64; 8], best: &mut (f64, f64)| {
        let (p, v) = si_errors(&can, res);
        if p / cfg.pos_tol + v / cfg.vel_tol < best.0 / cfg.pos_tol + best.1 / cfg.vel_tol {
            *best = (p, v);
        }
    };

    if let Some(g) = warm {
        let r = refine_at(&can, &g.0, 1.0, cfg);
        if r.norm.is_finite() {
            note(&r.residual, &mut best);
            if meets(&can, cfg, &r.residual) {
                return Ok(CostateGuess(unit(&r.x)));
            }
        }
    }

    let search = cfg.search_tolerances();
    let objective = |x: &[f64]| match to_z(x)
        .and_then(|z| canonical_residual(&can, &z, 1.0, Law::Homotopic, search))
    {
        Some(res) => w.norm(&res[..7]),
        None => f64::INFINITY,
    };
    let mut bounds = vec![(-1.0, 1.0); 7];
    bounds.push((1e-3, 1.0));
    let de_cfg = DeConfig {
        target: Some(cfg.de_handoff),
        ..cfg.de
    };
    // The coast extremal (λr = λv = λm = 0) rides along as a population
    // member; it is exact for ballistic targets.
    let mut seeds: Vec<Vec<f64>> = warm.map(|g| g.0.to_vec()).into_iter().collect();
    seeds.push(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let de = de_search(objective, &bounds, &de_cfg, seed, &seeds);
    diag.de_generations += de.generations;
    diag.de_evaluations += de.evaluations;
    let Some(z0) = to_z(&de.best) else {
        return Err(SolveFailure::NoExtremalFound {
            best_pos: best.0,
            best_vel: best.1,
        });
    };
    let r = refine_at(&can, &z0, 1.0, cfg);
    if r.norm.is_finite() {
        note(&r.residual, &mut best);
        if meets(&can, cfg, &r.residual) {
            return Ok(CostateGuess(unit(&r.x)));
        }
    }
    log::debug!(
        "energy search failed: DE value {:.3e}, refine {:?}",
        de.value,
        r.failure
    );
    Err(SolveFailure::NoExtremalFound {
        best_pos: best.0,
        best_vel: best.1,
    })
}

/// Continues an extremal from ε = `eps_start` down to ε = 0 along the
/// configured schedule, bisecting failed steps.
pub fn homotopy_to_fuel_optimal(
    problem: &TransferProblem,
    start: &CostateGuess,
    eps_start: f64,
    cfg: &SolverConfig,
    diag: &mut SolveDiagnostics,
) -> Result<ExtremalSolution, SolveFailure> {
    let can = Canonical::new(problem);
    let mut z = start.0;
    let mut eps = eps_start;
    let targets: Vec<f64> = cfg
        .homotopy_schedule
        .iter()
        .copied()
        .filter(|e| *e < eps_start)
        .collect();
    for &target in &targets {
        let mut step = eps - target;
        while eps > target {
            let trial = (eps - step).max(target);
            let r = refine_at(&can, &z, trial, cfg);
            diag.homotopy_steps += 1;
            if r.norm.is_finite() && meets(&can, cfg, &r.residual) {
                z = unit(&r.x);
                eps = trial;
                // Regrow after a successful reduced step.
                step = (2.0 * step).min(eps - target).max(0.0);
                if step == 0.0 {
                    break;
                }
            } else {
                step /= 2.0;
                if step < cfg.min_homotopy_step {
                    log::debug!("homotopy stalled at eps = {eps}");
                    return Err(SolveFailure::HomotopyStalled { eps_reached: eps });
                }
            }
        }
    }
    if eps != 0.0 {
        return Err(SolveFailure::HomotopyStalled { eps_reached: eps });
    }
    let sol = record(
        problem,
        &z,
        0.0,
        Law::Homotopic,
        cfg.tolerances(),
        cfg.record_points,
    )
    .map_err(|_| SolveFailure::Recording)?;
    if sol.pos_error > cfg.pos_tol || sol.vel_error > cfg.vel_tol {
        log::debug!(
            "recorded extremal misses the target: {:.3e} m",
            sol.pos_error
        );
        return Err(SolveFailure::Recording);
    }
    Ok(sol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    /// Minimum terminal errors under full thrust, m and m/s.
    pub pos_error: f64,
    pub vel_error: f64,
    pub reaches_target: bool,
    /// Direction costates `(λr, λv)` of the best max-thrust arc.
    pub costates: [f64; 6],
}

/// Minimum terminal error with the throttle fixed at one and the thrust
/// direction following the primer vector of free `(λr, λv)`.
pub fn max_thrust_probe(
    problem: &TransferProblem,
    seed: u64,
    cfg: &SolverConfig,
    diag: &mut SolveDiagnostics,
) -> ProbeResult {
    let can = Canonical::new(problem);
    let w = Weights::new(&can, cfg);
    let lift = |x: &[f64]| {
        let mut z = [0.0; 8];
        z[..6].copy_from_slice(&x[..6]);
        z[7] = 1.0;
        z
    };
    let search = cfg.search_tolerances();
    let objective =
        |x: &[f64]| match canonical_residual(&can, &lift(x), 1.0, Law::MaxThrust, search) {
            Some(res) => w.norm(&res[..6]),
            None => f64::INFINITY,
        };
    let de_cfg = DeConfig {
        target: Some(1.0),
        ..cfg.de
    };
    let de = de_search(objective, &[(-1.0, 1.0); 6], &de_cfg, seed, &[]);
    diag.de_generations += de.generations;
    diag.de_evaluations += de.evaluations;
    diag.probe_used = true;

    let mut x0 = [0.0; 6];
    x0.copy_from_slice(&de.best);
    let tol = cfg.tolerances();
    let wv = w.0;
    let r: Refined<6, 7> = local_refine(
        &x0,
        |x| {
            let res = canonical_residual(&can, &lift(x), 1.0, Law::MaxThrust, tol)?;
            let mut out = [0.0; 7];
            for k in 0..6 {
                out[k] = res[k] / wv[k];
            }
            out[6] = x.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0;
            Some(out)
        },
        &cfg.refine,
    );
    let (x, pos_error, vel_error) = if r.norm.is_finite() {
        let pe = (r.residual[0].powi(2) + r.residual[1].powi(2) + r.residual[2].powi(2)).sqrt()
            * cfg.pos_tol;
        let ve = (r.residual[3].powi(2) + r.residual[4].powi(2) + r.residual[5].powi(2)).sqrt()
            * cfg.vel_tol;
        (r.x, pe, ve)
    } else {
        let res = canonical_residual(&can, &lift(&x0), 1.0, Law::MaxThrust, tol);
        let (pe, ve) = res.map_or((f64::INFINITY, f64::INFINITY), |res| si_errors(&can, &res));
        (x0, pe, ve)
    };
    ProbeResult {
        pos_error,
        vel_error,
        reaches_target: pos_error <= cfg.pos_tol && vel_error <= cfg.vel_tol,
        costates: x,
    }
}

/// Labels a transfer Optimal, HomotopyFailed or Infeasible.
///
/// Up to `cfg.attempts` independent energy searches are each continued to
/// ε = 0. An energy extremal that fails to continue proves feasibility, so
/// the transfer is HomotopyFailed. Without any extremal the max-thrust probe
/// decides: a target it reaches is HomotopyFailed, otherwise Infeasible.
/// A fuel-optimal arc that ends at or below the dry mass is Infeasible.
pub fn classify_transfer(
    problem: &TransferProblem,
    seed: u64,
    cfg: &SolverConfig,
    warm: Option<&CostateGuess>,
) -> TransferOutcome {
    let mut diag = SolveDiagnostics::default();
    let mut best = (f64::INFINITY, f64::INFINITY);
    let mut energy_found = false;
    for attempt in 0..cfg.attempts.max(1) {
        diag.attempts += 1;
        let warm_here = if attempt == 0 { warm } else { None };
        match solve_energy_optimal(
            problem,
            mix_seed(seed, attempt as u64),
            cfg,
            warm_here,
            &mut diag,
        ) {
            Ok(energy) => {
                energy_found = true;
                match homotopy_to_fuel_optimal(problem, &energy, 1.0, cfg, &mut diag) {
                    Ok(sol) => {
                        return finish_optimal(problem, sol, energy, diag);
                    }
                    Err(e) => {
                        diag.note = format!("{e:?}");
                        best = (0.0, 0.0);
                    }
                }
            }
            Err(SolveFailure::NoExtremalFound { best_pos, best_vel }) => {
                if best_pos / cfg.pos_tol + best_vel / cfg.vel_tol
                    < best.0 / cfg.pos_tol + best.1 / cfg.vel_tol
                {
                    best = (best_pos, best_vel);
                }
            }
            Err(e) => diag.note = format!("{e:?}"),
        }
    }
    if energy_found {
        return TransferOutcome {
            label: Label::HomotopyFailed,
            mf_max: None,
            pos_error: best.0,
            vel_error: best.1,
            diagnostics: diag,
            solution: None,
            energy_costates: None,
        };
    }
    let probe = max_thrust_probe(problem, mix_seed(seed, u64::MAX), cfg, &mut diag);
    let label = if probe.reaches_target {
        Label::HomotopyFailed
    } else {
        Label::Infeasible
    };
    TransferOutcome {
        label,
        mf_max: None,
        pos_error: best.0.min(probe.pos_error),
        vel_error: if probe.pos_error < best.0 {
            probe.vel_error
        } else {
            best.1
        },
        diagnostics: diag,
        solution: None,
        energy_costates: None,
    }
}

fn finish_optimal(
    problem: &TransferProblem,
    sol: ExtremalSolution,
    energy: CostateGuess,
    mut diag: SolveDiagnostics,
) -> TransferOutcome {
    let fuel_limited = sol.final_mass <= problem.craft.m_dry;
    diag.fuel_limited = fuel_limited;
    TransferOutcome {
        label: if fuel_limited {
            Label::Infeasible
        } else {
            Label::Optimal
        },
        mf_max: (!fuel_limited).then_some(sol.final_mass),
        pos_error: sol.pos_error,
        vel_error: sol.vel_error,
        diagnostics: diag,
        solution: Some(sol),
        energy_costates: Some(energy),
    }
}
