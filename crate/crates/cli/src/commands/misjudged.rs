//! Terminal residuals of the transfers the classifier gets wrong.

use std::path::{Path, PathBuf};

use ltx_core::astro::DAY;
use ltx_core::dataset::{load_pool, split, TransferSample};
use ltx_core::neural::{load_model, TaskKind};
use ltx_core::optctl::{classify_transfer, mix_seed};
use ltx_core::{Label, SolverConfig, SpacecraftConfig};
use rayon::prelude::*;
use serde::Serialize;

use super::evaluate::classify;
use crate::error::InputError;
use crate::report::{write_csv, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Misjudgment {
    /// Optimal transfer judged infeasible.
    FeasibleJudgedInfeasible,
    /// Infeasible transfer judged feasible.
    InfeasibleJudgedFeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MisjudgedRow {
    pub seed: u64,
    pub kind: Misjudgment,
    pub label: Label,
    pub probability: f64,
    /// |p − 0.5|.
    pub margin: f64,
    /// Lambert ΔV over Tmax·ΔT/m0.
    pub dv_ratio: f64,
    pub pos_error_m: f64,
    pub vel_error_ms: f64,
    /// Share of the optimal arc at full thrust (Optimal rows only).
    pub full_thrust_fraction: Option<f64>,
    pub mf_max_kg: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MisjudgedReport {
    pub n_test: usize,
    pub feasible_judged_infeasible: usize,
    pub infeasible_judged_feasible: usize,
    pub median_margin_test: f64,
    pub median_margin_misjudged: Option<f64>,
    pub median_dv_ratio_gap_test: f64,
    pub median_dv_ratio_gap_misjudged: Option<f64>,
    pub rows: Vec<MisjudgedRow>,
}

pub fn dv_ratio(s: &TransferSample, craft: &SpacecraftConfig) -> f64 {
    s.dv_lambert_ms / (craft.tmax * s.dt_days * DAY / s.m0_kg)
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

#[derive(Debug, Clone)]
pub struct MisjudgedArgs {
    pub clf: PathBuf,
    pub pool: PathBuf,
    /// 0 evaluates the whole pool.
    pub n_test: usize,
}

/// Re-solves each misjudged record to report its residuals.
pub fn cmd_misjudged(
    args: &MisjudgedArgs,
    solver: &SolverConfig,
    seed: u64,
    workers: usize,
    out: &Path,
) -> anyhow::Result<MisjudgedReport> {
    let clf = load_model(&args.clf)?;
    let pool = load_pool(&args.pool)?;
    let test = if args.n_test == 0 {
        pool.samples.clone()
    } else {
        split(&pool.samples, args.n_test, seed, TaskKind::Classification)
            .map_err(|e| InputError(e.to_string()))?
            .1
    };
    let probs = test
        .iter()
        .map(|s| classify(&clf, s))
        .collect::<anyhow::Result<Vec<_>>>()?;
    // gap to the median ΔV ratio serves as a crude distance from the boundary
    let ratios: Vec<f64> = test.iter().map(|s| dv_ratio(s, &pool.craft)).collect();
    let mid_ratio = median(ratios.clone()).unwrap_or(0.0);
    let wrong: Vec<(usize, Misjudgment)> = probs
        .iter()
        .zip(&test)
        .enumerate()
        .filter_map(|(k, (p, s))| match (s.is_optimal(), *p >= 0.5) {
            (true, false) => Some((k, Misjudgment::FeasibleJudgedInfeasible)),
            (false, true) => Some((k, Misjudgment::InfeasibleJudgedFeasible)),
            _ => None,
        })
        .collect();
    let threads = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()?;
    let rows: Vec<MisjudgedRow> = threads.install(|| {
        wrong
            .par_iter()
            .map(|&(k, kind)| {
                let s = &test[k];
                let (pos, vel, ftf) = match s.problem(&pool.craft) {
                    Ok(p) => {
                        let o = classify_transfer(&p, mix_seed(seed, s.seed), solver, None);
                        (o.pos_error, o.vel_error, o.full_thrust_fraction())
                    }
                    Err(_) => (f64::NAN, f64::NAN, None),
                };
                MisjudgedRow {
                    seed: s.seed,
                    kind,
                    label: s.label,
                    probability: probs[k],
                    margin: (probs[k] - 0.5).abs(),
                    dv_ratio: ratios[k],
                    pos_error_m: pos,
                    vel_error_ms: vel,
                    full_thrust_fraction: ftf,
                    mf_max_kg: s.mf_max_kg,
                }
            })
            .collect()
    });
    let report = MisjudgedReport {
        n_test: test.len(),
        feasible_judged_infeasible: rows
            .iter()
            .filter(|r| r.kind == Misjudgment::FeasibleJudgedInfeasible)
            .count(),
        infeasible_judged_feasible: rows
            .iter()
            .filter(|r| r.kind == Misjudgment::InfeasibleJudgedFeasible)
            .count(),
        median_margin_test: median(probs.iter().map(|p| (p - 0.5).abs()).collect()).unwrap_or(0.0),
        median_margin_misjudged: median(rows.iter().map(|r| r.margin).collect()),
        median_dv_ratio_gap_test: median(ratios.iter().map(|r| (r - mid_ratio).abs()).collect())
            .unwrap_or(0.0),
        median_dv_ratio_gap_misjudged: median(
            rows.iter()
                .map(|r| (r.dv_ratio - mid_ratio).abs())
                .collect(),
        ),
        rows,
    };
    write_csv(&out.join("misjudged.csv"), &report.rows)?;
    write_json(&out.join("misjudged.json"), &report)?;
    Ok(report)
}
