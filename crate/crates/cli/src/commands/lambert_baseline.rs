//! ΔV-heuristic and rocket-equation baseline against the networks.

use std::path::{Path, PathBuf};

use ltx_core::dataset::{load_pool, split, TransferSample};
use ltx_core::lambert::{c_grid, sweep_c, BaselineCase};
use ltx_core::neural::{correct_rate, load_model, mae, TaskKind};
use ltx_core::{astro::DAY, SpacecraftConfig};
use serde::Serialize;

use crate::error::InputError;
use crate::pipeline::{metrics, Metrics};
use crate::report::{write_csv, write_json};

use super::evaluate::{classify, estimate};

#[derive(Debug, Clone)]
pub struct BaselineArgs {
    pub pool: PathBuf,
    /// Optimal-only test records come from here (defaults to `pool`).
    pub reg_pool: Option<PathBuf>,
    pub n_test: usize,
    pub c_step: f64,
    pub clf: Option<PathBuf>,
    pub reg: Option<PathBuf>,
    pub bin_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub c: f64,
    pub correct_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo_kg: f64,
    pub hi_kg: f64,
    pub lambert: usize,
    pub dnn: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineReport {
    pub n_test_clf: usize,
    pub n_test_reg: usize,
    pub curve: Vec<CurvePoint>,
    pub peak_c: f64,
    pub peak_rate: f64,
    pub single_peaked: bool,
    pub dnn_correct_rate: Option<f64>,
    /// m_f-Lam against the optimal mass on Optimal test rows.
    pub lambert: Metrics,
    pub dnn: Option<Metrics>,
    pub histogram: Vec<HistogramBin>,
}

pub fn baseline_case(s: &TransferSample, craft: &SpacecraftConfig) -> BaselineCase {
    BaselineCase {
        delta_v: s.dv_lambert_ms,
        dt: s.dt_days * DAY,
        tmax: craft.tmax,
        m0: s.m0_kg,
        feasible: s.is_optimal(),
    }
}

/// First maximum of the curve, as (index, value).
pub fn peak(rates: &[f64]) -> (usize, f64) {
    rates.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |b, (i, &r)| if r > b.1 { (i, r) } else { b },
    )
}

/// Non-decreasing up to the first maximum and non-increasing after the
/// last one, with plateaus of equal values anywhere.
pub fn is_single_peaked(rates: &[f64]) -> bool {
    let (first, top) = peak(rates);
    let last = rates.iter().rposition(|r| *r == top).unwrap_or(first);
    rates[..=first].windows(2).all(|w| w[1] >= w[0])
        && rates[last..].windows(2).all(|w| w[1] <= w[0])
        && rates[first..=last].iter().all(|r| *r == top)
}

pub fn histogram(lambert: &[f64], dnn: &[f64], width: f64) -> Vec<HistogramBin> {
    let all = lambert.iter().chain(dnn);
    let lo = all.clone().fold(f64::INFINITY, |a, b| a.min(*b));
    let hi = all.fold(f64::NEG_INFINITY, |a, b| a.max(*b));
    if !lo.is_finite() {
        return Vec::new();
    }
    let start = (lo / width).floor() * width;
    let n = (((hi - start) / width).floor() as usize) + 1;
    let mut bins: Vec<HistogramBin> = (0..n)
        .map(|k| HistogramBin {
            lo_kg: start + k as f64 * width,
            hi_kg: start + (k + 1) as f64 * width,
            lambert: 0,
            dnn: 0,
        })
        .collect();
    let idx = |v: f64| (((v - start) / width).floor() as usize).min(n - 1);
    for v in lambert {
        bins[idx(*v)].lambert += 1;
    }
    for v in dnn {
        bins[idx(*v)].dnn += 1;
    }
    bins
}

pub fn cmd_lambert_baseline(
    args: &BaselineArgs,
    seed: u64,
    out: &Path,
) -> anyhow::Result<BaselineReport> {
    if !(args.c_step > 0.0 && args.c_step <= 1.0) || !(args.bin_kg > 0.0) {
        return Err(InputError(
            "c step must lie in (0, 1] and the bin width must be positive".into(),
        )
        .into());
    }
    let pool = load_pool(&args.pool)?;
    let (_, test) = split(&pool.samples, args.n_test, seed, TaskKind::Classification)
        .map_err(|e| InputError(e.to_string()))?;
    let cases: Vec<BaselineCase> = test.iter().map(|s| baseline_case(s, &pool.craft)).collect();
    let grid = c_grid(args.c_step);
    let rates = sweep_c(&cases, &grid)?;
    let (k, peak_rate) = peak(&rates);
    let curve: Vec<CurvePoint> = grid
        .iter()
        .zip(&rates)
        .map(|(c, r)| CurvePoint {
            c: *c,
            correct_rate: *r,
        })
        .collect();

    let dnn_correct_rate = match &args.clf {
        Some(p) => {
            let clf = load_model(p)?;
            let prob = test
                .iter()
                .map(|s| classify(&clf, s))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let y: Vec<f64> = test
                .iter()
                .map(|s| f64::from(u8::from(s.is_optimal())))
                .collect();
            Some(correct_rate(&prob, &y)?)
        }
        None => None,
    };

    let reg_pool = match &args.reg_pool {
        Some(p) => load_pool(p)?,
        None => pool.clone(),
    };
    let (_, reg_test) = split(&reg_pool.samples, args.n_test, seed, TaskKind::Regression)
        .map_err(|e| InputError(e.to_string()))?;
    let truth: Vec<f64> = reg_test.iter().map(|s| s.mf_max_kg.unwrap()).collect();
    let lam: Vec<f64> = reg_test.iter().map(|s| s.mf_lam_kg).collect();
    let lambert = metrics(TaskKind::Regression, &lam, &truth)?;
    let lam_err: Vec<f64> = lam.iter().zip(&truth).map(|(p, t)| p - t).collect();
    let (dnn, dnn_err) = match &args.reg {
        Some(p) => {
            let reg = load_model(p)?;
            let est = reg_test
                .iter()
                .map(|s| estimate(&reg, s))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let err: Vec<f64> = est.iter().zip(&truth).map(|(p, t)| p - t).collect();
            (Some(metrics(TaskKind::Regression, &est, &truth)?), err)
        }
        None => (None, Vec::new()),
    };
    debug_assert!((mae(&lam, &truth)? - lambert.mae_kg.unwrap()).abs() < 1e-9);
    let report = BaselineReport {
        n_test_clf: test.len(),
        n_test_reg: reg_test.len(),
        single_peaked: is_single_peaked(&rates),
        peak_c: grid[k],
        peak_rate,
        curve,
        dnn_correct_rate,
        lambert,
        dnn,
        histogram: histogram(&lam_err, &dnn_err, args.bin_kg),
    };
    write_csv(&out.join("lambert_c_curve.csv"), &report.curve)?;
    write_csv(&out.join("lambert_error_histogram.csv"), &report.histogram)?;
    write_json(&out.join("lambert_baseline.json"), &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_peak_detection() {
        assert!(is_single_peaked(&[0.1, 0.5, 0.9, 0.9, 0.4]));
        assert!(is_single_peaked(&[0.9, 0.8, 0.1]));
        assert!(!is_single_peaked(&[0.1, 0.5, 0.4, 0.6, 0.2]));
        assert!(!is_single_peaked(&[0.9, 0.1, 0.9]));
        assert_eq!(peak(&[0.1, 0.7, 0.7, 0.2]), (1, 0.7));
    }

    #[test]
    fn histogram_counts_everything() {
        let h = histogram(&[-12.0, 3.0, 4.0, 25.0], &[0.5], 10.0);
        assert_eq!(h.first().unwrap().lo_kg, -20.0);
        assert_eq!(h.iter().map(|b| b.lambert).sum::<usize>(), 4);
        assert_eq!(h.iter().map(|b| b.dnn).sum::<usize>(), 1);
        assert_eq!(h[2].lambert, 2);
    }
}
