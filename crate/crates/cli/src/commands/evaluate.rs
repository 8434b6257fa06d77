//! Classifier-gated evaluation of candidate transfers.

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use ltx_core::dataset::{
    extract_features_c, extract_features_r, load_pool, LambertFeatures, TransferSample,
    TransferSpec, POOL_SCHEMA,
};
use ltx_core::neural::{load_model, MlpModel, TaskKind};
use ltx_core::{Label, SpacecraftConfig};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::InputError;
use crate::pipeline::{metrics, Metrics};
use crate::report::{write_csv, write_json};

/// Column set of a candidate file (a pool file is accepted too).
pub const CANDIDATE_COLUMNS: [&str; 15] = [
    "id", "a", "e", "i", "raan", "argp", "ta", "m0_kg", "dt_days", "drx_au", "dry_au", "drz_au",
    "dvx_kms", "dvy_kms", "dvz_kms",
];

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CandidateRow {
    pub id: u64,
    pub a: f64,
    pub e: f64,
    pub i: f64,
    pub raan: f64,
    pub argp: f64,
    pub ta: f64,
    pub m0_kg: f64,
    pub dt_days: f64,
    pub drx_au: f64,
    pub dry_au: f64,
    pub drz_au: f64,
    pub dvx_kms: f64,
    pub dvy_kms: f64,
    pub dvz_kms: f64,
}

impl CandidateRow {
    pub fn spec(&self) -> TransferSpec {
        TransferSpec {
            elements: [self.a, self.e, self.i, self.raan, self.argp, self.ta],
            m0_kg: self.m0_kg,
            dt_days: self.dt_days,
            dr_au: [self.drx_au, self.dry_au, self.drz_au],
            dv_kms: [self.dvx_kms, self.dvy_kms, self.dvz_kms],
        }
    }
}

/// A candidate with its Lambert features and, for labelled input, the
/// ground truth.
#[derive(Debug, Clone, Copy)]
pub struct Candidate {
    pub sample: TransferSample,
    pub truth: Option<(Label, Option<f64>)>,
}

/// Builds the record used for feature extraction; the label is a
/// placeholder.
pub fn candidate(
    id: u64,
    spec: &TransferSpec,
    craft: &SpacecraftConfig,
) -> ltx_core::Result<TransferSample> {
    let problem = spec.problem(craft)?;
    let lam = LambertFeatures::of(&problem)?;
    Ok(TransferSample::from_parts(
        id,
        spec,
        &lam,
        Label::Infeasible,
        None,
    ))
}

pub fn read_candidates(path: &Path, craft: &SpacecraftConfig) -> anyhow::Result<Vec<Candidate>> {
    let f = std::fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut first = String::new();
    BufReader::new(f).read_line(&mut first)?;
    let origin = path.display().to_string();
    if first.starts_with(&format!("#{POOL_SCHEMA}")) {
        let pool = load_pool(path)?;
        if pool.craft != *craft {
            return Err(InputError(format!(
                "{origin}: pool spacecraft differs from the configured one"
            ))
            .into());
        }
        return pool
            .samples
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let c = candidate(s.seed, &s.spec(), craft)
                    .map_err(|e| InputError(format!("{origin}:{}: {e}", k + 3)))?;
                Ok(Candidate {
                    sample: c,
                    truth: Some((s.label, s.mf_max_kg)),
                })
            })
            .collect();
    }
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {origin}"))?;
    let header = rdr.headers()?.clone();
    if header.iter().ne(CANDIDATE_COLUMNS.iter().copied()) {
        return Err(InputError(format!(
            "{origin}:1: expected columns {}",
            CANDIDATE_COLUMNS.join(",")
        ))
        .into());
    }
    let mut out = Vec::new();
    for (k, row) in rdr.deserialize::<CandidateRow>().enumerate() {
        let line = k + 2;
        let row = row.map_err(|e| InputError(format!("{origin}:{line}: {e}")))?;
        let sample = candidate(row.id, &row.spec(), craft)
            .map_err(|e| InputError(format!("{origin}:{line}: {e}")))?;
        out.push(Candidate {
            sample,
            truth: None,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationResult {
    pub id: u64,
    pub feasible: bool,
    pub probability: f64,
    /// Present iff `feasible`.
    pub mf_est_kg: Option<f64>,
    pub true_label: Option<Label>,
    pub true_mf_kg: Option<f64>,
}

pub fn check_models(clf: &MlpModel, reg: &MlpModel) -> anyhow::Result<()> {
    if clf.task != TaskKind::Classification || clf.input_dim() != 16 {
        return Err(InputError(format!(
            "classifier must be a {}-input classification model (got {:?} with {} inputs)",
            16,
            clf.task,
            clf.input_dim()
        ))
        .into());
    }
    if reg.task != TaskKind::Regression || reg.input_dim() != 17 {
        return Err(InputError(format!(
            "regressor must be a {}-input regression model (got {:?} with {} inputs)",
            17,
            reg.task,
            reg.input_dim()
        ))
        .into());
    }
    Ok(())
}

/// Feasibility probability of one record.
pub fn classify(clf: &MlpModel, s: &TransferSample) -> anyhow::Result<f64> {
    Ok(clf.predict(&extract_features_c(s)?.0)?)
}

/// Remaining-mass estimate of one record, kg.
pub fn estimate(reg: &MlpModel, s: &TransferSample) -> anyhow::Result<f64> {
    Ok(reg.predict(&extract_features_r(s)?.0)?)
}

/// The step-3 contract: the regressor only sees classifier-feasible rows.
pub fn evaluate_one(
    clf: &MlpModel,
    reg: &MlpModel,
    c: &Candidate,
) -> anyhow::Result<EvaluationResult> {
    let p = classify(clf, &c.sample)?;
    let feasible = p >= 0.5;
    let mf_est_kg = if feasible {
        Some(estimate(reg, &c.sample)?)
    } else {
        None
    };
    Ok(EvaluationResult {
        id: c.sample.seed,
        feasible,
        probability: p,
        mf_est_kg,
        true_label: c.truth.map(|t| t.0),
        true_mf_kg: c.truth.and_then(|t| t.1),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluateSummary {
    pub candidates: PathBuf,
    pub n: usize,
    pub n_feasible: usize,
    pub seconds: f64,
    pub candidates_per_second: f64,
    /// Classifier metrics over all labelled rows.
    pub classification: Option<Metrics>,
    /// Regressor metrics over the truly Optimal rows.
    pub regression: Option<Metrics>,
}

pub fn cmd_evaluate(
    cfg: &Config,
    candidates: &Path,
    clf: &Path,
    reg: &Path,
    out: &Path,
) -> anyhow::Result<EvaluateSummary> {
    // the Lambert solve per candidate belongs to the timed inference
    let t0 = Instant::now();
    let cands = read_candidates(candidates, &cfg.craft)?;
    let t_parse = t0.elapsed();
    let clf = load_model(clf)?;
    let reg = load_model(reg)?;
    check_models(&clf, &reg)?;
    let t0 = Instant::now() - t_parse;
    let rows = cands
        .iter()
        .map(|c| evaluate_one(&clf, &reg, c))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let seconds = t0.elapsed().as_secs_f64();

    let labelled: Vec<&Candidate> = cands.iter().filter(|c| c.truth.is_some()).collect();
    let classification = if labelled.is_empty() {
        None
    } else {
        let p: Vec<f64> = rows
            .iter()
            .zip(&cands)
            .filter(|(_, c)| c.truth.is_some())
            .map(|(r, _)| r.probability)
            .collect();
        let y: Vec<f64> = labelled
            .iter()
            .map(|c| f64::from(u8::from(c.truth.unwrap().0 == Label::Optimal)))
            .collect();
        Some(metrics(TaskKind::Classification, &p, &y)?)
    };
    let optimal: Vec<&Candidate> = labelled
        .iter()
        .copied()
        .filter(|c| c.truth.unwrap().0 == Label::Optimal)
        .collect();
    let regression = if optimal.is_empty() {
        None
    } else {
        let p = optimal
            .iter()
            .map(|c| estimate(&reg, &c.sample))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let y: Vec<f64> = optimal
            .iter()
            .map(|c| c.truth.unwrap().1.unwrap())
            .collect();
        Some(metrics(TaskKind::Regression, &p, &y)?)
    };
    write_csv(&out.join("evaluate.csv"), &rows)?;
    let summary = EvaluateSummary {
        candidates: candidates.to_path_buf(),
        n: rows.len(),
        n_feasible: rows.iter().filter(|r| r.feasible).count(),
        seconds,
        candidates_per_second: rows.len() as f64 / seconds.max(1e-12),
        classification,
        regression,
    };
    write_json(&out.join("evaluate.json"), &summary)?;
    Ok(summary)
}
