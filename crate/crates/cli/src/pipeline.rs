//! Split → features → fit → test metrics, shared by the training commands.

use anyhow::{bail, Context};
use clap::ValueEnum;
use ltx_core::dataset::{extract_features_group, split, Pool, TransferSample};
use ltx_core::neural::{
    self, are, correct_rate, mae, mean_signed_error, MlpModel, TaskKind, TrainConfig, TrainReport,
};
use serde::Serialize;

use crate::error::InputError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Clf,
    Reg,
}

impl From<TaskArg> for TaskKind {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Clf => TaskKind::Classification,
            TaskArg::Reg => TaskKind::Regression,
        }
    }
}

pub fn task_name(task: TaskKind) -> &'static str {
    match task {
        TaskKind::Classification => "clf",
        TaskKind::Regression => "reg",
    }
}

pub fn default_hidden(task: TaskKind) -> Vec<usize> {
    match task {
        TaskKind::Classification => neural::CLASSIFIER_HIDDEN.to_vec(),
        TaskKind::Regression => neural::REGRESSOR_HIDDEN.to_vec(),
    }
}

pub fn ablation_hidden(task: TaskKind) -> Vec<usize> {
    match task {
        TaskKind::Classification => neural::CLASSIFIER_ABLATION_HIDDEN.to_vec(),
        TaskKind::Regression => neural::REGRESSOR_ABLATION_HIDDEN.to_vec(),
    }
}

/// Parses `"40,40,40"` or `"3x40"`.
pub fn parse_hidden(s: &str) -> anyhow::Result<Vec<usize>> {
    let bad = || InputError(format!("bad layer list {s:?} (use e.g. 40,40,40 or 3x40)"));
    if let Some((n, w)) = s.split_once('x') {
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        let w: usize = w.trim().parse().map_err(|_| bad())?;
        if n == 0 || w == 0 {
            return Err(bad().into());
        }
        return Ok(vec![w; n]);
    }
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    if v.is_empty() || v.contains(&0) {
        return Err(bad().into());
    }
    Ok(v)
}

/// Network target of a record: 1/0 feasibility or the optimal mass.
pub fn target(s: &TransferSample, task: TaskKind) -> f64 {
    match task {
        TaskKind::Classification => f64::from(u8::from(s.is_optimal())),
        TaskKind::Regression => s.mf_max_kg.unwrap_or(f64::NAN),
    }
}

pub fn design(
    samples: &[TransferSample],
    group: usize,
    task: TaskKind,
) -> anyhow::Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let x = samples
        .iter()
        .map(|s| {
            extract_features_group(s, group, task)
                .with_context(|| format!("features of seed {}", s.seed))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let y = samples.iter().map(|s| target(s, task)).collect();
    Ok((x, y))
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub task: TaskKind,
    pub train: Vec<TransferSample>,
    pub test: Vec<TransferSample>,
}

/// Seeded split; `n_train` truncates the training side when given.
pub fn split_pool(
    pool: &Pool,
    task: TaskKind,
    n_test: usize,
    n_train: Option<usize>,
    seed: u64,
) -> anyhow::Result<Experiment> {
    let (mut train, test) =
        split(&pool.samples, n_test, seed, task).map_err(|e| InputError(e.to_string()))?;
    if let Some(n) = n_train {
        if train.len() < n {
            log::warn!(
                "only {} training records available ({n} requested)",
                train.len()
            );
        }
        train.truncate(n);
    }
    Ok(Experiment { task, train, test })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Metrics {
    pub n: usize,
    pub correct_rate: Option<f64>,
    pub mae_kg: Option<f64>,
    pub are: Option<f64>,
    pub mean_signed_error_kg: Option<f64>,
}

pub fn metrics(task: TaskKind, pred: &[f64], truth: &[f64]) -> anyhow::Result<Metrics> {
    Ok(match task {
        TaskKind::Classification => Metrics {
            n: pred.len(),
            correct_rate: Some(correct_rate(pred, truth)?),
            ..Metrics::default()
        },
        TaskKind::Regression => Metrics {
            n: pred.len(),
            mae_kg: Some(mae(pred, truth)?),
            are: Some(are(pred, truth)?),
            mean_signed_error_kg: Some(mean_signed_error(pred, truth)?),
            ..Metrics::default()
        },
    })
}

pub fn predict_all(model: &MlpModel, x: &[Vec<f64>]) -> anyhow::Result<Vec<f64>> {
    if let Some(row) = x.first() {
        if row.len() != model.input_dim() {
            bail!(InputError(format!(
                "model expects {} features, data has {}",
                model.input_dim(),
                row.len()
            )));
        }
    }
    Ok(x.iter()
        .map(|r| model.predict(r))
        .collect::<ltx_core::Result<_>>()?)
}

#[derive(Debug, Clone)]
pub struct Fitted {
    pub model: MlpModel,
    pub report: TrainReport,
    pub metrics: Metrics,
    pub predictions: Vec<f64>,
}

pub fn fit(
    exp: &Experiment,
    hidden: &[usize],
    group: usize,
    cfg: &TrainConfig,
) -> anyhow::Result<Fitted> {
    let (x, y) = design(&exp.train, group, exp.task)?;
    let (model, report) = neural::train(exp.task, hidden, &x, &y, cfg)?;
    let (tx, ty) = design(&exp.test, group, exp.task)?;
    let predictions = predict_all(&model, &tx)?;
    let metrics = metrics(exp.task, &predictions, &ty)?;
    Ok(Fitted {
        model,
        report,
        metrics,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hidden_lists() {
        assert_eq!(parse_hidden("40,40,40").unwrap(), [40, 40, 40]);
        assert_eq!(parse_hidden("4x70").unwrap(), [70; 4]);
        assert!(parse_hidden("").is_err());
        assert!(parse_hidden("3x0").is_err());
        assert!(parse_hidden("a,b").is_err());
    }
}
