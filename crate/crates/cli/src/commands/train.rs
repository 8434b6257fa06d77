//! Network training on a labelled pool.

use std::path::{Path, PathBuf};

use ltx_core::dataset::load_pool;
use ltx_core::neural::{save_model, TaskKind};
use serde::Serialize;

use crate::config::Config;
use crate::pipeline::{default_hidden, fit, split_pool, task_name, Metrics};
use crate::report::{write_csv, write_json};

#[derive(Debug, Clone)]
pub struct TrainArgs {
    pub task: TaskKind,
    pub pool: PathBuf,
    pub hidden: Option<Vec<usize>>,
    pub group: usize,
    pub n_test: usize,
    pub n_train: Option<usize>,
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub task: &'static str,
    pub pool: PathBuf,
    pub model: PathBuf,
    pub hidden: Vec<usize>,
    pub group: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub epochs: usize,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stopped_early: bool,
    pub test: Metrics,
}

#[derive(Serialize)]
struct LossRow {
    epoch: usize,
    train_loss: f64,
    val_loss: f64,
}

/// Trains one network; the split (and therefore the test set) depends only
/// on the pool, `n_test` and `seed`.
pub fn cmd_train(
    cfg: &Config,
    args: &TrainArgs,
    seed: u64,
    out: &Path,
) -> anyhow::Result<TrainSummary> {
    let pool = load_pool(&args.pool)?;
    let exp = split_pool(&pool, args.task, args.n_test, args.n_train, seed)?;
    let hidden = args
        .hidden
        .clone()
        .unwrap_or_else(|| default_hidden(args.task));
    let mut tc = cfg.train.clone();
    tc.seed = seed;
    let fitted = fit(&exp, &hidden, args.group, &tc)?;
    let name = task_name(args.task);
    let model_path = args
        .model
        .clone()
        .unwrap_or_else(|| out.join(format!("{name}.ltxm")));
    if let Some(dir) = model_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    save_model(&fitted.model, &model_path)?;
    let r = &fitted.report;
    let rows: Vec<LossRow> = (0..r.epochs)
        .map(|k| LossRow {
            epoch: k + 1,
            train_loss: r.train_loss[k],
            val_loss: r.val_loss[k],
        })
        .collect();
    write_csv(&out.join(format!("train_{name}_loss.csv")), &rows)?;
    let summary = TrainSummary {
        task: name,
        pool: args.pool.clone(),
        model: model_path,
        hidden,
        group: args.group,
        n_train: r.n_train,
        n_val: r.n_val,
        n_test: exp.test.len(),
        epochs: r.epochs,
        best_epoch: r.best_epoch,
        best_val_loss: r.best_val_loss,
        stopped_early: r.stopped_early,
        test: fitted.metrics,
    };
    write_json(&out.join(format!("train_{name}.json")), &summary)?;
    Ok(summary)
}
