//! Feature-group comparison.

use std::path::{Path, PathBuf};

use ltx_core::dataset::{group_feature_names, load_pool};
use ltx_core::neural::TaskKind;
use serde::Serialize;

use crate::config::Config;
use crate::pipeline::{ablation_hidden, fit, split_pool, task_name};
use crate::report::{write_csv, write_json};

#[derive(Debug, Clone)]
pub struct AblationArgs {
    pub task: TaskKind,
    pub pool: PathBuf,
    pub groups: Vec<usize>,
    pub hidden: Option<Vec<usize>>,
    pub n_test: usize,
    pub n_train: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub group: usize,
    pub n_features: usize,
    pub features: String,
    pub correct_rate: Option<f64>,
    pub mae_kg: Option<f64>,
    pub are: Option<f64>,
    pub best_epoch: usize,
    pub epochs: usize,
}

/// Every group is trained on the same split with the same seed.
pub fn cmd_ablation(
    cfg: &Config,
    args: &AblationArgs,
    seed: u64,
    out: &Path,
) -> anyhow::Result<Vec<AblationRow>> {
    let pool = load_pool(&args.pool)?;
    let exp = split_pool(&pool, args.task, args.n_test, args.n_train, seed)?;
    let hidden = args
        .hidden
        .clone()
        .unwrap_or_else(|| ablation_hidden(args.task));
    let mut tc = cfg.train.clone();
    tc.seed = seed;
    let mut rows = Vec::new();
    for &g in &args.groups {
        let names =
            group_feature_names(g, args.task).map_err(|e| crate::InputError(e.to_string()))?;
        let f = fit(&exp, &hidden, g, &tc)?;
        log::info!("group {g}: {:?}", f.metrics);
        rows.push(AblationRow {
            group: g,
            n_features: names.len(),
            features: names.join(" "),
            correct_rate: f.metrics.correct_rate,
            mae_kg: f.metrics.mae_kg,
            are: f.metrics.are,
            best_epoch: f.report.best_epoch,
            epochs: f.report.epochs,
        });
    }
    let name = task_name(args.task);
    write_csv(&out.join(format!("ablation_{name}.csv")), &rows)?;
    write_json(
        &out.join(format!("ablation_{name}.json")),
        &serde_json::json!({
            "task": name,
            "hidden": hidden,
            "n_train": exp.train.len(),
            "n_test": exp.test.len(),
            "rows": rows,
        }),
    )?;
    Ok(rows)
}
