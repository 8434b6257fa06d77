//! Network-size and data-size grid.

use std::path::{Path, PathBuf};

use ltx_core::dataset::load_pool;
use ltx_core::neural::TaskKind;
use serde::Serialize;

use crate::config::Config;
use crate::pipeline::{fit, split_pool, task_name, Experiment};
use crate::report::{write_csv, write_json};

#[derive(Debug, Clone)]
pub struct ScaleArgs {
    pub task: TaskKind,
    pub pool: PathBuf,
    pub layers: Vec<usize>,
    pub nodes: Vec<usize>,
    /// Training-set sizes; empty means all available training records.
    pub sizes: Vec<usize>,
    pub group: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleRow {
    pub layers: usize,
    pub nodes: usize,
    pub n_train: usize,
    pub correct_rate: Option<f64>,
    pub mae_kg: Option<f64>,
    pub are: Option<f64>,
    pub best_epoch: usize,
}

/// Each cell is exactly a `train` run with `layers × nodes` hidden units
/// on the first `n_train` training records.
pub fn cmd_scale_study(
    cfg: &Config,
    args: &ScaleArgs,
    seed: u64,
    out: &Path,
) -> anyhow::Result<Vec<ScaleRow>> {
    let pool = load_pool(&args.pool)?;
    let full = split_pool(&pool, args.task, args.n_test, None, seed)?;
    let sizes = if args.sizes.is_empty() {
        vec![full.train.len()]
    } else {
        args.sizes.clone()
    };
    let mut tc = cfg.train.clone();
    tc.seed = seed;
    let mut rows = Vec::new();
    for &n in &sizes {
        let exp = Experiment {
            task: full.task,
            train: full.train[..n.min(full.train.len())].to_vec(),
            test: full.test.clone(),
        };
        for &l in &args.layers {
            for &w in &args.nodes {
                let f = fit(&exp, &vec![w; l], args.group, &tc)?;
                log::info!("{l}x{w} on {}: {:?}", exp.train.len(), f.metrics);
                rows.push(ScaleRow {
                    layers: l,
                    nodes: w,
                    n_train: exp.train.len(),
                    correct_rate: f.metrics.correct_rate,
                    mae_kg: f.metrics.mae_kg,
                    are: f.metrics.are,
                    best_epoch: f.report.best_epoch,
                });
            }
        }
    }
    let name = task_name(args.task);
    write_csv(&out.join(format!("scale_{name}.csv")), &rows)?;
    write_json(
        &out.join(format!("scale_{name}.json")),
        &serde_json::json!({ "task": name, "rows": rows }),
    )?;
    Ok(rows)
}
