//! Adam and early-stopped mini-batch training.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, MlpModel, TargetScale};
use super::TaskKind;
use crate::dataset::Scaler;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(params: &mut [f64], grad: &[f64], state: &mut AdamState, cfg: &AdamConfig) {
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for i in 0..params.len() {
        let g = grad[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        let mh = state.m[i] / c1;
        let vh = state.v[i] / c2;
        params[i] -= cfg.lr * mh / (vh.sqrt() + cfg.eps);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    /// Fraction of the training rows held out for early stopping.
    pub validation_fraction: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub min_delta: f64,
    pub adam: AdamConfig,
    pub slope: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            validation_fraction: 0.1,
            max_epochs: 5000,
            patience: 100,
            min_delta: 1e-6,
            adam: AdamConfig::default(),
            slope: super::LEAKY_SLOPE,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::invalid("batch size and epoch cap must be positive"));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::invalid("validation fraction must lie in (0, 1)"));
        }
        if !(self.adam.lr > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean mini-batch loss per epoch.
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    /// 1-based epoch whose weights were kept.
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub epochs: usize,
    pub stopped_early: bool,
    pub n_train: usize,
    pub n_val: usize,
}

/// Trains a fresh network on raw feature rows and raw targets (labels in
/// {0, 1} for classifiers, kilograms for regressors). Input and target
/// standardisation are fitted on these rows and stored in the model; the
/// returned weights are those of the best validation epoch.
pub fn train(
    task: TaskKind,
    hidden: &[usize],
    rows: &[Vec<f64>],
    targets: &[f64],
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    cfg.validate()?;
    if rows.len() != targets.len() {
        return Err(Error::ShapeMismatch {
            expected: rows.len(),
            actual: targets.len(),
        });
    }
    if rows.len() < 4 {
        return Err(Error::invalid("need at least four training rows"));
    }
    let dim = rows[0].len();
    if task == TaskKind::Classification && targets.iter().any(|y| *y != 0.0 && *y != 1.0) {
        return Err(Error::invalid("classification targets must be 0 or 1"));
    }

    let scaler = Scaler::fit(rows)?;
    let target = match task {
        TaskKind::Regression => Some(TargetScale::fit(targets)?),
        TaskKind::Classification => None,
    };
    let xs = scaler.apply_all(rows)?;
    let ys: Vec<f64> = match target {
        Some(t) => targets.iter().map(|y| t.apply(*y)).collect(),
        None => targets.to_vec(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.shuffle(&mut rng);
    let n_val =
        ((xs.len() as f64 * cfg.validation_fraction).round() as usize).clamp(1, xs.len() - 1);
    let (val_idx, train_idx) = order.split_at(n_val);
    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<f64>) {
        (
            idx.iter().map(|&i| xs[i].clone()).collect(),
            idx.iter().map(|&i| ys[i]).collect(),
        )
    };
    let (tx, ty) = pick(train_idx);
    let (vx, vy) = pick(val_idx);

    let mut model = MlpModel::new(
        task,
        dim,
        hidden,
        cfg.slope,
        cfg.seed ^ 0x9e37_79b9_7f4a_7c15,
    )?;
    model.scaler = scaler;
    model.target = target;

    let mut adam = AdamState::new(model.params.len());
    let mut best = model.params.clone();
    let mut best_val = model.loss(&vx, &vy)?;
    let mut best_epoch = 0;
    let mut report = TrainReport {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        best_epoch: 0,
        best_val_loss: best_val,
        epochs: 0,
        stopped_early: false,
        n_train: tx.len(),
        n_val: vx.len(),
    };
    let mut perm: Vec<usize> = (0..tx.len()).collect();
    let mut bx: Vec<Vec<f64>> = Vec::with_capacity(cfg.batch_size);
    let mut by: Vec<f64> = Vec::with_capacity(cfg.batch_size);

    for epoch in 1..=cfg.max_epochs {
        perm.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut batches = 0;
        for chunk in perm.chunks(cfg.batch_size) {
            bx.clear();
            by.clear();
            for &i in chunk {
                bx.push(tx[i].clone());
                by.push(ty[i]);
            }
            let (loss, Gradients(g)) = model.backward(&bx, &by)?;
            if !loss.is_finite() || g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged {
                    epoch,
                    detail: format!("non-finite batch loss {loss}"),
                });
            }
            adam_step(&mut model.params, &g, &mut adam, &cfg.adam);
            sum += loss;
            batches += 1;
        }
        let val = model.loss(&vx, &vy)?;
        if !val.is_finite() {
            return Err(Error::Diverged {
                epoch,
                detail: format!("non-finite validation loss {val}"),
            });
        }
        report.train_loss.push(sum / batches as f64);
        report.val_loss.push(val);
        report.epochs = epoch;
        if val < best_val - cfg.min_delta {
            best_val = val;
            best_epoch = epoch;
            best.copy_from_slice(&model.params);
        } else if epoch - best_epoch >= cfg.patience {
            report.stopped_early = true;
            break;
        }
        if epoch % 100 == 0 {
            log::debug!(
                "epoch {epoch}: train {:.3e} val {val:.3e} best {best_val:.3e}",
                sum / batches as f64
            );
        }
    }
    model.params = best;
    report.best_epoch = best_epoch;
    report.best_val_loss = best_val;
    Ok((model, report))
}
