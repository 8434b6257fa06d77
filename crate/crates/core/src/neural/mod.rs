//! Multilayer perceptrons for the feasibility classifier and the
//! remaining-mass regressor: forward pass, backpropagation, Adam, early
//! stopped mini-batch training, persistence and test metrics.

mod io;
mod metrics;
mod mlp;
mod train;

pub use io::{load_model, read_model, save_model, write_model, MODEL_MAGIC};
pub use metrics::{are, correct_rate, mae, mean_signed_error};
pub use mlp::{bce_loss, leaky_relu, linear, mse_loss, sigmoid, Gradients, MlpModel, TargetScale};
pub use train::{adam_step, train, AdamConfig, AdamState, TrainConfig, TrainReport};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// Sigmoid head, binary cross-entropy.
    Classification,
    /// Linear head, mean squared error.
    Regression,
}

/// Default hidden layers of the deployed networks.
pub const CLASSIFIER_HIDDEN: [usize; 3] = [40, 40, 40];
pub const REGRESSOR_HIDDEN: [usize; 4] = [70, 70, 70, 70];
/// Hidden layers used when comparing feature groups.
pub const CLASSIFIER_ABLATION_HIDDEN: [usize; 2] = [30, 30];
pub const REGRESSOR_ABLATION_HIDDEN: [usize; 3] = [40, 40, 40];

pub const LEAKY_SLOPE: f64 = 0.3;
/// Prediction clamp keeping the cross-entropy finite.
pub const BCE_CLAMP: f64 = 1e-12;
