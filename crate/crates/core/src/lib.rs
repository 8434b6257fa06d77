//! Fast evaluation of short low-thrust interplanetary transfers.
//!
//! The crate is organised bottom-up:
//!
//! - [`astro`]: heliocentric two-body mechanics (Kepler, element/state
//!   conversion, VVLH frames, nondimensional scaling).
//! - [`lambert`]: zero-revolution Lambert solver and the impulsive baseline
//!   (rocket-equation mass estimate and the ΔV feasibility heuristic).
//! - [`optctl`]: indirect fuel-optimal trajectory optimisation with
//!   energy-to-fuel homotopy; produces the ground-truth transfer labels.
//! - [`dataset`]: sample generation, feature extraction, persistence,
//!   splitting and standardisation.
//! - [`neural`]: a small multilayer perceptron engine with backpropagation
//!   and Adam, used for the feasibility classifier and the mass regressor.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod astro;
pub mod dataset;
pub mod error;
pub mod lambert;
pub mod neural;
pub mod optctl;

pub use astro::{CartesianState, OrbitElements, Vec3};
pub use dataset::{FeatureVectorC, FeatureVectorR, Pool, SampleRanges, Scaler, TransferSample};
pub use error::{Error, Result};
pub use lambert::{LambertBaseline, LambertSolution};
pub use neural::{MlpModel, TaskKind, TrainConfig, TrainReport};
pub use optctl::{
    ExtremalSolution, Label, SolverConfig, SpacecraftConfig, TransferOutcome, TransferProblem,
};
