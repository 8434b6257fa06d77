//! Seeded train/test splits.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::TransferSample;
use crate::neural::TaskKind;
use crate::{Error, Result};

/// Splits off `n_test` random records. Classification draws from the whole
/// pool; regression restricts both sides to Optimal records.
pub fn split(
    samples: &[TransferSample],
    n_test: usize,
    seed: u64,
    task: TaskKind,
) -> Result<(Vec<TransferSample>, Vec<TransferSample>)> {
    let mut pool: Vec<TransferSample> = match task {
        TaskKind::Classification => samples.to_vec(),
        TaskKind::Regression => samples.iter().filter(|s| s.is_optimal()).copied().collect(),
    };
    if pool.len() <= n_test {
        let what = match task {
            TaskKind::Classification => "samples",
            TaskKind::Regression => "optimal samples",
        };
        return Err(Error::invalid(format!(
            "{} {what} cannot supply a test set of {n_test} plus training data",
            pool.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    let train = pool.split_off(n_test);
    Ok((train, pool))
}
