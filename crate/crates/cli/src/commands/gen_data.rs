//! Labelled pool generation.

use std::collections::HashSet;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use ltx_core::dataset::{append_pool, generate_sample, load_pool, sample_seed, Generated};
use ltx_core::Label;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::InputError;

#[derive(Debug, Clone, Serialize)]
pub struct GenSummary {
    pub pool: PathBuf,
    pub samples: usize,
    pub new_samples: usize,
    pub optimal: usize,
    pub infeasible: usize,
    pub discarded: usize,
    pub optimal_fraction: f64,
    pub seconds: f64,
}

/// Sidecar listing seeds that produced no record, so a resumed run skips
/// them exactly like the original run did.
pub fn discard_log(pool: &Path) -> PathBuf {
    let mut s = pool.as_os_str().to_owned();
    s.push(".discarded");
    PathBuf::from(s)
}

fn read_discards(path: &Path) -> anyhow::Result<HashSet<u64>> {
    if !path.exists() {
        return Ok(HashSet::new());
    }
    let f = std::fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = HashSet::new();
    for (k, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        let field = line.split(',').next().unwrap_or("");
        if field.is_empty() {
            continue;
        }
        let seed = field
            .parse()
            .map_err(|_| InputError(format!("{}:{}: bad seed {field:?}", path.display(), k + 1)))?;
        out.insert(seed);
    }
    Ok(out)
}

/// Grows the pool at `path` to `n` records. Sample `k` of the schedule uses
/// seed `sample_seed(seed, k)`; records already present (or recorded as
/// discarded) are skipped, so an interrupted run resumes into the same pool
/// a single run would have produced.
pub fn gen_data(
    cfg: &Config,
    n: usize,
    seed: u64,
    workers: usize,
    path: &Path,
    chunk: usize,
) -> anyhow::Result<GenSummary> {
    let t0 = Instant::now();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let existing = if path.exists() {
        let pool = load_pool(path)?;
        if pool.craft != cfg.craft {
            return Err(InputError(format!(
                "{} was generated with a different spacecraft",
                path.display()
            ))
            .into());
        }
        pool.samples
    } else {
        append_pool(path, &cfg.craft, &[])?;
        Vec::new()
    };
    let log_path = discard_log(path);
    let mut skip = read_discards(&log_path)?;
    skip.extend(existing.iter().map(|s| s.seed));
    let mut stored = existing.len();
    let before = stored;
    let mut optimal = existing
        .iter()
        .filter(|s| s.label == Label::Optimal)
        .count();
    let mut discarded = 0;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()?;
    let chunk = chunk.max(1);
    let mut index = 0u64;
    while stored < n {
        let want = (n - stored).min(chunk);
        let mut seeds = Vec::with_capacity(want);
        while seeds.len() < want {
            let s = sample_seed(seed, index);
            index += 1;
            if !skip.contains(&s) {
                seeds.push(s);
            }
        }
        let results: Vec<Generated> = pool.install(|| {
            seeds
                .par_iter()
                .map(|&s| generate_sample(s, &cfg.ranges, &cfg.craft, &cfg.solver))
                .collect()
        });
        let mut rows = Vec::new();
        let mut dropped = Vec::new();
        for r in results {
            match r {
                Generated::Stored(s) => {
                    optimal += usize::from(s.label == Label::Optimal);
                    rows.push(s);
                }
                Generated::Discarded { seed, reason } => {
                    log::warn!("seed {seed} discarded: {reason}");
                    dropped.push((seed, reason));
                }
            }
        }
        append_pool(path, &cfg.craft, &rows)?;
        if !dropped.is_empty() {
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&log_path)
                .with_context(|| format!("writing {}", log_path.display()))?;
            for (s, reason) in &dropped {
                writeln!(f, "{s},{}", reason.replace(['\n', ','], " "))?;
            }
        }
        discarded += dropped.len();
        stored += rows.len();
        skip.extend(seeds);
        let secs = t0.elapsed().as_secs_f64();
        log::info!(
            "{stored}/{n} samples, optimal {:.3}, {:.2} s/sample",
            optimal as f64 / stored.max(1) as f64,
            secs / (stored - before).max(1) as f64
        );
    }
    let samples = load_pool(path)?.samples;
    let optimal = samples.iter().filter(|s| s.label == Label::Optimal).count();
    Ok(GenSummary {
        pool: path.to_path_buf(),
        samples: samples.len(),
        new_samples: stored - before,
        optimal,
        infeasible: samples.len() - optimal,
        discarded,
        optimal_fraction: if samples.is_empty() {
            0.0
        } else {
            optimal as f64 / samples.len() as f64
        },
        seconds: t0.elapsed().as_secs_f64(),
    })
}
