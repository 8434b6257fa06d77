//! Differential evolution, rand/1/bin with greedy one-to-one selection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeConfig {
    pub population: usize,
    pub generations: usize,
    /// Differential weight.
    pub f: f64,
    /// Crossover probability.
    pub cr: f64,
    /// Stop as soon as the best objective is at or below this value.
    pub target: Option<f64>,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            population: 40,
            generations: 200,
            f: 0.8,
            cr: 0.9,
            target: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeResult {
    pub best: Vec<f64>,
    pub value: f64,
    pub generations: usize,
    pub evaluations: usize,
    /// Best objective after initialisation and after each generation.
    pub history: Vec<f64>,
}

/// Minimises `objective` over the box `bounds`. Budget exhaustion returns
/// the best point found. Deterministic for a given `seed`.
///
/// `seeds` are injected verbatim into the initial population (clipped to
/// the box) ahead of the random members.
pub fn de_search<F>(
    mut objective: F,
    bounds: &[(f64, f64)],
    config: &DeConfig,
    seed: u64,
    seeds: &[Vec<f64>],
) -> DeResult
where
    F: FnMut(&[f64]) -> f64,
{
    assert!(
        config.population >= 4,
        "differential evolution needs at least 4 members"
    );
    let dim = bounds.len();
    let np = config.population;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut pop: Vec<Vec<f64>> = Vec::with_capacity(np);
    for s in seeds.iter().take(np) {
        pop.push(
            s.iter()
                .zip(bounds)
                .map(|(x, (lo, hi))| x.clamp(*lo, *hi))
                .collect(),
        );
    }
    while pop.len() < np {
        pop.push(
            bounds
                .iter()
                .map(|(lo, hi)| rng.gen_range(*lo..=*hi))
                .collect(),
        );
    }
    let mut fit: Vec<f64> = pop.iter().map(|x| sanitize(objective(x))).collect();
    let mut evaluations = np;
    let mut best = argmin(&fit);
    let mut history = vec![fit[best]];
    let reached = |v: f64| config.target.is_some_and(|t| v <= t);

    let mut generations = 0;
    let mut trial = vec![0.0; dim];
    while generations < config.generations && !reached(fit[best]) {
        generations += 1;
        for i in 0..np {
            let (a, b, c) = pick3(&mut rng, np, i);
            let jrand = rng.gen_range(0..dim);
            for j in 0..dim {
                trial[j] = if j == jrand || rng.gen::<f64>() < config.cr {
                    let x = pop[a][j] + config.f * (pop[b][j] - pop[c][j]);
                    reflect(x, bounds[j], pop[i][j])
                } else {
                    pop[i][j]
                };
            }
            let ft = sanitize(objective(&trial));
            evaluations += 1;
            if ft <= fit[i] {
                pop[i].copy_from_slice(&trial);
                fit[i] = ft;
                if ft < fit[best] {
                    best = i;
                }
            }
            if reached(fit[best]) {
                break;
            }
        }
        history.push(fit[best]);
    }
    DeResult {
        best: pop[best].clone(),
        value: fit[best],
        generations,
        evaluations,
        history,
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut k = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[k] {
            k = i;
        }
    }
    k
}

fn pick3(rng: &mut ChaCha8Rng, n: usize, exclude: usize) -> (usize, usize, usize) {
    let mut draw = |taken: &[usize]| loop {
        let k = rng.gen_range(0..n);
        if k != exclude && !taken.contains(&k) {
            return k;
        }
    };
    let a = draw(&[]);
    let b = draw(&[a]);
    let c = draw(&[a, b]);
    (a, b, c)
}

/// Out-of-box mutants are pulled back between the parent and the bound.
fn reflect(x: f64, (lo, hi): (f64, f64), parent: f64) -> f64 {
    if x < lo {
        0.5 * (lo + parent)
    } else if x > hi {
        0.5 * (hi + parent)
    } else {
        x
    }
}
