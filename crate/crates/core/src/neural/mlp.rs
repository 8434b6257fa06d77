//! Dense network with Leaky-ReLU hidden layers.
//!
//! Parameters live in one flat vector, layer by layer: the weight matrix
//! (row-major, `out × in`) followed by the bias vector.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{TaskKind, BCE_CLAMP};
use crate::dataset::Scaler;
use crate::{Error, Result};

pub fn leaky_relu(z: f64, slope: f64) -> f64 {
    if z >= 0.0 {
        z
    } else {
        slope * z
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn linear(z: f64) -> f64 {
    z
}

fn check_batch(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    Ok(())
}

/// Mean binary cross-entropy with predictions clamped to `[c, 1 − c]`.
pub fn bce_loss(pred: &[f64], labels: &[f64]) -> Result<f64> {
    check_batch(pred, labels)?;
    let s: f64 = pred
        .iter()
        .zip(labels)
        .map(|(p, y)| {
            let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum();
    Ok(s / pred.len() as f64)
}

pub fn mse_loss(pred: &[f64], targets: &[f64]) -> Result<f64> {
    check_batch(pred, targets)?;
    Ok(pred
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / pred.len() as f64)
}

/// Standardisation of the regression target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetScale {
    pub mean: f64,
    pub std: f64,
}

impl TargetScale {
    pub fn fit(y: &[f64]) -> Result<Self> {
        let s = Scaler::fit(&y.iter().map(|v| vec![*v]).collect::<Vec<_>>())?;
        Ok(Self {
            mean: s.mean[0],
            std: s.std[0],
        })
    }

    pub fn apply(&self, y: f64) -> f64 {
        (y - self.mean) / self.std
    }

    pub fn inverse(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub task: TaskKind,
    /// Input, hidden…, output (= 1).
    pub sizes: Vec<usize>,
    pub slope: f64,
    pub params: Vec<f64>,
    /// Input standardisation.
    pub scaler: Scaler,
    /// Present for regressors.
    pub target: Option<TargetScale>,
}

/// Gradient of the batch loss, laid out like [`MlpModel::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<f64>);

pub(crate) fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

impl MlpModel {
    /// Zero biases and weights uniform in `±√(6/fan_in)` (variance
    /// `2/fan_in`).
    pub fn new(
        task: TaskKind,
        input: usize,
        hidden: &[usize],
        slope: f64,
        seed: u64,
    ) -> Result<Self> {
        if input == 0 || hidden.contains(&0) {
            return Err(Error::invalid("layer sizes must be positive"));
        }
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(input);
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(param_count(&sizes));
        for w in sizes.windows(2) {
            let bound = (6.0 / w[0] as f64).sqrt();
            params.extend((0..w[0] * w[1]).map(|_| rng.gen_range(-bound..=bound)));
            params.extend(std::iter::repeat_n(0.0, w[1]));
        }
        Ok(Self {
            task,
            sizes,
            slope,
            params,
            scaler: Scaler::identity(input),
            target: (task == TaskKind::Regression).then_some(TargetScale {
                mean: 0.0,
                std: 1.0,
            }),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn hidden(&self) -> &[usize] {
        &self.sizes[1..self.sizes.len() - 1]
    }

    /// Checks the shape chain against the parameter vector and scalers.
    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() < 2 || self.sizes.contains(&0) || *self.sizes.last().unwrap() != 1 {
            return Err(Error::Format(format!("bad layer sizes {:?}", self.sizes)));
        }
        let n = param_count(&self.sizes);
        if self.params.len() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                actual: self.params.len(),
            });
        }
        if self.scaler.dim() != self.sizes[0] {
            return Err(Error::ShapeMismatch {
                expected: self.sizes[0],
                actual: self.scaler.dim(),
            });
        }
        if (self.task == TaskKind::Regression) != self.target.is_some() {
            return Err(Error::Format(
                "target scaling must be present exactly for regressors".into(),
            ));
        }
        Ok(())
    }

    fn head(&self, z: f64) -> f64 {
        match self.task {
            TaskKind::Classification => sigmoid(z),
            TaskKind::Regression => linear(z),
        }
    }

    /// Network output for an already standardised input.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.sizes[0] {
            return Err(Error::ShapeMismatch {
                expected: self.sizes[0],
                actual: x.len(),
            });
        }
        let mut a = x.to_vec();
        let mut next = Vec::new();
        let mut off = 0;
        let last = self.sizes.len() - 2;
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (nin, nout) = (w[0], w[1]);
            let (wm, b) = self.params[off..off + nin * nout + nout].split_at(nin * nout);
            next.clear();
            for j in 0..nout {
                let row = &wm[j * nin..(j + 1) * nin];
                let z = b[j] + row.iter().zip(&a).map(|(w, x)| w * x).sum::<f64>();
                next.push(if l == last {
                    z
                } else {
                    leaky_relu(z, self.slope)
                });
            }
            std::mem::swap(&mut a, &mut next);
            off += nin * nout + nout;
        }
        Ok(self.head(a[0]))
    }

    /// Prediction for a raw feature vector: a probability for classifiers,
    /// the target in its own units for regressors.
    pub fn predict(&self, x_raw: &[f64]) -> Result<f64> {
        let y = self.forward(&self.scaler.apply(x_raw)?)?;
        Ok(match self.target {
            Some(t) => t.inverse(y),
            None => y,
        })
    }

    /// Batch loss on standardised inputs and (standardised) targets.
    pub fn loss(&self, xs: &[Vec<f64>], ys: &[f64]) -> Result<f64> {
        let pred: Vec<f64> = xs.iter().map(|x| self.forward(x)).collect::<Result<_>>()?;
        match self.task {
            TaskKind::Classification => bce_loss(&pred, ys),
            TaskKind::Regression => mse_loss(&pred, ys),
        }
    }

    /// Batch loss and its exact gradient.
    pub fn backward(&self, xs: &[Vec<f64>], ys: &[f64]) -> Result<(f64, Gradients)> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::ShapeMismatch {
                expected: xs.len(),
                actual: ys.len(),
            });
        }
        let nl = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(nl);
        let mut off = 0;
        for w in self.sizes.windows(2) {
            offsets.push(off);
            off += w[0] * w[1] + w[1];
        }
        let b = xs.len() as f64;
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        // activations[l] is the input of layer l; pre[l] its pre-activation
        let mut acts: Vec<Vec<f64>> = vec![Vec::new(); nl + 1];
        let mut pre: Vec<Vec<f64>> = vec![Vec::new(); nl];
        for (x, &y) in xs.iter().zip(ys) {
            if x.len() != self.sizes[0] {
                return Err(Error::ShapeMismatch {
                    expected: self.sizes[0],
                    actual: x.len(),
                });
            }
            acts[0].clear();
            acts[0].extend_from_slice(x);
            for l in 0..nl {
                let (nin, nout) = (self.sizes[l], self.sizes[l + 1]);
                let o = offsets[l];
                let (wm, bias) = self.params[o..o + nin * nout + nout].split_at(nin * nout);
                let (lo, hi) = acts.split_at_mut(l + 1);
                let a_in = &lo[l];
                let z = &mut pre[l];
                z.clear();
                hi[0].clear();
                for j in 0..nout {
                    let row = &wm[j * nin..(j + 1) * nin];
                    let zj = bias[j] + row.iter().zip(a_in).map(|(w, x)| w * x).sum::<f64>();
                    z.push(zj);
                    hi[0].push(if l + 1 == nl {
                        zj
                    } else {
                        leaky_relu(zj, self.slope)
                    });
                }
            }
            let z_out = pre[nl - 1][0];
            // dL/dz at the output
            let mut delta = match self.task {
                TaskKind::Classification => {
                    let p = sigmoid(z_out);
                    let pc = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
                    loss += -(y * pc.ln() + (1.0 - y) * (1.0 - pc).ln());
                    if pc != p {
                        vec![0.0]
                    } else {
                        vec![(p - y) / b]
                    }
                }
                TaskKind::Regression => {
                    loss += (z_out - y) * (z_out - y);
                    vec![2.0 * (z_out - y) / b]
                }
            };
            for l in (0..nl).rev() {
                let (nin, nout) = (self.sizes[l], self.sizes[l + 1]);
                let o = offsets[l];
                let a_in = &acts[l];
                for j in 0..nout {
                    let d = delta[j];
                    if d == 0.0 {
                        continue;
                    }
                    let g = &mut grad[o + j * nin..o + (j + 1) * nin];
                    for (gi, ai) in g.iter_mut().zip(a_in) {
                        *gi += d * ai;
                    }
                    grad[o + nin * nout + j] += d;
                }
                if l > 0 {
                    let wm = &self.params[o..o + nin * nout];
                    let mut prev = vec![0.0; nin];
                    for j in 0..nout {
                        let d = delta[j];
                        if d == 0.0 {
                            continue;
                        }
                        for (p, w) in prev.iter_mut().zip(&wm[j * nin..(j + 1) * nin]) {
                            *p += d * w;
                        }
                    }
                    for (p, z) in prev.iter_mut().zip(&pre[l - 1]) {
                        if *z < 0.0 {
                            *p *= self.slope;
                        }
                    }
                    delta = prev;
                }
            }
        }
        Ok((loss / b, Gradients(grad)))
    }
}
