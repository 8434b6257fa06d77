//! Per-feature z-score standardisation.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SCALER_SCHEMA: &str = "ltx-scaler-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    /// Column means and population standard deviations of `rows`.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::invalid("scaler needs at least two training rows"));
        }
        let d = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::ShapeMismatch {
                expected: d,
                actual: r.len(),
            });
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std: Vec<f64> = var.iter().map(|v| (v / n).sqrt()).collect();
        for (k, (s, m)) in std.iter().zip(&mean).enumerate() {
            if !(*s > 1e-12 * m.abs().max(1.0)) {
                return Err(Error::invalid(format!(
                    "feature column {k} has zero variance"
                )));
            }
        }
        Ok(Self { mean, std })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::ShapeMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| (x - m) / s)
            .collect())
    }

    pub fn inverse(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check(z)?;
        Ok(z.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((z, m), s)| z * s + m)
            .collect())
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }

    /// Text form: schema line, then one `mean std` pair per line.
    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "{SCALER_SCHEMA} {}", self.dim())?;
        for (m, s) in self.mean.iter().zip(&self.std) {
            writeln!(w, "{m:e} {s:e}")?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead, origin: &str) -> Result<Self> {
        let parse_err = |line: usize, detail: String| Error::Parse {
            path: origin.to_string(),
            line,
            detail,
        };
        let mut lines = r.lines();
        let head = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty scaler file".into()))?
            .map_err(|e| Error::io(origin, e))?;
        let mut it = head.split_whitespace();
        if it.next() != Some(SCALER_SCHEMA) {
            return Err(parse_err(
                1,
                format!("expected schema {SCALER_SCHEMA}, got {head:?}"),
            ));
        }
        let dim: usize = it
            .next()
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| parse_err(1, "missing feature count".into()))?;
        let mut mean = Vec::with_capacity(dim);
        let mut std = Vec::with_capacity(dim);
        for k in 0..dim {
            let line = lines
                .next()
                .ok_or_else(|| {
                    parse_err(k + 2, format!("expected {dim} rows, file ends after {k}"))
                })?
                .map_err(|e| Error::io(origin, e))?;
            let nums: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(k + 2, e.to_string()))?;
            match nums.as_slice() {
                [m, s] if *s > 0.0 => {
                    mean.push(*m);
                    std.push(*s);
                }
                _ => {
                    return Err(parse_err(
                        k + 2,
                        format!("expected `mean std` with std > 0, got {line:?}"),
                    ))
                }
            }
        }
        Ok(Self { mean, std })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f =
            std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
        self.write_to(&mut f)
            .and_then(|_| f.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(f), &path.display().to_string())
    }
}
