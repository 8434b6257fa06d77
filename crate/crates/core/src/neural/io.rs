//! `ltx-mlp-v1` model files.
//!
//! Little-endian binary layout:
//!
//! ```text
//! magic        "ltx-mlp-v1\n"
//! task         u8   (0 classification, 1 regression)
//! n_sizes      u32, then n_sizes × u32 layer sizes (input … output)
//! slope        f64  (hidden Leaky-ReLU slope)
//! scaler       dim × f64 means, dim × f64 stds (dim = input size)
//! target       u8 flag, then f64 mean, f64 std when set
//! params       u64 count, then count × f64
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::mlp::{param_count, MlpModel, TargetScale};
use super::TaskKind;
use crate::dataset::Scaler;
use crate::{Error, Result};

pub const MODEL_MAGIC: &[u8] = b"ltx-mlp-v1\n";
const MAX_LAYERS: u32 = 64;
const MAX_WIDTH: u32 = 1 << 16;

pub fn write_model(model: &MlpModel, w: &mut impl Write) -> Result<()> {
    model.validate()?;
    let io = |e| Error::io("<model>", e);
    let mut buf = Vec::with_capacity(64 + 8 * model.params.len());
    buf.extend_from_slice(MODEL_MAGIC);
    buf.push(match model.task {
        TaskKind::Classification => 0,
        TaskKind::Regression => 1,
    });
    buf.extend_from_slice(&(model.sizes.len() as u32).to_le_bytes());
    for s in &model.sizes {
        buf.extend_from_slice(&(*s as u32).to_le_bytes());
    }
    buf.extend_from_slice(&model.slope.to_le_bytes());
    for v in model.scaler.mean.iter().chain(&model.scaler.std) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    match model.target {
        Some(t) => {
            buf.push(1);
            buf.extend_from_slice(&t.mean.to_le_bytes());
            buf.extend_from_slice(&t.std.to_le_bytes());
        }
        None => buf.push(0),
    }
    buf.extend_from_slice(&(model.params.len() as u64).to_le_bytes());
    for p in &model.params {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    w.write_all(&buf).map_err(io)
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        if self.data.len() - self.pos < n {
            return Err(Error::Format(format!(
                "truncated model file while reading {what}"
            )));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64(what)).collect()
    }
}

pub fn read_model(r: &mut impl Read) -> Result<MlpModel> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)
        .map_err(|e| Error::io("<model>", e))?;
    let mut c = Cursor {
        data: &data,
        pos: 0,
    };
    let magic = c
        .take(MODEL_MAGIC.len(), "magic")
        .map_err(|_| Error::Format("not an ltx-mlp file".into()))?;
    if magic != MODEL_MAGIC {
        if magic.starts_with(b"ltx-mlp-") {
            let tag = String::from_utf8_lossy(magic).trim().to_string();
            return Err(Error::Format(format!("unsupported model version {tag:?}")));
        }
        return Err(Error::Format("not an ltx-mlp file".into()));
    }
    let task = match c.u8("task")? {
        0 => TaskKind::Classification,
        1 => TaskKind::Regression,
        t => return Err(Error::Format(format!("unknown task code {t}"))),
    };
    let n = c.u32("layer count")?;
    if !(2..=MAX_LAYERS).contains(&n) {
        return Err(Error::Format(format!("implausible layer count {n}")));
    }
    let mut sizes = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let s = c.u32("layer size")?;
        if s == 0 || s > MAX_WIDTH {
            return Err(Error::Format(format!("implausible layer size {s}")));
        }
        sizes.push(s as usize);
    }
    let slope = c.f64("slope")?;
    let dim = sizes[0];
    let mean = c.f64s(dim, "scaler")?;
    let std = c.f64s(dim, "scaler")?;
    let target = match c.u8("target flag")? {
        0 => None,
        1 => Some(TargetScale {
            mean: c.f64("target scale")?,
            std: c.f64("target scale")?,
        }),
        f => return Err(Error::Format(format!("bad target flag {f}"))),
    };
    let count = c.u64("parameter count")? as usize;
    let expected = param_count(&sizes);
    if count != expected {
        return Err(Error::ShapeMismatch {
            expected,
            actual: count,
        });
    }
    let params = c.f64s(count, "parameters")?;
    if c.pos != data.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after model",
            data.len() - c.pos
        )));
    }
    let model = MlpModel {
        task,
        sizes,
        slope,
        params,
        scaler: Scaler { mean, std },
        target,
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    write_model(model, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(&mut BufReader::new(f))
}
