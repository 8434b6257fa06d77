//! `ltx-pool-v1` CSV persistence.
//!
//! Line 1 carries the schema tag and spacecraft, line 2 the column header,
//! then one record per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Pool, TransferSample};
use crate::optctl::SpacecraftConfig;
use crate::{Error, Result};

pub const POOL_SCHEMA: &str = "ltx-pool-v1";

pub const COLUMNS: [&str; 20] = [
    "seed",
    "a",
    "e",
    "i",
    "raan",
    "argp",
    "ta",
    "m0_kg",
    "dt_days",
    "drx_au",
    "dry_au",
    "drz_au",
    "dvx_kms",
    "dvy_kms",
    "dvz_kms",
    "label",
    "mf_max_kg",
    "dtheta_rad",
    "dv_lambert_ms",
    "mf_lam_kg",
];

fn schema_line(craft: &SpacecraftConfig) -> String {
    format!(
        "#{POOL_SCHEMA},tmax_n={},isp_s={},mdry_kg={}",
        craft.tmax, craft.isp, craft.m_dry
    )
}

fn parse_schema_line(line: &str, origin: &str) -> Result<SpacecraftConfig> {
    let err = |detail: String| Error::Parse {
        path: origin.to_string(),
        line: 1,
        detail,
    };
    let mut fields = line.trim_end().split(',');
    let tag = fields.next().unwrap_or_default();
    if tag != format!("#{POOL_SCHEMA}") {
        return Err(err(format!(
            "expected schema tag #{POOL_SCHEMA}, got {tag:?}"
        )));
    }
    let mut craft = SpacecraftConfig::default();
    let mut seen = 0;
    for f in fields {
        let (k, v) = f
            .split_once('=')
            .ok_or_else(|| err(format!("malformed header field {f:?}")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| err(format!("bad number in header field {f:?}")))?;
        match k {
            "tmax_n" => craft.tmax = v,
            "isp_s" => craft.isp = v,
            "mdry_kg" => craft.m_dry = v,
            _ => return Err(err(format!("unknown header field {k:?}"))),
        }
        seen += 1;
    }
    if seen != 3 {
        return Err(err("header must give tmax_n, isp_s and mdry_kg".into()));
    }
    craft.validate().map_err(|e| err(e.to_string()))?;
    Ok(craft)
}

pub fn write_pool(pool: &Pool, w: impl Write) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "{}", schema_line(&pool.craft)).map_err(|e| Error::io("<pool>", e))?;
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    csv.write_record(COLUMNS)
        .map_err(|e| Error::Format(e.to_string()))?;
    for s in &pool.samples {
        csv.serialize(s).map_err(|e| Error::Format(e.to_string()))?;
    }
    csv.flush().map_err(|e| Error::io("<pool>", e))?;
    Ok(())
}

/// Appends records to a pool file, creating it with its header when it does
/// not exist yet. An existing file must carry the same spacecraft.
pub fn append_pool(
    path: impl AsRef<Path>,
    craft: &SpacecraftConfig,
    samples: &[TransferSample],
) -> Result<()> {
    let path = path.as_ref();
    if !path.exists() {
        return save_pool(
            &Pool {
                craft: *craft,
                samples: samples.to_vec(),
            },
            path,
        );
    }
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut first = String::new();
    BufReader::new(f)
        .read_line(&mut first)
        .map_err(|e| Error::io(path, e))?;
    let existing = parse_schema_line(&first, &path.display().to_string())?;
    if existing != *craft {
        return Err(Error::invalid(format!(
            "{}: pool was generated with a different spacecraft ({existing:?})",
            path.display()
        )));
    }
    let f = std::fs::OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut csv = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(f));
    for s in samples {
        csv.serialize(s).map_err(|e| Error::Format(e.to_string()))?;
    }
    csv.flush().map_err(|e| Error::io(path, e))
}

pub fn read_pool(r: impl Read, origin: &str) -> Result<Pool> {
    let mut r = BufReader::new(r);
    let mut first = String::new();
    r.read_line(&mut first).map_err(|e| Error::io(origin, e))?;
    if first.is_empty() {
        return Err(Error::Parse {
            path: origin.into(),
            line: 1,
            detail: "empty pool file".into(),
        });
    }
    let craft = parse_schema_line(&first, origin)?;
    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = csv.headers().map_err(|e| Error::Parse {
        path: origin.into(),
        line: 2,
        detail: e.to_string(),
    })?;
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::Parse {
            path: origin.into(),
            line: 2,
            detail: format!("column header does not match {POOL_SCHEMA}"),
        });
    }
    let mut samples = Vec::new();
    for (k, row) in csv.deserialize::<TransferSample>().enumerate() {
        // records start on file line 3
        let line = k + 3;
        let s = row.map_err(|e| Error::Parse {
            path: origin.into(),
            line,
            detail: e.to_string(),
        })?;
        s.validate(&craft).map_err(|e| Error::Parse {
            path: origin.into(),
            line,
            detail: e.to_string(),
        })?;
        samples.push(s);
    }
    Ok(Pool { craft, samples })
}

pub fn save_pool(pool: &Pool, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_pool(pool, f)
}

pub fn load_pool(path: impl AsRef<Path>) -> Result<Pool> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_pool(f, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optctl::Label;

    fn sample(seed: u64, label: Label) -> TransferSample {
        TransferSample {
            seed,
            a: 2.0 + 1.0 / 3.0,
            e: 0.1,
            i: 7.5,
            raan: 359.999,
            argp: 0.1 + 0.2,
            ta: 12.0,
            m0_kg: 1234.5678901234,
            dt_days: 321.0,
            drx_au: -0.1,
            dry_au: 1e-17,
            drz_au: 0.3,
            dvx_kms: 2.0,
            dvy_kms: -3.0,
            dvz_kms: 0.5,
            label,
            mf_max_kg: (label == Label::Optimal).then_some(1111.1),
            dtheta_rad: 0.7,
            dv_lambert_ms: 5432.1,
            mf_lam_kg: 1029.0,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let pool = Pool {
            craft: SpacecraftConfig::default(),
            samples: vec![sample(1, Label::Optimal), sample(2, Label::Infeasible)],
        };
        let mut buf = Vec::new();
        write_pool(&pool, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("#ltx-pool-v1,tmax_n=0.3,isp_s=3000,mdry_kg=800\nseed,a,e,"));
        assert_eq!(read_pool(buf.as_slice(), "mem").unwrap(), pool);
    }

    #[test]
    fn empty_pool_round_trip() {
        let pool = Pool::new(SpacecraftConfig::default());
        let mut buf = Vec::new();
        write_pool(&pool, &mut buf).unwrap();
        assert_eq!(read_pool(buf.as_slice(), "mem").unwrap(), pool);
    }

    #[test]
    fn rejects_bad_schema_and_rows() {
        let pool = Pool {
            craft: SpacecraftConfig::default(),
            samples: vec![sample(1, Label::Optimal), sample(2, Label::Optimal)],
        };
        let mut buf = Vec::new();
        write_pool(&pool, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();

        let wrong = text.replacen("ltx-pool-v1", "ltx-pool-v0", 1);
        assert!(matches!(
            read_pool(wrong.as_bytes(), "p"),
            Err(Error::Parse { line: 1, .. })
        ));

        let cols = text.replacen("seed,a,e", "seed,a,ecc", 1);
        assert!(matches!(
            read_pool(cols.as_bytes(), "p"),
            Err(Error::Parse { line: 2, .. })
        ));

        let mut lines: Vec<&str> = text.lines().collect();
        let broken = lines[3].replacen(",optimal,", ",maybe,", 1);
        lines[3] = &broken;
        let err = read_pool(lines.join("\n").as_bytes(), "p").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");

        let hf = text.replacen(",optimal,1111.1,", ",homotopy_failed,,", 1);
        assert!(matches!(
            read_pool(hf.as_bytes(), "p"),
            Err(Error::Parse { line: 3, .. })
        ));

        assert!(read_pool(&b""[..], "p").is_err());
    }

    #[test]
    fn append_extends_and_checks_craft() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let craft = SpacecraftConfig::default();
        append_pool(&path, &craft, &[sample(1, Label::Optimal)]).unwrap();
        append_pool(
            &path,
            &craft,
            &[sample(2, Label::Infeasible), sample(3, Label::Optimal)],
        )
        .unwrap();
        let back = load_pool(&path).unwrap();
        assert_eq!(
            back.samples.iter().map(|s| s.seed).collect::<Vec<_>>(),
            [1, 2, 3]
        );
        let other = SpacecraftConfig { tmax: 0.2, ..craft };
        assert!(append_pool(&path, &other, &[]).is_err());
    }
}
