//! Labelled transfer pools: sampling, features, persistence, splitting and
//! standardisation.
//!
//! A sample pairs a departure body with a virtual rendezvous body whose
//! final state is the coasted departure state plus VVLH offsets. Records
//! hold their values in file units (AU, km/s, degrees, kg, days) so that
//! saving and loading is exact.

mod features;
mod io;
mod scaler;
mod split;

pub use features::{
    extract_features_c, extract_features_group, extract_features_r, group_feature_names,
    FeatureVectorC, FeatureVectorR, FEATURES_C, FEATURES_R,
};
pub use io::{append_pool, load_pool, read_pool, save_pool, write_pool, POOL_SCHEMA};
pub use scaler::Scaler;
pub use split::split;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::astro::{angle_between_positions, OrbitElements, Vec3, AU, DAY};
use crate::lambert::{lambert_delta_v, lambert_remaining_mass};
use crate::optctl::{classify_transfer, Label, SolverConfig, SpacecraftConfig, TransferProblem};
use crate::{Error, Result};

/// Sampling box for generated transfers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleRanges {
    pub a_au: (f64, f64),
    pub e: (f64, f64),
    pub i_deg: (f64, f64),
    pub raan_deg: (f64, f64),
    pub argp_deg: (f64, f64),
    pub ta_deg: (f64, f64),
    pub m0_kg: (f64, f64),
    pub dt_days: (f64, f64),
    /// Largest relative position offset, AU.
    pub d1_au: f64,
    /// Largest relative velocity offset, km/s.
    pub d2_kms: f64,
}

impl Default for SampleRanges {
    fn default() -> Self {
        Self {
            a_au: (2.0, 3.0),
            e: (0.0, 0.4),
            i_deg: (0.0, 20.0),
            raan_deg: (0.0, 360.0),
            argp_deg: (0.0, 360.0),
            ta_deg: (0.0, 360.0),
            m0_kg: (800.0, 2000.0),
            dt_days: (50.0, 500.0),
            d1_au: 1.0,
            d2_kms: 10.0,
        }
    }
}

impl SampleRanges {
    pub fn validate(&self, craft: &SpacecraftConfig) -> Result<()> {
        let ordered = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        let boxes = [
            ("a_au", self.a_au),
            ("e", self.e),
            ("i_deg", self.i_deg),
            ("raan_deg", self.raan_deg),
            ("argp_deg", self.argp_deg),
            ("ta_deg", self.ta_deg),
            ("m0_kg", self.m0_kg),
            ("dt_days", self.dt_days),
        ];
        if let Some((name, _)) = boxes.iter().find(|(_, r)| !ordered(*r)) {
            return Err(Error::invalid(format!(
                "sample range {name} must be finite with lo <= hi"
            )));
        }
        if self.a_au.0 <= 0.0 || self.e.0 < 0.0 || self.e.1 >= 1.0 || self.dt_days.0 <= 0.0 {
            return Err(Error::invalid(
                "sample ranges admit non-elliptic orbits or non-positive times",
            ));
        }
        if self.m0_kg.1 <= craft.m_dry {
            return Err(Error::invalid(
                "initial-mass range lies entirely below the dry mass",
            ));
        }
        if !(self.d1_au >= 0.0 && self.d2_kms >= 0.0) {
            return Err(Error::invalid("offset bounds must be non-negative"));
        }
        Ok(())
    }
}

/// One stored transfer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferSample {
    pub seed: u64,
    pub a: f64,
    pub e: f64,
    pub i: f64,
    pub raan: f64,
    pub argp: f64,
    pub ta: f64,
    pub m0_kg: f64,
    pub dt_days: f64,
    pub drx_au: f64,
    pub dry_au: f64,
    pub drz_au: f64,
    pub dvx_kms: f64,
    pub dvy_kms: f64,
    pub dvz_kms: f64,
    pub label: Label,
    pub mf_max_kg: Option<f64>,
    pub dtheta_rad: f64,
    pub dv_lambert_ms: f64,
    pub mf_lam_kg: f64,
}

/// Geometry of a transfer without its label, in file units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferSpec {
    /// a (AU), e, i, Ω, ω, f (degrees).
    pub elements: [f64; 6],
    pub m0_kg: f64,
    pub dt_days: f64,
    pub dr_au: [f64; 3],
    pub dv_kms: [f64; 3],
}

impl TransferSpec {
    pub fn elements(&self) -> Result<OrbitElements> {
        let [a, e, i, raan, argp, ta] = self.elements;
        OrbitElements::from_au_deg(a, e, i, raan, argp, ta)
    }

    pub fn problem(&self, craft: &SpacecraftConfig) -> Result<TransferProblem> {
        TransferProblem::from_offsets(
            self.elements()?,
            Vec3::from(self.dr_au) * AU,
            Vec3::from(self.dv_kms) * 1e3,
            self.m0_kg,
            self.dt_days * DAY,
            *craft,
        )
    }
}

/// Lambert-derived features of a transfer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambertFeatures {
    pub dtheta_rad: f64,
    pub dv_lambert_ms: f64,
    pub mf_lam_kg: f64,
}

impl LambertFeatures {
    pub fn of(problem: &TransferProblem) -> Result<Self> {
        let dep = problem.departure_state();
        let dtheta_rad = angle_between_positions(&dep.r, &problem.target_r)?;
        let dv_lambert_ms = lambert_delta_v(problem)?;
        Ok(Self {
            dtheta_rad,
            dv_lambert_ms,
            mf_lam_kg: lambert_remaining_mass(problem.m0, dv_lambert_ms, problem.craft.isp),
        })
    }
}

impl TransferSample {
    pub fn spec(&self) -> TransferSpec {
        TransferSpec {
            elements: [self.a, self.e, self.i, self.raan, self.argp, self.ta],
            m0_kg: self.m0_kg,
            dt_days: self.dt_days,
            dr_au: [self.drx_au, self.dry_au, self.drz_au],
            dv_kms: [self.dvx_kms, self.dvy_kms, self.dvz_kms],
        }
    }

    pub fn elements(&self) -> Result<OrbitElements> {
        self.spec().elements()
    }

    pub fn problem(&self, craft: &SpacecraftConfig) -> Result<TransferProblem> {
        self.spec().problem(craft)
    }

    pub fn from_parts(
        seed: u64,
        spec: &TransferSpec,
        lam: &LambertFeatures,
        label: Label,
        mf_max_kg: Option<f64>,
    ) -> Self {
        let [a, e, i, raan, argp, ta] = spec.elements;
        Self {
            seed,
            a,
            e,
            i,
            raan,
            argp,
            ta,
            m0_kg: spec.m0_kg,
            dt_days: spec.dt_days,
            drx_au: spec.dr_au[0],
            dry_au: spec.dr_au[1],
            drz_au: spec.dr_au[2],
            dvx_kms: spec.dv_kms[0],
            dvy_kms: spec.dv_kms[1],
            dvz_kms: spec.dv_kms[2],
            label,
            mf_max_kg,
            dtheta_rad: lam.dtheta_rad,
            dv_lambert_ms: lam.dv_lambert_ms,
            mf_lam_kg: lam.mf_lam_kg,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.label == Label::Optimal
    }

    pub fn validate(&self, craft: &SpacecraftConfig) -> Result<()> {
        match (self.label, self.mf_max_kg) {
            (Label::Optimal, Some(m)) if m > craft.m_dry && m <= self.m0_kg => Ok(()),
            (Label::Optimal, _) => Err(Error::invalid(format!(
                "seed {}: optimal sample needs m_dry < mf_max <= m0",
                self.seed
            ))),
            (Label::Infeasible, None) => Ok(()),
            (Label::Infeasible, Some(_)) => Err(Error::invalid(format!(
                "seed {}: infeasible sample carries mf_max",
                self.seed
            ))),
            (Label::HomotopyFailed, _) => Err(Error::invalid(format!(
                "seed {}: homotopy-failed samples are never stored",
                self.seed
            ))),
        }
    }
}

/// A labelled pool and the spacecraft it was generated for.
#[derive(Debug, Clone, PartialEq)]
pub struct Pool {
    pub craft: SpacecraftConfig,
    pub samples: Vec<TransferSample>,
}

impl Pool {
    pub fn new(craft: SpacecraftConfig) -> Self {
        Self {
            craft,
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn optimal_fraction(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().filter(|s| s.is_optimal()).count() as f64 / self.samples.len() as f64
    }
}

/// Uniform direction on the unit sphere.
fn unit_vector(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Offset redraws before a geometry is given up.
const MAX_REDRAWS: usize = 100;

/// Draws a well-posed transfer geometry: hyperbolic targets and degenerate
/// Lambert geometries redraw the offsets from the same stream.
pub fn sample_spec(
    seed: u64,
    ranges: &SampleRanges,
    craft: &SpacecraftConfig,
) -> Result<(TransferSpec, LambertFeatures)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // m0 strictly above the dry mass
    let m_lo = ranges.m0_kg.0.max(craft.m_dry + 1e-6);
    let elements = [
        draw(&mut rng, ranges.a_au),
        draw(&mut rng, ranges.e),
        draw(&mut rng, ranges.i_deg),
        draw(&mut rng, ranges.raan_deg),
        draw(&mut rng, ranges.argp_deg),
        draw(&mut rng, ranges.ta_deg),
    ];
    let m0_kg = draw(&mut rng, (m_lo, ranges.m0_kg.1.max(m_lo)));
    let dt_days = draw(&mut rng, ranges.dt_days);
    for _ in 0..MAX_REDRAWS {
        let dr = unit_vector(&mut rng) * draw(&mut rng, (0.0, ranges.d1_au));
        let dv = unit_vector(&mut rng) * draw(&mut rng, (0.0, ranges.d2_kms));
        let spec = TransferSpec {
            elements,
            m0_kg,
            dt_days,
            dr_au: [dr.x, dr.y, dr.z],
            dv_kms: [dv.x, dv.y, dv.z],
        };
        let problem = match spec.problem(craft) {
            Ok(p) => p,
            Err(Error::NotElliptic { .. }) => continue,
            Err(e) => return Err(e),
        };
        match LambertFeatures::of(&problem) {
            Ok(lam) => return Ok((spec, lam)),
            Err(e) => log::debug!("seed {seed}: redraw offsets ({e})"),
        }
    }
    Err(Error::NoConvergence(format!(
        "seed {seed}: no well-posed offsets after {MAX_REDRAWS} draws"
    )))
}

/// Seed of the `index`-th sample of a pool generated from `base`.
pub fn sample_seed(base: u64, index: u64) -> u64 {
    crate::optctl::mix_seed(base, index)
}

/// Outcome of one generation attempt.
#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Stored(TransferSample),
    /// Homotopy failures persisted past the retry cap, or no well-posed
    /// geometry; the reason is kept for the log.
    Discarded {
        seed: u64,
        reason: String,
    },
}

/// Homotopy-failure relabelling attempts before a sample is discarded.
pub const HOMOTOPY_RETRIES: u64 = 3;

/// Generates and labels one sample; the same seed always gives the same
/// record.
pub fn generate_sample(
    seed: u64,
    ranges: &SampleRanges,
    craft: &SpacecraftConfig,
    solver: &SolverConfig,
) -> Generated {
    let (spec, lam) = match sample_spec(seed, ranges, craft) {
        Ok(v) => v,
        Err(e) => {
            return Generated::Discarded {
                seed,
                reason: e.to_string(),
            }
        }
    };
    let problem = match spec.problem(craft) {
        Ok(p) => p,
        Err(e) => {
            return Generated::Discarded {
                seed,
                reason: e.to_string(),
            }
        }
    };
    for retry in 0..HOMOTOPY_RETRIES {
        let out = classify_transfer(
            &problem,
            crate::optctl::mix_seed(seed, 0x5eed + retry),
            solver,
            None,
        );
        match out.label {
            Label::HomotopyFailed => log::debug!("seed {seed}: homotopy failed (retry {retry})"),
            label => {
                return Generated::Stored(TransferSample::from_parts(
                    seed, &spec, &lam, label, out.mf_max,
                ))
            }
        }
    }
    Generated::Discarded {
        seed,
        reason: format!("homotopy failed {HOMOTOPY_RETRIES} times"),
    }
}
