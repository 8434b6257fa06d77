//! Learning features. Units: kg, days, AU, km/s, radians.

use super::TransferSample;
use crate::astro::{cartesian_to_elements, CartesianState, OrbitElements, AU};
use crate::neural::TaskKind;
use crate::optctl::SpacecraftConfig;
use crate::{Error, Result};

pub const FEATURES_C: [&str; 16] = [
    "m0",
    "dt",
    "rx_c0",
    "ry_c0",
    "rz_c0",
    "vx_c0",
    "vy_c0",
    "vz_c0",
    "drx",
    "dry",
    "drz",
    "dvx",
    "dvy",
    "dvz",
    "dtheta",
    "dv_lambert",
];

pub const FEATURES_R: [&str; 17] = [
    "m0",
    "dt",
    "a_c0",
    "e_c0",
    "i_c0",
    "raan_c0",
    "argp_c0",
    "ta_c0",
    "drx",
    "dry",
    "drz",
    "dvx",
    "dvy",
    "dvz",
    "dtheta",
    "dv_lambert",
    "mf_lam",
];

/// Feasibility-classifier input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVectorC(pub [f64; 16]);

/// Remaining-mass regressor input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVectorR(pub [f64; 17]);

/// States derived from a record.
struct Derived {
    dep: CartesianState,
    target: CartesianState,
    ele_c0: OrbitElements,
    ele_tf: OrbitElements,
}

impl Derived {
    fn of(s: &TransferSample) -> Result<Self> {
        // Geometry does not depend on the spacecraft.
        let problem = s.problem(&SpacecraftConfig::default())?;
        let target = problem.target_state();
        Ok(Self {
            dep: problem.departure_state(),
            ele_c0: problem.ele_c0,
            ele_tf: cartesian_to_elements(&target)?,
            target,
        })
    }
}

fn state(out: &mut Vec<f64>, s: &CartesianState) {
    out.extend((s.r / AU).iter());
    out.extend((s.v / 1e3).iter());
}

fn elements(out: &mut Vec<f64>, e: &OrbitElements) {
    out.extend([e.a / AU, e.e, e.i, e.raan, e.argp, e.ta]);
}

fn offsets(out: &mut Vec<f64>, s: &TransferSample) {
    out.extend([
        s.drx_au, s.dry_au, s.drz_au, s.dvx_kms, s.dvy_kms, s.dvz_kms,
    ]);
}

#[derive(Clone, Copy)]
enum Part {
    EleC0,
    StateC0,
    EleTf,
    StateTf,
    Offsets,
    Dtheta,
    DeltaV,
    MfLam,
}

fn parts(group: usize, task: TaskKind) -> Result<Vec<Part>> {
    use Part::*;
    let base: &[Part] = match group {
        1 => &[EleC0, EleTf],
        2 => &[EleC0, StateTf],
        3 => &[EleC0, Offsets],
        4 => &[StateC0, EleTf],
        5 => &[StateC0, StateTf],
        6 => &[StateC0, Offsets],
        7 => match task {
            TaskKind::Classification => &[StateC0, Offsets, Dtheta],
            TaskKind::Regression => &[EleC0, Offsets, Dtheta],
        },
        8 => match task {
            TaskKind::Classification => &[StateC0, Offsets, DeltaV],
            TaskKind::Regression => &[EleC0, Offsets, Dtheta, DeltaV],
        },
        9 => match task {
            TaskKind::Classification => &[StateC0, Offsets, Dtheta, DeltaV],
            TaskKind::Regression => &[EleC0, Offsets, Dtheta, DeltaV, MfLam],
        },
        g => return Err(Error::invalid(format!("feature group {g} not in 1..=9"))),
    };
    Ok(base.to_vec())
}

/// Features of ablation `group` (1–9). Every group starts with m0 and ΔT.
pub fn extract_features_group(
    s: &TransferSample,
    group: usize,
    task: TaskKind,
) -> Result<Vec<f64>> {
    let parts = parts(group, task)?;
    let d = Derived::of(s)?;
    let mut out = Vec::with_capacity(17);
    out.extend([s.m0_kg, s.dt_days]);
    for p in parts {
        match p {
            Part::EleC0 => elements(&mut out, &d.ele_c0),
            Part::StateC0 => state(&mut out, &d.dep),
            Part::EleTf => elements(&mut out, &d.ele_tf),
            Part::StateTf => state(&mut out, &d.target),
            Part::Offsets => offsets(&mut out, s),
            Part::Dtheta => out.push(s.dtheta_rad),
            Part::DeltaV => out.push(s.dv_lambert_ms / 1e3),
            Part::MfLam => out.push(s.mf_lam_kg),
        }
    }
    Ok(out)
}

/// Column names of a group's features.
pub fn group_feature_names(group: usize, task: TaskKind) -> Result<Vec<String>> {
    let mut names = vec!["m0".to_string(), "dt".to_string()];
    let add = |names: &mut Vec<String>, stem: &[&str], suffix: &str| {
        names.extend(stem.iter().map(|n| format!("{n}_{suffix}")));
    };
    const ELE: [&str; 6] = ["a", "e", "i", "raan", "argp", "ta"];
    const RV: [&str; 6] = ["rx", "ry", "rz", "vx", "vy", "vz"];
    for p in parts(group, task)? {
        match p {
            Part::EleC0 => add(&mut names, &ELE, "c0"),
            Part::StateC0 => add(&mut names, &RV, "c0"),
            Part::EleTf => add(&mut names, &ELE, "tf"),
            Part::StateTf => add(&mut names, &RV, "tf"),
            Part::Offsets => {
                names.extend(["drx", "dry", "drz", "dvx", "dvy", "dvz"].map(String::from))
            }
            Part::Dtheta => names.push("dtheta".into()),
            Part::DeltaV => names.push("dv_lambert".into()),
            Part::MfLam => names.push("mf_lam".into()),
        }
    }
    Ok(names)
}

pub fn extract_features_c(s: &TransferSample) -> Result<FeatureVectorC> {
    let d = Derived::of(s)?;
    let mut out = Vec::with_capacity(16);
    out.extend([s.m0_kg, s.dt_days]);
    state(&mut out, &d.dep);
    offsets(&mut out, s);
    out.extend([s.dtheta_rad, s.dv_lambert_ms / 1e3]);
    let mut v = [0.0; 16];
    v.copy_from_slice(&out);
    Ok(FeatureVectorC(v))
}

pub fn extract_features_r(s: &TransferSample) -> Result<FeatureVectorR> {
    let ele = s.elements()?;
    let mut out = Vec::with_capacity(17);
    out.extend([s.m0_kg, s.dt_days]);
    elements(&mut out, &ele);
    offsets(&mut out, s);
    out.extend([s.dtheta_rad, s.dv_lambert_ms / 1e3, s.mf_lam_kg]);
    let mut v = [0.0; 17];
    v.copy_from_slice(&out);
    Ok(FeatureVectorR(v))
}
