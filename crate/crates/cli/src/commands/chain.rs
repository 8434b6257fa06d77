//! Sequential remaining-mass estimation along a rendezvous chain.

use std::path::Path;

use anyhow::Context;
use ltx_core::astro::{
    cartesian_to_elements, elements_to_cartesian, propagate_kepler, vvlh_relative,
    vvlh_to_inertial, CartesianState, OrbitElements, AU, DAY,
};
use ltx_core::dataset::{TransferSample, TransferSpec};
use ltx_core::lambert::lambert_remaining_mass;
use ltx_core::neural::{load_model, MlpModel};
use ltx_core::optctl::{classify_transfer, mix_seed};
use ltx_core::{Label, SolverConfig, SpacecraftConfig, TransferProblem, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::evaluate::{candidate, check_models, classify, estimate};
use crate::error::{BudgetExhausted, InputError};
use crate::report::{write_csv, write_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainBody {
    pub name: String,
    /// a (AU), e, i, Ω, ω, f (degrees) at the chain epoch.
    pub elements: [f64; 6],
}

/// ```toml
/// epoch_mjd = 60000.0
/// m0_kg = 2000.0
/// rendezvous_mjd = [60000.0, 60300.0, 60650.0]
/// truth_mf_kg = [1890.2, 1801.7]   # optional, one per leg
///
/// [[bodies]]
/// name = "A"
/// elements = [2.4, 0.1, 3.0, 40.0, 10.0, 200.0]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub epoch_mjd: f64,
    pub m0_kg: f64,
    /// Departure from body 0, then one rendezvous per following body.
    pub rendezvous_mjd: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_mf_kg: Option<Vec<f64>>,
    #[serde(default)]
    pub craft: SpacecraftConfig,
    pub bodies: Vec<ChainBody>,
}

impl ChainSpec {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec: ChainSpec =
            toml::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn legs(&self) -> usize {
        self.bodies.len() - 1
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let bad = |m: String| -> anyhow::Result<()> { Err(InputError(m).into()) };
        if self.bodies.len() < 2 {
            return bad("a chain needs at least two bodies".into());
        }
        if self.rendezvous_mjd.len() != self.bodies.len() {
            return bad(format!(
                "{} bodies but {} rendezvous times",
                self.bodies.len(),
                self.rendezvous_mjd.len()
            ));
        }
        if self.rendezvous_mjd.windows(2).any(|w| w[1] <= w[0]) {
            return bad("rendezvous times must be strictly increasing".into());
        }
        if let Some(t) = &self.truth_mf_kg {
            if t.len() != self.legs() {
                return bad(format!(
                    "{} legs but {} ground-truth masses",
                    self.legs(),
                    t.len()
                ));
            }
        }
        self.craft.validate()?;
        if self.m0_kg <= self.craft.m_dry {
            return bad(format!(
                "initial mass {} kg must exceed the dry mass",
                self.m0_kg
            ));
        }
        for b in &self.bodies {
            body_elements(b).with_context(|| format!("body {}", b.name))?;
        }
        Ok(())
    }

    /// Osculating elements of body `k` at its rendezvous time.
    fn elements_at(&self, k: usize) -> anyhow::Result<OrbitElements> {
        let e = body_elements(&self.bodies[k])?;
        Ok(propagate_kepler(
            &e,
            (self.rendezvous_mjd[k] - self.epoch_mjd) * DAY,
        )?)
    }

    /// Leg `k` (body k → body k+1) as a transfer problem with initial mass `m0`.
    pub fn leg_problem(&self, k: usize, m0: f64) -> anyhow::Result<TransferProblem> {
        let dep = self.elements_at(k)?;
        let arr = elements_to_cartesian(&self.elements_at(k + 1)?);
        let dt = (self.rendezvous_mjd[k + 1] - self.rendezvous_mjd[k]) * DAY;
        Ok(TransferProblem::new(dep, arr, m0, dt, self.craft)?)
    }

    /// Leg `k` in record form, for feature extraction.
    pub fn leg_sample(&self, k: usize, m0: f64) -> anyhow::Result<TransferSample> {
        let p = self.leg_problem(k, m0)?;
        let (dr, dv) = vvlh_relative(&p.coasted_departure()?, &p.target_state())?;
        let e = &p.ele_c0;
        let spec = TransferSpec {
            elements: [
                e.a / AU,
                e.e,
                e.i.to_degrees(),
                e.raan.to_degrees(),
                e.argp.to_degrees(),
                e.ta.to_degrees(),
            ],
            m0_kg: m0,
            dt_days: p.dt / DAY,
            dr_au: (dr / AU).into(),
            dv_kms: (dv / 1e3).into(),
        };
        Ok(candidate(k as u64, &spec, &self.craft)?)
    }
}

fn body_elements(b: &ChainBody) -> ltx_core::Result<OrbitElements> {
    let [a, e, i, raan, argp, ta] = b.elements;
    OrbitElements::from_au_deg(a, e, i, raan, argp, ta)
}

fn to_file_elements(e: &OrbitElements) -> [f64; 6] {
    [
        e.a / AU,
        e.e,
        e.i.to_degrees(),
        e.raan.to_degrees(),
        e.argp.to_degrees(),
        e.ta.to_degrees(),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegRow {
    pub leg: usize,
    pub from: String,
    pub to: String,
    pub dt_days: f64,
    pub probability: f64,
    pub m0_dnn_kg: f64,
    pub mf_dnn_kg: f64,
    pub m0_lam_kg: f64,
    pub mf_lam_kg: f64,
    pub mf_true_kg: Option<f64>,
    /// Estimate minus truth.
    pub err_dnn_kg: Option<f64>,
    pub err_lam_kg: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub sequential: bool,
    pub legs: Vec<LegRow>,
    /// First leg the classifier rejected, if any.
    pub truncated_at: Option<usize>,
    pub final_err_dnn_kg: Option<f64>,
    pub final_err_lam_kg: Option<f64>,
}

/// Sequential mode feeds each leg the previous estimate (separately for the
/// network and the Lambert chain); otherwise every leg starts from the
/// ground-truth mass.
pub fn run_chain(
    spec: &ChainSpec,
    clf: &MlpModel,
    reg: &MlpModel,
    sequential: bool,
) -> anyhow::Result<ChainReport> {
    check_models(clf, reg)?;
    let truth = spec.truth_mf_kg.as_ref();
    if !sequential && truth.is_none() {
        return Err(InputError("per-leg mode needs ground-truth masses".into()).into());
    }
    let mut m_dnn = spec.m0_kg;
    let mut m_lam = spec.m0_kg;
    let mut legs = Vec::new();
    let mut truncated_at = None;
    for k in 0..spec.legs() {
        if !sequential && k > 0 {
            let t = truth.unwrap()[k - 1];
            m_dnn = t;
            m_lam = t;
        }
        let s = spec.leg_sample(k, m_dnn)?;
        let p = classify(clf, &s)?;
        if p < 0.5 {
            log::warn!(
                "leg {} judged infeasible (p = {p:.3}); chain truncated",
                k + 1
            );
            truncated_at = Some(k);
            break;
        }
        let mf_dnn = estimate(reg, &s)?;
        let mf_lam = lambert_remaining_mass(m_lam, s.dv_lambert_ms, spec.craft.isp);
        let mf_true = truth.map(|t| t[k]);
        legs.push(LegRow {
            leg: k + 1,
            from: spec.bodies[k].name.clone(),
            to: spec.bodies[k + 1].name.clone(),
            dt_days: spec.rendezvous_mjd[k + 1] - spec.rendezvous_mjd[k],
            probability: p,
            m0_dnn_kg: m_dnn,
            mf_dnn_kg: mf_dnn,
            m0_lam_kg: m_lam,
            mf_lam_kg: mf_lam,
            mf_true_kg: mf_true,
            err_dnn_kg: mf_true.map(|t| mf_dnn - t),
            err_lam_kg: mf_true.map(|t| mf_lam - t),
        });
        m_dnn = mf_dnn;
        m_lam = mf_lam;
    }
    let last = legs.last();
    Ok(ChainReport {
        sequential,
        final_err_dnn_kg: last.and_then(|l| l.err_dnn_kg),
        final_err_lam_kg: last.and_then(|l| l.err_lam_kg),
        legs,
        truncated_at,
    })
}

/// Ground truth by solving the legs in order from the true masses.
pub fn solve_truth(spec: &ChainSpec, solver: &SolverConfig, seed: u64) -> anyhow::Result<Vec<f64>> {
    let mut m = spec.m0_kg;
    let mut out = Vec::new();
    for k in 0..spec.legs() {
        let p = spec.leg_problem(k, m)?;
        let o = classify_transfer(&p, mix_seed(seed, k as u64), solver, None);
        match (o.label, o.mf_max) {
            (Label::Optimal, Some(mf)) => {
                out.push(mf);
                m = mf;
            }
            (label, _) => {
                return Err(BudgetExhausted(format!(
                    "leg {} has no optimal solution ({})",
                    k + 1,
                    label.as_str()
                ))
                .into());
            }
        }
    }
    Ok(out)
}

/// Ranges of the synthetic legs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyntheticLegs {
    pub dt_days: (f64, f64),
    pub d1_au: f64,
    pub d2_kms: f64,
}

impl Default for SyntheticLegs {
    fn default() -> Self {
        Self {
            dt_days: (250.0, 450.0),
            d1_au: 0.3,
            d2_kms: 3.0,
        }
    }
}

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

/// Builds an `n_legs` chain of virtual bodies: every leg is drawn like a
/// pool sample from the previous body and kept only if the solver finds it
/// Optimal, so the chain carries exact ground truth.
pub fn synthetic_chain(
    n_legs: usize,
    m0: f64,
    legs: &SyntheticLegs,
    craft: &SpacecraftConfig,
    solver: &SolverConfig,
    seed: u64,
) -> anyhow::Result<ChainSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let epoch = 60000.0;
    let first = OrbitElements::from_au_deg(
        rng.gen_range(2.0..3.0),
        rng.gen_range(0.0..0.4),
        rng.gen_range(0.0..20.0),
        rng.gen_range(0.0..360.0),
        rng.gen_range(0.0..360.0),
        rng.gen_range(0.0..360.0),
    )?;
    let mut bodies = vec![ChainBody {
        name: "B0".into(),
        elements: to_file_elements(&first),
    }];
    let mut times = vec![epoch];
    let mut truth = Vec::new();
    let mut dep = first;
    let mut m = m0;
    for k in 0..n_legs {
        let mut accepted = None;
        for attempt in 0..200u64 {
            let dt = rng.gen_range(legs.dt_days.0..legs.dt_days.1) * DAY;
            let dr = unit(&mut rng) * rng.gen_range(0.0..legs.d1_au) * AU;
            let dv = unit(&mut rng) * rng.gen_range(0.0..legs.d2_kms) * 1e3;
            let coasted = elements_to_cartesian(&propagate_kepler(&dep, dt)?);
            let target: CartesianState = vvlh_to_inertial(&coasted, &dr, &dv)?;
            let Ok(tele) = cartesian_to_elements(&target) else {
                continue;
            };
            if tele.a < 1.5 * AU || tele.a > 3.5 * AU {
                continue;
            }
            let Ok(p) = TransferProblem::new(dep, target, m, dt, *craft) else {
                continue;
            };
            let o = classify_transfer(&p, mix_seed(seed, (k as u64) << 32 | attempt), solver, None);
            if let (Label::Optimal, Some(mf)) = (o.label, o.mf_max) {
                log::info!("leg {}: {:.0} days, {m:.1} -> {mf:.1} kg", k + 1, dt / DAY);
                accepted = Some((tele, dt, mf));
                break;
            }
        }
        let (tele, dt, mf) = accepted
            .ok_or_else(|| BudgetExhausted(format!("no optimal leg {} after 200 draws", k + 1)))?;
        let t = times.last().unwrap() + dt / DAY;
        // stored at the chain epoch
        let at_epoch = propagate_kepler(&tele, -(t - epoch) * DAY)?;
        bodies.push(ChainBody {
            name: format!("B{}", k + 1),
            elements: to_file_elements(&at_epoch),
        });
        times.push(t);
        truth.push(mf);
        dep = tele;
        m = mf;
    }
    Ok(ChainSpec {
        epoch_mjd: epoch,
        m0_kg: m0,
        rendezvous_mjd: times,
        truth_mf_kg: Some(truth),
        craft: *craft,
        bodies,
    })
}

pub fn cmd_chain(
    spec: &ChainSpec,
    clf: &Path,
    reg: &Path,
    sequential: bool,
    out: &Path,
) -> anyhow::Result<ChainReport> {
    let clf = load_model(clf)?;
    let reg = load_model(reg)?;
    let report = run_chain(spec, &clf, &reg, sequential)?;
    write_csv(&out.join("chain.csv"), &report.legs)?;
    write_json(&out.join("chain.json"), &report)?;
    Ok(report)
}

/// Signed per-leg increments of a cumulative error series.
pub fn increments(errors: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    errors
        .iter()
        .map(|e| {
            let d = e - prev;
            prev = *e;
            d
        })
        .collect()
}

/// Legs whose error increment shares the sign of the majority.
pub fn same_sign_legs(errors: &[f64]) -> usize {
    let inc = increments(errors);
    let pos = inc.iter().filter(|d| **d > 0.0).count();
    let neg = inc.iter().filter(|d| **d < 0.0).count();
    pos.max(neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ChainSpec {
        ChainSpec {
            epoch_mjd: 60000.0,
            m0_kg: 1800.0,
            rendezvous_mjd: vec![60000.0, 60300.0, 60600.0],
            truth_mf_kg: Some(vec![1700.0, 1600.0]),
            craft: SpacecraftConfig::default(),
            bodies: vec![
                ChainBody {
                    name: "A".into(),
                    elements: [2.5, 0.1, 2.0, 10.0, 20.0, 30.0],
                },
                ChainBody {
                    name: "B".into(),
                    elements: [2.6, 0.12, 2.5, 12.0, 22.0, 60.0],
                },
                ChainBody {
                    name: "C".into(),
                    elements: [2.7, 0.1, 3.0, 14.0, 18.0, 90.0],
                },
            ],
        }
    }

    #[test]
    fn toml_round_trip() {
        let s = spec();
        let text = toml::to_string(&s).unwrap();
        let back: ChainSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, s);
        back.validate().unwrap();
    }

    #[test]
    fn validation() {
        let mut s = spec();
        s.rendezvous_mjd[2] = 60300.0;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.bodies.truncate(1);
        s.rendezvous_mjd.truncate(1);
        s.truth_mf_kg = None;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.truth_mf_kg = Some(vec![1.0]);
        assert!(s.validate().is_err());
    }

    #[test]
    fn leg_sample_reproduces_the_arrival_state() {
        let s = spec();
        let rec = s.leg_sample(1, 1700.0).unwrap();
        let p = rec.problem(&s.craft).unwrap();
        let q = s.leg_problem(1, 1700.0).unwrap();
        assert!((p.target_r - q.target_r).norm() < 1e-3);
        assert!((p.target_v - q.target_v).norm() < 1e-9);
        assert!((rec.dt_days - 300.0).abs() < 1e-9);
    }

    #[test]
    fn monotone_drift_count() {
        assert_eq!(same_sign_legs(&[1.0, 3.0, 6.0, 8.0, 9.0]), 5);
        assert_eq!(same_sign_legs(&[1.0, 3.0, 2.0, 8.0, 9.0]), 4);
        assert_eq!(increments(&[2.0, 1.0]), [2.0, -1.0]);
    }
}
