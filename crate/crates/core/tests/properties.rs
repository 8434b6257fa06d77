use ltx_core::astro::{
    cartesian_to_elements, elements_to_cartesian, propagate_state, vvlh_relative, vvlh_to_inertial,
    wrap_two_pi, AU, DAY, G0, MU_SUN,
};
use ltx_core::dataset::{
    extract_features_c, extract_features_r, read_pool, sample_spec, write_pool,
};
use ltx_core::lambert::{lambert_remaining_mass, lambert_solve, Direction};
use ltx_core::neural::{read_model, write_model};
use ltx_core::{
    CartesianState, MlpModel, OrbitElements, Pool, SampleRanges, SpacecraftConfig, TaskKind, Vec3,
};
use proptest::prelude::*;
use std::f64::consts::TAU;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn vrel(a: &Vec3, b: &Vec3) -> f64 {
    (a - b).norm() / b.norm()
}

prop_compose! {
    fn elements()(a in 0.5f64..6.0, e in 0.0f64..0.9, i in 0.01f64..3.13, raan in 0.0..TAU,
                  argp in 0.0..TAU, ta in 0.0..TAU) -> OrbitElements {
        OrbitElements::new(a * AU, e, i, raan, argp, ta).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn state_round_trip(ele in elements()) {
        let s = elements_to_cartesian(&ele);
        let back = elements_to_cartesian(&cartesian_to_elements(&s).unwrap());
        prop_assert!(vrel(&back.r, &s.r) < 1e-9);
        prop_assert!(vrel(&back.v, &s.v) < 1e-9);
    }

    #[test]
    fn kepler_conserves_integrals(ele in elements(), dt in -2000.0f64..2000.0) {
        let s0 = elements_to_cartesian(&ele);
        let s1 = propagate_state(&s0, dt * DAY).unwrap();
        prop_assert!(rel(s1.energy(), s0.energy()) < 1e-12);
        prop_assert!(vrel(&s1.angular_momentum(), &s0.angular_momentum()) < 1e-12);
    }

    #[test]
    fn kepler_flow_composes(ele in elements(), t1 in -800.0f64..800.0, t2 in -800.0f64..800.0) {
        let s0 = elements_to_cartesian(&ele);
        let two = propagate_state(&propagate_state(&s0, t1 * DAY).unwrap(), t2 * DAY).unwrap();
        let one = propagate_state(&s0, (t1 + t2) * DAY).unwrap();
        prop_assert!(vrel(&two.r, &one.r) < 1e-10);
        prop_assert!(vrel(&two.v, &one.v) < 1e-10);
    }

    #[test]
    fn vvlh_round_trip(ele in elements(), dr in prop::array::uniform3(-0.5f64..0.5), dv in prop::array::uniform3(-3.0f64..3.0)) {
        let reference = elements_to_cartesian(&ele);
        let (dr, dv) = (Vec3::from(dr) * AU, Vec3::from(dv) * 1e3);
        let target = vvlh_to_inertial(&reference, &dr, &dv).unwrap();
        let (dr2, dv2) = vvlh_relative(&reference, &target).unwrap();
        prop_assert!((dr2 - dr).norm() < 1e-9 * AU);
        prop_assert!((dv2 - dv).norm() < 1e-9 * 1e3);
    }

    #[test]
    fn lambert_closes(ele1 in elements(), ele2 in elements(), days in 60.0f64..900.0) {
        let r1 = elements_to_cartesian(&ele1).r;
        let r2 = elements_to_cartesian(&ele2).r;
        let theta = r1.angle(&r2);
        prop_assume!((theta - std::f64::consts::PI).abs() > 1e-3 && theta > 1e-3);
        let dt = days * DAY;
        if let Ok(sol) = lambert_solve(&r1, &r2, dt, Direction::Prograde) {
            // the propagator covers elliptic arcs only
            prop_assume!(CartesianState::new(r1, sol.v1).energy() < 0.0);
            let end = propagate_state(&CartesianState::new(r1, sol.v1), dt).unwrap();
            prop_assert!(vrel(&end.r, &r2) < 1e-6, "miss {}", vrel(&end.r, &r2));
            prop_assert!(vrel(&end.v, &sol.v2) < 1e-6);
        }
    }

    #[test]
    fn rocket_equation(m0 in 900.0f64..3000.0, dv in 0.0f64..20_000.0, isp in 1000.0f64..5000.0) {
        let mf = lambert_remaining_mass(m0, dv, isp);
        prop_assert!(rel(mf, m0 * (-dv / (isp * G0)).exp()) < 1e-12);
        prop_assert!(mf <= m0 && mf > 0.0);
        let twice = lambert_remaining_mass(mf, dv, isp);
        prop_assert!(rel(twice, lambert_remaining_mass(m0, 2.0 * dv, isp)) < 1e-12);
    }

    #[test]
    fn wrap_stays_in_range(x in -1e6f64..1e6) {
        let w = wrap_two_pi(x);
        prop_assert!((0.0..std::f64::consts::TAU).contains(&w));
    }

    #[test]
    fn sampled_records_have_fixed_feature_widths(seed in 0u64..1_000_000) {
        let craft = SpacecraftConfig::default();
        let ranges = SampleRanges::default();
        if let Ok((spec, lam)) = sample_spec(seed, &ranges, &craft) {
            prop_assert!(lam.dv_lambert_ms > 0.0 && lam.dv_lambert_ms.is_finite());
            let mut pool = Pool::new(craft);
            let s = ltx_core::dataset::TransferSample::from_parts(seed, &spec, &lam, ltx_core::Label::Infeasible, None);
            prop_assert_eq!(extract_features_c(&s).unwrap().0.len(), 16);
            prop_assert_eq!(extract_features_r(&s).unwrap().0.len(), 17);
            pool.samples.push(s);
            let mut buf = Vec::new();
            write_pool(&pool, &mut buf).unwrap();
            let back = read_pool(&buf[..], "mem").unwrap();
            prop_assert_eq!(back.samples, pool.samples);
        }
    }
}

fn random_net(task: TaskKind, seed: u64) -> (MlpModel, Vec<Vec<f64>>, Vec<f64>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let input = rng.gen_range(1..8);
    let hidden: Vec<usize> = (0..rng.gen_range(1..4))
        .map(|_| rng.gen_range(1..10))
        .collect();
    let model = MlpModel::new(task, input, &hidden, 0.3, seed).unwrap();
    let batch = rng.gen_range(1..9);
    let xs: Vec<Vec<f64>> = (0..batch)
        .map(|_| (0..input).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let ys = (0..batch)
        .map(|_| match task {
            TaskKind::Classification => f64::from(rng.gen_bool(0.5)),
            TaskKind::Regression => rng.gen_range(-1.0..1.0),
        })
        .collect();
    (model, xs, ys)
}

#[test]
fn gradients_match_central_differences() {
    for seed in 0..40 {
        for task in [TaskKind::Classification, TaskKind::Regression] {
            let (mut model, xs, ys) = random_net(task, seed);
            let (_, g) = model.backward(&xs, &ys).unwrap();
            let h = 1e-6;
            let mut fd = vec![0.0; model.params.len()];
            for (k, d) in fd.iter_mut().enumerate() {
                let p = model.params[k];
                model.params[k] = p + h;
                let up = model.loss(&xs, &ys).unwrap();
                model.params[k] = p - h;
                let down = model.loss(&xs, &ys).unwrap();
                model.params[k] = p;
                *d = (up - down) / (2.0 * h);
            }
            let diff: f64 =
                g.0.iter()
                    .zip(&fd)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
            let scale =
                g.0.iter()
                    .map(|a| a * a)
                    .sum::<f64>()
                    .sqrt()
                    .max(fd.iter().map(|a| a * a).sum::<f64>().sqrt());
            assert!(
                diff <= 1e-5 * scale.max(1e-8),
                "seed {seed} {task:?}: {diff:e} vs {scale:e}"
            );
        }
    }
}

#[test]
fn saved_model_predicts_identically() {
    let (model, xs, _) = random_net(TaskKind::Regression, 7);
    let mut buf = Vec::new();
    write_model(&model, &mut buf).unwrap();
    let back = read_model(&mut &buf[..]).unwrap();
    for x in &xs {
        assert_eq!(
            model.predict(x).unwrap().to_bits(),
            back.predict(x).unwrap().to_bits()
        );
    }
}

#[test]
fn hohmann_arrival_speeds() {
    let (r1, r2) = (AU, 1.5 * AU);
    let a = 0.5 * (r1 + r2);
    let theta = std::f64::consts::PI - 1e-4;
    let p = a * (1.0 - ((r2 - r1) / (r2 + r1)).powi(2));
    let e = (r2 - r1) / (r2 + r1);
    let r_theta = p / (1.0 + e * theta.cos());
    let tof = {
        let ea = 2.0 * (((1.0 - e) / (1.0 + e)).sqrt() * (theta / 2.0).tan()).atan();
        (ea - e * ea.sin()) * (a.powi(3) / MU_SUN).sqrt()
    };
    let r1v = Vec3::new(r1, 0.0, 0.0);
    let r2v = Vec3::new(r_theta * theta.cos(), r_theta * theta.sin(), 0.0);
    let sol = lambert_solve(&r1v, &r2v, tof, Direction::Prograde).unwrap();
    let v_peri = (MU_SUN * (2.0 / r1 - 1.0 / a)).sqrt();
    assert!(rel(sol.v1.norm(), v_peri) < 1e-6);
    assert!(rel(sol.v2.norm(), (MU_SUN * (2.0 / r_theta - 1.0 / a)).sqrt()) < 1e-6);
}
