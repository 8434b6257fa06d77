use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ltx_cli::commands::evaluate::candidate;
use ltx_core::dataset::{load_pool, sample_spec, save_pool, Pool, SampleRanges};
use ltx_core::{Label, SpacecraftConfig};

fn ltx(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ltx"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run ltx")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

// Cheap labels from the Lambert ΔV so training tests need no solver.
fn rule_pool(n: usize, seed: u64) -> Pool {
    let craft = SpacecraftConfig::default();
    let ranges = SampleRanges::default();
    let mut pool = Pool::new(craft);
    for k in seed.. {
        if pool.len() == n {
            break;
        }
        let Ok((spec, _)) = sample_spec(k, &ranges, &craft) else {
            continue;
        };
        let mut s = candidate(k, &spec, &craft).unwrap();
        let budget = craft.tmax * s.dt_days * 86400.0 / s.m0_kg;
        if s.dv_lambert_ms < budget && s.mf_lam_kg > craft.m_dry + 50.0 {
            s.label = Label::Optimal;
            s.mf_max_kg = Some(s.mf_lam_kg + 0.01 * (s.m0_kg - s.mf_lam_kg));
        } else {
            s.label = Label::Infeasible;
            s.mf_max_kg = None;
        }
        pool.samples.push(s);
    }
    pool
}

fn quick_config(dir: &Path) -> PathBuf {
    let path = dir.join("quick.toml");
    std::fs::write(&path, "[train]\nmax_epochs = 30\npatience = 10\n").unwrap();
    path
}

#[test]
fn gen_data_zero_is_a_valid_empty_pool() {
    let dir = tempfile::tempdir().unwrap();
    let pool = dir.path().join("pool.csv");
    let o = ltx(dir.path(), &["gen-data", "--n", "0", "--pool", p(&pool)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let loaded = load_pool(&pool).unwrap();
    assert!(loaded.is_empty());
    assert_eq!(loaded.craft, SpacecraftConfig::default());
}

#[test]
fn resumed_pool_equals_one_shot() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.csv");
    let two = dir.path().join("two.csv");
    let run = |pool: &Path, n: &str| {
        let o = ltx(
            dir.path(),
            &[
                "--seed",
                "11",
                "gen-data",
                "--n",
                n,
                "--pool",
                p(pool),
                "--chunk",
                "1",
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    };
    run(&one, "2");
    run(&two, "1");
    run(&two, "2");
    run(&two, "2");
    assert_eq!(std::fs::read(&one).unwrap(), std::fs::read(&two).unwrap());
    assert_eq!(load_pool(&one).unwrap().len(), 2);
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let o = ltx(
        dir.path(),
        &["train", "--task", "clf", "--pool", p(&missing)],
    );
    assert_eq!(code(&o), 2);

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[craft]\ntmax = -1.0\n").unwrap();
    let o = ltx(dir.path(), &["--config", p(&cfg), "gen-data", "--n", "0"]);
    assert_eq!(code(&o), 2);

    std::fs::write(&cfg, "[crafts]\n").unwrap();
    let o = ltx(dir.path(), &["--config", p(&cfg), "gen-data", "--n", "0"]);
    assert_eq!(code(&o), 2);

    let o = ltx(dir.path(), &["train", "--task", "nope"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unsolvable_chain_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("chain.toml");
    std::fs::write(
        &spec,
        r#"epoch_mjd = 60000.0
m0_kg = 2000.0
rendezvous_mjd = [60000.0, 60020.0]

[[bodies]]
name = "inner"
elements = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]

[[bodies]]
name = "outer"
elements = [3.0, 0.0, 20.0, 0.0, 0.0, 180.0]
"#,
    )
    .unwrap();
    let cfg = dir.path().join("cheap.toml");
    std::fs::write(
        &cfg,
        "[solver]\nattempts = 1\n\n[solver.de]\ngenerations = 5\n",
    )
    .unwrap();
    let o = ltx(
        dir.path(),
        &[
            "--config",
            p(&cfg),
            "chain",
            "--spec",
            p(&spec),
            "--solve",
            "--clf",
            "x",
            "--reg",
            "y",
        ],
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn regressor_needs_optimal_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut pool = rule_pool(60, 1);
    for s in &mut pool.samples {
        s.label = Label::Infeasible;
        s.mf_max_kg = None;
    }
    let path = dir.path().join("pool.csv");
    save_pool(&pool, &path).unwrap();
    let o = ltx(
        dir.path(),
        &[
            "train",
            "--task",
            "reg",
            "--pool",
            p(&path),
            "--n-test",
            "10",
        ],
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn train_evaluate_and_gate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let pool = dir.path().join("pool.csv");
    save_pool(&rule_pool(400, 100), &pool).unwrap();
    for task in ["clf", "reg"] {
        let o = ltx(
            dir.path(),
            &[
                "--config",
                p(&cfg),
                "train",
                "--task",
                task,
                "--pool",
                p(&pool),
                "--n-test",
                "50",
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let report: serde_json::Value = serde_json::from_slice(
            &std::fs::read(dir.path().join(format!("train_{task}.json"))).unwrap(),
        )
        .unwrap();
        assert!(report["best_epoch"].as_u64().unwrap() <= report["epochs"].as_u64().unwrap());
    }
    let (clf, reg) = (dir.path().join("clf.ltxm"), dir.path().join("reg.ltxm"));
    let o = ltx(
        dir.path(),
        &[
            "evaluate",
            "--candidates",
            p(&pool),
            "--clf",
            p(&clf),
            "--reg",
            p(&reg),
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let mut rd = csv::Reader::from_path(dir.path().join("evaluate.csv")).unwrap();
    let headers = rd.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (feasible, est) = (col("feasible"), col("mf_est_kg"));
    let mut n = 0;
    for rec in rd.records() {
        let rec = rec.unwrap();
        assert_eq!(
            rec[feasible] == *"true",
            !rec[est].is_empty(),
            "gate broken in {rec:?}"
        );
        n += 1;
    }
    assert_eq!(n, 400);

    // swapped models are refused
    let o = ltx(
        dir.path(),
        &[
            "evaluate",
            "--candidates",
            p(&pool),
            "--clf",
            p(&reg),
            "--reg",
            p(&clf),
        ],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn evaluate_rejects_light_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let cands = dir.path().join("c.csv");
    std::fs::write(
        &cands,
        "id,a,e,i,raan,argp,ta,m0_kg,dt_days,drx_au,dry_au,drz_au,dvx_kms,dvy_kms,dvz_kms\n\
         0,2.5,0.01,1,10,20,30,700,300,0.1,0.1,0.1,1,1,1\n",
    )
    .unwrap();
    let o = ltx(
        dir.path(),
        &[
            "evaluate",
            "--candidates",
            p(&cands),
            "--clf",
            "a",
            "--reg",
            "b",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("c.csv:2"),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}
