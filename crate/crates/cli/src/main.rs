use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ltx_cli::commands::ablation::{cmd_ablation, AblationArgs};
use ltx_cli::commands::chain::{cmd_chain, solve_truth, synthetic_chain, ChainSpec, SyntheticLegs};
use ltx_cli::commands::evaluate::cmd_evaluate;
use ltx_cli::commands::gen_data::gen_data;
use ltx_cli::commands::lambert_baseline::{cmd_lambert_baseline, BaselineArgs};
use ltx_cli::commands::misjudged::{cmd_misjudged, MisjudgedArgs};
use ltx_cli::commands::scale_study::{cmd_scale_study, ScaleArgs};
use ltx_cli::commands::sweep::{cmd_sweep, Factor, Plane, SweepSpec};
use ltx_cli::commands::train::{cmd_train, TrainArgs};
use ltx_cli::pipeline::{parse_hidden, TaskArg};
use ltx_cli::report::write_json;
use ltx_cli::{exit_code, Config, InputError};

#[derive(Parser)]
#[command(
    name = "ltx",
    version,
    about = "Low-thrust transfer evaluation experiments"
)]
struct Cli {
    /// Seed for sampling, splits, training and solver restarts.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// TOML file with [craft], [ranges], [train] and [solver] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports and default outputs.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    pool: PathBuf,
    #[arg(long, default_value_t = 1000)]
    n_test: usize,
    /// Cap on training records (default: all).
    #[arg(long)]
    n_train: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate or resume a labelled transfer pool.
    GenData {
        #[arg(long)]
        n: usize,
        /// Pool file (default <out>/pool.csv).
        #[arg(long)]
        pool: Option<PathBuf>,
        /// Samples labelled between checkpoints.
        #[arg(long, default_value_t = 20)]
        chunk: usize,
    },
    /// Train the classifier or the regressor.
    Train {
        #[arg(long, value_enum)]
        task: TaskArg,
        #[command(flatten)]
        split: SplitArgs,
        /// Hidden layers, e.g. 40,40,40 or 4x70 (default 3x40 / 4x70).
        #[arg(long)]
        hidden: Option<String>,
        #[arg(long, default_value_t = 9)]
        group: usize,
        /// Model file (default <out>/clf.ltxm or <out>/reg.ltxm).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Judge candidates with the classifier and estimate feasible ones.
    Evaluate {
        /// Candidate CSV or labelled pool file.
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        clf: PathBuf,
        #[arg(long)]
        reg: PathBuf,
    },
    /// Label a one-factor family around the reference transfer.
    Sweep {
        #[arg(long, value_enum)]
        factor: Factor,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Bisection resolution near label changes.
        #[arg(long)]
        refine: Option<f64>,
        /// Skip bisection.
        #[arg(long)]
        no_refine: bool,
        #[arg(long, default_value_t = 3000)]
        samples: usize,
        #[arg(long, value_enum, default_value = "xy")]
        plane: Plane,
        #[arg(long, default_value_t = 0.5)]
        half_width_au: f64,
    },
    /// Compare the nine feature groups.
    Ablation {
        #[arg(long, value_enum)]
        task: TaskArg,
        #[command(flatten)]
        split: SplitArgs,
        /// Groups to train, e.g. 1,5,9 (default all).
        #[arg(long, value_delimiter = ',')]
        groups: Option<Vec<usize>>,
        #[arg(long)]
        hidden: Option<String>,
    },
    /// Grid over hidden layers, nodes and training-set size.
    ScaleStudy {
        #[arg(long, value_enum)]
        task: TaskArg,
        #[arg(long)]
        pool: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n_test: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
        layers: Vec<usize>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "10,20,30,40,50,60,70,80,90,100"
        )]
        nodes: Vec<usize>,
        /// Training-set sizes (default: all training records).
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, default_value_t = 9)]
        group: usize,
    },
    /// ΔV heuristic and rocket-equation baseline.
    LambertBaseline {
        #[arg(long)]
        pool: PathBuf,
        /// Optimal-only test records (default: --pool).
        #[arg(long)]
        reg_pool: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        n_test: usize,
        #[arg(long, default_value_t = 0.01)]
        c_step: f64,
        #[arg(long)]
        clf: Option<PathBuf>,
        #[arg(long)]
        reg: Option<PathBuf>,
        #[arg(long, default_value_t = 5.0)]
        bin_kg: f64,
    },
    /// Sequential mass estimation along a rendezvous chain.
    Chain {
        /// Chain TOML; omit with --synthetic.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Build a chain of this many solver-verified legs instead.
        #[arg(long)]
        synthetic: Option<usize>,
        #[arg(long, default_value_t = 2000.0)]
        m0: f64,
        /// Solve every leg for ground truth.
        #[arg(long)]
        solve: bool,
        /// Start each leg from the ground-truth mass.
        #[arg(long)]
        per_leg: bool,
        #[arg(long)]
        clf: PathBuf,
        #[arg(long)]
        reg: PathBuf,
    },
    /// Residual report for misjudged test transfers.
    Misjudged {
        #[arg(long)]
        clf: PathBuf,
        #[arg(long)]
        pool: PathBuf,
        /// Test records split from the pool (0 = whole pool).
        #[arg(long, default_value_t = 1000)]
        n_test: usize,
    },
}

fn hidden(s: &Option<String>) -> anyhow::Result<Option<Vec<usize>>> {
    s.as_deref().map(parse_hidden).transpose()
}

fn print<T: serde::Serialize>(v: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = Config::load(cli.config.as_deref())?;
    let out = cli.out;
    std::fs::create_dir_all(&out).map_err(|e| InputError(format!("{}: {e}", out.display())))?;
    match cli.cmd {
        Cmd::GenData { n, pool, chunk } => {
            let pool = pool.unwrap_or_else(|| out.join("pool.csv"));
            let summary = gen_data(&cfg, n, cli.seed, cli.workers, &pool, chunk)?;
            write_json(&out.join("gen_data.json"), &summary)?;
            print(&summary)?;
        }
        Cmd::Train {
            task,
            split,
            hidden: h,
            group,
            model,
        } => {
            let args = TrainArgs {
                task: task.into(),
                pool: split.pool,
                hidden: hidden(&h)?,
                group,
                n_test: split.n_test,
                n_train: split.n_train,
                model,
            };
            print(&cmd_train(&cfg, &args, cli.seed, &out)?)?;
        }
        Cmd::Evaluate {
            candidates,
            clf,
            reg,
        } => {
            print(&cmd_evaluate(&cfg, &candidates, &clf, &reg, &out)?)?;
        }
        Cmd::Sweep {
            factor,
            from,
            to,
            step,
            refine,
            no_refine,
            samples,
            plane,
            half_width_au,
        } => {
            let mut spec = SweepSpec::defaults(factor);
            spec.from = from.unwrap_or(spec.from);
            spec.to = to.unwrap_or(spec.to);
            spec.step = step.unwrap_or(spec.step);
            spec.refine = if no_refine {
                None
            } else {
                refine.or(spec.refine)
            };
            spec.samples = samples;
            spec.plane = plane;
            spec.half_width_au = half_width_au;
            let r = cmd_sweep(&spec, &cfg.craft, &cfg.solver, cli.seed, cli.workers, &out)?;
            print(
                &serde_json::json!({ "n": r.rows.len(), "n_feasible": r.n_feasible, "transitions": r.transitions }),
            )?;
        }
        Cmd::Ablation {
            task,
            split,
            groups,
            hidden: h,
        } => {
            let args = AblationArgs {
                task: task.into(),
                pool: split.pool,
                groups: groups.unwrap_or_else(|| (1..=9).collect()),
                hidden: hidden(&h)?,
                n_test: split.n_test,
                n_train: split.n_train,
            };
            print(&cmd_ablation(&cfg, &args, cli.seed, &out)?)?;
        }
        Cmd::ScaleStudy {
            task,
            pool,
            n_test,
            layers,
            nodes,
            sizes,
            group,
        } => {
            let args = ScaleArgs {
                task: task.into(),
                pool,
                layers,
                nodes,
                sizes: sizes.unwrap_or_default(),
                group,
                n_test,
            };
            print(&cmd_scale_study(&cfg, &args, cli.seed, &out)?)?;
        }
        Cmd::LambertBaseline {
            pool,
            reg_pool,
            n_test,
            c_step,
            clf,
            reg,
            bin_kg,
        } => {
            let args = BaselineArgs {
                pool,
                reg_pool,
                n_test,
                c_step,
                clf,
                reg,
                bin_kg,
            };
            let r = cmd_lambert_baseline(&args, cli.seed, &out)?;
            print(&serde_json::json!({
                "peak_c": r.peak_c,
                "peak_rate": r.peak_rate,
                "single_peaked": r.single_peaked,
                "dnn_correct_rate": r.dnn_correct_rate,
                "lambert": r.lambert,
                "dnn": r.dnn,
            }))?;
        }
        Cmd::Chain {
            spec,
            synthetic,
            m0,
            solve,
            per_leg,
            clf,
            reg,
        } => {
            let mut chain = match (spec, synthetic) {
                (Some(p), None) => ChainSpec::load(&p)?,
                (None, Some(n)) => {
                    let c = synthetic_chain(
                        n,
                        m0,
                        &SyntheticLegs::default(),
                        &cfg.craft,
                        &cfg.solver,
                        cli.seed,
                    )?;
                    std::fs::write(out.join("chain_synthetic.toml"), toml::to_string(&c)?)?;
                    c
                }
                _ => {
                    return Err(
                        InputError("give exactly one of --spec and --synthetic".into()).into(),
                    )
                }
            };
            if solve {
                chain.truth_mf_kg = Some(solve_truth(&chain, &cfg.solver, cli.seed)?);
            }
            print(&cmd_chain(&chain, &clf, &reg, !per_leg, &out)?)?;
        }
        Cmd::Misjudged { clf, pool, n_test } => {
            let args = MisjudgedArgs { clf, pool, n_test };
            let r = cmd_misjudged(&args, &cfg.solver, cli.seed, cli.workers, &out)?;
            print(&serde_json::json!({
                "n_test": r.n_test,
                "feasible_judged_infeasible": r.feasible_judged_infeasible,
                "infeasible_judged_feasible": r.infeasible_judged_feasible,
                "median_margin_test": r.median_margin_test,
                "median_margin_misjudged": r.median_margin_misjudged,
            }))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
