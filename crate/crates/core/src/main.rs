use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use risuav::agent::{AgentConfig, Checkpoint, Variant};
use risuav::harness::io::{write_csv, Manifest};
use risuav::harness::{
    aoi_summary, emit_plots, energy_summary, evaluate_checkpoint, run_baselines, run_oracles, run_sweep,
    train_and_evaluate, write_baseline_outputs, write_eval_outputs, write_train_outputs, SweepParam, SweepSpec,
};
use risuav::rng::resolve_seed;
use risuav::{Result, ScenarioConfig};

#[derive(Parser)]
#[command(name = "risuav", version, about = "RIS-assisted UAV data collection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario TOML; the full-size default scenario when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (falls back to RISUAV_SEED, then 1).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Use the desk-scale smoke scenario and agent profile.
    #[arg(long)]
    smoke: bool,
    /// Flip the AoI reward sign so that AoI growth is rewarded (literal convention).
    #[arg(long)]
    paper_literal_reward_sign: bool,
}

#[derive(Args, Clone)]
struct Training {
    #[arg(long, default_value = "AO-IPDQN")]
    variant: Variant,
    #[arg(long)]
    generations: Option<usize>,
    /// One gradient step per generation.
    #[arg(long)]
    paper_literal_updates: bool,
    /// Agent hyperparameters as TOML.
    #[arg(long)]
    agent_config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a learner and write its log, checkpoint and evaluation.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        training: Training,
    },
    /// Greedy evaluation of a checkpoint.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
    },
    /// Train and evaluate across a parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        training: Training,
        /// z_min, e_max, lr_p or lr_v.
        #[arg(long, default_value = "z_min")]
        param: SweepParam,
        /// Comma-separated values; the default grid when absent.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
    },
    /// Random and fixed-trajectory reference policies.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
    },
    /// Render SVG figures for the CSVs in a directory.
    Plot {
        #[command(flatten)]
        common: Common,
    },
    /// Run the verification suites.
    Oracle {
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn scenario(c: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &c.config {
        Some(p) => ScenarioConfig::load(p)?,
        None if c.smoke => ScenarioConfig::smoke(),
        None => ScenarioConfig::full_size(),
    };
    cfg.task.paper_literal_reward_sign |= c.paper_literal_reward_sign;
    Ok(cfg)
}

fn agent(c: &Common, t: &Training) -> Result<AgentConfig> {
    let mut a = match &t.agent_config {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str(&text).map_err(|e| risuav::Error::Config {
                field: p.display().to_string(),
                reason: e.message().to_owned(),
            })?
        }
        None if c.smoke => AgentConfig::smoke(),
        None => AgentConfig::default(),
    };
    if let Some(g) = t.generations {
        a.generations = g;
    }
    if t.paper_literal_updates {
        a = a.paper_literal_updates();
    }
    Ok(a)
}

fn report_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Train { common, training } => {
            let (cfg, a) = (scenario(&common)?, agent(&common, &training)?);
            let seed = resolve_seed(common.seed, 1);
            let report = train_and_evaluate(&cfg, &a, training.variant, seed, |l| {
                println!(
                    "gen {:>5}  eps {:.3}  best {:>9.2}  mean {:>9.2}  rl {:>9.2}  rl_aoi {:>6.2}",
                    l.generation, l.epsilon, l.best_fitness, l.mean_fitness, l.rl_fitness, l.rl_avg_aoi
                )
            })?;
            let (aoi, e) = (report.eval_aoi(), report.eval_energy());
            println!(
                "{}: greedy AoI {:.3} ± {:.3}, energy {:.2} ± {:.2} J/slot",
                training.variant, aoi.mean, aoi.std, e.mean, e.std
            );
            report_files(&write_train_outputs(&report, &common.out)?);
        }
        Command::Eval { common, checkpoint, episodes } => {
            let ck = Checkpoint::load(&checkpoint)?;
            let cfg = match &common.config {
                Some(p) => ScenarioConfig::load(p)?,
                None => ck.scenario.clone(),
            };
            let (variant, seed) = (ck.variant, resolve_seed(common.seed, ck.seed));
            let metrics = evaluate_checkpoint(ck, Some(&cfg), episodes, seed)?;
            let (aoi, e) = (aoi_summary(&metrics), energy_summary(&metrics));
            println!("{variant}: AoI {:.3} ± {:.3}, energy {:.2} ± {:.2} J/slot", aoi.mean, aoi.std, e.mean, e.std);
            report_files(&write_eval_outputs(variant.name(), &metrics, &cfg, seed, "eval", &common.out)?);
        }
        Command::Sweep { common, training, param, values, repetitions } => {
            let (cfg, a) = (scenario(&common)?, agent(&common, &training)?);
            let mut spec = SweepSpec::new(param, resolve_seed(common.seed, 1));
            if !values.is_empty() {
                spec.values = values;
            }
            spec.repetitions = repetitions;
            let result = run_sweep(&spec, &cfg, &a, training.variant, |c| {
                println!("{} = {:<10} rep {}  AoI {:.3}  energy {:.2}", c.param, c.value, c.repetition, c.avg_aoi, c.avg_energy)
            })?;
            std::fs::create_dir_all(&common.out)?;
            let files = [common.out.join("sweep.csv"), common.out.join("sweep_cells.csv")];
            write_csv(&files[0], &result.rows)?;
            write_csv(&files[1], &result.cells)?;
            let mut m = Manifest::new("sweep", spec.seed_base, &cfg);
            m.variant = Some(training.variant);
            m.agent = Some(a);
            m.files = vec!["sweep.csv".into(), "sweep_cells.csv".into()];
            m.save(common.out.join("manifest.json"))?;
            report_files(&files);
        }
        Command::Baseline { common, episodes } => {
            let cfg = scenario(&common)?;
            let seed = resolve_seed(common.seed, 1);
            let report = run_baselines(&cfg, episodes, seed)?;
            for (name, m) in [("Random", &report.random), ("Fixed", &report.fixed)] {
                let (aoi, e) = (aoi_summary(m), energy_summary(m));
                println!("{name}: AoI {:.3} ± {:.3}, energy {:.2} ± {:.2} J/slot", aoi.mean, aoi.std, e.mean, e.std);
            }
            report_files(&write_baseline_outputs(&report, &cfg, seed, &common.out)?);
        }
        Command::Plot { common } => {
            let cfg = match &common.config {
                Some(_) => scenario(&common)?,
                None => plot_scenario(&common.out).map_or_else(|| scenario(&common), Ok)?,
            };
            report_files(&emit_plots(&common.out, &cfg)?);
        }
        Command::Oracle { seed } => {
            let mut ok = true;
            for c in run_oracles(resolve_seed(seed, 1))? {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                println!("{verdict} {:<24} {:>7.2}s  {}", c.name, c.seconds, c.detail);
                ok &= c.passed;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

/// The scenario recorded in a directory's manifest, if any.
fn plot_scenario(dir: &Path) -> Option<ScenarioConfig> {
    Manifest::load(dir.join("manifest.json")).ok().map(|m| m.scenario)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
