//! Train, evaluate and baseline drivers that write their outputs to a
//! directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::baselines::{run_fixed_baseline, run_random_baseline};
use super::io::{write_csv, EpisodeRow, LogRow, Manifest, TraceCsvRow};
use crate::agent::{AgentConfig, Checkpoint, GenerationLog, Trainer, Variant};
use crate::config::ScenarioConfig;
use crate::episode::EpisodeMetrics;
use crate::error::Result;
use crate::nn::NetworkParams;

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, std: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std, n }
    }
}

pub fn aoi_summary(metrics: &[EpisodeMetrics]) -> Summary {
    Summary::of(&metrics.iter().map(|m| m.avg_aoi).collect::<Vec<_>>())
}

pub fn energy_summary(metrics: &[EpisodeMetrics]) -> Summary {
    Summary::of(&metrics.iter().map(|m| m.avg_energy).collect::<Vec<_>>())
}

/// Greedy evaluation episodes used after training.
pub const EVAL_EPISODES: usize = 10;
/// Episodes per genome when choosing the policy to deploy.
pub const SELECT_EPISODES: usize = 3;

/// Outcome of a completed training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub variant: Variant,
    pub seed: u64,
    pub logs: Vec<GenerationLog>,
    pub best_policy: NetworkParams,
    pub eval: Vec<EpisodeMetrics>,
    pub checkpoint: Checkpoint,
}

impl TrainReport {
    pub fn eval_aoi(&self) -> Summary {
        aoi_summary(&self.eval)
    }

    pub fn eval_energy(&self) -> Summary {
        energy_summary(&self.eval)
    }
}

/// Trains `variant`, selects the deployed policy and runs greedy
/// evaluation on seeds derived from `seed`.
pub fn train_and_evaluate(
    cfg: &ScenarioConfig,
    agent: &AgentConfig,
    variant: Variant,
    seed: u64,
    on_generation: impl FnMut(&GenerationLog),
) -> Result<TrainReport> {
    let mut trainer = Trainer::new(cfg.clone(), agent.clone(), variant, seed)?;
    let logs = trainer.run(on_generation)?;
    let best_policy = trainer.best_policy(SELECT_EPISODES)?;
    let eval = trainer.evaluate(&best_policy, EVAL_EPISODES, seed)?;
    Ok(TrainReport {
        variant,
        seed,
        logs,
        best_policy,
        eval,
        checkpoint: trainer.checkpoint(),
    })
}

/// Writes `log.csv`, `checkpoint.json`, `eval.csv`, `trace.csv` and
/// `manifest.json` under `out`. Returns the paths written.
pub fn write_train_outputs(report: &TrainReport, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let name = report.variant.name();
    let log: Vec<LogRow> = report.logs.iter().map(|l| LogRow::new(name, l)).collect();
    let files = [
        "log.csv",
        "checkpoint.json",
        "eval.csv",
        "trace.csv",
        "manifest.json",
    ]
    .map(|f| out.join(f));
    write_csv(&files[0], &log)?;
    report.checkpoint.save(&files[1])?;
    write_csv(&files[2], &EpisodeRow::from_metrics(name, &report.eval))?;
    write_csv(&files[3], &TraceCsvRow::from_metrics(&report.eval))?;
    let mut manifest = Manifest::new("train", report.seed, &report.checkpoint.scenario);
    manifest.variant = Some(report.variant);
    manifest.agent = Some(report.checkpoint.agent.clone());
    manifest.files = files[..4].iter().map(|p| file_name(p)).collect();
    manifest.save(&files[4])?;
    Ok(files.to_vec())
}

/// Greedy evaluation of a saved checkpoint. The deployed genome is the
/// population member with the best selection fitness.
pub fn evaluate_checkpoint(
    ck: Checkpoint,
    cfg: Option<&ScenarioConfig>,
    episodes: usize,
    seed: u64,
) -> Result<Vec<EpisodeMetrics>> {
    if let Some(cfg) = cfg {
        ck.check_compatible(cfg)?;
    }
    let mut trainer = Trainer::from_checkpoint(ck)?;
    if let Some(cfg) = cfg {
        trainer.scenario = cfg.clone();
    }
    let best = trainer.best_policy(SELECT_EPISODES)?;
    trainer.evaluate(&best, episodes, seed)
}

/// Writes `eval.csv`, `trace.csv` and `manifest.json` for an evaluation.
pub fn write_eval_outputs(
    method: &str,
    metrics: &[EpisodeMetrics],
    cfg: &ScenarioConfig,
    seed: u64,
    command: &str,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let files = ["eval.csv", "trace.csv", "manifest.json"].map(|f| out.join(f));
    write_csv(&files[0], &EpisodeRow::from_metrics(method, metrics))?;
    write_csv(&files[1], &TraceCsvRow::from_metrics(metrics))?;
    let mut manifest = Manifest::new(command, seed, cfg);
    manifest.files = files[..2].iter().map(|p| file_name(p)).collect();
    manifest.save(&files[2])?;
    Ok(files.to_vec())
}

/// Both reference policies on the same episode count.
#[derive(Debug, Clone)]
pub struct BaselineReport {
    pub random: Vec<EpisodeMetrics>,
    pub fixed: Vec<EpisodeMetrics>,
}

pub fn run_baselines(cfg: &ScenarioConfig, episodes: usize, seed: u64) -> Result<BaselineReport> {
    Ok(BaselineReport {
        random: run_random_baseline(cfg, episodes, seed)?,
        fixed: run_fixed_baseline(cfg, episodes, seed)?,
    })
}

/// Writes `baselines.csv`, one trace per policy and `manifest.json`.
pub fn write_baseline_outputs(
    report: &BaselineReport,
    cfg: &ScenarioConfig,
    seed: u64,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let files = [
        "baselines.csv",
        "trace_random.csv",
        "trace_fixed.csv",
        "manifest.json",
    ]
    .map(|f| out.join(f));
    let mut rows = EpisodeRow::from_metrics("Random", &report.random);
    rows.extend(EpisodeRow::from_metrics("Fixed", &report.fixed));
    write_csv(&files[0], &rows)?;
    write_csv(&files[1], &TraceCsvRow::from_metrics(&report.random))?;
    write_csv(&files[2], &TraceCsvRow::from_metrics(&report.fixed))?;
    let mut manifest = Manifest::new("baseline", seed, cfg);
    manifest.files = files[..3].iter().map(|p| file_name(p)).collect();
    manifest.save(&files[3])?;
    Ok(files.to_vec())
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::io::read_csv;

    #[test]
    fn summary_matches_hand_values() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(Summary::of(&[7.0]).std, 0.0);
        assert!(Summary::of(&[]).mean.is_nan());
    }

    #[test]
    fn tiny_train_writes_everything() {
        let cfg = ScenarioConfig::smoke();
        let agent = AgentConfig {
            hidden: vec![8],
            batch: 16,
            grad_steps: 2,
            generations: 2,
            population: 2,
            ..AgentConfig::smoke()
        };
        let report = train_and_evaluate(&cfg, &agent, Variant::AoIpdqn, 3, |_| {}).unwrap();
        assert_eq!(report.logs.len(), 2);
        let dir = tempfile::tempdir().unwrap();
        let files = write_train_outputs(&report, dir.path()).unwrap();
        assert!(files.iter().all(|f| f.exists()));
        let log: Vec<LogRow> = read_csv(&files[0]).unwrap();
        assert_eq!(log.len(), 2);
        let trace: Vec<TraceCsvRow> = read_csv(&files[3]).unwrap();
        assert_eq!(trace.len(), EVAL_EPISODES * cfg.horizon);
        let m = Manifest::load(&files[4]).unwrap();
        assert_eq!((m.seed, m.variant), (3, Some(Variant::AoIpdqn)));

        let ck = Checkpoint::load(&files[1]).unwrap();
        let again = evaluate_checkpoint(ck, Some(&cfg), EVAL_EPISODES, 3).unwrap();
        assert_eq!(again, report.eval);
    }
}
