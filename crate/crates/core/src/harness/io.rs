//! CSV tables written and read back by the harness, and the run manifest.
//!
//! Column order follows the field order of each row type.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentConfig, GenerationLog, Variant};
use crate::config::ScenarioConfig;
use crate::episode::EpisodeMetrics;
use crate::error::{Error, Result};

/// Per-episode result of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub method: String,
    pub episode: usize,
    pub avg_aoi: f64,
    pub avg_energy: f64,
    pub cum_reward: f64,
    pub success_count: usize,
    pub out_of_bounds: usize,
}

impl EpisodeRow {
    pub fn from_metrics(method: &str, metrics: &[EpisodeMetrics]) -> Vec<Self> {
        metrics
            .iter()
            .enumerate()
            .map(|(episode, m)| Self {
                method: method.to_owned(),
                episode,
                avg_aoi: m.avg_aoi,
                avg_energy: m.avg_energy,
                cum_reward: m.cum_reward,
                success_count: m.success_count,
                out_of_bounds: m.out_of_bounds,
            })
            .collect()
    }
}

/// Training-log row tagged with the method that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub method: String,
    pub generation: usize,
    pub epsilon: f64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub rl_fitness: f64,
    pub pop_avg_aoi: f64,
    pub rl_avg_aoi: f64,
    pub rl_avg_energy: f64,
    pub value_loss: f64,
    pub policy_loss: f64,
    pub grad_steps: usize,
    pub buffer_len: usize,
}

impl LogRow {
    pub fn new(method: &str, l: &GenerationLog) -> Self {
        Self {
            method: method.to_owned(),
            generation: l.generation,
            epsilon: l.epsilon,
            best_fitness: l.best_fitness,
            mean_fitness: l.mean_fitness,
            rl_fitness: l.rl_fitness,
            pop_avg_aoi: l.pop_avg_aoi,
            rl_avg_aoi: l.rl_avg_aoi,
            rl_avg_energy: l.rl_avg_energy,
            value_loss: l.value_loss,
            policy_loss: l.policy_loss,
            grad_steps: l.grad_steps,
            buffer_len: l.buffer_len,
        }
    }
}

/// Trace row tagged with its episode index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceCsvRow {
    pub episode: usize,
    pub slot: usize,
    pub x: f64,
    pub y: f64,
    pub delta: f64,
    pub scheduled: usize,
    pub success: bool,
    pub rate: f64,
    pub e_charge: f64,
    pub e_propulsion: f64,
    pub r_aoi: f64,
    pub r_energy: f64,
    pub r_penalty: f64,
    pub avg_aoi: f64,
}

impl TraceCsvRow {
    pub fn from_metrics(metrics: &[EpisodeMetrics]) -> Vec<Self> {
        metrics
            .iter()
            .enumerate()
            .flat_map(|(episode, m)| {
                m.trace.iter().map(move |r| Self {
                    episode,
                    slot: r.slot,
                    x: r.x,
                    y: r.y,
                    delta: r.delta,
                    scheduled: r.scheduled,
                    success: r.success,
                    rate: r.rate,
                    e_charge: r.e_charge,
                    e_propulsion: r.e_propulsion,
                    r_aoi: r.r_aoi,
                    r_energy: r.r_energy,
                    r_penalty: r.r_penalty,
                    avg_aoi: r.avg_aoi,
                })
            })
            .collect()
    }
}

/// Aggregate of one swept value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    pub param: String,
    pub value: f64,
    pub repetitions: usize,
    pub aoi_mean: f64,
    pub aoi_std: f64,
    pub energy_mean: f64,
    pub energy_std: f64,
}

/// One (value, repetition) cell of a sweep before aggregation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCellRow {
    pub method: String,
    pub param: String,
    pub value: f64,
    pub repetition: usize,
    pub seed: u64,
    pub avg_aoi: f64,
    pub avg_energy: f64,
}

pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads every row; a malformed row is reported by its 1-based file line.
pub fn read_csv<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        let row: T = rec.map_err(|e| {
            Error::MalformedCsv {
                path: path.display().to_string(),
                row: e.position().map(|p| p.line() as usize).unwrap_or(0),
                reason: e.to_string(),
            }
        })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Provenance record written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub variant: Option<Variant>,
    pub scenario: ScenarioConfig,
    pub agent: Option<AgentConfig>,
    pub crate_version: String,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, scenario: &ScenarioConfig) -> Self {
        Self {
            command: command.to_owned(),
            seed,
            variant: None,
            scenario: scenario.clone(),
            agent: None,
            crate_version: env!("CARGO_PKG_VERSION").to_owned(),
            files: Vec::new(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = File::create(path)?;
        f.write_all(serde_json::to_string_pretty(self)?.as_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let rows = vec![
            SweepRow {
                method: "AO-IPDQN".into(),
                param: "z_min".into(),
                value: 1.5,
                repetitions: 3,
                aoi_mean: 7.123456789012345,
                aoi_std: 0.1,
                energy_mean: 140.0,
                energy_std: 1e-3,
            };
            2
        ];
        write_csv(&p, &rows).unwrap();
        assert_eq!(read_csv::<SweepRow>(&p).unwrap(), rows);
    }

    #[test]
    fn malformed_row_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(
            &p,
            "method,episode,avg_aoi,avg_energy,cum_reward,success_count,out_of_bounds\n\
             a,0,1.0,2.0,3.0,0,0\n\
             a,1,oops,2.0,3.0,0,0\n",
        )
        .unwrap();
        match read_csv::<EpisodeRow>(&p) {
            Err(Error::MalformedCsv { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
    }
}
