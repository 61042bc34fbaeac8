//! Generation loop: evaluate the population, evolve it, take gradient
//! steps from replay, then inject the gradient-trained policy.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pddpg::PddpgActor;
use super::{AgentConfig, Pddpg, Pdqn, PolicyActor, Population, Variant};
use crate::config::ScenarioConfig;
use crate::env::AoRisSelector;
use crate::episode::{run_episode, Actor, Episode, EpisodeMetrics};
use crate::error::{Error, Result};
use crate::nn::NetworkParams;
use crate::per::PerBuffer;
use crate::rng::RngStream;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Learner {
    Pdqn(Pdqn),
    Pddpg(Pddpg),
}

impl Learner {
    /// The gradient-trained policy.
    pub fn policy(&self) -> &NetworkParams {
        match self {
            Learner::Pdqn(p) => &p.policy,
            Learner::Pddpg(p) => &p.actor,
        }
    }

    /// Epsilon-greedy actor for a policy genome of this learner's topology.
    pub fn actor<'a>(&'a self, genome: &'a NetworkParams, epsilon: f64) -> Box<dyn Actor + Send + 'a> {
        match self {
            Learner::Pdqn(p) => Box::new(PolicyActor {
                policy: genome,
                value: &p.value,
                epsilon,
            }),
            Learner::Pddpg(_) => Box::new(PddpgActor {
                actor: genome,
                epsilon,
            }),
        }
    }

    fn train_step(
        &mut self,
        buffer: &mut PerBuffer,
        cfg: &AgentConfig,
        mu: f64,
        rng: &mut RngStream,
    ) -> Result<(f64, f64)> {
        match self {
            Learner::Pdqn(p) => p.train_step(buffer, cfg, mu, rng),
            Learner::Pddpg(p) => p.train_step(buffer, cfg, mu, rng),
        }
    }
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
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

/// How episode seeds are derived during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalSeeds {
    /// Fresh channel draws for every generation and genome.
    PerGeneration,
    /// The same draws for every evaluation, so a genome's fitness depends
    /// only on its parameters and the value net.
    Frozen,
}

#[derive(Debug, Clone)]
pub struct Trainer {
    pub scenario: ScenarioConfig,
    pub agent: AgentConfig,
    pub variant: Variant,
    pub seed: u64,
    pub learner: Learner,
    pub population: Population,
    pub buffer: PerBuffer,
    pub generation: usize,
    pub eval_seeds: EvalSeeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub variant: Variant,
    pub seed: u64,
    pub generation: usize,
    pub scenario: ScenarioConfig,
    pub agent: AgentConfig,
    pub learner: Learner,
    pub population: Population,
}

impl Checkpoint {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let ck: Checkpoint = serde_json::from_str(&text)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "version {} is not supported (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        Ok(ck)
    }

    /// Errors when the stored networks do not fit `cfg`.
    pub fn check_compatible(&self, cfg: &ScenarioConfig) -> Result<()> {
        let policy = self.learner.policy();
        if policy.input_len() != cfg.observation_len() {
            return Err(Error::Checkpoint(format!(
                "policy expects {} observation entries but the scenario has {} IoTDs ({} entries)",
                policy.input_len(),
                cfg.n_iotds(),
                cfg.observation_len()
            )));
        }
        Ok(())
    }
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = v.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

impl Trainer {
    pub fn new(scenario: ScenarioConfig, agent: AgentConfig, variant: Variant, seed: u64) -> Result<Self> {
        scenario.validate()?;
        let agent = agent.for_variant(variant);
        agent.validate()?;
        let init = RngStream::new(seed, "init");
        let (obs, n) = (scenario.observation_len(), scenario.n_iotds());
        let learner = match variant {
            Variant::AoPddpg => Learner::Pddpg(Pddpg::new(obs, n, &agent, &mut init.substream("learner"))?),
            _ => Learner::Pdqn(Pdqn::new(obs, n, &agent, &mut init.substream("learner"))?),
        };
        let genomes = if variant.uses_ga() {
            (0..agent.population)
                .map(|i| {
                    Pdqn::init_policy(obs, n, &agent.hidden, &mut init.substream(&format!("genome{i}")))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            vec![learner.policy().clone()]
        };
        let population = Population::new(genomes, agent.mutation_rate, agent.mutation_frac, agent.mutation_scale);
        Ok(Self {
            buffer: PerBuffer::new(agent.per),
            scenario,
            agent,
            variant,
            seed,
            learner,
            population,
            generation: 0,
            eval_seeds: EvalSeeds::PerGeneration,
        })
    }

    pub fn from_checkpoint(ck: Checkpoint) -> Result<Self> {
        ck.check_compatible(&ck.scenario)?;
        Ok(Self {
            buffer: PerBuffer::new(ck.agent.per),
            scenario: ck.scenario,
            agent: ck.agent,
            variant: ck.variant,
            seed: ck.seed,
            learner: ck.learner,
            population: ck.population,
            generation: ck.generation,
            eval_seeds: EvalSeeds::PerGeneration,
        })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            variant: self.variant,
            seed: self.seed,
            generation: self.generation,
            scenario: self.scenario.clone(),
            agent: self.agent.clone(),
            learner: self.learner.clone(),
            population: self.population.clone(),
        }
    }

    fn episode_rng(&self, gen_rng: &RngStream, label: &str) -> RngStream {
        match self.eval_seeds {
            EvalSeeds::PerGeneration => gen_rng.substream(label),
            EvalSeeds::Frozen => RngStream::new(self.seed, "frozen-eval"),
        }
    }

    /// Runs one episode of `genome` under the current value net.
    pub fn rollout(&self, genome: &NetworkParams, epsilon: f64, rng: &RngStream) -> Result<Episode> {
        let mut actor = self.learner.actor(genome, epsilon);
        run_episode(&self.scenario, actor.as_mut(), &mut AoRisSelector, rng)
    }

    pub fn train_generation(&mut self) -> Result<GenerationLog> {
        let g = self.generation;
        let eps = self.agent.epsilon_at(g);
        let gen_rng = RngStream::new(self.seed, format!("train/gen{g}"));
        if !self.variant.uses_ga() {
            self.population.genomes[0] = self.learner.policy().clone();
        }

        let rngs: Vec<RngStream> = (0..self.population.len())
            .map(|i| self.episode_rng(&gen_rng, &format!("genome{i}")))
            .collect();
        let episodes: Vec<Episode> = self
            .population
            .genomes
            .par_iter()
            .zip(rngs.par_iter())
            .map(|(genome, rng)| self.rollout(genome, eps, rng))
            .collect::<Result<_>>()?;
        for (i, ep) in episodes.iter().enumerate() {
            self.population.fitness[i] = ep.fitness();
        }
        let best_fitness = self.population.fitness.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean_fitness = mean(self.population.fitness.iter().cloned());
        let pop_avg_aoi = mean(episodes.iter().map(|e| e.metrics.avg_aoi));
        for ep in episodes {
            for e in ep.experiences {
                self.buffer.insert(e);
            }
        }

        if self.variant.uses_ga() {
            self.population.evolve(&mut gen_rng.substream("evolve"));
        }

        let (mut v_losses, mut p_losses) = (Vec::new(), Vec::new());
        if self.buffer.len() >= self.agent.batch {
            let mu = self.agent.per.mu_at(self.agent.progress(g));
            let mut replay_rng = gen_rng.substream("replay");
            for _ in 0..self.agent.grad_steps {
                let (v, p) = self.learner.train_step(&mut self.buffer, &self.agent, mu, &mut replay_rng)?;
                v_losses.push(v);
                p_losses.push(p);
            }
        }

        let rl = self.learner.policy().clone();
        let rl_ep = self.rollout(&rl, 0.0, &self.episode_rng(&gen_rng, "rl"))?;
        let rl_fitness = rl_ep.fitness();
        let log = GenerationLog {
            generation: g + 1,
            epsilon: eps,
            best_fitness,
            mean_fitness,
            rl_fitness,
            pop_avg_aoi,
            rl_avg_aoi: rl_ep.metrics.avg_aoi,
            rl_avg_energy: rl_ep.metrics.avg_energy,
            value_loss: mean(v_losses.iter().cloned()),
            policy_loss: mean(p_losses.iter().cloned()),
            grad_steps: v_losses.len(),
            buffer_len: 0,
        };
        for e in rl_ep.experiences {
            self.buffer.insert(e);
        }
        if self.variant.uses_ga() {
            self.population.inject_rl(&rl, rl_fitness);
        } else {
            self.population.genomes[0] = rl;
            self.population.fitness[0] = rl_fitness;
        }
        self.generation += 1;
        Ok(GenerationLog {
            buffer_len: self.buffer.len(),
            ..log
        })
    }

    /// Trains until `agent.generations` generations have run.
    pub fn run(&mut self, mut on_generation: impl FnMut(&GenerationLog)) -> Result<Vec<GenerationLog>> {
        let mut logs = Vec::new();
        while self.generation < self.agent.generations {
            let log = self.train_generation()?;
            on_generation(&log);
            logs.push(log);
        }
        Ok(logs)
    }

    /// The genome with the highest mean greedy fitness over `episodes`
    /// selection episodes.
    pub fn best_policy(&self, episodes: usize) -> Result<NetworkParams> {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, genome) in self.population.genomes.iter().enumerate() {
            let f = mean(
                (0..episodes)
                    .map(|k| {
                        let rng = RngStream::new(self.seed, format!("select/ep{k}"));
                        self.rollout(genome, 0.0, &rng).map(|e| e.fitness())
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
            if f > best.0 {
                best = (f, i);
            }
        }
        Ok(self.population.genomes[best.1].clone())
    }

    /// Greedy rollouts of `genome` on evaluation seeds derived from `seed`.
    pub fn evaluate(&self, genome: &NetworkParams, episodes: usize, seed: u64) -> Result<Vec<EpisodeMetrics>> {
        (0..episodes)
            .map(|k| {
                let rng = RngStream::new(seed, format!("eval/ep{k}"));
                self.rollout(genome, 0.0, &rng).map(|e| e.metrics)
            })
            .collect()
    }
}
