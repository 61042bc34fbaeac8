//! Hybrid-action learners: PDQN with a GA policy population, the PDDPG
//! baseline, and the generation-level trainer that drives them.

mod ga;
mod pddpg;
mod pdqn;
mod trainer;

pub use ga::{crossover, mutate, Population};
pub use pddpg::{Pddpg, PddpgActor};
pub use pdqn::{
    policy_loss_and_grad, random_unit_params, value_loss_and_grad, Pdqn, PolicyActor,
};
pub use trainer::{Checkpoint, EvalSeeds, GenerationLog, Learner, Trainer, CHECKPOINT_VERSION};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::per::PerConfig;

/// Learner family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// GA population + prioritized replay.
    AoIpdqn,
    /// GA population + uniform replay.
    AoGapdqn,
    /// Single gradient-trained policy, uniform replay.
    AoPdqn,
    /// One actor emitting all discrete and continuous actions, scalar critic.
    AoPddpg,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::AoIpdqn,
        Variant::AoGapdqn,
        Variant::AoPdqn,
        Variant::AoPddpg,
    ];

    pub fn uses_ga(self) -> bool {
        matches!(self, Variant::AoIpdqn | Variant::AoGapdqn)
    }

    pub fn uses_per(self) -> bool {
        self == Variant::AoIpdqn
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::AoIpdqn => "AO-IPDQN",
            Variant::AoGapdqn => "AO-GAPDQN",
            Variant::AoPdqn => "AO-PDQN",
            Variant::AoPddpg => "AO-PDDPG",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "aoipdqn" | "ipdqn" => Variant::AoIpdqn,
            "aogapdqn" | "gapdqn" => Variant::AoGapdqn,
            "aopdqn" | "pdqn" => Variant::AoPdqn,
            "aopddpg" | "pddpg" => Variant::AoPddpg,
            _ => {
                return Err(Error::config(
                    "variant",
                    format!("unknown variant `{s}`; expected one of AO-IPDQN, AO-GAPDQN, AO-PDQN, AO-PDDPG"),
                ))
            }
        })
    }
}

/// Learning hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub tau: f64,
    pub lr_policy: f64,
    pub lr_value: f64,
    pub batch: usize,
    pub population: usize,
    pub mutation_rate: f64,
    /// Fraction of weights perturbed by a mutation.
    pub mutation_frac: f64,
    /// Noise std relative to the layer's weight std.
    pub mutation_scale: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Fraction of the generation budget over which epsilon decays.
    pub eps_decay_frac: f64,
    /// Gradient steps per generation.
    pub grad_steps: usize,
    pub generations: usize,
    pub per: PerConfig,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            hidden: vec![400, 200],
            gamma: 0.99,
            tau: 0.01,
            lr_policy: 3e-5,
            lr_value: 3e-4,
            batch: 128,
            population: 10,
            mutation_rate: 0.9,
            mutation_frac: 0.1,
            mutation_scale: 0.1,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_frac: 0.5,
            grad_steps: 50,
            generations: 2000,
            per: PerConfig::default(),
        }
    }
}

impl AgentConfig {
    /// Desk-scale profile: population 4, 30 generations, 200 gradient
    /// steps per generation.
    pub fn smoke() -> Self {
        Self {
            population: 4,
            generations: 30,
            grad_steps: 200,
            ..Self::default()
        }
    }

    /// One gradient step per generation, as in the printed algorithm.
    pub fn paper_literal_updates(mut self) -> Self {
        self.grad_steps = 1;
        self
    }

    /// Adjusts replay and population to the variant's reductions.
    pub fn for_variant(mut self, variant: Variant) -> Self {
        if !variant.uses_per() {
            self.per = PerConfig::uniform(self.per.capacity);
        }
        if !variant.uses_ga() {
            self.population = 1;
        }
        self
    }

    /// Linear decay from `eps_start` to `eps_end` over the first
    /// `eps_decay_frac` of the budget, then constant.
    pub fn epsilon_at(&self, generation: usize) -> f64 {
        let span = (self.eps_decay_frac * self.generations as f64).max(1.0);
        let f = (generation as f64 / span).min(1.0);
        self.eps_start + (self.eps_end - self.eps_start) * f
    }

    /// Progress fraction used for the importance-exponent anneal.
    pub fn progress(&self, generation: usize) -> f64 {
        if self.generations <= 1 {
            return 1.0;
        }
        (generation as f64 / (self.generations - 1) as f64).min(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: &str| Err(Error::config(format!("agent.{field}"), reason));
        if self.hidden.contains(&0) {
            return bad("hidden", "layer widths must be positive");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma", "must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau", "must lie in [0, 1]");
        }
        if !(self.lr_policy > 0.0 && self.lr_value > 0.0) {
            return bad("lr_policy", "learning rates must be positive");
        }
        if self.batch == 0 {
            return bad("batch", "must be at least 1");
        }
        if self.population == 0 {
            return bad("population", "must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation_rate", "must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.mutation_frac) {
            return bad("mutation_frac", "must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.eps_start) || !(0.0..=1.0).contains(&self.eps_end) {
            return bad("eps_start", "exploration rates must lie in [0, 1]");
        }
        self.per.validate(self.batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("ipdqn".parse::<Variant>().unwrap(), Variant::AoIpdqn);
        assert!("dqn".parse::<Variant>().is_err());
    }

    #[test]
    fn epsilon_schedule() {
        let c = AgentConfig::smoke();
        assert_eq!(c.epsilon_at(0), 1.0);
        assert!((c.epsilon_at(15) - 0.05).abs() < 1e-12);
        assert!((c.epsilon_at(29) - 0.05).abs() < 1e-12);
        assert!(c.epsilon_at(7) < 1.0 && c.epsilon_at(7) > 0.05);
    }

    #[test]
    fn variant_reductions() {
        let c = AgentConfig::default().for_variant(Variant::AoPdqn);
        assert_eq!(c.population, 1);
        assert_eq!((c.per.alpha, c.per.mu_start, c.per.mu_end), (0.0, 0.0, 0.0));
        let c = AgentConfig::default().for_variant(Variant::AoGapdqn);
        assert_eq!(c.population, 10);
        assert_eq!(c.per.alpha, 0.0);
        let c = AgentConfig::default().for_variant(Variant::AoIpdqn);
        assert_eq!(c.per.alpha, 0.6);
    }
}
