//! Deterministic policy-gradient baseline that emits the whole hybrid
//! action at once: `(ax, ay, delta)` plus a relaxed N-way scheduling vector
//! whose argmax picks the IoTD. A single critic scores `(s, a)`.

use ndarray::Axis;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::pdqn::{policy_loss_and_grad, random_unit_params, value_loss_and_grad, PARAMS_PER_BRANCH};
use super::AgentConfig;
use crate::config::ScenarioConfig;
use crate::env::Action;
use crate::episode::Actor;
use crate::error::Result;
use crate::nn::{
    init_params, soft_update, stack_rows, standard_activations, Activation, NetworkParams,
    OptimizerState,
};
use crate::per::{Experience, PerBuffer};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pddpg {
    pub actor: NetworkParams,
    pub critic: NetworkParams,
    pub actor_target: NetworkParams,
    pub critic_target: NetworkParams,
    pub opt_actor: OptimizerState,
    pub opt_critic: OptimizerState,
}

fn layers(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut v = vec![input];
    v.extend_from_slice(hidden);
    v.push(output);
    v
}

/// Index of the largest entry, lowest on ties.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

impl Pddpg {
    pub fn new(obs_len: usize, n: usize, cfg: &AgentConfig, rng: &mut RngStream) -> Result<Self> {
        let act_len = PARAMS_PER_BRANCH + n;
        let al = layers(obs_len, &cfg.hidden, act_len);
        let actor = init_params(&al, standard_activations(&al, Activation::Tanh), &mut rng.substream("actor"))?;
        let cl = layers(obs_len + act_len, &cfg.hidden, 1);
        let critic = init_params(
            &cl,
            standard_activations(&cl, Activation::Identity),
            &mut rng.substream("critic"),
        )?;
        Ok(Self {
            opt_actor: OptimizerState::new(actor.len(), cfg.lr_policy),
            opt_critic: OptimizerState::new(critic.len(), cfg.lr_value),
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
        })
    }

    pub fn decode(out: &[f64], cfg: &ScenarioConfig) -> Action {
        let d = argmax(&out[PARAMS_PER_BRANCH..]);
        Action::from_unit([out[0], out[1], out[2]], d, cfg)
    }

    pub fn train_step(
        &mut self,
        buffer: &mut PerBuffer,
        cfg: &AgentConfig,
        mu: f64,
        rng: &mut RngStream,
    ) -> Result<(f64, f64)> {
        let sample = buffer.sample(cfg.batch, mu, rng)?;
        let batch: Vec<&Experience> = sample.indices.iter().map(|&i| buffer.experience(i)).collect();
        let obs_len = self.actor.input_len();
        let act_len = self.actor.output_len();

        let next = stack_rows(&batch.iter().map(|e| e.next_state.clone()).collect::<Vec<_>>(), obs_len);
        let next_a = self.actor_target.forward_batch(next.clone())?;
        let q_next = self
            .critic_target
            .forward_batch(ndarray::concatenate![Axis(1), next, *next_a.output()])?;
        let targets: Vec<f64> = batch
            .iter()
            .zip(q_next.output().column(0))
            .map(|(e, &q)| if e.terminal { e.reward } else { e.reward + cfg.gamma * q })
            .collect();

        let inputs = stack_rows(
            &batch
                .iter()
                .map(|e| [e.state.as_slice(), e.params.as_slice()].concat())
                .collect::<Vec<_>>(),
            obs_len + act_len,
        );
        let zeros = vec![0; batch.len()];
        let (c_loss, td, c_grad) = value_loss_and_grad(&self.critic, inputs, &zeros, &targets, &sample.weights)?;
        self.opt_critic.apply(self.critic.flat_mut(), &c_grad)?;

        let states = stack_rows(&batch.iter().map(|e| e.state.clone()).collect::<Vec<_>>(), obs_len);
        drop(batch);
        let (a_loss, a_grad) = policy_loss_and_grad(&self.actor, &self.critic, states)?;
        self.opt_actor.apply(self.actor.flat_mut(), &a_grad)?;

        buffer.update_priorities(&sample.indices, &td)?;
        soft_update(&mut self.actor_target, &self.actor, cfg.tau);
        soft_update(&mut self.critic_target, &self.critic, cfg.tau);
        Ok((c_loss, a_loss))
    }
}

/// Epsilon-greedy PDDPG action selection.
#[derive(Debug, Clone, Copy)]
pub struct PddpgActor<'a> {
    pub actor: &'a NetworkParams,
    pub epsilon: f64,
}

impl Actor for PddpgActor<'_> {
    fn act(
        &mut self,
        obs: &[f64],
        _slot: usize,
        cfg: &ScenarioConfig,
        rng: &mut RngStream,
    ) -> Result<(Action, Vec<f64>)> {
        let out = if self.epsilon > 0.0 && rng.random::<f64>() < self.epsilon {
            random_unit_params(self.actor.output_len(), rng)
        } else {
            self.actor.forward(obs)?
        };
        Ok((Pddpg::decode(&out, cfg), out))
    }
}
