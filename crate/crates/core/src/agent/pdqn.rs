//! Parameterized deep Q-network: a policy net emits one `(ax, ay, delta)`
//! triple per IoTD, a value net scores every IoTD given all triples.

use ndarray::{s, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AgentConfig;
use crate::config::ScenarioConfig;
use crate::env::Action;
use crate::episode::Actor;
use crate::error::{Error, Result};
use crate::nn::{
    init_params, soft_update, stack_rows, standard_activations, Activation, NetworkParams,
    OptimizerState,
};
use crate::per::{Experience, PerBuffer};
use crate::rng::RngStream;

/// Continuous parameters per discrete branch.
pub const PARAMS_PER_BRANCH: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pdqn {
    pub policy: NetworkParams,
    pub value: NetworkParams,
    pub policy_target: NetworkParams,
    pub value_target: NetworkParams,
    pub opt_policy: OptimizerState,
    pub opt_value: OptimizerState,
    n_branches: usize,
}

fn layers(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut v = vec![input];
    v.extend_from_slice(hidden);
    v.push(output);
    v
}

impl Pdqn {
    pub fn new(obs_len: usize, n_branches: usize, cfg: &AgentConfig, rng: &mut RngStream) -> Result<Self> {
        let policy = Self::init_policy(obs_len, n_branches, &cfg.hidden, &mut rng.substream("policy"))?;
        let vl = layers(obs_len + n_branches * PARAMS_PER_BRANCH, &cfg.hidden, n_branches);
        let value = init_params(
            &vl,
            standard_activations(&vl, Activation::Identity),
            &mut rng.substream("value"),
        )?;
        Ok(Self {
            opt_policy: OptimizerState::new(policy.len(), cfg.lr_policy),
            opt_value: OptimizerState::new(value.len(), cfg.lr_value),
            policy_target: policy.clone(),
            value_target: value.clone(),
            policy,
            value,
            n_branches,
        })
    }

    /// Fresh policy genome with the PDQN policy topology.
    pub fn init_policy(
        obs_len: usize,
        n_branches: usize,
        hidden: &[usize],
        rng: &mut RngStream,
    ) -> Result<NetworkParams> {
        let pl = layers(obs_len, hidden, n_branches * PARAMS_PER_BRANCH);
        init_params(&pl, standard_activations(&pl, Activation::Tanh), rng)
    }

    pub fn n_branches(&self) -> usize {
        self.n_branches
    }

    pub fn soft_update(&mut self, tau: f64) {
        soft_update(&mut self.policy_target, &self.policy, tau);
        soft_update(&mut self.value_target, &self.value, tau);
    }

    /// `y = r + gamma * max_d Q'(s', d, c(s'; P'))`, without bootstrapping
    /// from terminal transitions.
    pub fn td_targets(&self, batch: &[&Experience], gamma: f64) -> Result<Vec<f64>> {
        let obs_len = self.policy.input_len();
        let next = stack_rows(
            &batch.iter().map(|e| e.next_state.clone()).collect::<Vec<_>>(),
            obs_len,
        );
        let params = self.policy_target.forward_batch(next.clone())?;
        let input = ndarray::concatenate![ndarray::Axis(1), next, *params.output()];
        let q = self.value_target.forward_batch(input)?;
        Ok(batch
            .iter()
            .zip(q.output().rows())
            .map(|(e, row)| {
                if e.terminal {
                    e.reward
                } else {
                    let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    e.reward + gamma * best
                }
            })
            .collect())
    }

    /// One PER-sampled update of the value net, then of the policy net,
    /// then priorities and targets. Returns `(value_loss, policy_loss)`.
    pub fn train_step(
        &mut self,
        buffer: &mut PerBuffer,
        cfg: &AgentConfig,
        mu: f64,
        rng: &mut RngStream,
    ) -> Result<(f64, f64)> {
        let sample = buffer.sample(cfg.batch, mu, rng)?;
        let batch: Vec<&Experience> = sample.indices.iter().map(|&i| buffer.experience(i)).collect();
        let targets = self.td_targets(&batch, cfg.gamma)?;
        let obs_len = self.policy.input_len();
        let width = obs_len + self.n_branches * PARAMS_PER_BRANCH;
        let inputs = stack_rows(
            &batch
                .iter()
                .map(|e| [e.state.as_slice(), e.params.as_slice()].concat())
                .collect::<Vec<_>>(),
            width,
        );
        let actions: Vec<usize> = batch.iter().map(|e| e.schedule).collect();
        let (v_loss, td, v_grad) =
            value_loss_and_grad(&self.value, inputs, &actions, &targets, &sample.weights)?;
        self.opt_value.apply(self.value.flat_mut(), &v_grad)?;

        let states = stack_rows(
            &batch.iter().map(|e| e.state.clone()).collect::<Vec<_>>(),
            obs_len,
        );
        drop(batch);
        let (p_loss, p_grad) = policy_loss_and_grad(&self.policy, &self.value, states)?;
        self.opt_policy.apply(self.policy.flat_mut(), &p_grad)?;

        buffer.update_priorities(&sample.indices, &td)?;
        self.soft_update(cfg.tau);
        Ok((v_loss, p_loss))
    }
}

/// Weighted squared TD loss `sum_b w_b (Q(s_b, d_b, c_b) - y_b)^2 / B`.
/// Returns the loss, the TD errors `y - Q` and the value-parameter gradient.
pub fn value_loss_and_grad(
    value: &NetworkParams,
    inputs: Array2<f64>,
    actions: &[usize],
    targets: &[f64],
    weights: &[f64],
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let b = inputs.nrows();
    if actions.len() != b || targets.len() != b || weights.len() != b {
        return Err(Error::Dimension {
            context: "value loss batch",
            expected: b,
            actual: actions.len().min(targets.len()).min(weights.len()),
        });
    }
    let cache = value.forward_batch(inputs)?;
    let q = cache.output();
    let mut grad_out = Array2::zeros(q.dim());
    let mut td = Vec::with_capacity(b);
    let mut loss = 0.0;
    for i in 0..b {
        let err = q[[i, actions[i]]] - targets[i];
        loss += weights[i] * err * err;
        grad_out[[i, actions[i]]] = 2.0 * weights[i] * err / b as f64;
        td.push(-err);
    }
    let (grad, _) = value.backward_batch(&cache, &grad_out)?;
    Ok((loss / b as f64, td, grad))
}

/// Policy loss `-(1/B) sum_b sum_d Q(s_b, d, c(s_b))` with the value net
/// frozen. Returns the loss and the policy-parameter gradient.
pub fn policy_loss_and_grad(
    policy: &NetworkParams,
    value: &NetworkParams,
    states: Array2<f64>,
) -> Result<(f64, Vec<f64>)> {
    let b = states.nrows();
    let obs_len = states.ncols();
    let p_cache = policy.forward_batch(states.clone())?;
    let input = ndarray::concatenate![ndarray::Axis(1), states, *p_cache.output()];
    let q_cache = value.forward_batch(input)?;
    let loss = -q_cache.output().sum() / b as f64;
    let grad_q = Array2::from_elem(q_cache.output().dim(), -1.0 / b as f64);
    let (_, grad_in) = value.backward_batch(&q_cache, &grad_q)?;
    let grad_c = grad_in.slice(s![.., obs_len..]).to_owned();
    let (grad, _) = policy.backward_batch(&p_cache, &grad_c)?;
    Ok((loss, grad))
}

/// Uniform point of `[-1, 1]^len`.
pub fn random_unit_params(len: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Epsilon-greedy PDQN action selection with a policy genome and the shared
/// value net.
#[derive(Debug, Clone, Copy)]
pub struct PolicyActor<'a> {
    pub policy: &'a NetworkParams,
    pub value: &'a NetworkParams,
    pub epsilon: f64,
}

impl PolicyActor<'_> {
    /// Greedy branch: argmax of the value head, lowest index on ties.
    pub fn greedy_branch(&self, obs: &[f64], params: &[f64]) -> Result<usize> {
        let q = self.value.forward(&[obs, params].concat())?;
        let mut best = 0;
        for (d, &v) in q.iter().enumerate() {
            if v > q[best] {
                best = d;
            }
        }
        Ok(best)
    }
}

impl Actor for PolicyActor<'_> {
    fn act(
        &mut self,
        obs: &[f64],
        _slot: usize,
        cfg: &ScenarioConfig,
        rng: &mut RngStream,
    ) -> Result<(Action, Vec<f64>)> {
        let mut params = self.policy.forward(obs)?;
        let explore = self.epsilon > 0.0 && rng.random::<f64>() < self.epsilon;
        let d = if explore {
            let d = rng.random_range(0..cfg.n_iotds());
            let u = random_unit_params(PARAMS_PER_BRANCH, rng);
            params[d * PARAMS_PER_BRANCH..(d + 1) * PARAMS_PER_BRANCH].copy_from_slice(&u);
            d
        } else {
            self.greedy_branch(obs, &params)?
        };
        let k = d * PARAMS_PER_BRANCH;
        let action = Action::from_unit([params[k], params[k + 1], params[k + 2]], d, cfg);
        Ok((action, params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::per::PerConfig;

    fn exp(reward: f64, terminal: bool, obs_len: usize, n: usize) -> Experience {
        Experience {
            state: vec![0.5; obs_len],
            schedule: 0,
            params: vec![0.0; n * 3],
            reward,
            next_state: vec![0.25; obs_len],
            terminal,
        }
    }

    fn small_cfg() -> AgentConfig {
        AgentConfig {
            hidden: vec![8],
            batch: 4,
            lr_value: 1e-2,
            ..AgentConfig::smoke()
        }
    }

    /// Value net whose output is the constant `c` on every branch.
    fn constant_value(input: usize, n: usize, c: f64) -> NetworkParams {
        let mut v = NetworkParams::zeros(&[input, n], vec![Activation::Identity]).unwrap();
        let off = input * n;
        for b in &mut v.flat_mut()[off..] {
            *b = c;
        }
        v
    }

    #[test]
    fn shapes_follow_branch_count() {
        let p = Pdqn::new(8, 3, &small_cfg(), &mut RngStream::new(1, "a")).unwrap();
        assert_eq!(p.policy.output_len(), 9);
        assert_eq!(p.value.input_len(), 17);
        assert_eq!(p.value.output_len(), 3);
    }

    #[test]
    fn targets() {
        let mut p = Pdqn::new(8, 3, &small_cfg(), &mut RngStream::new(2, "a")).unwrap();
        p.value_target = constant_value(17, 3, 4.0);
        let e = [exp(1.5, false, 8, 3), exp(-2.0, true, 8, 3)];
        let refs: Vec<&Experience> = e.iter().collect();
        assert_eq!(p.td_targets(&refs, 0.0).unwrap(), vec![1.5, -2.0]);
        assert_eq!(p.td_targets(&refs, 0.5).unwrap(), vec![1.5 + 2.0, -2.0]);
    }

    #[test]
    fn hand_weighted_loss() {
        // Q = 0 everywhere; errors (1, -2) come from targets (-1, 2).
        let v = constant_value(2, 1, 0.0);
        let inputs = Array2::zeros((2, 2));
        let (loss, td, _) = value_loss_and_grad(&v, inputs, &[0, 0], &[-1.0, 2.0], &[1.0, 0.5]).unwrap();
        assert!((loss - 1.5).abs() < 1e-15);
        assert_eq!(td, vec![-1.0, 2.0]);
    }

    #[test]
    fn zero_loss_when_q_matches() {
        let v = constant_value(2, 2, 3.0);
        let (loss, td, grad) =
            value_loss_and_grad(&v, Array2::zeros((3, 2)), &[0, 1, 0], &[3.0; 3], &[1.0; 3]).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(td, vec![0.0; 3]);
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn constant_critic_gives_zero_policy_gradient() {
        let policy = Pdqn::init_policy(4, 2, &[8], &mut RngStream::new(3, "p")).unwrap();
        let value = constant_value(4 + 6, 2, 1.0);
        let (loss, grad) = policy_loss_and_grad(&policy, &value, Array2::from_elem((1, 4), 0.3)).unwrap();
        assert_eq!(loss, -2.0);
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn policy_loss_sums_branches() {
        let policy = Pdqn::init_policy(2, 2, &[4], &mut RngStream::new(4, "p")).unwrap();
        let mut value = constant_value(2 + 6, 2, 0.0);
        let off = 8 * 2;
        value.flat_mut()[off] = 1.0;
        value.flat_mut()[off + 1] = 2.0;
        let (loss, _) = policy_loss_and_grad(&policy, &value, Array2::zeros((1, 2))).unwrap();
        assert_eq!(loss, -3.0);
    }

    #[test]
    fn rigged_critic_picks_branch() {
        let cfg = ScenarioConfig::smoke();
        let policy = Pdqn::init_policy(8, 3, &[8], &mut RngStream::new(5, "p")).unwrap();
        let mut value = constant_value(17, 3, 0.0);
        let off = 17 * 3;
        value.flat_mut()[off..].copy_from_slice(&[0.1, 0.9, 0.3]);
        let mut actor = PolicyActor { policy: &policy, value: &value, epsilon: 0.0 };
        let (a, _) = actor.act(&[0.5; 8], 0, &cfg, &mut RngStream::new(5, "x")).unwrap();
        assert_eq!(a.schedule, 1);
        // shifting every branch value leaves the choice alone
        for b in &mut value.flat_mut()[off..] {
            *b += 7.5;
        }
        let mut actor = PolicyActor { policy: &policy, value: &value, epsilon: 0.0 };
        let (a, _) = actor.act(&[0.5; 8], 0, &cfg, &mut RngStream::new(5, "x")).unwrap();
        assert_eq!(a.schedule, 1);
    }

    #[test]
    fn saturated_policy_maps_to_bounds() {
        let cfg = ScenarioConfig::smoke();
        let mut policy = NetworkParams::zeros(&[8, 9], vec![Activation::Tanh]).unwrap();
        let off = 8 * 9;
        for b in &mut policy.flat_mut()[off..] {
            *b = 50.0;
        }
        let value = constant_value(17, 3, 0.0);
        let mut actor = PolicyActor { policy: &policy, value: &value, epsilon: 0.0 };
        let (a, _) = actor.act(&[0.0; 8], 0, &cfg, &mut RngStream::new(6, "x")).unwrap();
        assert_eq!((a.ax, a.ay, a.delta), (20.0, 20.0, 1.0));
    }

    #[test]
    fn full_exploration_is_uniform() {
        let cfg = ScenarioConfig::smoke();
        let policy = Pdqn::init_policy(8, 3, &[8], &mut RngStream::new(7, "p")).unwrap();
        let value = constant_value(17, 3, 0.0);
        let mut actor = PolicyActor { policy: &policy, value: &value, epsilon: 1.0 };
        let mut rng = RngStream::new(7, "x");
        let n = 10_000;
        let (mut counts, mut ax, mut delta) = ([0usize; 3], 0.0, 0.0);
        for _ in 0..n {
            let (a, _) = actor.act(&[0.5; 8], 0, &cfg, &mut rng).unwrap();
            counts[a.schedule] += 1;
            ax += a.ax;
            delta += a.delta;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.02);
        }
        assert!((ax / n as f64).abs() < 0.5);
        assert!((delta / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn train_step_moves_value_toward_targets() {
        let cfg = small_cfg();
        let mut p = Pdqn::new(8, 3, &cfg, &mut RngStream::new(8, "a")).unwrap();
        let mut buf = PerBuffer::new(PerConfig { capacity: 64, ..PerConfig::default() });
        for _ in 0..16 {
            buf.insert(exp(5.0, true, 8, 3));
        }
        let mut rng = RngStream::new(8, "t");
        let (first, _) = p.train_step(&mut buf, &cfg, 0.4, &mut rng).unwrap();
        let mut last = first;
        for _ in 0..200 {
            last = p.train_step(&mut buf, &cfg, 0.4, &mut rng).unwrap().0;
        }
        assert!(last < first * 0.5, "{first} -> {last}");
    }
}
