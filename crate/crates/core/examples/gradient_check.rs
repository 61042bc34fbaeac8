//! Backpropagated gradients of the value and policy losses against
//! central finite differences.
//!
//!     cargo run --release --example gradient_check

use ndarray::Array2;
use rand::Rng;
use risuav::agent::{policy_loss_and_grad, value_loss_and_grad, Pdqn};
use risuav::nn::{init_params, standard_activations, Activation, NetworkParams};
use risuav::RngStream;

fn numeric(p: &NetworkParams, loss: impl Fn(&NetworkParams) -> f64) -> Vec<f64> {
    let h = 1e-5;
    let mut q = p.clone();
    (0..p.len())
        .map(|i| {
            let x = q.flat()[i];
            q.flat_mut()[i] = x + h;
            let up = loss(&q);
            q.flat_mut()[i] = x - h;
            let down = loss(&q);
            q.flat_mut()[i] = x;
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn main() -> risuav::Result<()> {
    let mut rng = RngStream::new(4, "example/grad");
    let (obs, n, batch) = (6, 3, 8);
    let policy = Pdqn::init_policy(obs, n, &[16, 8], &mut rng)?;
    let layers = [obs + 3 * n, 16, 8, n];
    let value = init_params(&layers, standard_activations(&layers, Activation::Identity), &mut rng)?;

    let inputs = Array2::from_shape_fn((batch, obs + 3 * n), |_| rng.random_range(-1.0..1.0));
    let states = Array2::from_shape_fn((batch, obs), |_| rng.random_range(0.0..1.0));
    let actions: Vec<usize> = (0..batch).map(|i| i % n).collect();
    let targets: Vec<f64> = (0..batch).map(|_| rng.random_range(-2.0..2.0)).collect();
    let weights = vec![1.0; batch];

    let (_, _, analytic) = value_loss_and_grad(&value, inputs.clone(), &actions, &targets, &weights)?;
    let fd = numeric(&value, |v| value_loss_and_grad(v, inputs.clone(), &actions, &targets, &weights).unwrap().0);
    println!("value loss: {} params, max relative deviation {:.2e}", value.len(), max_rel(&analytic, &fd));

    let (_, analytic) = policy_loss_and_grad(&policy, &value, states.clone())?;
    let fd = numeric(&policy, |p| policy_loss_and_grad(p, &value, states.clone()).unwrap().0);
    println!("policy loss through the critic: {} params, max relative deviation {:.2e}", policy.len(), max_rel(&analytic, &fd));
    Ok(())
}
