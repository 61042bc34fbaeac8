//! Dense feed-forward networks over a flat parameter vector, with batched
//! backpropagation and an Adam optimizer.
//!
//! Layer `l` stores its weights row-major as `out x in` (one row per neuron)
//! followed by `out` biases. The flat layout is what the genetic operators
//! and checkpoints see.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output `y`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    layer_sizes: Vec<usize>,
    activations: Vec<Activation>,
    params: Vec<f64>,
}

/// Activations of every layer for one batch, input first.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    acts: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.acts.last().expect("cache holds at least the input")
    }
}

pub fn param_count(layer_sizes: &[usize]) -> usize {
    layer_sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
}

/// Hidden layers rectified, output layer `output`.
pub fn standard_activations(layer_sizes: &[usize], output: Activation) -> Vec<Activation> {
    let n = layer_sizes.len().saturating_sub(1);
    (0..n)
        .map(|l| if l + 1 == n { output } else { Activation::Relu })
        .collect()
}

impl NetworkParams {
    pub fn from_flat(
        layer_sizes: Vec<usize>,
        activations: Vec<Activation>,
        params: Vec<f64>,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::InvalidScenario(format!(
                "network needs at least two non-empty layers, got {layer_sizes:?}"
            )));
        }
        if activations.len() != layer_sizes.len() - 1 {
            return Err(Error::Dimension {
                context: "activation list",
                expected: layer_sizes.len() - 1,
                actual: activations.len(),
            });
        }
        let expected = param_count(&layer_sizes);
        if params.len() != expected {
            return Err(Error::Dimension {
                context: "flat parameter vector",
                expected,
                actual: params.len(),
            });
        }
        Ok(Self {
            layer_sizes,
            activations,
            params,
        })
    }

    pub fn zeros(layer_sizes: &[usize], activations: Vec<Activation>) -> Result<Self> {
        Self::from_flat(
            layer_sizes.to_vec(),
            activations,
            vec![0.0; param_count(layer_sizes)],
        )
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn input_len(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.activations.len()
    }

    pub fn flat(&self) -> &[f64] {
        &self.params
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Same topology as `self`.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.layer_sizes == other.layer_sizes && self.activations == other.activations
    }

    /// Start of layer `l` in the flat vector.
    pub fn layer_offset(&self, l: usize) -> usize {
        param_count(&self.layer_sizes[..=l])
    }

    pub fn layer(&self, l: usize) -> (ArrayView2<'_, f64>, ArrayView1<'_, f64>) {
        let (fan_in, out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        let off = self.layer_offset(l);
        let w = ArrayView2::from_shape((out, fan_in), &self.params[off..off + out * fan_in])
            .expect("layer slice has the declared shape");
        let b = ArrayView1::from(&self.params[off + out * fan_in..off + (fan_in + 1) * out]);
        (w, b)
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_len() {
            return Err(Error::Dimension {
                context: "network input",
                expected: self.input_len(),
                actual: input.len(),
            });
        }
        let mut x = input.to_vec();
        for l in 0..self.n_layers() {
            let (w, b) = self.layer(l);
            let act = self.activations[l];
            x = w
                .outer_iter()
                .zip(b.iter())
                .map(|(row, &bias)| {
                    act.apply(row.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + bias)
                })
                .collect();
        }
        Ok(x)
    }

    /// Forward pass over a `batch x input` matrix, keeping every layer's
    /// output for [`NetworkParams::backward_batch`].
    pub fn forward_batch(&self, input: Array2<f64>) -> Result<ForwardCache> {
        if input.ncols() != self.input_len() {
            return Err(Error::Dimension {
                context: "batched network input",
                expected: self.input_len(),
                actual: input.ncols(),
            });
        }
        let mut acts = Vec::with_capacity(self.n_layers() + 1);
        acts.push(input);
        for l in 0..self.n_layers() {
            let (w, b) = self.layer(l);
            let mut z = acts[l].dot(&w.t());
            z += &b;
            let act = self.activations[l];
            if act != Activation::Identity {
                z.mapv_inplace(|v| act.apply(v));
            }
            acts.push(z);
        }
        Ok(ForwardCache { acts })
    }

    /// Reverse-mode gradients, summed over the batch: returns the parameter
    /// gradient (flat layout) and the gradient with respect to the input.
    pub fn backward_batch(
        &self,
        cache: &ForwardCache,
        output_grad: &Array2<f64>,
    ) -> Result<(Vec<f64>, Array2<f64>)> {
        let out = cache.output();
        if output_grad.dim() != out.dim() {
            return Err(Error::Dimension {
                context: "output gradient",
                expected: out.len(),
                actual: output_grad.len(),
            });
        }
        let mut grads = vec![0.0; self.params.len()];
        let mut delta = output_grad.clone();
        for l in (0..self.n_layers()).rev() {
            let act = self.activations[l];
            if act != Activation::Identity {
                delta.zip_mut_with(&cache.acts[l + 1], |d, &y| {
                    *d *= act.derivative_from_output(y)
                });
            }
            let (w, _) = self.layer(l);
            let (fan_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let off = self.layer_offset(l);
            let dw = delta.t().dot(&cache.acts[l]);
            grads[off..off + n_out * fan_in]
                .copy_from_slice(dw.as_standard_layout().as_slice().unwrap());
            let db = delta.sum_axis(Axis(0));
            grads[off + n_out * fan_in..off + (fan_in + 1) * n_out]
                .copy_from_slice(db.as_slice().unwrap());
            delta = delta.dot(&w);
        }
        Ok((grads, delta))
    }

    /// Single-sample gradient of `output_grad . f(input)`.
    pub fn backward(&self, input: &[f64], output_grad: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let x = Array2::from_shape_vec((1, input.len()), input.to_vec()).unwrap();
        let cache = self.forward_batch(x)?;
        if output_grad.len() != self.output_len() {
            return Err(Error::Dimension {
                context: "output gradient",
                expected: self.output_len(),
                actual: output_grad.len(),
            });
        }
        let g = Array2::from_shape_vec((1, output_grad.len()), output_grad.to_vec()).unwrap();
        let (pg, ig) = self.backward_batch(&cache, &g)?;
        Ok((pg, ig.into_raw_vec_and_offset().0))
    }

    /// Per-layer standard deviation of the weights (biases excluded).
    pub fn weight_std(&self, l: usize) -> f64 {
        let (w, _) = self.layer(l);
        w.std(0.0)
    }
}

/// Uniform initialization in `±1/sqrt(fan_in)` for weights and biases.
pub fn init_params<R: Rng + ?Sized>(
    layer_sizes: &[usize],
    activations: Vec<Activation>,
    rng: &mut R,
) -> Result<NetworkParams> {
    let mut net = NetworkParams::zeros(layer_sizes, activations)?;
    let mut off = 0;
    for w in layer_sizes.windows(2) {
        let bound = 1.0 / (w[0] as f64).sqrt();
        let n = (w[0] + 1) * w[1];
        for p in &mut net.params[off..off + n] {
            *p = rng.random_range(-bound..=bound);
        }
        off += n;
    }
    Ok(net)
}

/// `target <- tau * online + (1 - tau) * target`.
pub fn soft_update(target: &mut NetworkParams, online: &NetworkParams, tau: f64) {
    debug_assert!((0.0..=1.0).contains(&tau));
    debug_assert!(target.same_shape(online));
    for (t, &o) in target.params.iter_mut().zip(&online.params) {
        *t = tau * o + (1.0 - tau) * *t;
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl OptimizerState {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Descends along `grads`.
    pub fn apply(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Dimension {
                context: "optimizer step",
                expected: self.m.len(),
                actual: if params.len() != self.m.len() {
                    params.len()
                } else {
                    grads.len()
                },
            });
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// Convenience: batch matrix from row vectors.
pub fn stack_rows(rows: &[Vec<f64>], width: usize) -> Array2<f64> {
    let mut flat = Vec::with_capacity(rows.len() * width);
    for r in rows {
        debug_assert_eq!(r.len(), width);
        flat.extend_from_slice(r);
    }
    Array2::from_shape_vec((rows.len(), width), flat).expect("rows share the width")
}

pub fn row_vec(a: &Array1<f64>) -> Array2<f64> {
    a.clone().insert_axis(Axis(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;

    fn net(sizes: &[usize], out: Activation, seed: u64) -> NetworkParams {
        init_params(
            sizes,
            standard_activations(sizes, out),
            &mut RngStream::new(seed, "init"),
        )
        .unwrap()
    }

    #[test]
    fn zero_network_outputs_activation_of_zero() {
        let z = NetworkParams::zeros(&[3, 4, 2], vec![Activation::Relu, Activation::Tanh]).unwrap();
        assert_eq!(z.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer() {
        let p = NetworkParams::from_flat(
            vec![2, 2],
            vec![Activation::Identity],
            vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        )
        .unwrap();
        assert_eq!(p.forward(&[3.5, -1.25]).unwrap(), vec![3.5, -1.25]);
    }

    #[test]
    fn hand_arithmetic_preactivation() {
        let id = NetworkParams::from_flat(vec![2, 1], vec![Activation::Identity], vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(id.forward(&[-3.0, 5.0]).unwrap(), vec![2.0]);
        let relu = NetworkParams::from_flat(vec![2, 1], vec![Activation::Relu], vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(relu.forward(&[-3.0, 5.0]).unwrap(), vec![2.0]);
        assert_eq!(relu.forward(&[-5.0, 3.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn dimension_errors() {
        let n = net(&[3, 4, 2], Activation::Tanh, 1);
        assert!(n.forward(&[1.0]).is_err());
        assert!(n.backward(&[1.0, 2.0, 3.0], &[1.0]).is_err());
        assert!(NetworkParams::from_flat(vec![2, 1], vec![Activation::Relu], vec![0.0]).is_err());
    }

    #[test]
    fn scalar_product_rule() {
        let p = NetworkParams::from_flat(vec![1, 1], vec![Activation::Identity], vec![2.0, 0.0]).unwrap();
        let (pg, ig) = p.backward(&[3.0], &[1.0]).unwrap();
        assert_eq!(pg, vec![3.0, 1.0]);
        assert_eq!(ig, vec![2.0]);
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let n = net(&[4, 6, 3], Activation::Tanh, 2);
        let (pg, ig) = n.backward(&[0.1, 0.2, 0.3, 0.4], &[0.0; 3]).unwrap();
        assert!(pg.iter().all(|&g| g == 0.0));
        assert!(ig.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn batched_matches_single() {
        let n = net(&[4, 7, 5, 3], Activation::Tanh, 3);
        let mut rng = RngStream::new(3, "x");
        let rows: Vec<Vec<f64>> = (0..5).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let cache = n.forward_batch(stack_rows(&rows, 4)).unwrap();
        for (i, r) in rows.iter().enumerate() {
            let single = n.forward(r).unwrap();
            for (a, b) in single.iter().zip(cache.output().row(i)) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        // batch gradient = sum of single gradients
        let g = Array2::from_elem((5, 3), 0.5);
        let (pg, _) = n.backward_batch(&cache, &g).unwrap();
        let mut sum = vec![0.0; n.len()];
        for r in &rows {
            let (p, _) = n.backward(r, &[0.5; 3]).unwrap();
            for (s, v) in sum.iter_mut().zip(p) {
                *s += v;
            }
        }
        for (a, b) in pg.iter().zip(&sum) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_round_trip() {
        let n = net(&[3, 5, 2], Activation::Identity, 4);
        let sizes = n.layer_sizes().to_vec();
        let acts = n.activations().to_vec();
        let back = NetworkParams::from_flat(sizes, acts, n.clone().into_flat()).unwrap();
        assert_eq!(back, n);
        assert_eq!(n.len(), (3 + 1) * 5 + (5 + 1) * 2);
    }

    #[test]
    fn init_bounds_and_determinism() {
        let a = net(&[16, 400, 200, 9], Activation::Tanh, 5);
        assert_eq!(a, net(&[16, 400, 200, 9], Activation::Tanh, 5));
        assert_ne!(a, net(&[16, 400, 200, 9], Activation::Tanh, 6));
        for (l, fan_in) in [16usize, 400, 200].iter().enumerate() {
            let (w, b) = a.layer(l);
            let bound = 1.0 / (*fan_in as f64).sqrt();
            assert!(w.iter().chain(b.iter()).all(|v| v.abs() <= bound));
        }
    }

    #[test]
    fn adam_steps() {
        let mut opt = OptimizerState::new(1, 1e-3);
        let mut p = [0.0];
        opt.apply(&mut p, &[1.0]).unwrap();
        assert!((p[0] + 1e-3).abs() < 1e-9, "{}", p[0]);

        let mut opt = OptimizerState::new(2, 1e-2);
        let mut p = [1.0, -1.0];
        opt.apply(&mut p, &[0.0, 0.0]).unwrap();
        assert_eq!(p, [1.0, -1.0]);
        for _ in 0..100 {
            opt.apply(&mut p, &[2.0, -0.5]).unwrap();
        }
        assert!(p[0] < 1.0 && p[1] > -1.0);
        assert!(opt.apply(&mut p, &[1.0]).is_err());
    }

    #[test]
    fn soft_update_cases() {
        let online = NetworkParams::from_flat(vec![1, 1], vec![Activation::Identity], vec![2.0, 2.0]).unwrap();
        let mut t = NetworkParams::zeros(&[1, 1], vec![Activation::Identity]).unwrap();
        soft_update(&mut t, &online, 0.0);
        assert_eq!(t.flat(), &[0.0, 0.0]);
        soft_update(&mut t, &online, 0.5);
        assert_eq!(t.flat(), &[1.0, 1.0]);
        soft_update(&mut t, &online, 1.0);
        assert_eq!(t.flat(), online.flat());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let n = net(&[3, 8, 2], Activation::Tanh, 7);
        let mut opt = OptimizerState::new(n.len(), 3e-4);
        let mut p = n.flat().to_vec();
        opt.apply(&mut p, &vec![0.1234567890123; n.len()]).unwrap();
        let text = serde_json::to_string(&(n.clone(), opt.clone())).unwrap();
        let (n2, o2): (NetworkParams, OptimizerState) = serde_json::from_str(&text).unwrap();
        assert_eq!(n2, n);
        assert_eq!(o2, opt);
    }
}
