//! Policy population with elitism, size-2 tournaments, neuron-level
//! crossover and sparse Gaussian mutation.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::nn::NetworkParams;
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub genomes: Vec<NetworkParams>,
    pub fitness: Vec<f64>,
    pub mutation_rate: f64,
    pub mutation_frac: f64,
    pub mutation_scale: f64,
}

impl Population {
    pub fn new(
        genomes: Vec<NetworkParams>,
        mutation_rate: f64,
        mutation_frac: f64,
        mutation_scale: f64,
    ) -> Self {
        let n = genomes.len();
        assert!(n >= 1, "population needs at least one genome");
        Self {
            genomes,
            fitness: vec![f64::NEG_INFINITY; n],
            mutation_rate,
            mutation_frac,
            mutation_scale,
        }
    }

    pub fn len(&self) -> usize {
        self.genomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genomes.is_empty()
    }

    /// Indices sorted by fitness, best first; ties keep index order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.fitness[b].total_cmp(&self.fitness[a]));
        idx
    }

    pub fn best(&self) -> usize {
        self.ranking()[0]
    }

    pub fn elite_count(&self) -> usize {
        self.len() - self.len() / 2
    }

    /// One GA generation. The top `ceil(psi/2)` genomes are kept unchanged;
    /// `floor(psi/2)` tournament winners are each crossed with a random
    /// elite and mutated with probability `mutation_rate`. Children carry
    /// their tournament parent's fitness until re-evaluated and are placed
    /// before the elites, so fitness ties in [`Population::inject_rl`] hit
    /// a child first.
    pub fn evolve(&mut self, rng: &mut RngStream) {
        let n = self.len();
        let ranking = self.ranking();
        let elites: Vec<usize> = ranking[..self.elite_count()].to_vec();
        let mut genomes = Vec::with_capacity(n);
        let mut fitness = Vec::with_capacity(n);
        for _ in 0..n / 2 {
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            let winner = if self.fitness[b] > self.fitness[a] || (self.fitness[b] == self.fitness[a] && b < a) {
                b
            } else {
                a
            };
            let elite = elites[rng.random_range(0..elites.len())];
            let mut child = crossover(&self.genomes[winner], &self.genomes[elite], rng);
            if rng.random::<f64>() < self.mutation_rate {
                mutate(&mut child, self.mutation_frac, self.mutation_scale, rng);
            }
            genomes.push(child);
            fitness.push(self.fitness[winner]);
        }
        for &e in &elites {
            genomes.push(self.genomes[e].clone());
            fitness.push(self.fitness[e]);
        }
        self.genomes = genomes;
        self.fitness = fitness;
    }

    /// Overwrites the weakest genome (lowest index on ties) with the
    /// gradient-trained policy. Returns the replaced index.
    pub fn inject_rl(&mut self, rl: &NetworkParams, rl_fitness: f64) -> usize {
        let mut worst = 0;
        for i in 1..self.len() {
            if self.fitness[i] < self.fitness[worst] {
                worst = i;
            }
        }
        self.genomes[worst] = rl.clone();
        self.fitness[worst] = rl_fitness;
        worst
    }
}

/// Neuron-level crossover: each neuron (weight row plus bias) comes whole
/// from one parent chosen uniformly.
pub fn crossover(a: &NetworkParams, b: &NetworkParams, rng: &mut RngStream) -> NetworkParams {
    assert!(a.same_shape(b), "crossover needs matching topologies");
    let mut child = a.clone();
    let sizes = a.layer_sizes().to_vec();
    for l in 0..a.n_layers() {
        let (fan_in, out) = (sizes[l], sizes[l + 1]);
        let off = a.layer_offset(l);
        let bias_off = off + fan_in * out;
        for r in 0..out {
            if rng.random::<bool>() {
                let row = off + r * fan_in..off + (r + 1) * fan_in;
                child.flat_mut()[row.clone()].copy_from_slice(&b.flat()[row]);
                child.flat_mut()[bias_off + r] = b.flat()[bias_off + r];
            }
        }
    }
    child
}

/// Adds `N(0, (scale * layer weight std)^2)` noise to a random `frac` of
/// each layer's weights.
pub fn mutate(genome: &mut NetworkParams, frac: f64, scale: f64, rng: &mut RngStream) {
    let sizes = genome.layer_sizes().to_vec();
    for l in 0..genome.n_layers() {
        let n_w = sizes[l] * sizes[l + 1];
        let k = (frac * n_w as f64).ceil() as usize;
        let std = scale * genome.weight_std(l);
        if k == 0 || !(std > 0.0) {
            continue;
        }
        let noise = Normal::new(0.0, std).expect("finite std");
        let off = genome.layer_offset(l);
        for i in sample(rng, n_w, k.min(n_w)).into_iter() {
            genome.flat_mut()[off + i] += noise.sample(rng);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_params, standard_activations, Activation};

    fn genome(seed: u64) -> NetworkParams {
        let sizes = [4, 6, 3];
        init_params(
            &sizes,
            standard_activations(&sizes, Activation::Tanh),
            &mut RngStream::new(seed, "g"),
        )
        .unwrap()
    }

    fn pop(fitness: &[f64]) -> Population {
        let mut p = Population::new((0..fitness.len() as u64).map(genome).collect(), 0.9, 0.1, 0.1);
        p.fitness = fitness.to_vec();
        p
    }

    #[test]
    fn identical_parents_identical_child() {
        let g = genome(1);
        assert_eq!(crossover(&g, &g, &mut RngStream::new(1, "x")), g);
    }

    #[test]
    fn crossover_rows_come_from_a_parent() {
        let (a, b) = (genome(1), genome(2));
        let c = crossover(&a, &b, &mut RngStream::new(2, "x"));
        for l in 0..c.n_layers() {
            let (wc, bc) = c.layer(l);
            let (wa, ba) = a.layer(l);
            let (wb, bb) = b.layer(l);
            for r in 0..wc.nrows() {
                let from_a = wc.row(r) == wa.row(r) && bc[r] == ba[r];
                let from_b = wc.row(r) == wb.row(r) && bc[r] == bb[r];
                assert!(from_a || from_b);
            }
        }
    }

    #[test]
    fn mutation_touches_a_fraction() {
        let g = genome(3);
        let mut m = g.clone();
        mutate(&mut m, 0.1, 0.1, &mut RngStream::new(3, "m"));
        let changed = g.flat().iter().zip(m.flat()).filter(|(a, b)| a != b).count();
        // ceil(0.1 * 24) + ceil(0.1 * 18) weights, biases untouched
        assert_eq!(changed, 3 + 2);
    }

    #[test]
    fn evolve_keeps_size_and_elites() {
        let mut p = pop(&[3.0, 1.0, 2.0, 5.0, 0.0, 4.0]);
        let best = p.genomes[3].clone();
        let second = p.genomes[5].clone();
        p.evolve(&mut RngStream::new(4, "e"));
        assert_eq!(p.len(), 6);
        assert!(p.genomes.contains(&best));
        assert!(p.genomes.contains(&second));
        assert_eq!(p.fitness.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 5.0);
    }

    #[test]
    fn single_genome_is_stable() {
        let mut p = pop(&[1.0]);
        let g = p.genomes[0].clone();
        p.evolve(&mut RngStream::new(5, "e"));
        assert_eq!(p.genomes, vec![g]);
    }

    #[test]
    fn inject_replaces_weakest() {
        let mut p = pop(&[3.0, 1.0, 2.0]);
        let rl = genome(99);
        assert_eq!(p.inject_rl(&rl, 7.0), 1);
        assert_eq!(p.genomes[1], rl);
        assert_eq!(p.len(), 3);

        let mut p = pop(&[2.0, 1.0, 1.0]);
        assert_eq!(p.inject_rl(&rl, 0.0), 1);
    }
}
