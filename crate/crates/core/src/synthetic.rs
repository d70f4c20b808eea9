//! Seeded synthetic graphs: a stochastic block model with tunable feature
//! informativeness, and a uniform random graph for latency measurements.

use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{pair_key, Graph};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SbmConfig {
    pub nodes: usize,
    pub blocks: usize,
    /// Edge probability inside a block.
    pub p_in: f64,
    /// Edge probability across blocks.
    pub p_out: f64,
    pub features: usize,
    /// Scale of the block centroid added to unit Gaussian noise; 0 gives
    /// features that carry no block information.
    pub signal: f64,
    pub seed: u64,
}

impl Default for SbmConfig {
    /// The bundled 200-node dataset.
    fn default() -> Self {
        Self {
            nodes: 200,
            blocks: 4,
            p_in: 0.15,
            p_out: 0.01,
            features: 16,
            signal: 0.5,
            seed: 7,
        }
    }
}

impl SbmConfig {
    pub fn block_of(&self, v: usize) -> usize {
        v * self.blocks / self.nodes
    }
}

fn gaussian<S: Scalar>(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Tensor<S> {
    Tensor::from_fn(rows, cols, |_, _| S::lit(rng.sample::<f64, _>(StandardNormal)))
}

/// Planted-partition graph over contiguous equal blocks. Features are
/// `signal * centroid(block) + N(0, I)` with unit-norm random centroids.
pub fn sbm<S: Scalar>(cfg: &SbmConfig) -> Result<Graph<S>> {
    if cfg.nodes == 0 || cfg.blocks == 0 || cfg.blocks > cfg.nodes || cfg.features == 0 {
        return Err(Error::Parameter(format!("invalid block model {cfg:?}")));
    }
    for p in [cfg.p_in, cfg.p_out] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parameter(format!("probability {p} not in [0, 1]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pairs = Vec::new();
    for u in 0..cfg.nodes {
        for v in u + 1..cfg.nodes {
            let p = if cfg.block_of(u) == cfg.block_of(v) { cfg.p_in } else { cfg.p_out };
            if rng.gen_bool(p) {
                pairs.push((u, v));
            }
        }
    }
    let centroids: Vec<Vec<f64>> = (0..cfg.blocks)
        .map(|_| {
            let c: Vec<f64> = (0..cfg.features).map(|_| rng.sample(StandardNormal)).collect();
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            c.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    let mut x = gaussian::<S>(cfg.nodes, cfg.features, &mut rng);
    for v in 0..cfg.nodes {
        let c = &centroids[cfg.block_of(v)];
        for (xi, ci) in x.row_mut(v).iter_mut().zip(c) {
            *xi += S::lit(cfg.signal * ci);
        }
    }
    Graph::from_pairs(Arc::new(x), pairs)
}

/// `nodes * avg_degree / 2` distinct uniform edges and Gaussian features.
pub fn random_graph<S: Scalar>(nodes: usize, avg_degree: f64, features: usize, seed: u64) -> Result<Graph<S>> {
    if nodes < 2 || features == 0 || !(avg_degree >= 0.0) {
        return Err(Error::Parameter("random graph needs >= 2 nodes and features".into()));
    }
    let m = (nodes as f64 * avg_degree / 2.0).round() as usize;
    if m > nodes * (nodes - 1) / 2 {
        return Err(Error::Capacity(format!("{m} edges do not fit in {nodes} nodes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut pairs = Vec::with_capacity(m);
    while pairs.len() < m {
        let (u, v) = (rng.gen_range(0..nodes), rng.gen_range(0..nodes));
        if u != v && seen.insert(pair_key(u, v)) {
            pairs.push((u, v));
        }
    }
    let x = gaussian::<S>(nodes, features, &mut rng);
    Graph::from_pairs(Arc::new(x), pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sbm_is_assortative_and_seeded() {
        let cfg = SbmConfig::default();
        let g: Graph<f64> = sbm(&cfg).unwrap();
        let (mut inside, mut across) = (0, 0);
        for e in g.edge_set().iter() {
            if cfg.block_of(e.u) == cfg.block_of(e.v) {
                inside += 1;
            } else {
                across += 1;
            }
        }
        assert!(inside > 3 * across);
        let again: Graph<f64> = sbm(&cfg).unwrap();
        assert_eq!(g.edge_set(), again.edge_set());
        assert_eq!(g.features().data(), again.features().data());
    }

    #[test]
    fn random_graph_degree() {
        let g: Graph<f64> = random_graph(1000, 10.0, 4, 1).unwrap();
        assert_eq!(g.num_edges(), 5000);
        assert_eq!(g.num_features(), 4);
    }
}
