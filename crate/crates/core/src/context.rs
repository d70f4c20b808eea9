//! Per-anchor context sets: nearby nodes from short random walks plus
//! uniformly drawn nodes from the whole graph.

use rand::seq::index;
use rand::Rng;

use crate::graph::{random_walk, Graph};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContextConfig {
    pub walk_len: usize,
    pub num_walks: usize,
    /// Number of uniformly drawn nodes.
    pub q: usize,
}

impl ContextConfig {
    /// Upper bound on the number of nearby nodes.
    pub fn p(&self) -> usize {
        self.walk_len * self.num_walks
    }
}

impl Default for ContextConfig {
    fn default() -> Self {
        Self {
            walk_len: 3,
            num_walks: 3,
            q: 180,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextSet {
    pub anchor: usize,
    /// Distinct walk nodes in first-visit order, anchor removed.
    pub nearby: Vec<usize>,
    /// Distinct uniform nodes, anchor removed.
    pub random: Vec<usize>,
    /// `nearby` followed by the members of `random` not already present.
    pub members: Vec<usize>,
}

impl ContextSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn sample_context<S: Scalar, R: Rng + ?Sized>(
    g: &Graph<S>,
    v: usize,
    cfg: &ContextConfig,
    rng: &mut R,
) -> ContextSet {
    sample_context_from(g, v, cfg, None, rng)
}

/// Like [`sample_context`], but uniform nodes come from `pool` (all nodes
/// when `None`). The anchor is never drawn.
pub fn sample_context_from<S: Scalar, R: Rng + ?Sized>(
    g: &Graph<S>,
    v: usize,
    cfg: &ContextConfig,
    pool: Option<&[usize]>,
    rng: &mut R,
) -> ContextSet {
    let n = g.num_nodes();
    let mut nearby = Vec::with_capacity(cfg.p());
    for _ in 0..cfg.num_walks {
        for u in random_walk(g, v, cfg.walk_len, rng) {
            if u != v && !nearby.contains(&u) {
                nearby.push(u);
            }
        }
    }
    let random: Vec<usize> = match pool {
        None => {
            // uniform over the n - 1 other nodes, without replacement
            let q = cfg.q.min(n.saturating_sub(1));
            index::sample(rng, n - 1, q)
                .into_iter()
                .map(|i| if i >= v { i + 1 } else { i })
                .collect()
        }
        Some(pool) => {
            let others: Vec<usize> = pool.iter().copied().filter(|&u| u != v).collect();
            let q = cfg.q.min(others.len());
            index::sample(rng, others.len(), q).into_iter().map(|i| others[i]).collect()
        }
    };
    let mut members = nearby.clone();
    let mut seen = vec![false; n];
    for &u in &nearby {
        seen[u] = true;
    }
    members.extend(random.iter().copied().filter(|&u| !seen[u]));
    ContextSet {
        anchor: v,
        nearby,
        random,
        members,
    }
}

/// Contexts for `anchors`, drawn sequentially from one stream.
pub fn sample_contexts<S: Scalar, R: Rng + ?Sized>(
    g: &Graph<S>,
    anchors: &[usize],
    cfg: &ContextConfig,
    pool: Option<&[usize]>,
    rng: &mut R,
) -> Vec<ContextSet> {
    anchors
        .iter()
        .map(|&v| sample_context_from(g, v, cfg, pool, rng))
        .collect()
}
