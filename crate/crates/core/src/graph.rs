//! Undirected attributed graphs in CSR form, edge sets, negative sampling
//! and random walks.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Canonical `u < v` pair key.
#[inline]
pub fn pair_key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub label: u8,
}

/// Labelled node pairs stored as canonical `u < v`, without duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeSet {
    edges: Vec<Edge>,
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set from raw pairs; reversed duplicates collapse, self-pairs
    /// are rejected.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>, label: u8) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut edges = Vec::new();
        for (a, b) in pairs {
            if a == b {
                return Err(Error::Parameter(format!("self-pair ({a}, {a}) in edge set")));
            }
            let (u, v) = pair_key(a, b);
            if seen.insert((u, v)) {
                edges.push(Edge { u, v, label });
            }
        }
        Ok(Self { edges })
    }

    /// Wraps edges that are already canonical and distinct.
    pub(crate) fn from_canonical(edges: Vec<Edge>) -> Self {
        debug_assert!(edges.iter().all(|e| e.u < e.v));
        Self { edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.u, e.v)).collect()
    }

    pub fn key_set(&self) -> HashSet<(usize, usize)> {
        self.edges.iter().map(|e| (e.u, e.v)).collect()
    }

    pub fn max_node(&self) -> Option<usize> {
        self.edges.iter().map(|e| e.v).max()
    }

    /// Union of several sets, keeping the first label seen for a pair.
    pub fn union<'a>(sets: impl IntoIterator<Item = &'a EdgeSet>) -> EdgeSet {
        let mut seen = HashSet::new();
        let mut edges = Vec::new();
        for s in sets {
            for e in &s.edges {
                if seen.insert((e.u, e.v)) {
                    edges.push(*e);
                }
            }
        }
        EdgeSet { edges }
    }
}

/// Undirected simple graph with a dense `N x F` feature matrix.
#[derive(Clone, Debug)]
pub struct Graph<S> {
    offsets: Arc<Vec<usize>>,
    neighbors: Arc<Vec<usize>>,
    features: Arc<Tensor<S>>,
}

impl<S: Scalar> Graph<S> {
    /// Symmetrises and deduplicates `pairs`; self-loops are dropped with a
    /// warning.
    pub fn from_pairs(
        features: Arc<Tensor<S>>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let n = features.rows();
        let mut dropped = 0usize;
        let mut canon = Vec::new();
        for (a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::Dimension(format!(
                    "edge ({a}, {b}) references a node >= {n}"
                )));
            }
            if a == b {
                dropped += 1;
                continue;
            }
            canon.push(pair_key(a, b));
        }
        if dropped > 0 {
            log::warn!("dropped {dropped} self-loop(s)");
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(Self::build(features, &canon))
    }

    fn build(features: Arc<Tensor<S>>, canon: &[(usize, usize)]) -> Self {
        let n = features.rows();
        let mut degree = vec![0usize; n];
        for &(u, v) in canon {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; offsets[n]];
        for &(u, v) in canon {
            neighbors[fill[u]] = v;
            fill[u] += 1;
            neighbors[fill[v]] = u;
            fill[v] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Self {
            offsets: Arc::new(offsets),
            neighbors: Arc::new(neighbors),
            features,
        }
    }

    /// Reads an edge list and a feature matrix (see the README for formats).
    pub fn load(edge_path: impl AsRef<Path>, feature_path: impl AsRef<Path>) -> Result<Self> {
        let features = Arc::new(read_features(feature_path.as_ref())?);
        let pairs = read_edge_list(edge_path.as_ref(), features.rows())?;
        Self::from_pairs(features, pairs)
    }

    /// Same nodes and features, different edges. Used for message-passing
    /// graphs of a split.
    pub fn with_edges(&self, edges: &EdgeSet) -> Result<Self> {
        Self::from_pairs(Arc::clone(&self.features), edges.iter().map(|e| (e.u, e.v)))
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Arc<Tensor<S>> {
        &self.features
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn neighbor_array(&self) -> &[usize] {
        &self.neighbors
    }

    /// Shared CSR arrays, suitable for [`crate::tensor::Var::segment_mean`].
    pub fn csr(&self) -> (Arc<Vec<usize>>, Arc<Vec<usize>>) {
        (Arc::clone(&self.offsets), Arc::clone(&self.neighbors))
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.num_nodes() && j < self.num_nodes() && self.neighbors(i).binary_search(&j).is_ok()
    }

    /// All edges as canonical positives, in ascending `(u, v)` order.
    pub fn edge_set(&self) -> EdgeSet {
        let mut edges = Vec::with_capacity(self.num_edges());
        for u in 0..self.num_nodes() {
            for &v in self.neighbors(u) {
                if u < v {
                    edges.push(Edge { u, v, label: 1 });
                }
            }
        }
        EdgeSet::from_canonical(edges)
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Load {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Writes every edge once as a "u v" line (u < v).
pub fn write_edge_list<S: Scalar>(path: &Path, g: &Graph<S>) -> Result<()> {
    let mut out = format!("# {} nodes, {} edges\n", g.num_nodes(), g.num_edges());
    for e in g.edge_set().iter() {
        out.push_str(&format!("{} {}\n", e.u, e.v));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes a "N F" header and one row per node, values in shortest
/// round-trip form.
pub fn write_features<S: Scalar>(path: &Path, x: &Tensor<S>) -> Result<()> {
    let mut out = format!("{} {}\n", x.rows(), x.cols());
    for r in 0..x.rows() {
        let row: Vec<String> = x.row(r).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Parses "u v" lines; `#` lines and blank lines are skipped.
pub fn read_edge_list(path: &Path, num_nodes: usize) -> Result<Vec<(usize, usize)>> {
    let text = read_to_string(path)?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(load_err(path, i + 1, format!("expected \"u v\", got {line:?}")));
        };
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| load_err(path, i + 1, format!("bad node index {s:?}")))
        };
        let (u, v) = (parse(a)?, parse(b)?);
        if u >= num_nodes || v >= num_nodes {
            return Err(load_err(
                path,
                i + 1,
                format!("node index out of range (N = {num_nodes})"),
            ));
        }
        pairs.push((u, v));
    }
    Ok(pairs)
}

/// Parses a "N F" header followed by N rows of F reals.
pub fn read_features<S: Scalar>(path: &Path) -> Result<Tensor<S>> {
    let text = read_to_string(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| load_err(path, 1, "empty feature file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| load_err(path, hline + 1, "header must be \"N F\""))?;
    let [n, f] = dims[..] else {
        return Err(load_err(path, hline + 1, "header must be \"N F\""));
    };
    let mut data = Vec::with_capacity(n * f);
    let mut rows = 0;
    for (i, line) in lines {
        if rows == n {
            return Err(load_err(path, i + 1, format!("more than {n} feature rows")));
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: S = tok
                .parse()
                .map_err(|_| load_err(path, i + 1, format!("bad real {tok:?}")))?;
            data.push(v);
        }
        if data.len() - before != f {
            return Err(load_err(
                path,
                i + 1,
                format!("expected {f} values, found {}", data.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != n {
        return Err(load_err(
            path,
            text.lines().count(),
            format!("feature-count mismatch: header says {n} rows, found {rows}"),
        ));
    }
    Tensor::new(n, f, data)
}

/// Draws `m` distinct non-edges uniformly; none is in `g` or `exclude`.
pub fn sample_negatives<S: Scalar, R: Rng + ?Sized>(
    g: &Graph<S>,
    m: usize,
    exclude: &EdgeSet,
    rng: &mut R,
) -> Result<EdgeSet> {
    let all: Vec<usize> = (0..g.num_nodes()).collect();
    sample_negatives_between(g, &all, &all, m, exclude, rng)
}

/// Like [`sample_negatives`], but every pair has one endpoint in `left` and
/// the other in `right`. The pools may be identical or disjoint.
pub fn sample_negatives_between<S: Scalar, R: Rng + ?Sized>(
    g: &Graph<S>,
    left: &[usize],
    right: &[usize],
    m: usize,
    exclude: &EdgeSet,
    rng: &mut R,
) -> Result<EdgeSet> {
    if m == 0 {
        return Ok(EdgeSet::new());
    }
    let same_pool = left == right;
    let excluded = exclude.key_set();
    let blocked = |u: usize, v: usize| u == v || g.has_edge(u, v) || excluded.contains(&pair_key(u, v));
    let total_pairs = if same_pool {
        left.len() * left.len().saturating_sub(1) / 2
    } else {
        left.len() * right.len()
    };
    if total_pairs < m {
        return Err(Error::Capacity(format!(
            "{m} negatives requested but only {total_pairs} node pairs exist"
        )));
    }
    // Rejection sampling is fine for sparse graphs; enumerate when the
    // candidate space is small or crowded.
    if total_pairs <= 4 * m || total_pairs <= 20_000 {
        let mut candidates = Vec::new();
        if same_pool {
            for (i, &u) in left.iter().enumerate() {
                for &v in &left[i + 1..] {
                    if !blocked(u, v) {
                        candidates.push(pair_key(u, v));
                    }
                }
            }
        } else {
            for &u in left {
                for &v in right {
                    if !blocked(u, v) {
                        candidates.push(pair_key(u, v));
                    }
                }
            }
            candidates.sort_unstable();
            candidates.dedup();
        }
        if candidates.len() < m {
            return Err(Error::Capacity(format!(
                "{m} negatives requested but only {} eligible non-edges",
                candidates.len()
            )));
        }
        let (chosen, _) = candidates.partial_shuffle(rng, m);
        let edges = chosen
            .iter()
            .map(|&(u, v)| Edge { u, v, label: 0 })
            .collect();
        return Ok(EdgeSet::from_canonical(edges));
    }
    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    let mut attempts = 0usize;
    while edges.len() < m {
        attempts += 1;
        if attempts > 1000 * m + 100_000 {
            return Err(Error::Capacity(format!(
                "could not find {m} negatives after {attempts} draws"
            )));
        }
        let u = left[rng.gen_range(0..left.len())];
        let v = right[rng.gen_range(0..right.len())];
        if blocked(u, v) {
            continue;
        }
        let key = pair_key(u, v);
        if seen.insert(key) {
            edges.push(Edge {
                u: key.0,
                v: key.1,
                label: 0,
            });
        }
    }
    Ok(EdgeSet::from_canonical(edges))
}

/// Uniform random walk of at most `length` steps; the start node is not
/// included. Stops early at a node without neighbours.
pub fn random_walk<S: Scalar, R: Rng + ?Sized>(
    g: &Graph<S>,
    start: usize,
    length: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut walk = Vec::with_capacity(length);
    let mut cur = start;
    for _ in 0..length {
        let nbrs = g.neighbors(cur);
        if nbrs.is_empty() {
            break;
        }
        cur = nbrs[rng.gen_range(0..nbrs.len())];
        walk.push(cur);
    }
    walk
}

/// BFS hop distances from `src`; unreachable nodes get `usize::MAX`.
pub fn bfs_distances<S: Scalar>(g: &Graph<S>, src: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.num_nodes()];
    let mut queue = std::collections::VecDeque::new();
    dist[src] = 0;
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bare(n: usize, pairs: &[(usize, usize)]) -> Graph<f64> {
        Graph::from_pairs(Arc::new(Tensor::zeros(n, 1)), pairs.iter().copied()).unwrap()
    }

    #[test]
    fn triangle_has_degree_two_everywhere() {
        let g = bare(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 3);
        assert!((0..3).all(|i| g.degree(i) == 2));
        assert_eq!(*g.offsets().last().unwrap(), 6);
    }

    #[test]
    fn reversed_duplicates_and_self_loops_collapse() {
        let g = bare(3, &[(0, 1), (1, 0), (2, 2)]);
        assert_eq!(g.num_edges(), 1);
        assert!(g.has_edge(1, 0) && g.has_edge(0, 1));
        assert_eq!(g.degree(2), 0);
    }

    #[test]
    fn path_graph_has_a_unique_negative() {
        let g = bare(3, &[(0, 1), (1, 2)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let neg = sample_negatives(&g, 1, &EdgeSet::new(), &mut rng).unwrap();
        assert_eq!(neg.pairs(), vec![(0, 2)]);
        assert_eq!(neg.edges()[0].label, 0);
    }

    #[test]
    fn complete_graph_cannot_supply_negatives() {
        let g = bare(3, &[(0, 1), (1, 2), (0, 2)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = sample_negatives(&g, 1, &EdgeSet::new(), &mut rng).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
    }

    #[test]
    fn isolated_walk_is_empty_and_forced_walk_alternates() {
        let g = bare(3, &[(0, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(random_walk(&g, 2, 5, &mut rng).is_empty());
        assert_eq!(random_walk(&g, 0, 3, &mut rng), vec![1, 0, 1]);
    }

    #[test]
    fn star_walk_is_uniform_over_leaves() {
        let leaves = 5;
        let pairs: Vec<_> = (1..=leaves).map(|l| (0, l)).collect();
        let g = bare(leaves + 1, &pairs);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 10_000;
        let mut counts = vec![0usize; leaves + 1];
        for _ in 0..trials {
            counts[random_walk(&g, 0, 1, &mut rng)[0]] += 1;
        }
        let p = 1.0 / leaves as f64;
        let mean = trials as f64 * p;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for &c in &counts[1..] {
            assert!((c as f64 - mean).abs() <= 3.0 * sigma, "count {c}, mean {mean}");
        }
    }

    #[test]
    fn edge_file_errors_carry_line_numbers() {
        let dir = std::env::temp_dir().join(format!("llp-graph-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let edges = dir.join("bad.edges");
        fs::write(&edges, "# header\n0 1\n1 x\n").unwrap();
        match read_edge_list(&edges, 3) {
            Err(Error::Load { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&edges, "0 1\n0 7\n").unwrap();
        match read_edge_list(&edges, 3) {
            Err(Error::Load { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("out of range"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let feats = dir.join("bad.features");
        fs::write(&feats, "3 2\n1 2\n3 4\n").unwrap();
        assert!(matches!(read_features::<f64>(&feats), Err(Error::Load { .. })));
        fs::write(&feats, "2 2\n1 2\n3\n").unwrap();
        match read_features::<f64>(&feats) {
            Err(Error::Load { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
