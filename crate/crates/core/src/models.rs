//! GraphSAGE teacher encoder, MLP student encoder and the Hadamard-product
//! link decoder.
//!
//! Parameters live in plain structs; a training step binds them onto a
//! [`Tape`] (`bind`), runs the forward pass through the returned `*Vars`
//! handle, and copies gradients back in declared parameter order.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;
use crate::tensor::{Tape, Tensor, Var};

/// Forward-pass mode: evaluation, or training with inverted dropout.
pub enum Phase<'a> {
    Eval,
    Train {
        dropout: f64,
        rng: &'a mut dyn RngCore,
    },
}

impl Phase<'_> {
    fn apply<'t, S: Scalar>(&mut self, x: Var<'t, S>) -> Result<Var<'t, S>> {
        match self {
            Phase::Eval => Ok(x),
            Phase::Train { dropout, rng } => x.dropout(*dropout, &mut **rng),
        }
    }
}

/// Anything holding trainable tensors in a fixed declared order.
pub trait Parameterized<S: Scalar> {
    fn params(&self) -> Vec<&Tensor<S>>;
    fn params_mut(&mut self) -> Vec<&mut Tensor<S>>;

    fn num_params(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    fn is_finite(&self) -> bool {
        self.params().iter().all(|p| p.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Linear<S> {
    /// `in x out`
    pub weight: Tensor<S>,
    /// `1 x out`
    pub bias: Tensor<S>,
}

impl<S: Scalar> Linear<S> {
    pub fn new<R: Rng + ?Sized>(input: usize, output: usize, rng: &mut R) -> Self {
        Self {
            weight: Tensor::xavier_uniform(input, output, rng),
            bias: Tensor::zeros(1, output),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn bind<'t>(&self, tape: &'t Tape<S>) -> LinearVars<'t, S> {
        LinearVars {
            weight: tape.leaf(&self.weight),
            bias: tape.leaf(&self.bias),
        }
    }
}

#[derive(Clone, Copy)]
pub struct LinearVars<'t, S: Scalar> {
    pub weight: Var<'t, S>,
    pub bias: Var<'t, S>,
}

impl<'t, S: Scalar> LinearVars<'t, S> {
    pub fn apply(&self, x: Var<'t, S>) -> Result<Var<'t, S>> {
        x.matmul(self.weight)?.add_row(self.bias)
    }
}

// ---------------------------------------------------------------------------
// Teacher

#[derive(Clone, Debug, PartialEq)]
pub struct SageLayer<S> {
    pub w_self: Tensor<S>,
    pub w_neigh: Tensor<S>,
    pub bias: Tensor<S>,
}

/// Mean-aggregator GraphSAGE: `h' = h W_self + mean_{j in N(i)} h_j W_neigh + b`
/// with ReLU between layers. Isolated nodes aggregate the zero vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SageParams<S> {
    pub layers: Vec<SageLayer<S>>,
}

impl<S: Scalar> SageParams<S> {
    pub fn new<R: Rng + ?Sized>(in_dim: usize, hidden: usize, num_layers: usize, rng: &mut R) -> Self {
        let layers = (0..num_layers)
            .map(|l| {
                let input = if l == 0 { in_dim } else { hidden };
                SageLayer {
                    w_self: Tensor::xavier_uniform(input, hidden, rng),
                    w_neigh: Tensor::xavier_uniform(input, hidden, rng),
                    bias: Tensor::zeros(1, hidden),
                }
            })
            .collect();
        Self { layers }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].w_self.rows()];
        d.extend(self.layers.iter().map(|l| l.w_self.cols()));
        d
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.w_self.cols())
    }

    pub fn bind<'t>(&self, tape: &'t Tape<S>) -> SageVars<'t, S> {
        SageVars {
            layers: self
                .layers
                .iter()
                .map(|l| [tape.leaf(&l.w_self), tape.leaf(&l.w_neigh), tape.leaf(&l.bias)])
                .collect(),
        }
    }

    /// Embeddings of every node of `g`.
    pub fn embed_all(&self, g: &Graph<S>) -> Result<Tensor<S>> {
        let tape = Tape::new();
        let vars = self.bind(&tape);
        let h = vars.forward(&tape, g, &mut Phase::Eval)?;
        Ok((*h.value()).clone())
    }

    /// Embeddings of `nodes` only, computed over their L-hop neighbourhood.
    /// Rows follow the order of `nodes`.
    pub fn embed_nodes(&self, g: &Graph<S>, nodes: &[usize]) -> Result<Tensor<S>> {
        let tape = Tape::new();
        let vars = self.bind(&tape);
        let h = vars.forward_subset(&tape, g, nodes)?;
        Ok((*h.value()).clone())
    }
}

impl<S: Scalar> Parameterized<S> for SageParams<S> {
    fn params(&self) -> Vec<&Tensor<S>> {
        self.layers
            .iter()
            .flat_map(|l| [&l.w_self, &l.w_neigh, &l.bias])
            .collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<S>> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.w_self, &mut l.w_neigh, &mut l.bias])
            .collect()
    }
}

pub struct SageVars<'t, S: Scalar> {
    layers: Vec<[Var<'t, S>; 3]>,
}

/// Message-passing block: output rows are `targets`, input rows are the
/// previous layer's node list.
struct Block {
    /// Positions of the targets in the input rows; `None` means identity.
    self_rows: Option<Arc<Vec<usize>>>,
    offsets: Arc<Vec<usize>>,
    members: Arc<Vec<usize>>,
}

impl<'t, S: Scalar> SageVars<'t, S> {
    pub fn leaves(&self) -> Vec<Var<'t, S>> {
        self.layers.iter().flatten().copied().collect()
    }

    /// Full-graph forward pass; one output row per node.
    pub fn forward(&self, tape: &'t Tape<S>, g: &Graph<S>, phase: &mut Phase<'_>) -> Result<Var<'t, S>> {
        let (offsets, members) = g.csr();
        let blocks: Vec<Block> = (0..self.layers.len())
            .map(|_| Block {
                self_rows: None,
                offsets: Arc::clone(&offsets),
                members: Arc::clone(&members),
            })
            .collect();
        let x = tape.constant_shared(Arc::clone(g.features()));
        self.run(x, &blocks, phase)
    }

    /// Forward pass restricted to the receptive field of `nodes`.
    pub fn forward_subset(&self, tape: &'t Tape<S>, g: &Graph<S>, nodes: &[usize]) -> Result<Var<'t, S>> {
        if let Some(&bad) = nodes.iter().find(|&&v| v >= g.num_nodes()) {
            return Err(Error::Dimension(format!("node {bad} of {}", g.num_nodes())));
        }
        // frontier[l] lists the nodes whose layer-l state is needed; the
        // targets of each block come first in its input list.
        let depth = self.layers.len();
        let mut frontiers: Vec<Vec<usize>> = vec![nodes.to_vec()];
        for _ in 0..depth {
            let cur = frontiers.last().unwrap();
            let mut pos: HashMap<usize, usize> = HashMap::with_capacity(cur.len() * 4);
            let mut next = Vec::with_capacity(cur.len() * 4);
            for &v in cur {
                if let std::collections::hash_map::Entry::Vacant(e) = pos.entry(v) {
                    e.insert(next.len());
                    next.push(v);
                }
            }
            for &v in cur {
                for &u in g.neighbors(v) {
                    if let std::collections::hash_map::Entry::Vacant(e) = pos.entry(u) {
                        e.insert(next.len());
                        next.push(u);
                    }
                }
            }
            frontiers.push(next);
        }
        // block for layer l maps frontiers[depth - l] -> frontiers[depth - l - 1]
        let mut blocks = Vec::with_capacity(depth);
        for l in 0..depth {
            let input = &frontiers[depth - l];
            let targets = &frontiers[depth - l - 1];
            let pos: HashMap<usize, usize> = input.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let mut offsets = Vec::with_capacity(targets.len() + 1);
            let mut members = Vec::new();
            offsets.push(0);
            for &v in targets {
                members.extend(g.neighbors(v).iter().map(|u| pos[u]));
                offsets.push(members.len());
            }
            blocks.push(Block {
                self_rows: Some(Arc::new(targets.iter().map(|v| pos[v]).collect())),
                offsets: Arc::new(offsets),
                members: Arc::new(members),
            });
        }
        let x = g.features().gather_rows(&frontiers[depth]);
        let x = tape.constant(x);
        self.run(x, &blocks, &mut Phase::Eval)
    }

    fn run(&self, mut h: Var<'t, S>, blocks: &[Block], phase: &mut Phase<'_>) -> Result<Var<'t, S>> {
        let first = self.layers[0][0].shape();
        if h.shape()[1] != first[0] {
            return Err(Error::Dimension(format!(
                "feature width {} but layer 0 expects {}",
                h.shape()[1],
                first[0]
            )));
        }
        let last = self.layers.len() - 1;
        for (l, ([w_self, w_neigh, bias], block)) in self.layers.iter().zip(blocks).enumerate() {
            let own = match &block.self_rows {
                None => h,
                Some(rows) => h.gather_rows(Arc::clone(rows))?,
            };
            // linear maps commute with the mean, so transform before aggregating
            let neigh = h
                .matmul(*w_neigh)?
                .segment_mean(Arc::clone(&block.offsets), Arc::clone(&block.members))?;
            h = own.matmul(*w_self)?.add(neigh)?.add_row(*bias)?;
            if l < last {
                h = phase.apply(h.relu())?;
            }
        }
        Ok(h)
    }
}

// ---------------------------------------------------------------------------
// Student

/// Graph-free encoder: one ReLU MLP applied to each node's features.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams<S> {
    pub layers: Vec<Linear<S>>,
}

impl<S: Scalar> MlpParams<S> {
    pub fn new<R: Rng + ?Sized>(in_dim: usize, hidden: usize, num_layers: usize, rng: &mut R) -> Self {
        let layers = (0..num_layers)
            .map(|l| Linear::new(if l == 0 { in_dim } else { hidden }, hidden, rng))
            .collect();
        Self { layers }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].input_dim()];
        d.extend(self.layers.iter().map(|l| l.output_dim()));
        d
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.output_dim())
    }

    pub fn bind<'t>(&self, tape: &'t Tape<S>) -> MlpVars<'t, S> {
        MlpVars {
            layers: self.layers.iter().map(|l| l.bind(tape)).collect(),
        }
    }

    /// Embeddings for the given feature rows.
    pub fn embed_rows(&self, x: &Tensor<S>) -> Result<Tensor<S>> {
        let tape = Tape::new();
        let vars = self.bind(&tape);
        let h = vars.forward(tape.constant(x.clone()), &mut Phase::Eval)?;
        Ok((*h.value()).clone())
    }

    pub fn embed_all(&self, g: &Graph<S>) -> Result<Tensor<S>> {
        let tape = Tape::new();
        let vars = self.bind(&tape);
        let h = vars.forward(tape.constant_shared(Arc::clone(g.features())), &mut Phase::Eval)?;
        Ok((*h.value()).clone())
    }

    pub fn embed_nodes(&self, g: &Graph<S>, nodes: &[usize]) -> Result<Tensor<S>> {
        if let Some(&bad) = nodes.iter().find(|&&v| v >= g.num_nodes()) {
            return Err(Error::Dimension(format!("node {bad} of {}", g.num_nodes())));
        }
        self.embed_rows(&g.features().gather_rows(nodes))
    }
}

impl<S: Scalar> Parameterized<S> for MlpParams<S> {
    fn params(&self) -> Vec<&Tensor<S>> {
        self.layers.iter().flat_map(|l| [&l.weight, &l.bias]).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<S>> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
            .collect()
    }
}

pub struct MlpVars<'t, S: Scalar> {
    layers: Vec<LinearVars<'t, S>>,
}

impl<'t, S: Scalar> MlpVars<'t, S> {
    pub fn leaves(&self) -> Vec<Var<'t, S>> {
        self.layers.iter().flat_map(|l| [l.weight, l.bias]).collect()
    }

    pub fn forward(&self, x: Var<'t, S>, phase: &mut Phase<'_>) -> Result<Var<'t, S>> {
        let expect = self.layers[0].weight.shape()[0];
        if x.shape()[1] != expect {
            return Err(Error::Dimension(format!(
                "feature width {} but layer 0 expects {expect}",
                x.shape()[1]
            )));
        }
        let last = self.layers.len() - 1;
        let mut h = x;
        for (l, layer) in self.layers.iter().enumerate() {
            h = layer.apply(h)?;
            if l < last {
                h = phase.apply(h.relu())?;
            }
        }
        Ok(h)
    }
}

// ---------------------------------------------------------------------------
// Decoder

/// `sigmoid(MLP(h_u * h_v))` with a hidden ReLU layer and a scalar output.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderParams<S> {
    pub layers: Vec<Linear<S>>,
}

impl<S: Scalar> DecoderParams<S> {
    pub fn new<R: Rng + ?Sized>(embed_dim: usize, hidden: usize, num_layers: usize, rng: &mut R) -> Self {
        let num_layers = num_layers.max(1);
        let layers = (0..num_layers)
            .map(|l| {
                let input = if l == 0 { embed_dim } else { hidden };
                let output = if l + 1 == num_layers { 1 } else { hidden };
                Linear::new(input, output, rng)
            })
            .collect();
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.layers.iter().map(|l| l.output_dim()));
        d
    }

    pub fn bind<'t>(&self, tape: &'t Tape<S>) -> DecoderVars<'t, S> {
        DecoderVars {
            layers: self.layers.iter().map(|l| l.bind(tape)).collect(),
        }
    }

    /// Link probabilities for pairs of embedding rows (no tape kept).
    pub fn score(&self, h_u: &Tensor<S>, h_v: &Tensor<S>) -> Result<Vec<S>> {
        let tape = Tape::new();
        let vars = self.bind(&tape);
        let y = vars.decode(
            tape.constant(h_u.clone()),
            tape.constant(h_v.clone()),
            &mut Phase::Eval,
        )?;
        Ok(y.value().data().to_vec())
    }

    /// Scores `pairs` against a full embedding table, in chunks.
    pub fn score_pairs(&self, h: &Tensor<S>, pairs: &[(usize, usize)]) -> Result<Vec<S>> {
        let mut out = Vec::with_capacity(pairs.len());
        for chunk in pairs.chunks(8192) {
            let us: Vec<usize> = chunk.iter().map(|p| p.0).collect();
            let vs: Vec<usize> = chunk.iter().map(|p| p.1).collect();
            out.extend(self.score(&h.gather_rows(&us), &h.gather_rows(&vs))?);
        }
        Ok(out)
    }
}

impl<S: Scalar> Parameterized<S> for DecoderParams<S> {
    fn params(&self) -> Vec<&Tensor<S>> {
        self.layers.iter().flat_map(|l| [&l.weight, &l.bias]).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<S>> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
            .collect()
    }
}

pub struct DecoderVars<'t, S: Scalar> {
    layers: Vec<LinearVars<'t, S>>,
}

impl<'t, S: Scalar> DecoderVars<'t, S> {
    pub fn leaves(&self) -> Vec<Var<'t, S>> {
        self.layers.iter().flat_map(|l| [l.weight, l.bias]).collect()
    }

    /// Pre-sigmoid scores, `[n, 1]`.
    pub fn logits(&self, h_u: Var<'t, S>, h_v: Var<'t, S>, phase: &mut Phase<'_>) -> Result<Var<'t, S>> {
        let expect = self.layers[0].weight.shape()[0];
        if h_u.shape()[1] != expect {
            return Err(Error::Dimension(format!(
                "embedding width {} but decoder expects {expect}",
                h_u.shape()[1]
            )));
        }
        let last = self.layers.len() - 1;
        let mut z = h_u.mul(h_v)?;
        for (l, layer) in self.layers.iter().enumerate() {
            z = layer.apply(z)?;
            if l < last {
                z = phase.apply(z.relu())?;
            }
        }
        Ok(z)
    }

    /// Link probabilities in (0, 1), `[n, 1]`.
    pub fn decode(&self, h_u: Var<'t, S>, h_v: Var<'t, S>, phase: &mut Phase<'_>) -> Result<Var<'t, S>> {
        Ok(self.logits(h_u, h_v, phase)?.sigmoid())
    }

    /// Probabilities for index pairs into an embedding table var.
    pub fn decode_pairs(
        &self,
        h: Var<'t, S>,
        us: Arc<Vec<usize>>,
        vs: Arc<Vec<usize>>,
        phase: &mut Phase<'_>,
    ) -> Result<Var<'t, S>> {
        self.decode(h.gather_rows(us)?, h.gather_rows(vs)?, phase)
    }
}

// ---------------------------------------------------------------------------
// Whole link predictors and checkpoints

#[derive(Clone, Debug, PartialEq)]
pub enum Encoder<S> {
    Sage(SageParams<S>),
    Mlp(MlpParams<S>),
}

impl<S: Scalar> Encoder<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            Encoder::Sage(_) => "sage",
            Encoder::Mlp(_) => "mlp",
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        match self {
            Encoder::Sage(p) => p.dims(),
            Encoder::Mlp(p) => p.dims(),
        }
    }

    /// Embeddings of every node; the MLP ignores the edges of `g`.
    pub fn embed_all(&self, g: &Graph<S>) -> Result<Tensor<S>> {
        match self {
            Encoder::Sage(p) => p.embed_all(g),
            Encoder::Mlp(p) => p.embed_all(g),
        }
    }

    pub fn embed_nodes(&self, g: &Graph<S>, nodes: &[usize]) -> Result<Tensor<S>> {
        match self {
            Encoder::Sage(p) => p.embed_nodes(g, nodes),
            Encoder::Mlp(p) => p.embed_nodes(g, nodes),
        }
    }

    fn params(&self) -> Vec<&Tensor<S>> {
        match self {
            Encoder::Sage(p) => p.params(),
            Encoder::Mlp(p) => p.params(),
        }
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<S>> {
        match self {
            Encoder::Sage(p) => p.params_mut(),
            Encoder::Mlp(p) => p.params_mut(),
        }
    }
}

/// Encoder plus decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkModel<S> {
    pub encoder: Encoder<S>,
    pub decoder: DecoderParams<S>,
    pub seed: u64,
}

impl<S: Scalar> Parameterized<S> for LinkModel<S> {
    fn params(&self) -> Vec<&Tensor<S>> {
        let mut p = self.encoder.params();
        p.extend(self.decoder.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<S>> {
        let mut p = self.encoder.params_mut();
        p.extend(self.decoder.params_mut());
        p
    }
}

impl<S: Scalar> LinkModel<S> {
    /// Probabilities for `pairs` using message passing over `g` (ignored by
    /// an MLP encoder).
    pub fn score_pairs(&self, g: &Graph<S>, pairs: &[(usize, usize)]) -> Result<Vec<S>> {
        let h = self.encoder.embed_all(g)?;
        self.decoder.score_pairs(&h, pairs)
    }

    /// End-to-end scoring of one batch: embeds just the endpoints, then
    /// decodes.
    pub fn score_batch(&self, g: &Graph<S>, pairs: &[(usize, usize)]) -> Result<Vec<S>> {
        let mut index: HashMap<usize, usize> = HashMap::with_capacity(pairs.len() * 2);
        let mut nodes = Vec::with_capacity(pairs.len() * 2);
        for &(u, v) in pairs {
            for w in [u, v] {
                index.entry(w).or_insert_with(|| {
                    nodes.push(w);
                    nodes.len() - 1
                });
            }
        }
        let h = self.encoder.embed_nodes(g, &nodes)?;
        let local: Vec<(usize, usize)> = pairs.iter().map(|(u, v)| (index[u], index[v])).collect();
        self.decoder.score_pairs(&h, &local)
    }

    /// Text checkpoint: a key/value header and one parameter per line in
    /// declared order.
    pub fn to_checkpoint(&self) -> String {
        let mut out = String::new();
        let join = |d: &[usize]| d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "# llp checkpoint v1");
        let _ = writeln!(out, "kind = {}", self.encoder.kind());
        let _ = writeln!(out, "scalar = {}", S::NAME);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "encoder_dims = {}", join(&self.encoder.dims()));
        let _ = writeln!(out, "decoder_dims = {}", join(&self.decoder.dims()));
        let _ = writeln!(out, "params = {}", self.num_params());
        for p in self.params() {
            for v in p.data() {
                let _ = writeln!(out, "{v:e}");
            }
        }
        out
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Config(format!("checkpoint: {m}"));
        let mut lines = text.lines();
        if lines.next() != Some("# llp checkpoint v1") {
            return Err(bad("missing header"));
        }
        let mut header = HashMap::new();
        for _ in 0..6 {
            let line = lines.next().ok_or_else(|| bad("truncated header"))?;
            let (k, v) = line.split_once(" = ").ok_or_else(|| bad("malformed header"))?;
            header.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| header.get(k).cloned().ok_or_else(|| bad(&format!("no {k}")));
        let dims = |k: &str| -> Result<Vec<usize>> {
            get(k)?
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad(&format!("bad {k}"))))
                .collect()
        };
        if get("scalar")? != S::NAME {
            return Err(bad("scalar type differs"));
        }
        let enc_dims = dims("encoder_dims")?;
        let dec_dims = dims("decoder_dims")?;
        if enc_dims.len() < 2 || dec_dims.len() < 2 || dec_dims[0] != *enc_dims.last().unwrap() {
            return Err(bad("inconsistent layer sizes"));
        }
        let seed: u64 = get("seed")?.parse().map_err(|_| bad("bad seed"))?;
        let hidden = enc_dims[1];
        if enc_dims[1..].iter().any(|&d| d != hidden) {
            return Err(bad("encoder hidden widths must be uniform"));
        }
        // shapes only; values are overwritten below
        let mut rng = rand::rngs::mock::StepRng::new(0, 0);
        let layers = enc_dims.len() - 1;
        let encoder = match get("kind")?.as_str() {
            "sage" => Encoder::Sage(SageParams::new(enc_dims[0], hidden, layers, &mut rng)),
            "mlp" => Encoder::Mlp(MlpParams::new(enc_dims[0], hidden, layers, &mut rng)),
            other => return Err(bad(&format!("unknown kind {other}"))),
        };
        let dec_hidden = if dec_dims.len() > 2 { dec_dims[1] } else { 1 };
        let decoder = DecoderParams::new(dec_dims[0], dec_hidden, dec_dims.len() - 1, &mut rng);
        let mut model = LinkModel {
            encoder,
            decoder,
            seed,
        };
        if model.decoder.dims() != dec_dims {
            return Err(bad("unsupported decoder shape"));
        }
        let count: usize = get("params")?.parse().map_err(|_| bad("bad params count"))?;
        if count != model.num_params() {
            return Err(bad("parameter count does not match layer sizes"));
        }
        let mut values = lines.filter(|l| !l.trim().is_empty()).map(|l| {
            l.trim()
                .parse::<S>()
                .map_err(|_| bad(&format!("bad value {l:?}")))
        });
        for p in model.params_mut() {
            for slot in p.data_mut() {
                *slot = values.next().ok_or_else(|| bad("too few values"))??;
            }
        }
        if values.next().is_some() {
            return Err(bad("too many values"));
        }
        Ok(model)
    }
}
