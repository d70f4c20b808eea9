//! Training loops for the SAGE teacher and the MLP students (plain,
//! logit-matched, representation-matched and relationally distilled), with
//! early stopping on validation Hits@K.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::context::{sample_contexts, ContextConfig, ContextSet};
use crate::error::{Error, Result};
use crate::eval::{hits_at_k, ScoreSet};
use crate::graph::{sample_negatives_between, EdgeSet, Graph};
use crate::losses::{
    loss_dist, loss_logit_match, loss_rank, loss_repr_match, loss_sup, loss_total, LossConfig, LossParts, Segments,
};
use crate::models::{DecoderParams, Encoder, LinkModel, Linear, MlpParams, Parameterized, Phase, SageParams};
use crate::scalar::Scalar;
use crate::splits::Split;
use crate::tensor::{Adam, AdamConfig, Tape, Tensor, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelConfig {
    /// Teacher embedding width D.
    pub hidden: usize,
    pub layers: usize,
    /// Student width is `hidden * student_width_mult`.
    pub student_width_mult: usize,
    pub decoder_layers: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden: 256,
            layers: 2,
            student_width_mult: 1,
            decoder_layers: 2,
        }
    }
}

impl ModelConfig {
    pub fn student_hidden(&self) -> usize {
        self.hidden * self.student_width_mult
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub patience: usize,
    pub lr: f64,
    pub dropout: f64,
    /// Positive edges per step; each comes with one sampled negative.
    pub edge_batch: usize,
    /// Anchors per step for relational distillation.
    pub anchor_batch: usize,
    /// Anchors visited per epoch; 0 means every training node.
    pub anchors_per_epoch: usize,
    pub seed: u64,
    /// K of the validation Hits@K used for early stopping.
    pub eval_k: usize,
    pub loss: LossConfig,
    pub context: ContextConfig,
    pub model: ModelConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 300,
            patience: 30,
            lr: 1e-3,
            dropout: 0.0,
            edge_batch: 1024,
            anchor_batch: 256,
            anchors_per_epoch: 0,
            seed: 0,
            eval_k: 20,
            loss: LossConfig::default(),
            context: ContextConfig::default(),
            model: ModelConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if self.max_epochs == 0 {
            return bad("max_epochs must be >= 1".into());
        }
        if self.patience > self.max_epochs {
            return bad(format!("patience {} exceeds max_epochs {}", self.patience, self.max_epochs));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate {} must be > 0", self.lr));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} not in [0, 1)", self.dropout));
        }
        if self.edge_batch == 0 || self.anchor_batch == 0 {
            return bad("batch sizes must be positive".into());
        }
        if self.eval_k == 0 {
            return bad("eval_k must be >= 1".into());
        }
        let m = &self.model;
        if m.hidden == 0 || m.layers == 0 || m.student_width_mult == 0 || m.decoder_layers == 0 {
            return bad("model sizes must be positive".into());
        }
        self.loss.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Mlp,
    Logit,
    Repr,
    Llp,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Mlp, Method::Logit, Method::Repr, Method::Llp];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Mlp => "mlp",
            Method::Logit => "logit",
            Method::Repr => "repr",
            Method::Llp => "llp",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::Usage(format!("unknown method {s:?} (mlp|logit|repr|llp)")))
    }
}

#[derive(Clone, Debug)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    /// Validation Hits@K as a fraction; NaN without a validation set.
    pub val: f64,
    pub seconds: f64,
}

impl PartialEq for EpochRecord {
    fn eq(&self, other: &Self) -> bool {
        self.epoch == other.epoch && self.loss.to_bits() == other.loss.to_bits() && self.val.to_bits() == other.val.to_bits()
    }
}

/// Training history. Equality ignores wall-clock times.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub kind: String,
    pub metric: String,
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val: f64,
    /// Where the best checkpoint was written, if anywhere.
    pub checkpoint: Option<String>,
    pub seconds: f64,
}

impl PartialEq for RunRecord {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.metric == other.metric
            && self.epochs == other.epochs
            && self.best_epoch == other.best_epoch
            && self.best_val.to_bits() == other.best_val.to_bits()
            && self.checkpoint == other.checkpoint
    }
}

impl RunRecord {
    /// One `epoch loss val` line per epoch after a key/value header. Wall
    /// time is left out so that reruns produce identical text; see
    /// [`RunRecord::timing_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# kind = {}", self.kind);
        let _ = writeln!(out, "# metric = {}", self.metric);
        let _ = writeln!(out, "# best_epoch = {}", self.best_epoch);
        let _ = writeln!(out, "# best_val = {:e}", self.best_val);
        if let Some(c) = &self.checkpoint {
            let _ = writeln!(out, "# checkpoint = {c}");
        }
        let _ = writeln!(out, "# epoch loss val");
        for e in &self.epochs {
            let _ = writeln!(out, "{} {:e} {:e}", e.epoch, e.loss, e.val);
        }
        out
    }

    /// `epoch seconds` lines plus the total.
    pub fn timing_text(&self) -> String {
        let mut out = format!("# total = {:.3}\n", self.seconds);
        for e in &self.epochs {
            let _ = writeln!(out, "{} {:.3}", e.epoch, e.seconds);
        }
        out
    }
}

/// A trained model with its history.
#[derive(Clone, Debug)]
pub struct Trained<S> {
    pub model: LinkModel<S>,
    pub record: RunRecord,
}

/// Independent random streams of one run.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

const INIT: u64 = 0;
const DATA: u64 = 1;
const DROPOUT: u64 = 2;
const CONTEXT: u64 = 3;

fn edge_pairs(set: &EdgeSet) -> Vec<(usize, usize)> {
    set.iter().map(|e| (e.u, e.v)).collect()
}

/// Fresh positives order plus one negative per positive, avoiding edges of
/// the training graph and nodes outside `nodes`.
fn epoch_edges<S: Scalar>(
    g: &Graph<S>,
    nodes: &[usize],
    train_pos: &EdgeSet,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
    let mut pos = edge_pairs(train_pos);
    pos.shuffle(rng);
    let neg = sample_negatives_between(g, nodes, nodes, pos.len(), &EdgeSet::new(), rng)?;
    let mut neg = edge_pairs(&neg);
    neg.shuffle(rng);
    Ok((pos, neg))
}

fn validation_hits<S: Scalar>(
    h: &Tensor<S>,
    decoder: &DecoderParams<S>,
    val_pos: &[(usize, usize)],
    val_neg: &[(usize, usize)],
    k: usize,
) -> Result<f64> {
    if val_pos.is_empty() || val_neg.is_empty() {
        return Ok(f64::NAN);
    }
    let s = ScoreSet {
        pos: decoder.score_pairs(h, val_pos)?.into_iter().map(|v| v.as_f64()).collect(),
        neg: decoder.score_pairs(h, val_neg)?.into_iter().map(|v| v.as_f64()).collect(),
    };
    hits_at_k(&s, k)
}

trait Learner<S: Scalar> {
    fn epoch(&mut self, epoch: usize) -> Result<f64>;
    fn validate(&self) -> Result<f64>;
    fn snapshot(&self) -> LinkModel<S>;
}

/// Runs epochs until `max_epochs` or until `patience` epochs pass without
/// a validation improvement; returns the best snapshot. Without a
/// validation set the last epoch wins.
fn fit<S: Scalar>(learner: &mut dyn Learner<S>, cfg: &TrainConfig, kind: &str) -> Result<Trained<S>> {
    let start = Instant::now();
    let mut epochs = Vec::new();
    let mut best: Option<(usize, f64, LinkModel<S>)> = None;
    for epoch in 1..=cfg.max_epochs {
        let t = Instant::now();
        let loss = learner.epoch(epoch)?;
        let val = learner.validate()?;
        epochs.push(EpochRecord {
            epoch,
            loss,
            val,
            seconds: t.elapsed().as_secs_f64(),
        });
        log::debug!("{kind} epoch {epoch}: loss {loss:.5} val {val:.4}");
        let improved = match &best {
            None => true,
            Some((_, b, _)) => val > *b || val.is_nan(),
        };
        if improved {
            best = Some((epoch, val, learner.snapshot()));
        }
        let best_epoch = best.as_ref().map_or(epoch, |b| b.0);
        if !val.is_nan() && epoch - best_epoch >= cfg.patience {
            break;
        }
    }
    let (best_epoch, best_val, model) = best.expect("at least one epoch");
    Ok(Trained {
        model,
        record: RunRecord {
            kind: kind.to_string(),
            metric: format!("hits@{}", cfg.eval_k),
            epochs,
            best_epoch,
            best_val,
            checkpoint: None,
            seconds: start.elapsed().as_secs_f64(),
        },
    })
}

fn adam_step<S: Scalar>(
    tape: &Tape<S>,
    loss: Var<'_, S>,
    leaves: &[Var<'_, S>],
    params: &mut [&mut Tensor<S>],
    opt: &mut Adam<S>,
) -> Result<S> {
    let value = loss.item()?;
    let grads = tape.backward(loss)?;
    grads.write_into(leaves, params)?;
    opt.step(params)?;
    Ok(value)
}

// ---------------------------------------------------------------------------
// Teacher

struct TeacherLearner<'a, S: Scalar> {
    cfg: &'a TrainConfig,
    graph: &'a Graph<S>,
    nodes: Vec<usize>,
    train_pos: &'a EdgeSet,
    val_pos: Vec<(usize, usize)>,
    val_neg: Vec<(usize, usize)>,
    sage: SageParams<S>,
    decoder: DecoderParams<S>,
    opt: Adam<S>,
    data_rng: ChaCha8Rng,
    drop_rng: ChaCha8Rng,
}

impl<S: Scalar> Learner<S> for TeacherLearner<'_, S> {
    fn epoch(&mut self, _epoch: usize) -> Result<f64> {
        let (pos, neg) = epoch_edges(self.graph, &self.nodes, self.train_pos, &mut self.data_rng)?;
        let mut total = 0.0;
        let mut count = 0usize;
        for (p, n) in pos.chunks(self.cfg.edge_batch).zip(neg.chunks(self.cfg.edge_batch)) {
            let tape = Tape::new();
            let enc = self.sage.bind(&tape);
            let dec = self.decoder.bind(&tape);
            let mut phase = Phase::Train {
                dropout: self.cfg.dropout,
                rng: &mut self.drop_rng,
            };
            let h = enc.forward(&tape, self.graph, &mut phase)?;
            let us: Vec<usize> = p.iter().chain(n).map(|e| e.0).collect();
            let vs: Vec<usize> = p.iter().chain(n).map(|e| e.1).collect();
            let labels: Vec<S> = p.iter().map(|_| S::one()).chain(n.iter().map(|_| S::zero())).collect();
            let y = dec.decode_pairs(h, Arc::new(us), Arc::new(vs), &mut phase)?;
            let loss = loss_sup(y, &labels)?;
            let mut leaves = enc.leaves();
            leaves.extend(dec.leaves());
            let mut params = self.sage.params_mut();
            params.extend(self.decoder.params_mut());
            let v = adam_step(&tape, loss, &leaves, &mut params, &mut self.opt)?;
            total += v.as_f64() * labels.len() as f64;
            count += labels.len();
        }
        Ok(total / count as f64)
    }

    fn validate(&self) -> Result<f64> {
        let h = self.sage.embed_all(self.graph)?;
        validation_hits(&h, &self.decoder, &self.val_pos, &self.val_neg, self.cfg.eval_k)
    }

    fn snapshot(&self) -> LinkModel<S> {
        LinkModel {
            encoder: Encoder::Sage(self.sage.clone()),
            decoder: self.decoder.clone(),
            seed: self.cfg.seed,
        }
    }
}

/// Trains the SAGE teacher with BCE on training positives and per-epoch
/// negatives, message passing over the split's training graph.
pub fn train_teacher<S: Scalar>(split: &Split<S>, cfg: &TrainConfig) -> Result<Trained<S>> {
    cfg.validate()?;
    if split.train_pos().is_empty() {
        return Err(Error::Usage("split has no training edges".into()));
    }
    let g = split.train_graph();
    let mut init = stream(cfg.seed, INIT);
    let m = &cfg.model;
    let sage = SageParams::new(g.num_features(), m.hidden, m.layers, &mut init);
    let decoder = DecoderParams::new(m.hidden, m.hidden, m.decoder_layers, &mut init);
    let mut learner = TeacherLearner {
        cfg,
        graph: g,
        nodes: split.training_nodes(),
        train_pos: split.train_pos(),
        val_pos: edge_pairs(split.val_pos()),
        val_neg: edge_pairs(split.val_neg()),
        sage,
        decoder,
        opt: Adam::new(AdamConfig::with_lr(cfg.lr))?,
        data_rng: stream(cfg.seed, DATA),
        drop_rng: stream(cfg.seed, DROPOUT),
    };
    fit(&mut learner, cfg, "sage")
}

// ---------------------------------------------------------------------------
// Teacher artifacts

/// Frozen teacher outputs: node embeddings over the training graph and a
/// copy of the teacher decoder for scoring arbitrary pairs.
#[derive(Clone, Debug)]
pub struct TeacherArtifacts<S> {
    pub embeddings: Tensor<S>,
    pub decoder: DecoderParams<S>,
}

impl<S: Scalar> TeacherArtifacts<S> {
    /// Teacher probabilities `y_uv`.
    pub fn score(&self, pairs: &[(usize, usize)]) -> Result<Vec<S>> {
        self.decoder.score_pairs(&self.embeddings, pairs)
    }

    /// Teacher scores of every (anchor, context member) pair, flattened in
    /// context order.
    pub fn context_scores(&self, contexts: &[ContextSet]) -> Result<Vec<S>> {
        let pairs: Vec<(usize, usize)> = contexts
            .iter()
            .flat_map(|c| c.members.iter().map(move |&u| (c.anchor, u)))
            .collect();
        self.score(&pairs)
    }
}

pub fn precompute_teacher_artifacts<S: Scalar>(teacher: &LinkModel<S>, split: &Split<S>) -> Result<TeacherArtifacts<S>> {
    Ok(TeacherArtifacts {
        embeddings: teacher.encoder.embed_all(split.train_graph())?,
        decoder: teacher.decoder.clone(),
    })
}

// ---------------------------------------------------------------------------
// Students

struct StudentLearner<'a, S: Scalar> {
    cfg: &'a TrainConfig,
    method: Method,
    graph: &'a Graph<S>,
    nodes: Vec<usize>,
    train_pos: &'a EdgeSet,
    val_pos: Vec<(usize, usize)>,
    val_neg: Vec<(usize, usize)>,
    teacher: Option<&'a TeacherArtifacts<S>>,
    relational: bool,
    mlp: MlpParams<S>,
    decoder: DecoderParams<S>,
    projection: Option<Linear<S>>,
    opt: Adam<S>,
    data_rng: ChaCha8Rng,
    drop_rng: ChaCha8Rng,
    ctx_rng: ChaCha8Rng,
}

/// Maps global node ids to rows of a batch-local embedding table.
struct LocalIndex {
    nodes: Vec<usize>,
    pos: HashMap<usize, usize>,
}

impl LocalIndex {
    fn new() -> Self {
        Self {
            nodes: Vec::new(),
            pos: HashMap::new(),
        }
    }

    fn id(&mut self, v: usize) -> usize {
        *self.pos.entry(v).or_insert_with(|| {
            self.nodes.push(v);
            self.nodes.len() - 1
        })
    }
}

impl<S: Scalar> StudentLearner<'_, S> {
    fn step(
        &mut self,
        pos: &[(usize, usize)],
        neg: &[(usize, usize)],
        contexts: &[ContextSet],
    ) -> Result<f64> {
        let lc = self.cfg.loss;
        let has_edges = !pos.is_empty() && !(self.method == Method::Llp && lc.alpha == 0.0);
        let mut index = LocalIndex::new();
        let edges: Vec<(usize, usize)> = if has_edges { pos.iter().chain(neg).copied().collect() } else { Vec::new() };
        let local_edges: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (index.id(u), index.id(v))).collect();
        let n_edge_nodes = index.nodes.len();
        let mut ctx_pairs = Vec::new();
        let mut local_ctx = Vec::new();
        for c in contexts {
            for &u in &c.members {
                ctx_pairs.push((c.anchor, u));
                local_ctx.push((index.id(c.anchor), index.id(u)));
            }
        }

        let tape = Tape::new();
        let enc = self.mlp.bind(&tape);
        let dec = self.decoder.bind(&tape);
        let proj = self.projection.as_ref().map(|p| p.bind(&tape));
        let mut phase = Phase::Train {
            dropout: self.cfg.dropout,
            rng: &mut self.drop_rng,
        };
        let x = tape.constant(self.graph.features().gather_rows(&index.nodes));
        let h = enc.forward(x, &mut phase)?;

        let mut parts = LossParts::default();
        if has_edges {
            let labels: Vec<S> = pos.iter().map(|_| S::one()).chain(neg.iter().map(|_| S::zero())).collect();
            let us = Arc::new(local_edges.iter().map(|e| e.0).collect());
            let vs = Arc::new(local_edges.iter().map(|e| e.1).collect());
            let y = dec.decode_pairs(h, us, vs, &mut phase)?;
            let teacher = self.teacher;
            let need = || teacher.ok_or_else(|| Error::Prerequisite("teacher artifacts required".into()));
            parts.sup = Some(match self.method {
                Method::Mlp | Method::Llp => loss_sup(y, &labels)?,
                Method::Logit => {
                    let t = need()?.score(&edges)?;
                    loss_logit_match(y, &t, &labels, lc.lambda, lc.match_kind)?
                }
                Method::Repr => {
                    let rows: Vec<usize> = (0..n_edge_nodes).collect();
                    let hs = h.gather_rows(Arc::new(rows))?;
                    let ht = need()?.embeddings.gather_rows(&index.nodes[..n_edge_nodes]);
                    loss_repr_match(hs, &ht, proj.as_ref(), y, &labels, lc.lambda, lc.match_kind)?
                }
            });
        }
        if !ctx_pairs.is_empty() {
            let teacher = self
                .teacher
                .ok_or_else(|| Error::Prerequisite("teacher artifacts required".into()))?;
            let yt = teacher.score(&ctx_pairs)?;
            let us = Arc::new(local_ctx.iter().map(|e| e.0).collect());
            let vs = Arc::new(local_ctx.iter().map(|e| e.1).collect());
            let ys = dec.decode_pairs(h, us, vs, &mut phase)?;
            let seg = Segments::from_lengths(contexts.iter().map(|c| c.len()));
            if lc.beta > 0.0 {
                parts.rank = Some(loss_rank(ys, &yt, &seg, S::lit(lc.delta))?.loss);
            }
            if lc.gamma > 0.0 {
                parts.dist = Some(loss_dist(ys, &yt, &seg, S::lit(lc.tau))?.loss);
            }
        }
        let loss = match self.method {
            Method::Llp => loss_total(&parts, lc.alpha, lc.beta, lc.gamma)?,
            _ => parts.sup.ok_or_else(|| Error::Usage("empty training batch".into()))?,
        };
        let mut leaves = enc.leaves();
        leaves.extend(dec.leaves());
        if let Some(p) = &proj {
            leaves.extend([p.weight, p.bias]);
        }
        let mut params = self.mlp.params_mut();
        params.extend(self.decoder.params_mut());
        if let Some(p) = self.projection.as_mut() {
            params.extend([&mut p.weight, &mut p.bias]);
        }
        Ok(adam_step(&tape, loss, &leaves, &mut params, &mut self.opt)?.as_f64())
    }
}

impl<S: Scalar> Learner<S> for StudentLearner<'_, S> {
    fn epoch(&mut self, _epoch: usize) -> Result<f64> {
        let (pos, neg) = epoch_edges(self.graph, &self.nodes, self.train_pos, &mut self.data_rng)?;
        let eb = self.cfg.edge_batch;
        let edge_steps = pos.len().div_ceil(eb);
        let contexts = if self.relational {
            let mut anchors = self.nodes.clone();
            anchors.shuffle(&mut self.ctx_rng);
            if self.cfg.anchors_per_epoch > 0 {
                anchors.truncate(self.cfg.anchors_per_epoch);
            }
            sample_contexts(self.graph, &anchors, &self.cfg.context, Some(&self.nodes), &mut self.ctx_rng)
        } else {
            Vec::new()
        };
        let ab = self.cfg.anchor_batch;
        let anchor_steps = contexts.len().div_ceil(ab);
        let steps = edge_steps.max(anchor_steps);
        let mut total = 0.0;
        for s in 0..steps {
            let slice = |v: &[(usize, usize)]| -> Vec<(usize, usize)> {
                v.get(s * eb..((s + 1) * eb).min(v.len())).unwrap_or(&[]).to_vec()
            };
            let (p, n) = (slice(&pos), slice(&neg));
            let c = contexts.get(s * ab..((s + 1) * ab).min(contexts.len())).unwrap_or(&[]);
            total += self.step(&p, &n, c)?;
        }
        Ok(total / steps.max(1) as f64)
    }

    fn validate(&self) -> Result<f64> {
        let h = self.mlp.embed_all(self.graph)?;
        validation_hits(&h, &self.decoder, &self.val_pos, &self.val_neg, self.cfg.eval_k)
    }

    fn snapshot(&self) -> LinkModel<S> {
        LinkModel {
            encoder: Encoder::Mlp(self.mlp.clone()),
            decoder: self.decoder.clone(),
            seed: self.cfg.seed,
        }
    }
}

/// Trains an MLP student with the given method. `mlp` needs no teacher;
/// the other methods require `teacher`.
pub fn distill_student<S: Scalar>(
    teacher: Option<&TeacherArtifacts<S>>,
    split: &Split<S>,
    cfg: &TrainConfig,
    method: Method,
) -> Result<Trained<S>> {
    cfg.validate()?;
    if split.train_pos().is_empty() {
        return Err(Error::Usage("split has no training edges".into()));
    }
    if method != Method::Mlp && teacher.is_none() {
        return Err(Error::Prerequisite(format!("method {method} needs a trained teacher")));
    }
    let lc = &cfg.loss;
    let relational = method == Method::Llp && (lc.beta > 0.0 || lc.gamma > 0.0);
    if relational && cfg.context.p() == 0 && cfg.context.q == 0 {
        return Err(Error::Usage("relational distillation needs non-empty contexts".into()));
    }
    let g = split.train_graph();
    let m = &cfg.model;
    let width = m.student_hidden();
    let mut init = stream(cfg.seed, INIT);
    let mlp = MlpParams::new(g.num_features(), width, m.layers, &mut init);
    let decoder = DecoderParams::new(width, width, m.decoder_layers, &mut init);
    let projection = match (method, teacher) {
        (Method::Repr, Some(t)) if t.embeddings.cols() != width => Some(Linear::new(width, t.embeddings.cols(), &mut init)),
        _ => None,
    };
    let mut learner = StudentLearner {
        cfg,
        method,
        graph: g,
        nodes: split.training_nodes(),
        train_pos: split.train_pos(),
        val_pos: edge_pairs(split.val_pos()),
        val_neg: edge_pairs(split.val_neg()),
        teacher,
        relational,
        mlp,
        decoder,
        projection,
        opt: Adam::new(AdamConfig::with_lr(cfg.lr))?,
        data_rng: stream(cfg.seed, DATA),
        drop_rng: stream(cfg.seed, DROPOUT),
        ctx_rng: stream(cfg.seed, CONTEXT),
    };
    fit(&mut learner, cfg, &method.to_string())
}
