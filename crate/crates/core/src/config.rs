//! Flat `section.key = value` run configuration.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::losses::MatchKind;
use crate::train::{Method, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitKind {
    Transductive,
    Production,
}

impl SplitKind {
    fn as_str(&self) -> &'static str {
        match self {
            SplitKind::Transductive => "transductive",
            SplitKind::Production => "production",
        }
    }
}

impl FromStr for SplitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transductive" => Ok(SplitKind::Transductive),
            "production" => Ok(SplitKind::Production),
            other => Err(Error::Config(format!("unknown split kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl Precision {
    fn as_str(&self) -> &'static str {
        match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(Precision::F32),
            "f64" => Ok(Precision::F64),
            other => Err(Error::Config(format!("unknown precision {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitConfig {
    pub kind: SplitKind,
    pub val_frac: f64,
    pub test_frac: f64,
    pub new_frac: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub nodes: usize,
    pub avg_degree: f64,
    pub features: usize,
    pub pairs: usize,
    pub repetitions: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub edges: PathBuf,
    pub features: PathBuf,
    pub split: SplitConfig,
    /// Teacher training settings; also the base for students.
    pub train: TrainConfig,
    pub student_lr: f64,
    pub student_dropout: f64,
    pub method: Method,
    pub ks: Vec<usize>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub precision: Precision,
    pub bench: BenchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        Self {
            edges: PathBuf::from("data/synthetic/sbm200.edges"),
            features: PathBuf::from("data/synthetic/sbm200.features"),
            split: SplitConfig {
                kind: SplitKind::Transductive,
                val_frac: 0.05,
                test_frac: 0.15,
                new_frac: 0.30,
            },
            student_lr: train.lr,
            student_dropout: train.dropout,
            train,
            method: Method::Llp,
            ks: vec![20],
            seeds: vec![0],
            out: PathBuf::from("runs"),
            precision: Precision::F64,
            bench: BenchConfig {
                nodes: 100_000,
                avg_degree: 10.0,
                features: 64,
                pairs: 1000,
                repetitions: 10,
            },
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split_whitespace().map(|t| parse(key, t)).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl RunConfig {
    /// Applies one `section.key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let t = &mut self.train;
        match key {
            "data.edges" => self.edges = PathBuf::from(v),
            "data.features" => self.features = PathBuf::from(v),
            "split.kind" => self.split.kind = parse(key, v)?,
            "split.val_frac" => self.split.val_frac = parse(key, v)?,
            "split.test_frac" => self.split.test_frac = parse(key, v)?,
            "split.new_frac" => self.split.new_frac = parse(key, v)?,
            "model.hidden" => t.model.hidden = parse(key, v)?,
            "model.layers" => t.model.layers = parse(key, v)?,
            "model.student_width_mult" => t.model.student_width_mult = parse(key, v)?,
            "model.decoder_layers" => t.model.decoder_layers = parse(key, v)?,
            "train.max_epochs" => t.max_epochs = parse(key, v)?,
            "train.patience" => t.patience = parse(key, v)?,
            "train.lr" => t.lr = parse(key, v)?,
            "train.dropout" => t.dropout = parse(key, v)?,
            "train.edge_batch" => t.edge_batch = parse(key, v)?,
            "train.anchor_batch" => t.anchor_batch = parse(key, v)?,
            "train.anchors_per_epoch" => t.anchors_per_epoch = parse(key, v)?,
            "train.eval_k" => t.eval_k = parse(key, v)?,
            "student.lr" => self.student_lr = parse(key, v)?,
            "student.dropout" => self.student_dropout = parse(key, v)?,
            "student.method" => self.method = parse(key, v)?,
            "loss.lambda" => t.loss.lambda = parse(key, v)?,
            "loss.alpha" => t.loss.alpha = parse(key, v)?,
            "loss.beta" => t.loss.beta = parse(key, v)?,
            "loss.gamma" => t.loss.gamma = parse(key, v)?,
            "loss.delta" => t.loss.delta = parse(key, v)?,
            "loss.tau" => t.loss.tau = parse(key, v)?,
            "loss.match_kind" => t.loss.match_kind = parse::<MatchKind>(key, v)?,
            "context.walk_len" => t.context.walk_len = parse(key, v)?,
            "context.num_walks" => t.context.num_walks = parse(key, v)?,
            "context.q" => t.context.q = parse(key, v)?,
            "eval.ks" => self.ks = parse_list(key, v)?,
            "run.seeds" => self.seeds = parse_list(key, v)?,
            "run.out" => self.out = PathBuf::from(v),
            "run.precision" => self.precision = parse(key, v)?,
            "bench.nodes" => self.bench.nodes = parse(key, v)?,
            "bench.avg_degree" => self.bench.avg_degree = parse(key, v)?,
            "bench.features" => self.bench.features = parse(key, v)?,
            "bench.pairs" => self.bench.pairs = parse(key, v)?,
            "bench.repetitions" => self.bench.repetitions = parse(key, v)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Every setting in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let t = &self.train;
        vec![
            ("data.edges", self.edges.display().to_string()),
            ("data.features", self.features.display().to_string()),
            ("split.kind", self.split.kind.as_str().to_string()),
            ("split.val_frac", self.split.val_frac.to_string()),
            ("split.test_frac", self.split.test_frac.to_string()),
            ("split.new_frac", self.split.new_frac.to_string()),
            ("model.hidden", t.model.hidden.to_string()),
            ("model.layers", t.model.layers.to_string()),
            ("model.student_width_mult", t.model.student_width_mult.to_string()),
            ("model.decoder_layers", t.model.decoder_layers.to_string()),
            ("train.max_epochs", t.max_epochs.to_string()),
            ("train.patience", t.patience.to_string()),
            ("train.lr", t.lr.to_string()),
            ("train.dropout", t.dropout.to_string()),
            ("train.edge_batch", t.edge_batch.to_string()),
            ("train.anchor_batch", t.anchor_batch.to_string()),
            ("train.anchors_per_epoch", t.anchors_per_epoch.to_string()),
            ("train.eval_k", t.eval_k.to_string()),
            ("student.lr", self.student_lr.to_string()),
            ("student.dropout", self.student_dropout.to_string()),
            ("student.method", self.method.to_string()),
            ("loss.lambda", t.loss.lambda.to_string()),
            ("loss.alpha", t.loss.alpha.to_string()),
            ("loss.beta", t.loss.beta.to_string()),
            ("loss.gamma", t.loss.gamma.to_string()),
            ("loss.delta", t.loss.delta.to_string()),
            ("loss.tau", t.loss.tau.to_string()),
            ("loss.match_kind", t.loss.match_kind.to_string()),
            ("context.walk_len", t.context.walk_len.to_string()),
            ("context.num_walks", t.context.num_walks.to_string()),
            ("context.q", t.context.q.to_string()),
            ("eval.ks", join(&self.ks)),
            ("run.seeds", join(&self.seeds)),
            ("run.out", self.out.display().to_string()),
            ("run.precision", self.precision.as_str().to_string()),
            ("bench.nodes", self.bench.nodes.to_string()),
            ("bench.avg_degree", self.bench.avg_degree.to_string()),
            ("bench.features", self.bench.features.to_string()),
            ("bench.pairs", self.bench.pairs.to_string()),
            ("bench.repetitions", self.bench.repetitions.to_string()),
        ]
    }

    /// Defaults overridden by the settings in `text`. Blank lines and `#`
    /// comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected \"key = value\"", i + 1)))?;
            cfg.set(k.trim(), v)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::from("# llp run configuration\n");
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Teacher settings for one seed.
    pub fn teacher_config(&self, seed: u64) -> TrainConfig {
        TrainConfig { seed, ..self.train }
    }

    /// Student settings for one seed.
    pub fn student_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            seed,
            lr: self.student_lr,
            dropout: self.student_dropout,
            ..self.train
        }
    }

    /// Checks values and that the input files exist.
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("run.seeds is empty".into()));
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::Config("eval.ks needs values >= 1".into()));
        }
        if self.bench.repetitions == 0 || self.bench.pairs == 0 {
            return Err(Error::Config("bench.pairs and bench.repetitions must be >= 1".into()));
        }
        self.teacher_config(0).validate()?;
        self.student_config(0).validate()?;
        for p in [&self.edges, &self.features] {
            if !p.is_file() {
                return Err(Error::Config(format!("input file {} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::default();
        cfg.set("loss.tau", "0.3").unwrap();
        cfg.set("run.seeds", "0 1 2 3 4").unwrap();
        cfg.set("loss.match_kind", "cosine").unwrap();
        cfg.set("train.lr", "0.1").unwrap();
        cfg.set("run.precision", "f32").unwrap();
        cfg.set("split.kind", "production").unwrap();
        let text = cfg.serialize();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.serialize(), text);
    }

    #[test]
    fn unknown_and_malformed_keys() {
        assert!(matches!(RunConfig::parse("foo.bar = 1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("train.lr 0.1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("train.lr = x"), Err(Error::Config(_))));
    }

    #[test]
    fn empty_seed_list_is_rejected() {
        let cfg = RunConfig::parse("run.seeds =").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
