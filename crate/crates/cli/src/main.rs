//! `llp`: split, train, distill, evaluate and benchmark from a run config.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::info;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use llp_core::config::{Precision, RunConfig, SplitKind};
use llp_core::eval::{bench_inference, evaluate_cold_start, evaluate_split, MetricsReport};
use llp_core::models::{DecoderParams, Encoder, LinkModel, MlpParams, SageParams};
use llp_core::splits::{cold_start_view, production_split, read_manifest, transductive_split, write_manifest, Split};
use llp_core::synthetic::random_graph;
use llp_core::train::{distill_student, precompute_teacher_artifacts, train_teacher, Method, Trained};
use llp_core::{graph::Graph, Error, Scalar};

#[derive(Parser, Debug)]
#[command(name = "llp", version, about = "Link prediction with linkless MLP students")]
struct Cli {
    /// Run configuration (`section.key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run a single seed instead of `run.seeds`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Student method: mlp, logit, repr or llp.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override one setting, e.g. `--set loss.tau=0.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Write split manifests.
    Split,
    /// Train the SAGE teacher.
    TrainTeacher,
    /// Train a student with the configured method.
    Distill,
    /// Evaluate every trained model and write metric reports.
    Eval,
    /// Time teacher and student inference on a synthetic graph.
    Bench,
    /// split, train-teacher, distill (mlp and the configured method), eval.
    All,
}

/// Usage failures exit with 1, runtime failures with 2.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Usage(_) | Error::Config(_) | Error::Parameter(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn load_config(cli: &Cli) -> Outcome<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    for s in &cli.sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got {s:?}")))?;
        cfg.set(k.trim(), v)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(m) = &cli.method {
        cfg.method = m.parse()?;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> Outcome<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn read_prerequisite(path: &Path, what: &str, produced_by: &str) -> Outcome<String> {
    if !path.is_file() {
        return Err(Error::Prerequisite(format!(
            "{what} {} not found; run `llp {produced_by}` first",
            path.display()
        ))
        .into());
    }
    fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

/// Models evaluated by `eval`, in report order.
const MODELS: [&str; 5] = ["teacher", "mlp", "logit", "repr", "llp"];

struct Pipeline<'a, S: Scalar> {
    cfg: &'a RunConfig,
    graph: Graph<S>,
}

impl<'a, S: Scalar> Pipeline<'a, S> {
    fn new(cfg: &'a RunConfig) -> Outcome<Self> {
        let graph = Graph::load(&cfg.edges, &cfg.features)?;
        info!(
            "loaded {} nodes, {} edges, {} features",
            graph.num_nodes(),
            graph.num_edges(),
            graph.num_features()
        );
        Ok(Self { cfg, graph })
    }

    fn manifest_path(&self, seed: u64) -> PathBuf {
        self.cfg.out.join("split").join(format!("seed{seed}.manifest"))
    }

    fn checkpoint_path(&self, model: &str, seed: u64) -> PathBuf {
        self.cfg.out.join(model).join(format!("seed{seed}.ckpt"))
    }

    fn split(&self) -> Outcome<()> {
        let sc = &self.cfg.split;
        for &seed in &self.cfg.seeds {
            let split = match sc.kind {
                SplitKind::Transductive => Split::Transductive(transductive_split(&self.graph, sc.val_frac, sc.test_frac, seed)?),
                SplitKind::Production => Split::Production(production_split(&self.graph, sc.new_frac, seed)?),
            };
            if let Split::Production(p) = &split {
                info!("seed {seed}: {} existing, {} new nodes", p.existing_nodes.len(), p.new_nodes.len());
                for w in &p.warnings {
                    log::warn!("seed {seed}: {w}");
                }
            }
            write(&self.manifest_path(seed), &write_manifest(&split))?;
        }
        Ok(())
    }

    fn load_split(&self, seed: u64) -> Outcome<Split<S>> {
        let text = read_prerequisite(&self.manifest_path(seed), "split manifest", "split")?;
        Ok(read_manifest(&text, &self.graph)?)
    }

    fn load_model(&self, model: &str, seed: u64) -> Outcome<LinkModel<S>> {
        let producer = if model == "teacher" { "train-teacher" } else { "distill" };
        let text = read_prerequisite(&self.checkpoint_path(model, seed), &format!("{model} checkpoint"), producer)?;
        Ok(LinkModel::from_checkpoint(&text)?)
    }

    fn save(&self, model: &str, seed: u64, trained: &Trained<S>) -> Outcome<()> {
        let dir = self.cfg.out.join(model);
        write(&dir.join(format!("seed{seed}.ckpt")), &trained.model.to_checkpoint())?;
        write(&dir.join(format!("seed{seed}.curve")), &trained.record.to_text())?;
        write(&dir.join(format!("seed{seed}.timing")), &trained.record.timing_text())?;
        info!(
            "{model} seed {seed}: best val {:.4} at epoch {} ({:.1}s)",
            trained.record.best_val, trained.record.best_epoch, trained.record.seconds
        );
        Ok(())
    }

    fn train_teacher(&self) -> Outcome<()> {
        for &seed in &self.cfg.seeds {
            let split = self.load_split(seed)?;
            let trained = train_teacher(&split, &self.cfg.teacher_config(seed))?;
            self.save("teacher", seed, &trained)?;
        }
        Ok(())
    }

    fn distill(&self, method: Method) -> Outcome<()> {
        for &seed in &self.cfg.seeds {
            let split = self.load_split(seed)?;
            let artifacts = if method == Method::Mlp {
                None
            } else {
                let teacher = self.load_model("teacher", seed)?;
                Some(precompute_teacher_artifacts(&teacher, &split)?)
            };
            let trained = distill_student(artifacts.as_ref(), &split, &self.cfg.student_config(seed), method)?;
            self.save(&method.to_string(), seed, &trained)?;
        }
        Ok(())
    }

    fn eval(&self) -> Outcome<()> {
        let ks = &self.cfg.ks;
        let mut any = false;
        for model in MODELS {
            let present = self
                .cfg
                .seeds
                .iter()
                .all(|&s| self.checkpoint_path(model, s).is_file());
            if !present {
                continue;
            }
            any = true;
            let mut report = MetricsReport::new(model, ks);
            let mut cold = MetricsReport::new(model, ks);
            for &seed in &self.cfg.seeds {
                let split = self.load_split(seed)?;
                let m = self.load_model(model, seed)?;
                report.runs.push(evaluate_split(&m, &split, ks)?);
                if let Split::Production(p) = &split {
                    cold.runs.push(evaluate_cold_start(&m, &cold_start_view(p)?, ks)?);
                }
            }
            let dir = self.cfg.out.join("metrics");
            write(&dir.join(format!("{model}.txt")), &report.to_text())?;
            print!("{}", report.table());
            if !cold.runs.is_empty() {
                write(&dir.join(format!("{model}.cold_start.txt")), &cold.to_text())?;
                print!("{}", cold.table().replacen(model, &format!("{model}*"), 1));
            }
        }
        if !any {
            return Err(Error::Prerequisite(format!(
                "no checkpoints under {} for seeds {:?}; run `llp train-teacher` or `llp distill` first",
                self.cfg.out.display(),
                self.cfg.seeds
            ))
            .into());
        }
        Ok(())
    }
}

fn bench<S: Scalar>(cfg: &RunConfig) -> Outcome<()> {
    let b = &cfg.bench;
    let seed = cfg.seeds[0];
    let t = Instant::now();
    let g: Graph<S> = random_graph(b.nodes, b.avg_degree, b.features, seed)?;
    info!("bench graph: {} nodes, {} edges ({:.1}s)", g.num_nodes(), g.num_edges(), t.elapsed().as_secs_f64());
    let m = &cfg.train.model;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sage = SageParams::new(b.features, m.hidden, m.layers, &mut rng);
    let teacher = LinkModel {
        encoder: Encoder::Sage(sage),
        decoder: DecoderParams::new(m.hidden, m.hidden, m.decoder_layers, &mut rng),
        seed,
    };
    let w = m.student_hidden();
    let student = LinkModel {
        encoder: Encoder::Mlp(MlpParams::new(b.features, w, m.layers, &mut rng)),
        decoder: DecoderParams::new(w, w, m.decoder_layers, &mut rng),
        seed,
    };
    let ends = index::sample(&mut rng, b.nodes, (2 * b.pairs).min(b.nodes)).into_vec();
    let pairs: Vec<(usize, usize)> = (0..b.pairs).map(|i| (ends[(2 * i) % ends.len()], ends[(2 * i + 1) % ends.len()])).collect();
    let report = bench_inference(&teacher, &student, &g, &pairs, b.repetitions)?;
    write(&cfg.out.join("bench.txt"), &report.to_text())?;
    println!(
        "median {} {:.3e}s, {} {:.3e}s, speedup {:.2}x",
        report.reference_kind, report.reference_median, report.candidate_kind, report.candidate_median, report.speedup
    );
    Ok(())
}

fn run<S: Scalar>(cfg: &RunConfig, command: Command) -> Outcome<()> {
    if command == Command::Bench {
        return bench::<S>(cfg);
    }
    let p = Pipeline::<S>::new(cfg)?;
    match command {
        Command::Split => p.split(),
        Command::TrainTeacher => p.train_teacher(),
        Command::Distill => p.distill(cfg.method),
        Command::Eval => p.eval(),
        Command::All => {
            p.split()?;
            p.train_teacher()?;
            p.distill(Method::Mlp)?;
            if cfg.method != Method::Mlp {
                p.distill(cfg.method)?;
            }
            p.eval()
        }
        Command::Bench => unreachable!(),
    }
}

fn execute(cli: &Cli) -> Outcome<()> {
    let cfg = load_config(cli)?;
    if cli.command == Command::Bench {
        if cfg.seeds.is_empty() {
            return Err(usage("run.seeds is empty"));
        }
    } else {
        cfg.validate()?;
    }
    write(&cfg.out.join("config.txt"), &cfg.serialize())?;
    match cfg.precision {
        Precision::F32 => run::<f32>(&cfg, cli.command),
        Precision::F64 => run::<f64>(&cfg, cli.command),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
