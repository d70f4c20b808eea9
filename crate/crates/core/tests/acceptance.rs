//! Acceptance run: one PASS/FAIL line per criterion and a failure count.
//! With `LLP_ACCEPTANCE_STRICT=1` any failure exits non-zero.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use llp_core::eval::{auc, evaluate_cold_start, evaluate_split, hits_at_k, mean_std, ScoreSet};
use llp_core::graph::Graph;
use llp_core::losses::{
    loss_dist, loss_logit_match, loss_rank, loss_repr_match, loss_sup, loss_total, LossParts, MatchKind, Segments,
};
use llp_core::models::{DecoderParams, Encoder, Linear, LinkModel, MlpParams, Parameterized, Phase, SageParams};
use llp_core::splits::{check_invariants, cold_start_view, production_split, transductive_split, Split};
use llp_core::synthetic::{random_graph, sbm, SbmConfig};
use llp_core::tensor::{Tape, Tensor, Var};
use llp_core::train::{distill_student, precompute_teacher_artifacts, train_teacher, Method, TrainConfig};

type T = Tensor<f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

// ---------------------------------------------------------------------------
// 1. finite differences

/// Relative error `|a - n| / max(|a|, |n|)` between the analytic and the
/// central-difference gradient, over all inputs flattened together.
fn fd_check<F>(inputs: &[T], f: F) -> f64
where
    F: for<'t> Fn(&'t Tape<f64>, &[T]) -> (Var<'t, f64>, Vec<Var<'t, f64>>),
{
    let tape = Tape::new();
    let (loss, leaves) = f(&tape, inputs);
    let grads = tape.backward(loss).unwrap();
    let analytic: Vec<f64> = leaves
        .iter()
        .flat_map(|&v| grads.get(v).unwrap().data().to_vec())
        .collect();
    let eval = |x: &[T]| {
        let tape = Tape::new();
        f(&tape, x).0.item().unwrap()
    };
    let h = 1e-6;
    let mut numeric = Vec::with_capacity(analytic.len());
    let mut work = inputs.to_vec();
    for i in 0..inputs.len() {
        for j in 0..inputs[i].len() {
            let x0 = inputs[i].data()[j];
            work[i].data_mut()[j] = x0 + h;
            let up = eval(&work);
            work[i].data_mut()[j] = x0 - h;
            let down = eval(&work);
            work[i].data_mut()[j] = x0;
            numeric.push((up - down) / (2.0 * h));
        }
    }
    let diff = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let na = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nn = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
    diff / na.max(nn).max(1e-12)
}

fn uniform(rows: usize, cols: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> T {
    T::from_fn(rows, cols, |_, _| rng.gen_range(lo..hi))
}

fn labels(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect()
}

fn small_graph(rng: &mut ChaCha8Rng) -> Graph<f64> {
    let n = rng.gen_range(5..12);
    let f = rng.gen_range(2..6);
    let pairs: Vec<(usize, usize)> = (0..rng.gen_range(n..3 * n))
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .filter(|(u, v)| u != v)
        .collect();
    Graph::from_pairs(Arc::new(uniform(n, f, -1.0, 1.0, rng)), pairs).unwrap()
}

/// Overwrites a module's parameters with `values`, in declared order.
fn load<M: Parameterized<f64>>(m: &mut M, values: &[T]) {
    for (p, v) in m.params_mut().into_iter().zip(values) {
        p.data_mut().copy_from_slice(v.data());
    }
}

fn snapshot<M: Parameterized<f64>>(m: &M) -> Vec<T> {
    m.params().into_iter().cloned().collect()
}

/// Fresh uniform values for every parameter, biases included, so that no
/// ReLU input sits exactly on its kink.
fn randomize<M: Parameterized<f64>>(m: &mut M, rng: &mut ChaCha8Rng) {
    for p in m.params_mut() {
        p.data_mut().iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    }
}

fn gradient_checks(configs: u64) -> Outcome {
    let mut worst = (0.0f64, String::new());
    let mut record = |name: &str, err: f64, c: u64| {
        if !(err <= worst.0) {
            worst = (err, format!("{name} at configuration {c}"));
        }
    };
    for c in 0..configs {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + c);
        let n = rng.gen_range(2..10);
        let y = labels(n, &mut rng);
        let lambda = rng.gen_range(0.05..0.95);

        let preds = uniform(n, 1, 0.05, 0.95, &mut rng);
        record("sup", fd_check(&[preds.clone()], |t, x| {
            let p = t.leaf(&x[0]);
            (loss_sup(p, &y).unwrap(), vec![p])
        }), c);

        let teacher_preds: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        for kind in [MatchKind::Mse, MatchKind::Cosine] {
            record(&format!("logit {kind}"), fd_check(&[preds.clone()], |t, x| {
                let p = t.leaf(&x[0]);
                (loss_logit_match(p, &teacher_preds, &y, lambda, kind).unwrap(), vec![p])
            }), c);
        }

        let (sw, tw) = (rng.gen_range(2..6), rng.gen_range(2..6));
        let nodes = rng.gen_range(2..8);
        let student_h = uniform(nodes, sw, -1.0, 1.0, &mut rng);
        let teacher_h = uniform(nodes, tw, -1.0, 1.0, &mut rng);
        let proj = Linear::<f64>::new(sw, tw, &mut rng);
        for kind in [MatchKind::Mse, MatchKind::Cosine] {
            let inputs = [student_h.clone(), proj.weight.clone(), proj.bias.clone(), preds.clone()];
            record(&format!("repr {kind}"), fd_check(&inputs, |t, x| {
                let h = t.leaf(&x[0]);
                let mut lin = proj.clone();
                lin.weight = x[1].clone();
                lin.bias = x[2].clone();
                let lv = lin.bind(t);
                let p = t.leaf(&x[3]);
                let l = loss_repr_match(h, &teacher_h, Some(&lv), p, &y, lambda, kind).unwrap();
                (l, vec![h, lv.weight, lv.bias, p])
            }), c);
        }

        let lengths: Vec<usize> = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(2..7)).collect();
        let seg = Segments::from_lengths(lengths.iter().copied());
        let m: usize = lengths.iter().sum();
        let student = uniform(m, 1, -2.0, 2.0, &mut rng);
        let teacher: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let delta = rng.gen_range(0.01..0.2);
        let tau = rng.gen_range(0.3..2.0);
        record("rank", fd_check(&[student.clone()], |t, x| {
            let s = t.leaf(&x[0]);
            (loss_rank(s, &teacher, &seg, delta).unwrap().loss, vec![s])
        }), c);
        record("dist", fd_check(&[student.clone()], |t, x| {
            let s = t.leaf(&x[0]);
            (loss_dist(s, &teacher, &seg, tau).unwrap().loss, vec![s])
        }), c);
        let (a, b, g) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
        record("total", fd_check(&[preds.clone(), student.clone()], |t, x| {
            let p = t.leaf(&x[0]);
            let s = t.leaf(&x[1]);
            let parts = LossParts {
                sup: Some(loss_sup(p, &y).unwrap()),
                rank: Some(loss_rank(s, &teacher, &seg, delta).unwrap().loss),
                dist: Some(loss_dist(s, &teacher, &seg, tau).unwrap().loss),
            };
            (loss_total(&parts, a, b, g).unwrap(), vec![p, s])
        }), c);

        // model forwards through the decoder, reduced with random weights
        let graph = small_graph(&mut rng);
        let layers = rng.gen_range(1..4);
        let hidden = rng.gen_range(2..6);
        let pairs = rng.gen_range(1..8);
        let us = Arc::new((0..pairs).map(|_| rng.gen_range(0..graph.num_nodes())).collect::<Vec<_>>());
        let vs = Arc::new((0..pairs).map(|_| rng.gen_range(0..graph.num_nodes())).collect::<Vec<_>>());
        let w = uniform(pairs, 1, -1.0, 1.0, &mut rng);
        let mut sage = SageParams::<f64>::new(graph.num_features(), hidden, layers, &mut rng);
        let mut mlp = MlpParams::<f64>::new(graph.num_features(), hidden, layers, &mut rng);
        let mut dec = DecoderParams::<f64>::new(hidden, hidden, rng.gen_range(1..3), &mut rng);
        randomize(&mut sage, &mut rng);
        randomize(&mut mlp, &mut rng);
        randomize(&mut dec, &mut rng);
        let split_at = snapshot(&sage).len();
        let mut inputs = snapshot(&sage);
        inputs.extend(snapshot(&dec));
        record("sage forward", fd_check(&inputs, |t, x| {
            let (mut s, mut d) = (sage.clone(), dec.clone());
            load(&mut s, &x[..split_at]);
            load(&mut d, &x[split_at..]);
            let (sv, dv) = (s.bind(t), d.bind(t));
            let h = sv.forward(t, &graph, &mut Phase::Eval).unwrap();
            let p = dv.decode_pairs(h, us.clone(), vs.clone(), &mut Phase::Eval).unwrap();
            let l = p.mul(t.constant(w.clone())).unwrap().sum();
            let mut leaves = sv.leaves();
            leaves.extend(dv.leaves());
            (l, leaves)
        }), c);
        let split_at = snapshot(&mlp).len();
        let mut inputs = snapshot(&mlp);
        inputs.extend(snapshot(&dec));
        record("mlp forward", fd_check(&inputs, |t, x| {
            let (mut m, mut d) = (mlp.clone(), dec.clone());
            load(&mut m, &x[..split_at]);
            load(&mut d, &x[split_at..]);
            let (mv, dv) = (m.bind(t), d.bind(t));
            let h = mv.forward(t.constant_shared(Arc::clone(graph.features())), &mut Phase::Eval).unwrap();
            let p = dv.decode_pairs(h, us.clone(), vs.clone(), &mut Phase::Eval).unwrap();
            let l = p.mul(t.constant(w.clone())).unwrap().sum();
            let mut leaves = mv.leaves();
            leaves.extend(dv.leaves());
            (l, leaves)
        }), c);
    }
    outcome(
        worst.0 < 1e-4,
        format!("{configs} configurations x 10 functions, worst relative error {:.2e} ({})", worst.0, worst.1),
    )
}

// ---------------------------------------------------------------------------
// 2. metric oracles

fn brute_hits(s: &ScoreSet, k: usize) -> f64 {
    let hit = s
        .pos
        .iter()
        .filter(|&&p| s.neg.iter().filter(|&&n| n >= p).count() < k)
        .count();
    hit as f64 / s.pos.len() as f64
}

fn brute_auc(s: &ScoreSet) -> f64 {
    let mut total = 0.0;
    for &p in &s.pos {
        for &n in &s.neg {
            total += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    total / (s.pos.len() * s.neg.len()) as f64
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let coarse = rng.gen_bool(0.5);
        let (np, nn) = (rng.gen_range(1..60), rng.gen_range(1..60));
        let k = rng.gen_range(1..80);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| {
                    if coarse {
                        rng.gen_range(0..8) as f64 / 8.0
                    } else {
                        rng.gen_range(0.0..1.0)
                    }
                })
                .collect()
        };
        let s = ScoreSet::new(draw(np), draw(nn));
        worst = worst.max((hits_at_k(&s, k).unwrap() - brute_hits(&s, k)).abs());
        worst = worst.max((auc(&s).unwrap() - brute_auc(&s)).abs());
    }
    outcome(worst <= 1e-12, format!("1000 score sets, max deviation {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// 3. rank table

fn rank_one(teacher: [f64; 2], student: [f64; 2], delta: f64) -> (f64, Vec<f64>) {
    let tape = Tape::new();
    let s = tape.leaf(&T::column_vector(student.to_vec()));
    let seg = Segments::from_lengths([2]);
    let r = loss_rank(s, &teacher, &seg, delta).unwrap();
    let v = r.loss.item().unwrap();
    let g = tape.backward(r.loss).unwrap().get(s).map(|g| g.data().to_vec()).unwrap_or(vec![0.0; 2]);
    (v, g)
}

fn rank_table() -> Outcome {
    let (a, _) = rank_one([0.9, 0.2], [0.8, 0.1], 0.1);
    let (b, gb) = rank_one([0.50, 0.48], [0.3, 0.7], 0.1);
    let (c, _) = rank_one([0.2, 0.9], [0.8, 0.1], 0.1);
    let pass = a == 0.0 && (b - 0.1).abs() < 1e-15 && gb.iter().all(|&g| g == 0.0) && (c - 0.8).abs() < 1e-15;
    outcome(pass, format!("r=1 -> {a}, r=0 -> {b} (grad {gb:?}), r=-1 -> {c}"))
}

// ---------------------------------------------------------------------------
// 4. distribution identities

fn kl(student: &[f64], teacher: &[f64], lengths: &[usize], tau: f64) -> f64 {
    let tape = Tape::new();
    let s = tape.leaf(&T::column_vector(student.to_vec()));
    let seg = Segments::from_lengths(lengths.iter().copied());
    loss_dist(s, teacher, &seg, tau).unwrap().loss.item().unwrap()
}

fn dist_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut zero_max, mut pos_min) = (0.0f64, f64::INFINITY);
    for _ in 0..200 {
        let lengths: Vec<usize> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(2..30)).collect();
        let m: usize = lengths.iter().sum();
        let tau = rng.gen_range(0.2..3.0);
        let t: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        zero_max = zero_max.max(kl(&t, &t, &lengths, tau).abs());
        let mut shifted = t.clone();
        let mut start = 0;
        for &l in &lengths {
            let c = rng.gen_range(-5.0..5.0);
            shifted[start..start + l].iter_mut().for_each(|x| *x += c);
            start += l;
        }
        zero_max = zero_max.max(kl(&shifted, &t, &lengths, tau).abs());
        let other: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        pos_min = pos_min.min(kl(&other, &t, &lengths, tau));
    }
    outcome(
        zero_max <= 1e-10 && pos_min > 0.0,
        format!("max |KL| on equal/shifted {zero_max:.1e}, min KL on distinct {pos_min:.2e}"),
    )
}

// ---------------------------------------------------------------------------
// 5. splits

fn split_fidelity() -> Outcome {
    let dir = data_dir().join("cora");
    let cora = match Graph::<f64>::load(dir.join("cora.edges"), dir.join("cora.features")) {
        Ok(g) => g,
        Err(e) => return outcome(false, format!("cannot load Cora: {e}")),
    };
    let ps = production_split(&cora, 0.30, 0).unwrap();
    let counts = (ps.existing_nodes.len(), ps.new_nodes.len());
    let mut failures = Vec::new();
    let g: Graph<f64> = sbm(&SbmConfig::default()).unwrap();
    for seed in 0..50 {
        let t = Split::Transductive(transductive_split(&g, 0.05, 0.15, seed).unwrap());
        let p = Split::Production(production_split(&g, 0.30, seed).unwrap());
        for s in [&t, &p] {
            if let Err(e) = check_invariants(&g, s) {
                failures.push(format!("seed {seed}: {e}"));
            }
        }
    }
    outcome(
        counts == (1896, 812) && failures.is_empty(),
        format!(
            "Cora existing/new = {}/{}; synthetic invariant failures: {}",
            counts.0,
            counts.1,
            if failures.is_empty() { "none".to_string() } else { failures.join("; ") }
        ),
    )
}

// ---------------------------------------------------------------------------
// 6. Cora end to end

fn cora_config(seed: u64) -> TrainConfig {
    let mut cfg = TrainConfig {
        max_epochs: 200,
        patience: 30,
        lr: 0.005,
        dropout: 0.5,
        anchors_per_epoch: 384,
        seed,
        ..TrainConfig::default()
    };
    cfg.model.hidden = 256;
    cfg.context.q = 60;
    cfg
}

fn cora_end_to_end() -> Outcome {
    let dir = data_dir().join("cora");
    let g = match Graph::<f32>::load(dir.join("cora.edges"), dir.join("cora.features")) {
        Ok(g) => g,
        Err(e) => return outcome(false, format!("cannot load Cora: {e}")),
    };
    let (mut teacher, mut mlp, mut llp) = (Vec::new(), Vec::new(), Vec::new());
    for seed in 0..5 {
        let split = Split::Transductive(transductive_split(&g, 0.05, 0.15, seed).unwrap());
        let hits = |m: &LinkModel<f32>| -> f64 {
            100.0 * evaluate_split(m, &split, &[20]).unwrap().stratum("overall").unwrap().hits(20).unwrap()
        };
        let t = train_teacher(&split, &cora_config(seed)).unwrap();
        teacher.push(hits(&t.model));
        let art = precompute_teacher_artifacts(&t.model, &split).unwrap();
        let scfg = cora_config(seed);
        mlp.push(hits(&distill_student(None, &split, &scfg, Method::Mlp).unwrap().model));
        llp.push(hits(&distill_student(Some(&art), &split, &scfg, Method::Llp).unwrap().model));
        println!(
            "    seed {seed}: teacher {:.2}  mlp {:.2}  llp {:.2}",
            teacher[seed as usize], mlp[seed as usize], llp[seed as usize]
        );
    }
    let (t, _) = mean_std(&teacher);
    let (m, _) = mean_std(&mlp);
    let (l, _) = mean_std(&llp);
    let a = t >= 60.0;
    let b = m >= 65.0;
    let c = l >= m - 1.0 && (l - 78.82).abs() <= 15.0;
    outcome(
        a && b && c,
        format!(
            "Hits@20 teacher {t:.2} [{}], mlp {m:.2} [{}], llp {l:.2} [{}]",
            if a { "ok" } else { "below 60" },
            if b { "ok" } else { "below 65" },
            if c { "ok" } else { "off target" }
        ),
    )
}

// ---------------------------------------------------------------------------
// 7. structure signal

fn weak_sbm(seed: u64) -> SbmConfig {
    SbmConfig {
        nodes: 500,
        blocks: 5,
        p_in: 0.1,
        p_out: 0.002,
        features: 16,
        signal: 0.3,
        seed,
    }
}

fn small_config(seed: u64) -> TrainConfig {
    let mut cfg = TrainConfig {
        max_epochs: 150,
        patience: 30,
        lr: 0.005,
        seed,
        ..TrainConfig::default()
    };
    cfg.model.hidden = 64;
    cfg.context.q = 60;
    cfg
}

fn structure_signal() -> Outcome {
    let (mut mlp, mut llp) = (Vec::new(), Vec::new());
    let mut exact = true;
    for seed in 0..5 {
        let g: Graph<f64> = sbm(&weak_sbm(100 + seed)).unwrap();
        let split = Split::Transductive(transductive_split(&g, 0.05, 0.15, seed).unwrap());
        let cfg = small_config(seed);
        let teacher = train_teacher(&split, &cfg).unwrap();
        let art = precompute_teacher_artifacts(&teacher.model, &split).unwrap();
        let hits = |m: &LinkModel<f64>| evaluate_split(m, &split, &[20]).unwrap().stratum("overall").unwrap().hits(20).unwrap();
        let plain = distill_student(None, &split, &cfg, Method::Mlp).unwrap();
        let full = distill_student(Some(&art), &split, &cfg, Method::Llp).unwrap();
        mlp.push(100.0 * hits(&plain.model));
        llp.push(100.0 * hits(&full.model));
        if seed == 0 {
            let mut off = cfg;
            off.loss.beta = 0.0;
            off.loss.gamma = 0.0;
            let ablated = distill_student(Some(&art), &split, &off, Method::Llp).unwrap();
            exact = ablated.model == plain.model && ablated.record.epochs == plain.record.epochs;
        }
    }
    let (m, _) = mean_std(&mlp);
    let (l, _) = mean_std(&llp);
    outcome(
        l - m > 0.0 && exact,
        format!(
            "Hits@20 mlp {m:.2}, llp {l:.2} (gain {:+.2}); beta=gamma=0 matches mlp bit-exactly: {exact}",
            l - m
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. cold start

fn cold_start() -> Outcome {
    let g: Graph<f64> = sbm(&weak_sbm(200)).unwrap();
    let ps = production_split(&g, 0.30, 0).unwrap();
    let view = cold_start_view(&ps).unwrap();
    let split = Split::Production(ps);
    let cfg = small_config(0);
    let teacher = train_teacher(&split, &cfg).unwrap();
    let art = precompute_teacher_artifacts(&teacher.model, &split).unwrap();
    let student = distill_student(Some(&art), &split, &cfg, Method::Llp).unwrap();
    let overall = |r: &llp_core::eval::EvalResult| r.stratum("overall").unwrap().hits(20).unwrap();
    let t_prod = evaluate_split(&teacher.model, &split, &[20]).unwrap();
    let t_cold = evaluate_cold_start(&teacher.model, &view, &[20]).unwrap();
    let s_prod = evaluate_split(&student.model, &split, &[20]).unwrap();
    let s_cold = evaluate_cold_start(&student.model, &view, &[20]).unwrap();
    let degraded = overall(&t_cold) < overall(&t_prod);
    let invariant = s_prod.strata == s_cold.strata;
    outcome(
        degraded && invariant,
        format!(
            "teacher Hits@20 {:.2} -> {:.2} cold; student {:.2} -> {:.2} (identical in every stratum: {invariant})",
            100.0 * overall(&t_prod),
            100.0 * overall(&t_cold),
            100.0 * overall(&s_prod),
            100.0 * overall(&s_cold)
        ),
    )
}

// ---------------------------------------------------------------------------
// 9. latency

fn latency() -> Outcome {
    let g: Graph<f64> = random_graph(100_000, 10.0, 64, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (d, layers) = (256, 2);
    let teacher = LinkModel {
        encoder: Encoder::Sage(SageParams::new(64, d, layers, &mut rng)),
        decoder: DecoderParams::new(d, d, 2, &mut rng),
        seed: 9,
    };
    let student = LinkModel {
        encoder: Encoder::Mlp(MlpParams::new(64, d, layers, &mut rng)),
        decoder: DecoderParams::new(d, d, 2, &mut rng),
        seed: 9,
    };
    let ends = index::sample(&mut rng, g.num_nodes(), 2000).into_vec();
    let pairs: Vec<(usize, usize)> = ends.chunks(2).map(|c| (c[0], c[1])).collect();
    let r = llp_core::eval::bench_inference(&teacher, &student, &g, &pairs, 10).unwrap();
    outcome(
        r.speedup >= 5.0,
        format!(
            "1000 pairs: sage {:.2} ms, mlp {:.2} ms, speedup {:.1}x",
            1e3 * r.reference_median,
            1e3 * r.candidate_median,
            r.speedup
        ),
    )
}

fn main() {
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("gradient correctness", || gradient_checks(100)),
        ("metric oracles", metric_oracles),
        ("rank-loss table", rank_table),
        ("distribution-loss identities", dist_identities),
        ("split fidelity", split_fidelity),
        ("Cora transductive end to end", cora_end_to_end),
        ("structure signal", structure_signal),
        ("cold-start direction", cold_start),
        ("latency direction", latency),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        println!(
            "criterion {}: {} {name} ({:.1}s): {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("{failed} criteria failed");
    if failed > 0 && std::env::var("LLP_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
