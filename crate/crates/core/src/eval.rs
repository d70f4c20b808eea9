//! Ranking metrics, per-stratum evaluation reports and the inference
//! latency benchmark.

use std::fmt::Write as _;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::{EdgeSet, Graph};
use crate::models::LinkModel;
use crate::scalar::Scalar;
use crate::splits::{ColdStartView, Split, Stratum};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreSet {
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
}

impl ScoreSet {
    pub fn new(pos: Vec<f64>, neg: Vec<f64>) -> Self {
        Self { pos, neg }
    }

    fn check(&self) -> Result<()> {
        if self.pos.is_empty() {
            return Err(Error::UndefinedMetric("no positive scores".into()));
        }
        if self.neg.is_empty() {
            return Err(Error::UndefinedMetric("no negative scores".into()));
        }
        if self.pos.iter().chain(&self.neg).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("score set holds a non-finite score".into()));
        }
        Ok(())
    }
}

/// Fraction of positives scoring strictly above the k-th largest negative;
/// 1.0 when there are fewer than k negatives.
pub fn hits_at_k(s: &ScoreSet, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Parameter("k must be >= 1".into()));
    }
    s.check()?;
    if k > s.neg.len() {
        return Ok(1.0);
    }
    let mut neg = s.neg.clone();
    let (_, kth, _) = neg.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    let threshold = *kth;
    let hits = s.pos.iter().filter(|&&p| p > threshold).count();
    Ok(hits as f64 / s.pos.len() as f64)
}

/// Probability that a random positive outranks a random negative, ties
/// counting one half. Computed from average ranks.
pub fn auc(s: &ScoreSet) -> Result<f64> {
    s.check()?;
    let mut all: Vec<(f64, bool)> = s
        .pos
        .iter()
        .map(|&v| (v, true))
        .chain(s.neg.iter().map(|&v| (v, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // twice the rank sum keeps tied averages integral
    let mut rank2_pos: u128 = 0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let avg2 = (i + 1 + j) as u128;
        let npos = all[i..j].iter().filter(|e| e.1).count() as u128;
        rank2_pos += avg2 * npos;
        i = j;
    }
    let (np, nn) = (s.pos.len() as u128, s.neg.len() as u128);
    let u2 = rank2_pos - np * (np + 1);
    Ok(u2 as f64 / (2 * np * nn) as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StratumMetrics {
    /// `(k, hits@k)` in `[0, 1]`.
    pub hits: Vec<(usize, f64)>,
    pub auc: f64,
    pub num_pos: usize,
    pub num_neg: usize,
}

impl StratumMetrics {
    pub fn compute(s: &ScoreSet, ks: &[usize]) -> Result<Self> {
        let hits = ks
            .iter()
            .map(|&k| Ok((k, hits_at_k(s, k)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            hits,
            auc: auc(s)?,
            num_pos: s.pos.len(),
            num_neg: s.neg.len(),
        })
    }

    pub fn hits(&self, k: usize) -> Option<f64> {
        self.hits.iter().find(|h| h.0 == k).map(|h| h.1)
    }

    fn get(&self, metric: &str) -> Option<f64> {
        if metric == "auc" {
            return Some(self.auc);
        }
        let k = metric.strip_prefix("hits@")?.parse().ok()?;
        self.hits(k)
    }
}

/// Metrics of one model on one split. A stratum without positives or
/// negatives is kept with `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub seed: u64,
    pub strata: Vec<(String, Option<StratumMetrics>)>,
}

impl EvalResult {
    pub fn stratum(&self, name: &str) -> Option<&StratumMetrics> {
        self.strata.iter().find(|s| s.0 == name).and_then(|s| s.1.as_ref())
    }
}

fn pairs(set: &EdgeSet) -> Vec<(usize, usize)> {
    set.iter().map(|e| (e.u, e.v)).collect()
}

fn to_f64<S: Scalar>(v: Vec<S>) -> Vec<f64> {
    v.into_iter().map(|x| x.as_f64()).collect()
}

/// Scores of `pos` and `neg` with message passing over `g`.
pub fn score_sets<S: Scalar>(model: &LinkModel<S>, g: &Graph<S>, pos: &EdgeSet, neg: &EdgeSet) -> Result<ScoreSet> {
    let h = model.encoder.embed_all(g)?;
    Ok(ScoreSet {
        pos: to_f64(model.decoder.score_pairs(&h, &pairs(pos))?),
        neg: to_f64(model.decoder.score_pairs(&h, &pairs(neg))?),
    })
}

fn eval_strata<S: Scalar>(
    model: &LinkModel<S>,
    g: &Graph<S>,
    strata: &[(&str, &EdgeSet, &EdgeSet)],
    ks: &[usize],
    seed: u64,
) -> Result<EvalResult> {
    let h = model.encoder.embed_all(g)?;
    let mut out = Vec::new();
    for &(name, pos, neg) in strata {
        if pos.is_empty() || neg.is_empty() {
            out.push((name.to_string(), None));
            continue;
        }
        let s = ScoreSet {
            pos: to_f64(model.decoder.score_pairs(&h, &pairs(pos))?),
            neg: to_f64(model.decoder.score_pairs(&h, &pairs(neg))?),
        };
        out.push((name.to_string(), Some(StratumMetrics::compute(&s, ks)?)));
    }
    Ok(EvalResult { seed, strata: out })
}

fn production_strata<'a>(strata: [&'a Stratum; 3], all_pos: &'a EdgeSet, all_neg: &'a EdgeSet) -> Vec<(&'a str, &'a EdgeSet, &'a EdgeSet)> {
    let mut v = vec![("overall", all_pos, all_neg)];
    v.extend(strata.iter().map(|s| (s.name.as_str(), &s.pos, &s.neg)));
    v
}

/// Test metrics with the phase-correct message graph: the training graph
/// for transductive splits, the inference graph for production splits.
pub fn evaluate_split<S: Scalar>(model: &LinkModel<S>, split: &Split<S>, ks: &[usize]) -> Result<EvalResult> {
    match split {
        Split::Transductive(t) => eval_strata(
            model,
            &t.message_graph,
            &[("overall", &t.test_pos, &t.test_neg)],
            ks,
            t.seed,
        ),
        Split::Production(p) => {
            let strata = p.strata();
            let all_pos = EdgeSet::union(strata.iter().map(|s| &s.pos));
            let all_neg = EdgeSet::union(strata.iter().map(|s| &s.neg));
            eval_strata(
                model,
                &p.inference_message_graph,
                &production_strata(strata, &all_pos, &all_neg),
                ks,
                p.seed,
            )
        }
    }
}

/// Production test strata scored with every new node isolated.
pub fn evaluate_cold_start<S: Scalar>(model: &LinkModel<S>, view: &ColdStartView<S>, ks: &[usize]) -> Result<EvalResult> {
    let strata = view.split.strata();
    let all_pos = EdgeSet::union(strata.iter().map(|s| &s.pos));
    let all_neg = EdgeSet::union(strata.iter().map(|s| &s.neg));
    eval_strata(
        model,
        &view.message_graph,
        &production_strata(strata, &all_pos, &all_neg),
        ks,
        view.split.seed,
    )
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Per-seed results of one model plus their aggregates. Values are stored
/// as fractions and printed ×100.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub model: String,
    pub ks: Vec<usize>,
    pub runs: Vec<EvalResult>,
}

impl MetricsReport {
    pub fn new(model: impl Into<String>, ks: &[usize]) -> Self {
        Self {
            model: model.into(),
            ks: ks.to_vec(),
            runs: Vec::new(),
        }
    }

    pub fn metric_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.ks.iter().map(|k| format!("hits@{k}")).collect();
        names.push("auc".into());
        names
    }

    pub fn stratum_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.runs {
            for (name, _) in &r.strata {
                if !names.contains(name) {
                    names.push(name.clone());
                }
            }
        }
        names
    }

    /// Raw per-seed values (fractions) of `metric` on `stratum`.
    pub fn values(&self, metric: &str, stratum: &str) -> Vec<f64> {
        self.runs
            .iter()
            .filter_map(|r| r.stratum(stratum).and_then(|m| m.get(metric)))
            .collect()
    }

    /// Mean and standard deviation ×100, or `None` if no run has the stratum.
    pub fn summary(&self, metric: &str, stratum: &str) -> Option<(f64, f64)> {
        let v: Vec<f64> = self.values(metric, stratum).iter().map(|x| x * 100.0).collect();
        if v.is_empty() {
            return None;
        }
        Some(mean_std(&v))
    }

    /// One `metric.stratum.seed = value` line per measurement, followed by
    /// `mean` and `std` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("# model = {}\n", self.model);
        for stratum in self.stratum_names() {
            for metric in self.metric_names() {
                for r in &self.runs {
                    match r.stratum(&stratum).and_then(|m| m.get(&metric)) {
                        Some(v) => {
                            let _ = writeln!(out, "{metric}.{stratum}.{} = {:.2}", r.seed, v * 100.0);
                        }
                        None => {
                            let _ = writeln!(out, "{metric}.{stratum}.{} = absent", r.seed);
                        }
                    }
                }
                if let Some((m, s)) = self.summary(&metric, &stratum) {
                    let _ = writeln!(out, "{metric}.{stratum}.mean = {m:.2}");
                    let _ = writeln!(out, "{metric}.{stratum}.std = {s:.2}");
                }
            }
        }
        out
    }

    /// Human-readable `mean ± std` table.
    pub fn table(&self) -> String {
        let metrics = self.metric_names();
        let mut out = format!("{:<10}", self.model);
        for m in &metrics {
            let _ = write!(out, "{m:>18}");
        }
        out.push('\n');
        for stratum in self.stratum_names() {
            let _ = write!(out, "{stratum:<10}");
            for m in &metrics {
                match self.summary(m, &stratum) {
                    Some((mean, std)) => {
                        let _ = write!(out, "{:>18}", format!("{mean:.2} ± {std:.2}"));
                    }
                    None => {
                        let _ = write!(out, "{:>18}", "absent");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatencyReport {
    pub reference_kind: String,
    pub candidate_kind: String,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub pairs: usize,
    /// Seconds per repetition.
    pub reference_times: Vec<f64>,
    pub candidate_times: Vec<f64>,
    pub reference_median: f64,
    pub candidate_median: f64,
    /// `reference_median / candidate_median`.
    pub speedup: f64,
}

impl LatencyReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "reference = {}", self.reference_kind);
        let _ = writeln!(out, "candidate = {}", self.candidate_kind);
        let _ = writeln!(out, "nodes = {}", self.num_nodes);
        let _ = writeln!(out, "edges = {}", self.num_edges);
        let _ = writeln!(out, "pairs = {}", self.pairs);
        for (i, (r, c)) in self.reference_times.iter().zip(&self.candidate_times).enumerate() {
            let _ = writeln!(out, "time.{}.{i} = {r:.6e}", self.reference_kind);
            let _ = writeln!(out, "time.{}.{i} = {c:.6e}", self.candidate_kind);
        }
        let _ = writeln!(out, "median.{} = {:.6e}", self.reference_kind, self.reference_median);
        let _ = writeln!(out, "median.{} = {:.6e}", self.candidate_kind, self.candidate_median);
        let _ = writeln!(out, "speedup = {:.2}", self.speedup);
        out
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Median wall-clock of end-to-end scoring (embedding the endpoints, then
/// decoding) of `pairs`, after one untimed warm-up per model. Runs on the
/// calling thread.
pub fn bench_inference<S: Scalar>(
    reference: &LinkModel<S>,
    candidate: &LinkModel<S>,
    g: &Graph<S>,
    pairs: &[(usize, usize)],
    repetitions: usize,
) -> Result<LatencyReport> {
    if repetitions == 0 {
        return Err(Error::Parameter("repetitions must be >= 1".into()));
    }
    let time = |m: &LinkModel<S>| -> Result<Vec<f64>> {
        m.score_batch(g, pairs)?;
        (0..repetitions)
            .map(|_| {
                let t = Instant::now();
                m.score_batch(g, pairs)?;
                Ok(t.elapsed().as_secs_f64().max(1e-9))
            })
            .collect()
    };
    let reference_times = time(reference)?;
    let candidate_times = time(candidate)?;
    let reference_median = median(&reference_times);
    let candidate_median = median(&candidate_times);
    Ok(LatencyReport {
        reference_kind: reference.encoder.kind().into(),
        candidate_kind: candidate.encoder.kind().into(),
        num_nodes: g.num_nodes(),
        num_edges: g.num_edges(),
        pairs: pairs.len(),
        reference_times,
        candidate_times,
        reference_median,
        candidate_median,
        speedup: reference_median / candidate_median,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pos: &[f64], neg: &[f64]) -> ScoreSet {
        ScoreSet::new(pos.to_vec(), neg.to_vec())
    }

    #[test]
    fn hits_examples() {
        assert_eq!(hits_at_k(&set(&[0.9, 0.8], &[0.1, 0.2]), 1).unwrap(), 1.0);
        assert_eq!(hits_at_k(&set(&[0.1, 0.2], &[0.8, 0.9]), 2).unwrap(), 0.0);
        assert_eq!(hits_at_k(&set(&[0.9, 0.4], &[0.8, 0.5, 0.3]), 2).unwrap(), 0.5);
        assert_eq!(hits_at_k(&set(&[0.0], &[0.8, 0.5]), 3).unwrap(), 1.0);
    }

    #[test]
    fn hits_ties_do_not_count() {
        assert_eq!(hits_at_k(&set(&[0.5, 0.6], &[0.5, 0.1]), 1).unwrap(), 0.5);
    }

    #[test]
    fn metric_errors() {
        assert!(matches!(hits_at_k(&set(&[], &[0.1]), 1), Err(Error::UndefinedMetric(_))));
        assert!(matches!(hits_at_k(&set(&[0.1], &[0.1]), 0), Err(Error::Parameter(_))));
        assert!(matches!(auc(&set(&[0.1], &[])), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&set(&[0.9, 0.8], &[0.1, 0.2])).unwrap(), 1.0);
        assert_eq!(auc(&set(&[0.5, 0.5], &[0.5, 0.5, 0.5])).unwrap(), 0.5);
        // pairs: (0.6 > 0.5), (0.6 > 0.2), (0.2 < 0.5), (0.2 = 0.2)
        assert_eq!(auc(&set(&[0.6, 0.2], &[0.5, 0.2])).unwrap(), 2.5 / 4.0);
    }

    #[test]
    fn mean_std_values() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert_eq!(s, 1.0);
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
    }

    #[test]
    fn report_text_lists_every_seed_and_absent_strata() {
        let mut r = MetricsReport::new("mlp", &[20]);
        let m = StratumMetrics {
            hits: vec![(20, 0.5)],
            auc: 0.75,
            num_pos: 2,
            num_neg: 2,
        };
        r.runs.push(EvalResult {
            seed: 0,
            strata: vec![("overall".into(), Some(m.clone())), ("NN".into(), None)],
        });
        r.runs.push(EvalResult {
            seed: 1,
            strata: vec![("overall".into(), Some(StratumMetrics { auc: 0.25, ..m })), ("NN".into(), None)],
        });
        let text = r.to_text();
        assert!(text.contains("hits@20.overall.0 = 50.00"));
        assert!(text.contains("auc.overall.mean = 50.00"));
        assert!(text.contains("auc.NN.1 = absent"));
        assert!(!text.contains("auc.NN.mean"));
        assert!(r.table().contains("absent"));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
