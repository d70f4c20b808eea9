//! Training objectives: supervised BCE, direct logit and representation
//! matching, rank-based and distribution-based relational matching.
//!
//! Teacher quantities always enter as plain tensors and are recorded as
//! constants, so no gradient can reach them.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::LinearVars;
use crate::scalar::Scalar;
use crate::tensor::{Tensor, Var};

/// Probabilities are clamped to `[EPS, 1 - EPS]` before taking logs.
pub const EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MatchKind {
    #[default]
    Mse,
    Cosine,
}

impl fmt::Display for MatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchKind::Mse => "mse",
            MatchKind::Cosine => "cosine",
        })
    }
}

impl FromStr for MatchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mse" => Ok(MatchKind::Mse),
            "cosine" => Ok(MatchKind::Cosine),
            other => Err(Error::Config(format!("unknown match kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossConfig {
    /// Weight of the supervised term in direct distillation.
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Rank margin.
    pub delta: f64,
    /// Softmax temperature.
    pub tau: f64,
    pub match_kind: MatchKind,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            delta: 0.05,
            tau: 1.0,
            match_kind: MatchKind::Mse,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Parameter(format!("lambda {} not in [0, 1]", self.lambda)));
        }
        for (name, w) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Parameter(format!("{name} {w} must be >= 0")));
            }
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::Parameter(format!("delta {} must be >= 0", self.delta)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Parameter(format!("tau {} must be > 0", self.tau)));
        }
        Ok(())
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!("{what}: {got} values for {want} predictions")));
    }
    Ok(())
}

/// Mean binary cross-entropy of probabilities `preds` (any shape) against
/// 0/1 `labels`.
pub fn loss_sup<'t, S: Scalar>(preds: Var<'t, S>, labels: &[S]) -> Result<Var<'t, S>> {
    let n = preds.value().len();
    check_len("labels", labels.len(), n)?;
    if n == 0 {
        return Err(Error::Dimension("empty prediction batch".into()));
    }
    let eps = S::lit(EPS);
    let y = preds.clamp(eps, S::one() - eps);
    let pos = Arc::new(labels.to_vec());
    let neg = Arc::new(labels.iter().map(|&a| S::one() - a).collect::<Vec<_>>());
    let ll = y
        .log()
        .mask_mul(pos)?
        .add(y.neg().add_scalar(S::one()).log().mask_mul(neg)?)?;
    Ok(ll.mean().neg())
}

/// Row-wise matching loss averaged over rows: squared L2 distance or
/// `1 - cos`.
pub fn match_rows<'t, S: Scalar>(student: Var<'t, S>, teacher: &Tensor<S>, kind: MatchKind) -> Result<Var<'t, S>> {
    if student.shape() != [teacher.rows(), teacher.cols()] {
        return Err(Error::Dimension(format!(
            "student {:?} vs teacher {:?}",
            student.shape(),
            teacher.shape()
        )));
    }
    let t = student.tape().constant(teacher.clone());
    match kind {
        MatchKind::Mse => Ok(student.sub(t)?.square().sum_axis(1)?.mean()),
        MatchKind::Cosine => {
            let tiny = S::lit(1e-12);
            let dot = student.mul(t)?.sum_axis(1)?;
            let ns = student.square().sum_axis(1)?.add_scalar(tiny).sqrt();
            let nt = t.square().sum_axis(1)?.add_scalar(tiny).sqrt();
            let cos = dot.div(ns.mul(nt)?)?;
            Ok(cos.neg().add_scalar(S::one()).mean())
        }
    }
}

/// `λ·BCE + (1-λ)·match(student, teacher)` over per-edge probabilities.
/// MSE averages over edges; cosine compares the two batch vectors.
pub fn loss_logit_match<'t, S: Scalar>(
    student_preds: Var<'t, S>,
    teacher_preds: &[S],
    labels: &[S],
    lambda: f64,
    kind: MatchKind,
) -> Result<Var<'t, S>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!("lambda {lambda} not in [0, 1]")));
    }
    let n = student_preds.value().len();
    check_len("teacher predictions", teacher_preds.len(), n)?;
    let sup = loss_sup(student_preds, labels)?;
    if lambda == 1.0 {
        return Ok(sup);
    }
    let m = match kind {
        MatchKind::Mse => match_rows(
            student_preds.reshape(n, 1)?,
            &Tensor::new(n, 1, teacher_preds.to_vec())?,
            kind,
        )?,
        MatchKind::Cosine => match_rows(
            student_preds.reshape(1, n)?,
            &Tensor::new(1, n, teacher_preds.to_vec())?,
            kind,
        )?,
    };
    if lambda == 0.0 {
        return Ok(m);
    }
    sup.scale(S::lit(lambda)).add(m.scale(S::lit(1.0 - lambda)))
}

/// `λ·BCE(student_preds) + (1-λ)·mean_i match(ĥ_i, h_i)`. With
/// `projection`, student rows are mapped to the teacher width first.
pub fn loss_repr_match<'t, S: Scalar>(
    student_h: Var<'t, S>,
    teacher_h: &Tensor<S>,
    projection: Option<&LinearVars<'t, S>>,
    student_preds: Var<'t, S>,
    labels: &[S],
    lambda: f64,
    kind: MatchKind,
) -> Result<Var<'t, S>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!("lambda {lambda} not in [0, 1]")));
    }
    let h = match projection {
        Some(p) => p.apply(student_h)?,
        None => student_h,
    };
    if h.shape()[1] != teacher_h.cols() {
        return Err(Error::Dimension(format!(
            "student width {} vs teacher width {} and no projection",
            h.shape()[1],
            teacher_h.cols()
        )));
    }
    let sup = loss_sup(student_preds, labels)?;
    if lambda == 1.0 {
        return Ok(sup);
    }
    let m = match_rows(h, teacher_h, kind)?;
    if lambda == 0.0 {
        return Ok(m);
    }
    sup.scale(S::lit(lambda)).add(m.scale(S::lit(1.0 - lambda)))
}

/// Context scores for a batch of anchors, stored flat: anchor `a` owns
/// entries `offsets[a]..offsets[a + 1]`.
#[derive(Clone, Debug)]
pub struct Segments {
    offsets: Vec<usize>,
}

impl Segments {
    pub fn new(offsets: Vec<usize>) -> Result<Self> {
        if offsets.first() != Some(&0) || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Dimension("segment offsets must start at 0 and not decrease".into()));
        }
        Ok(Self { offsets })
    }

    pub fn from_lengths(lengths: impl IntoIterator<Item = usize>) -> Self {
        let mut offsets = vec![0];
        for l in lengths {
            offsets.push(offsets.last().unwrap() + l);
        }
        Self { offsets }
    }

    pub fn num_segments(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn range(&self, a: usize) -> std::ops::Range<usize> {
        self.offsets[a]..self.offsets[a + 1]
    }
}

/// A relational loss plus the number of anchors that contributed to it.
pub struct Relational<'t, S: Scalar> {
    pub loss: Var<'t, S>,
    /// Anchors with at least two context scores.
    pub anchors: usize,
}

impl<S: Scalar> Relational<'_, S> {
    /// No anchor had two scores to compare; the loss is a constant 0.
    pub fn is_empty(&self) -> bool {
        self.anchors == 0
    }
}

fn check_scores<S: Scalar>(student: &Var<'_, S>, teacher: &[S], seg: &Segments) -> Result<()> {
    let n = student.value().len();
    check_len("teacher scores", teacher.len(), n)?;
    if seg.total() != n {
        return Err(Error::Dimension(format!(
            "segments cover {} scores, got {n}",
            seg.total()
        )));
    }
    Ok(())
}

/// Margin ranking over all unordered context pairs of each anchor: with
/// teacher gap `d = y_i - y_j`, `r = sign(d)` when `|d| > δ` and 0
/// otherwise, each pair costs `max(0, -r·(ŷ_i - ŷ_j) + δ)`. Pair costs are
/// averaged per anchor, then over anchors.
pub fn loss_rank<'t, S: Scalar>(
    student: Var<'t, S>,
    teacher: &[S],
    seg: &Segments,
    delta: S,
) -> Result<Relational<'t, S>> {
    check_scores(&student, teacher, seg)?;
    if delta < S::zero() {
        return Err(Error::Parameter(format!("delta {delta} must be >= 0")));
    }
    let active: Vec<usize> = (0..seg.num_segments()).filter(|&a| seg.range(a).len() >= 2).collect();
    let tape = student.tape();
    if active.is_empty() {
        return Ok(Relational {
            loss: tape.scalar(S::zero()),
            anchors: 0,
        });
    }
    let per_anchor = S::one() / S::of_usize(active.len());
    let (mut left, mut right, mut sign) = (Vec::new(), Vec::new(), Vec::new());
    let mut constant = S::zero();
    for &a in &active {
        let r = seg.range(a);
        let m = r.len();
        let w = per_anchor / S::of_usize(m * (m - 1) / 2);
        for i in r.clone() {
            for j in i + 1..r.end {
                let d = teacher[i] - teacher[j];
                if d > delta {
                    left.push(i);
                    right.push(j);
                    sign.push(-w);
                } else if d < -delta {
                    left.push(i);
                    right.push(j);
                    sign.push(w);
                } else {
                    constant += w * delta;
                }
            }
        }
    }
    let loss = if left.is_empty() {
        tape.scalar(constant)
    } else {
        // relu(-r·g + δ)·w == relu(-r·w·g + w·δ) for w > 0
        let weights: Vec<S> = sign.iter().map(|s| s.abs()).collect();
        let flat = student.reshape(1, teacher.len())?;
        let gap = flat
            .gather_elems(Arc::new(left))?
            .sub(flat.gather_elems(Arc::new(right))?)?;
        let margin_w = Arc::new(weights.iter().map(|&w| w * delta).collect::<Vec<_>>());
        let base = tape.constant(Tensor::new(1, margin_w.len(), margin_w.to_vec())?);
        gap.mask_mul(Arc::new(sign))?
            .add(base)?
            .relu()
            .sum()
            .add_scalar(constant)
    };
    Ok(Relational {
        loss,
        anchors: active.len(),
    })
}

/// Per-anchor `KL(softmax(y/τ) ‖ softmax(ŷ/τ))`, averaged over anchors.
pub fn loss_dist<'t, S: Scalar>(
    student: Var<'t, S>,
    teacher: &[S],
    seg: &Segments,
    tau: S,
) -> Result<Relational<'t, S>> {
    check_scores(&student, teacher, seg)?;
    if !(tau > S::zero()) {
        return Err(Error::Parameter(format!("tau {tau} must be > 0")));
    }
    let active: Vec<usize> = (0..seg.num_segments()).filter(|&a| seg.range(a).len() >= 2).collect();
    let tape = student.tape();
    if active.is_empty() {
        return Ok(Relational {
            loss: tape.scalar(S::zero()),
            anchors: 0,
        });
    }
    let width = active.iter().map(|&a| seg.range(a).len()).max().unwrap();
    let cells = active.len() * width;
    let mut index = vec![0usize; cells];
    let mut mask = vec![false; cells];
    let mut coef = vec![S::zero(); cells];
    let mut constant = S::zero();
    let per_anchor = S::one() / S::of_usize(active.len());
    for (row, &a) in active.iter().enumerate() {
        let r = seg.range(a);
        let ys = &teacher[r.clone()];
        let m = ys.iter().fold(S::neg_infinity(), |m, &y| m.max(y / tau));
        let lse = m + ys.iter().fold(S::zero(), |z, &y| z + (y / tau - m).exp()).ln();
        for (k, (i, &y)) in r.zip(ys).enumerate() {
            let log_p = y / tau - lse;
            let p = log_p.exp();
            let cell = row * width + k;
            index[cell] = i;
            mask[cell] = true;
            coef[cell] = -per_anchor * p;
            constant += per_anchor * p * log_p;
        }
    }
    let log_q = student
        .reshape(1, teacher.len())?
        .gather_elems(Arc::new(index))?
        .reshape(active.len(), width)?
        .log_softmax(tau, Some(Arc::new(mask)))?;
    let loss = log_q.mask_mul(Arc::new(coef))?.sum().add_scalar(constant);
    Ok(Relational {
        loss,
        anchors: active.len(),
    })
}

/// Terms of the combined objective; absent terms are skipped.
#[derive(Clone, Copy, Default)]
pub struct LossParts<'t, S: Scalar> {
    pub sup: Option<Var<'t, S>>,
    pub rank: Option<Var<'t, S>>,
    pub dist: Option<Var<'t, S>>,
}

/// `α·sup + β·rank + γ·dist`. Terms with weight 0 are left out of the
/// graph entirely.
pub fn loss_total<'t, S: Scalar>(parts: &LossParts<'t, S>, alpha: f64, beta: f64, gamma: f64) -> Result<Var<'t, S>> {
    let mut total: Option<Var<'t, S>> = None;
    for (term, w) in [(parts.sup, alpha), (parts.rank, beta), (parts.dist, gamma)] {
        let Some(t) = term else { continue };
        if w == 0.0 {
            continue;
        }
        let t = if w == 1.0 { t } else { t.scale(S::lit(w)) };
        total = Some(match total {
            None => t,
            Some(acc) => acc.add(t)?,
        });
    }
    total.ok_or_else(|| Error::Usage("combined loss has no active term".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tape;

    fn col(v: &[f64]) -> Tensor<f64> {
        Tensor::column_vector(v.to_vec())
    }

    #[test]
    fn bce_of_half_is_ln2() {
        let tape = Tape::new();
        let l = loss_sup(tape.leaf(&col(&[0.5])), &[1.0]).unwrap();
        assert!((l.item().unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn bce_of_exact_labels_is_near_zero() {
        let tape = Tape::new();
        let l = loss_sup(tape.leaf(&col(&[1.0, 0.0, 1.0])), &[1.0, 0.0, 1.0]).unwrap();
        assert!(l.item().unwrap() < 1e-6);
    }

    #[test]
    fn bce_matches_scalar_formula() {
        let y = [0.1, 0.7, 0.45, 0.99, 0.3];
        let a = [0.0, 1.0, 1.0, 1.0, 0.0];
        let tape = Tape::new();
        let l = loss_sup(tape.leaf(&col(&y)), &a).unwrap().item().unwrap();
        let want = -y
            .iter()
            .zip(&a)
            .map(|(y, a)| a * y.ln() + (1.0 - a) * (1.0 - y).ln())
            .sum::<f64>()
            / 5.0;
        assert!((l - want).abs() < 1e-14);
    }

    #[test]
    fn sup_length_mismatch() {
        let tape = Tape::new();
        assert!(matches!(
            loss_sup(tape.leaf(&col(&[0.5, 0.5])), &[1.0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn logit_match_reductions() {
        let y = [0.2, 0.9];
        let t = [0.3, 0.6];
        let a = [0.0, 1.0];
        let tape = Tape::new();
        let s = tape.leaf(&col(&y));
        let sup = loss_sup(s, &a).unwrap().item().unwrap();
        let l1 = loss_logit_match(s, &t, &a, 1.0, MatchKind::Mse).unwrap().item().unwrap();
        assert_eq!(l1, sup);
        let l0 = loss_logit_match(s, &y, &a, 0.0, MatchKind::Mse).unwrap().item().unwrap();
        assert_eq!(l0, 0.0);
        let half = loss_logit_match(s, &t, &a, 0.5, MatchKind::Mse).unwrap().item().unwrap();
        let mse = ((0.2f64 - 0.3).powi(2) + (0.9f64 - 0.6).powi(2)) / 2.0;
        let bce = -((0.8f64).ln() + (0.9f64).ln()) / 2.0;
        assert!((half - (0.5 * bce + 0.5 * mse)).abs() < 1e-14);
        assert!(matches!(
            loss_logit_match(s, &t, &a, 1.5, MatchKind::Mse),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn cosine_of_antiparallel_rows_is_two() {
        let tape = Tape::new();
        let s = tape.leaf(&Tensor::new(2, 2, vec![1.0, 2.0, -3.0, 0.5]).unwrap());
        let t = Tensor::new(2, 2, vec![-2.0, -4.0, 6.0, -1.0]).unwrap();
        let l: f64 = match_rows(s, &t, MatchKind::Cosine).unwrap().item().unwrap();
        assert!((l - 2.0f64).abs() < 1e-10);
    }

    #[test]
    fn repr_match_zero_when_equal_and_rejects_width_mismatch() {
        let tape = Tape::new();
        let h = Tensor::new(2, 3, vec![0.1, 0.2, 0.3, -0.4, 0.5, 0.6]).unwrap();
        let s = tape.leaf(&h);
        let p = tape.leaf(&col(&[0.4, 0.6]));
        let l = loss_repr_match(s, &h, None, p, &[0.0, 1.0], 0.0, MatchKind::Mse).unwrap();
        assert_eq!(l.item().unwrap(), 0.0);
        let wide = Tensor::zeros(2, 4);
        assert!(matches!(
            loss_repr_match(s, &wide, None, p, &[0.0, 1.0], 0.5, MatchKind::Mse),
            Err(Error::Dimension(_))
        ));
    }

    fn rank_one(teacher: [f64; 2], student: [f64; 2], delta: f64) -> (f64, Vec<f64>) {
        let tape = Tape::new();
        let s = tape.leaf(&col(&student));
        let seg = Segments::from_lengths([2]);
        let r = loss_rank(s, &teacher, &seg, delta).unwrap();
        let g = tape.backward(r.loss).unwrap();
        (r.loss.item().unwrap(), g.get(s).unwrap().data().to_vec())
    }

    #[test]
    fn rank_substitution_cases() {
        let (l, _) = rank_one([0.9, 0.2], [0.8, 0.1], 0.1);
        assert!(l.abs() < 1e-15);
        let (l, g) = rank_one([0.50, 0.48], [0.3, 0.9], 0.1);
        assert_eq!(l, 0.1);
        assert_eq!(g, vec![0.0, 0.0]);
        let (l, _) = rank_one([0.2, 0.9], [0.8, 0.1], 0.1);
        assert!((l - 0.8).abs() < 1e-15);
    }

    #[test]
    fn rank_with_short_contexts_is_flagged_empty() {
        let tape = Tape::new();
        let s = tape.leaf(&col(&[0.3, 0.4]));
        let seg = Segments::from_lengths([1, 0, 1]);
        let r = loss_rank(s, &[0.1, 0.2], &seg, 0.05).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.loss.item().unwrap(), 0.0);
    }

    #[test]
    fn dist_two_score_hand_value() {
        let tape = Tape::new();
        let s = tape.leaf(&col(&[0.0, 1.0]));
        let seg = Segments::from_lengths([2]);
        let l = loss_dist(s, &[1.0, 0.0], &seg, 1.0).unwrap().loss.item().unwrap();
        let p = 1.0 / (1.0 + (-1.0f64).exp());
        let q = 1.0 - p;
        let want = p * (p / q).ln() + q * (q / p).ln();
        assert!((l - want).abs() < 1e-14);
    }

    #[test]
    fn dist_rejects_bad_tau() {
        let tape = Tape::new();
        let s = tape.leaf(&col(&[0.0, 1.0]));
        let seg = Segments::from_lengths([2]);
        assert!(matches!(loss_dist(s, &[1.0, 0.0], &seg, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn total_skips_zero_weights() {
        let tape = Tape::new();
        let a = tape.scalar(2.0);
        let b = tape.scalar(f64::NAN);
        let parts = LossParts {
            sup: Some(a),
            rank: Some(b),
            dist: None,
        };
        assert_eq!(loss_total(&parts, 1.0, 0.0, 5.0).unwrap().item().unwrap(), 2.0);
        let l = loss_total(&parts, 10.0, 0.0, 0.0).unwrap().item().unwrap();
        assert_eq!(l, 20.0);
    }

    #[test]
    fn config_validation() {
        assert!(LossConfig::default().validate().is_ok());
        let cfg = LossConfig {
            alpha: 10.0,
            beta: 0.1,
            gamma: 100.0,
            ..LossConfig::default()
        };
        assert!(cfg.validate().is_ok());
        for bad in [
            LossConfig { tau: 0.0, ..LossConfig::default() },
            LossConfig { delta: -0.1, ..LossConfig::default() },
            LossConfig { beta: -1.0, ..LossConfig::default() },
            LossConfig { lambda: 2.0, ..LossConfig::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Parameter(_))));
        }
    }
}
