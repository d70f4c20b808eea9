use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::kernels::{matmul, MatView};
use super::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Recorded primitive. Parents are node ids on the same tape and always
/// precede the node that references them.
enum Op<S> {
    Leaf,
    Constant,
    MatMul(usize, usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    AddRow(usize, usize),
    Scale(usize, S),
    AddScalar(usize),
    Sigmoid(usize),
    Relu(usize),
    Log(usize),
    Exp(usize),
    Sqrt(usize),
    Clamp(usize, S, S),
    Softmax {
        x: usize,
        tau: S,
    },
    LogSoftmax {
        x: usize,
        tau: S,
    },
    Sum(usize),
    SumAxis(usize, usize),
    Concat {
        parts: Vec<usize>,
        axis: usize,
    },
    MaskMul(usize, Arc<Vec<S>>),
    GatherRows(usize, Arc<Vec<usize>>),
    GatherElems(usize, Arc<Vec<usize>>),
    Reshape(usize),
    SegmentMean {
        x: usize,
        offsets: Arc<Vec<usize>>,
        members: Arc<Vec<usize>>,
    },
}

struct Node<S> {
    value: Arc<Tensor<S>>,
    op: Op<S>,
    /// Optional per-entry validity mask, used by the masked softmax family.
    mask: Option<Arc<Vec<bool>>>,
    requires_grad: bool,
}

/// Define-by-run gradient tape. Build a fresh one for every forward pass.
pub struct Tape<S: Scalar> {
    nodes: RefCell<Vec<Node<S>>>,
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t, S: Scalar> {
    tape: &'t Tape<S>,
    id: usize,
}

impl<S: Scalar> fmt::Debug for Var<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.value();
        write!(f, "Var#{}{:?}", self.id, v.shape())
    }
}

impl<S: Scalar> Default for Tape<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> Tape<S> {
    pub fn new() -> Self {
        Self {
            nodes: RefCell::new(Vec::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, value: Tensor<S>, op: Op<S>, requires_grad: bool) -> Var<'_, S> {
        self.push_masked(value, op, None, requires_grad)
    }

    fn push_masked(
        &self,
        value: Tensor<S>,
        op: Op<S>,
        mask: Option<Arc<Vec<bool>>>,
        requires_grad: bool,
    ) -> Var<'_, S> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value: Arc::new(value),
            op,
            mask,
            requires_grad,
        });
        Var {
            tape: self,
            id: nodes.len() - 1,
        }
    }

    /// Trainable input; receives a gradient on backward.
    pub fn leaf(&self, value: &Tensor<S>) -> Var<'_, S> {
        let mut v = value.clone();
        v.grad = None;
        self.push(v, Op::Leaf, true)
    }

    /// Input that never receives a gradient.
    pub fn constant(&self, value: Tensor<S>) -> Var<'_, S> {
        self.push(value, Op::Constant, false)
    }

    /// Constant input shared without copying (e.g. a node-feature matrix).
    pub fn constant_shared(&self, value: Arc<Tensor<S>>) -> Var<'_, S> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value,
            op: Op::Constant,
            mask: None,
            requires_grad: false,
        });
        Var {
            tape: self,
            id: nodes.len() - 1,
        }
    }

    pub fn scalar(&self, value: S) -> Var<'_, S> {
        self.constant(Tensor::scalar(value))
    }

    fn value_of(&self, id: usize) -> Arc<Tensor<S>> {
        Arc::clone(&self.nodes.borrow()[id].value)
    }

    fn grad_flag(&self, id: usize) -> bool {
        self.nodes.borrow()[id].requires_grad
    }

    /// Concatenate along `axis` (0 stacks rows, 1 appends columns).
    pub fn concat<'t>(&'t self, parts: &[Var<'t, S>], axis: usize) -> Result<Var<'t, S>> {
        if parts.is_empty() {
            return Err(Error::Usage("concat of zero tensors".into()));
        }
        if axis > 1 {
            return Err(Error::Dimension(format!("concat axis {axis} on a 2-d tensor")));
        }
        let values: Vec<_> = parts.iter().map(|p| p.value()).collect();
        let other = 1 - axis;
        let fixed = values[0].shape()[other];
        if values.iter().any(|v| v.shape()[other] != fixed) {
            return Err(Error::Dimension("concat parts disagree off-axis".into()));
        }
        let out = if axis == 0 {
            let rows = values.iter().map(|v| v.rows()).sum();
            let mut data = Vec::with_capacity(rows * fixed);
            for v in &values {
                data.extend_from_slice(v.data());
            }
            Tensor::new(rows, fixed, data)?
        } else {
            let cols: usize = values.iter().map(|v| v.cols()).sum();
            let mut data = Vec::with_capacity(fixed * cols);
            for r in 0..fixed {
                for v in &values {
                    data.extend_from_slice(v.row(r));
                }
            }
            Tensor::new(fixed, cols, data)?
        };
        let rg = parts.iter().any(|p| self.grad_flag(p.id));
        Ok(self.push(
            out,
            Op::Concat {
                parts: parts.iter().map(|p| p.id).collect(),
                axis,
            },
            rg,
        ))
    }

    /// Reverse-mode sweep from a one-element `root`.
    pub fn backward(&self, root: Var<'_, S>) -> Result<Gradients<S>> {
        let nodes = self.nodes.borrow();
        let root_value = &nodes[root.id].value;
        if root_value.len() != 1 {
            return Err(Error::Usage(format!(
                "backward needs a scalar root, got {:?}",
                root_value.shape()
            )));
        }
        if !root_value.is_finite() {
            return Err(Error::NonFinite("backward root".into()));
        }
        let mut grads: Vec<Option<Vec<S>>> = (0..nodes.len()).map(|_| None).collect();
        grads[root.id] = Some(vec![S::one()]);
        for id in (0..=root.id).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &nodes[id];
            if !node.requires_grad {
                continue;
            }
            propagate(&nodes, id, &g, &mut grads);
            if matches!(node.op, Op::Leaf) {
                grads[id] = Some(g);
            }
        }
        let leaves = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n.op, Op::Leaf))
            .map(|(id, n)| {
                let g = grads[id]
                    .take()
                    .unwrap_or_else(|| vec![S::zero(); n.value.len()]);
                (id, Tensor::new(n.value.rows(), n.value.cols(), g).expect("leaf gradient shape"))
            })
            .collect();
        Ok(Gradients { leaves })
    }
}

/// Gradients of every leaf on a tape, keyed by the leaf's [`Var`].
pub struct Gradients<S> {
    leaves: Vec<(usize, Tensor<S>)>,
}

impl<S: Scalar> Gradients<S> {
    pub fn get(&self, var: Var<'_, S>) -> Option<&Tensor<S>> {
        self.leaves
            .binary_search_by_key(&var.id, |(id, _)| *id)
            .ok()
            .map(|i| &self.leaves[i].1)
    }

    /// Copies each leaf's gradient into the matching parameter's `grad` slot.
    pub fn write_into(&self, vars: &[Var<'_, S>], params: &mut [&mut Tensor<S>]) -> Result<()> {
        if vars.len() != params.len() {
            return Err(Error::Usage(format!(
                "{} leaves for {} parameters",
                vars.len(),
                params.len()
            )));
        }
        for (v, p) in vars.iter().zip(params.iter_mut()) {
            let g = self
                .get(*v)
                .ok_or_else(|| Error::Usage("gradient requested for a non-leaf".into()))?;
            if g.shape() != p.shape() {
                return Err(Error::Dimension("gradient/parameter shape mismatch".into()));
            }
            p.grad = Some(g.data().to_vec());
        }
        Ok(())
    }
}

fn accumulate<S: Scalar>(grads: &mut [Option<Vec<S>>], id: usize, len: usize) -> &mut Vec<S> {
    grads[id].get_or_insert_with(|| vec![S::zero(); len])
}

fn add_into<S: Scalar>(
    nodes: &[Node<S>],
    grads: &mut [Option<Vec<S>>],
    id: usize,
    f: impl Fn(usize) -> S,
) {
    if !nodes[id].requires_grad {
        return;
    }
    let len = nodes[id].value.len();
    let buf = accumulate(grads, id, len);
    for (i, b) in buf.iter_mut().enumerate() {
        *b += f(i);
    }
}

fn propagate<S: Scalar>(nodes: &[Node<S>], id: usize, g: &[S], grads: &mut [Option<Vec<S>>]) {
    let node = &nodes[id];
    let out = &node.value;
    match &node.op {
        Op::Leaf | Op::Constant => {}
        Op::MatMul(a, b) => {
            let (av, bv) = (&nodes[*a].value, &nodes[*b].value);
            let gv = MatView::new(g, out.rows(), out.cols());
            if nodes[*a].requires_grad {
                let buf = accumulate(grads, *a, av.len());
                matmul(gv, bv.view().t(), buf, true);
            }
            if nodes[*b].requires_grad {
                let buf = accumulate(grads, *b, bv.len());
                matmul(av.matmul_view().t(), gv, buf, true);
            }
        }
        Op::Add(a, b) => {
            add_into(nodes, grads, *a, |i| g[i]);
            add_into(nodes, grads, *b, |i| g[i]);
        }
        Op::Sub(a, b) => {
            add_into(nodes, grads, *a, |i| g[i]);
            add_into(nodes, grads, *b, |i| -g[i]);
        }
        Op::Mul(a, b) => {
            let (av, bv) = (nodes[*a].value.clone(), nodes[*b].value.clone());
            add_into(nodes, grads, *a, |i| g[i] * bv.data()[i]);
            add_into(nodes, grads, *b, |i| g[i] * av.data()[i]);
        }
        Op::Div(a, b) => {
            let (av, bv) = (nodes[*a].value.clone(), nodes[*b].value.clone());
            add_into(nodes, grads, *a, |i| g[i] / bv.data()[i]);
            add_into(nodes, grads, *b, |i| {
                let d = bv.data()[i];
                -g[i] * av.data()[i] / (d * d)
            });
        }
        Op::AddRow(a, bias) => {
            add_into(nodes, grads, *a, |i| g[i]);
            if nodes[*bias].requires_grad {
                let cols = out.cols();
                let buf = accumulate(grads, *bias, cols);
                for row in g.chunks(cols) {
                    for (b, &v) in buf.iter_mut().zip(row) {
                        *b += v;
                    }
                }
            }
        }
        Op::Scale(a, c) => add_into(nodes, grads, *a, |i| g[i] * *c),
        Op::AddScalar(a) => add_into(nodes, grads, *a, |i| g[i]),
        Op::Sigmoid(a) => {
            let y = out.data();
            add_into(nodes, grads, *a, |i| g[i] * y[i] * (S::one() - y[i]));
        }
        Op::Relu(a) => {
            let x = nodes[*a].value.clone();
            add_into(nodes, grads, *a, |i| {
                if x.data()[i] > S::zero() {
                    g[i]
                } else {
                    S::zero()
                }
            });
        }
        Op::Log(a) => {
            let x = nodes[*a].value.clone();
            add_into(nodes, grads, *a, |i| g[i] / x.data()[i]);
        }
        Op::Exp(a) => {
            let y = out.data();
            add_into(nodes, grads, *a, |i| g[i] * y[i]);
        }
        Op::Sqrt(a) => {
            let y = out.data();
            add_into(nodes, grads, *a, |i| g[i] / (S::lit(2.0) * y[i]));
        }
        Op::Clamp(a, lo, hi) => {
            let x = nodes[*a].value.clone();
            add_into(nodes, grads, *a, |i| {
                let v = x.data()[i];
                if v < *lo || v > *hi {
                    S::zero()
                } else {
                    g[i]
                }
            });
        }
        Op::Softmax { x, tau } => {
            if !nodes[*x].requires_grad {
                return;
            }
            let cols = out.cols();
            let y = out.data();
            let mut dx = vec![S::zero(); y.len()];
            for r in 0..out.rows() {
                let span = r * cols..(r + 1) * cols;
                let dot = g[span.clone()]
                    .iter()
                    .zip(&y[span.clone()])
                    .fold(S::zero(), |s, (a, b)| s + *a * *b);
                for i in span {
                    dx[i] = y[i] * (g[i] - dot) / *tau;
                }
            }
            add_into(nodes, grads, *x, |i| dx[i]);
        }
        Op::LogSoftmax { x, tau } => {
            if !nodes[*x].requires_grad {
                return;
            }
            let cols = out.cols();
            let y = out.data();
            let mask = node.mask.as_deref();
            let live = |i: usize| mask.is_none_or(|m| m[i]);
            let mut dx = vec![S::zero(); y.len()];
            for r in 0..out.rows() {
                let span = r * cols..(r + 1) * cols;
                let gsum = span
                    .clone()
                    .filter(|&i| live(i))
                    .fold(S::zero(), |s, i| s + g[i]);
                for i in span {
                    if live(i) {
                        dx[i] = (g[i] - y[i].exp() * gsum) / *tau;
                    }
                }
            }
            add_into(nodes, grads, *x, |i| dx[i]);
        }
        Op::Sum(a) => add_into(nodes, grads, *a, |_| g[0]),
        Op::SumAxis(a, axis) => {
            let cols = nodes[*a].value.cols();
            if *axis == 0 {
                add_into(nodes, grads, *a, |i| g[i % cols]);
            } else {
                add_into(nodes, grads, *a, |i| g[i / cols]);
            }
        }
        Op::Concat { parts, axis } => {
            if *axis == 0 {
                let mut offset = 0;
                for &p in parts {
                    let len = nodes[p].value.len();
                    add_into(nodes, grads, p, |i| g[offset + i]);
                    offset += len;
                }
            } else {
                let total = out.cols();
                let mut col0 = 0;
                for &p in parts {
                    let pc = nodes[p].value.cols();
                    add_into(nodes, grads, p, |i| g[(i / pc) * total + col0 + i % pc]);
                    col0 += pc;
                }
            }
        }
        Op::MaskMul(a, mask) => add_into(nodes, grads, *a, |i| g[i] * mask[i]),
        Op::Reshape(a) => add_into(nodes, grads, *a, |i| g[i]),
        Op::GatherRows(a, index) => {
            if !nodes[*a].requires_grad {
                return;
            }
            let cols = out.cols();
            let len = nodes[*a].value.len();
            let buf = accumulate(grads, *a, len);
            for (r, &src) in index.iter().enumerate() {
                for c in 0..cols {
                    buf[src * cols + c] += g[r * cols + c];
                }
            }
        }
        Op::GatherElems(a, index) => {
            if !nodes[*a].requires_grad {
                return;
            }
            let len = nodes[*a].value.len();
            let buf = accumulate(grads, *a, len);
            for (k, &src) in index.iter().enumerate() {
                buf[src] += g[k];
            }
        }
        Op::SegmentMean {
            x,
            offsets,
            members,
        } => {
            if !nodes[*x].requires_grad {
                return;
            }
            let cols = out.cols();
            let len = nodes[*x].value.len();
            let buf = accumulate(grads, *x, len);
            for r in 0..offsets.len() - 1 {
                let seg = &members[offsets[r]..offsets[r + 1]];
                if seg.is_empty() {
                    continue;
                }
                let inv = S::one() / S::of_usize(seg.len());
                let grow = &g[r * cols..(r + 1) * cols];
                for &m in seg {
                    let dst = &mut buf[m * cols..(m + 1) * cols];
                    for (d, &v) in dst.iter_mut().zip(grow) {
                        *d += v * inv;
                    }
                }
            }
        }
    }
}

fn same_shape<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "{what}: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

impl<'t, S: Scalar> Var<'t, S> {
    pub fn tape(&self) -> &'t Tape<S> {
        self.tape
    }

    pub fn value(&self) -> Arc<Tensor<S>> {
        self.tape.value_of(self.id)
    }

    pub fn shape(&self) -> [usize; 2] {
        let v = self.value();
        [v.rows(), v.cols()]
    }

    pub fn requires_grad(&self) -> bool {
        self.tape.grad_flag(self.id)
    }

    /// Value of a one-element var.
    pub fn item(&self) -> Result<S> {
        self.value().item()
    }

    fn unary(self, value: Tensor<S>, op: Op<S>) -> Var<'t, S> {
        self.tape.push(value, op, self.requires_grad())
    }

    fn binary(self, other: Var<'t, S>, value: Tensor<S>, op: Op<S>) -> Var<'t, S> {
        let rg = self.requires_grad() || other.requires_grad();
        self.tape.push(value, op, rg)
    }

    fn map(self, f: impl Fn(S) -> S) -> Tensor<S> {
        let v = self.value();
        let data = v.data().iter().map(|&x| f(x)).collect();
        Tensor::new(v.rows(), v.cols(), data).expect("same shape")
    }

    fn zip(self, other: Var<'t, S>, what: &str, f: impl Fn(S, S) -> S) -> Result<Tensor<S>> {
        let (a, b) = (self.value(), other.value());
        same_shape(&a, &b, what)?;
        let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
        Tensor::new(a.rows(), a.cols(), data)
    }

    pub fn matmul(self, other: Var<'t, S>) -> Result<Var<'t, S>> {
        let (a, b) = (self.value(), other.value());
        if a.cols() != b.rows() {
            return Err(Error::Dimension(format!(
                "matmul {:?} x {:?}",
                a.shape(),
                b.shape()
            )));
        }
        let mut out = Tensor::zeros(a.rows(), b.cols());
        matmul(a.matmul_view(), b.view(), out.data_mut(), false);
        Ok(self.binary(other, out, Op::MatMul(self.id, other.id)))
    }

    pub fn add(self, other: Var<'t, S>) -> Result<Var<'t, S>> {
        let v = self.zip(other, "add", |x, y| x + y)?;
        Ok(self.binary(other, v, Op::Add(self.id, other.id)))
    }

    pub fn sub(self, other: Var<'t, S>) -> Result<Var<'t, S>> {
        let v = self.zip(other, "sub", |x, y| x - y)?;
        Ok(self.binary(other, v, Op::Sub(self.id, other.id)))
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(self, other: Var<'t, S>) -> Result<Var<'t, S>> {
        let v = self.zip(other, "mul", |x, y| x * y)?;
        Ok(self.binary(other, v, Op::Mul(self.id, other.id)))
    }

    pub fn div(self, other: Var<'t, S>) -> Result<Var<'t, S>> {
        let v = self.zip(other, "div", |x, y| x / y)?;
        Ok(self.binary(other, v, Op::Div(self.id, other.id)))
    }

    /// Adds a `[1, cols]` row to every row.
    pub fn add_row(self, bias: Var<'t, S>) -> Result<Var<'t, S>> {
        let (a, b) = (self.value(), bias.value());
        if b.rows() != 1 || b.cols() != a.cols() {
            return Err(Error::Dimension(format!(
                "add_row {:?} + {:?}",
                a.shape(),
                b.shape()
            )));
        }
        let mut out = (*a).clone();
        let cols = a.cols();
        for (i, v) in out.data_mut().iter_mut().enumerate() {
            *v += b.data()[i % cols];
        }
        Ok(self.binary(bias, out, Op::AddRow(self.id, bias.id)))
    }

    pub fn scale(self, c: S) -> Var<'t, S> {
        let v = self.map(|x| x * c);
        self.unary(v, Op::Scale(self.id, c))
    }

    pub fn neg(self) -> Var<'t, S> {
        self.scale(-S::one())
    }

    pub fn add_scalar(self, c: S) -> Var<'t, S> {
        let v = self.map(|x| x + c);
        self.unary(v, Op::AddScalar(self.id))
    }

    pub fn sigmoid(self) -> Var<'t, S> {
        let v = self.map(sigmoid);
        self.unary(v, Op::Sigmoid(self.id))
    }

    pub fn relu(self) -> Var<'t, S> {
        let v = self.map(|x| x.max(S::zero()));
        self.unary(v, Op::Relu(self.id))
    }

    pub fn log(self) -> Var<'t, S> {
        let v = self.map(|x| x.ln());
        self.unary(v, Op::Log(self.id))
    }

    pub fn exp(self) -> Var<'t, S> {
        let v = self.map(|x| x.exp());
        self.unary(v, Op::Exp(self.id))
    }

    pub fn sqrt(self) -> Var<'t, S> {
        let v = self.map(|x| x.sqrt());
        self.unary(v, Op::Sqrt(self.id))
    }

    pub fn square(self) -> Var<'t, S> {
        self.mul(self).expect("same var")
    }

    pub fn clamp(self, lo: S, hi: S) -> Var<'t, S> {
        let v = self.map(|x| x.max(lo).min(hi));
        self.unary(v, Op::Clamp(self.id, lo, hi))
    }

    /// Row-wise `softmax(x / tau)`.
    pub fn softmax(self, tau: S) -> Result<Var<'t, S>> {
        check_tau(tau)?;
        let x = self.value();
        let cols = x.cols();
        let mut out = Tensor::zeros(x.rows(), cols);
        for r in 0..x.rows() {
            let row = x.row(r);
            let m = row.iter().fold(S::neg_infinity(), |m, &v| m.max(v / tau));
            let dst = out.row_mut(r);
            let mut z = S::zero();
            for (d, &v) in dst.iter_mut().zip(row) {
                *d = (v / tau - m).exp();
                z += *d;
            }
            dst.iter_mut().for_each(|d| *d /= z);
        }
        Ok(self.unary(out, Op::Softmax { x: self.id, tau }))
    }

    /// Row-wise `log softmax(x / tau)` restricted to entries where `mask`
    /// is true; masked-out entries are 0 and receive no gradient.
    pub fn log_softmax(self, tau: S, mask: Option<Arc<Vec<bool>>>) -> Result<Var<'t, S>> {
        check_tau(tau)?;
        let x = self.value();
        if let Some(m) = &mask {
            if m.len() != x.len() {
                return Err(Error::Dimension("log_softmax mask length".into()));
            }
        }
        let cols = x.cols();
        let live = |i: usize| mask.as_ref().is_none_or(|m| m[i]);
        let mut out = Tensor::zeros(x.rows(), cols);
        for r in 0..x.rows() {
            let base = r * cols;
            let mut m = S::neg_infinity();
            for c in 0..cols {
                if live(base + c) {
                    m = m.max(x.data()[base + c] / tau);
                }
            }
            if m == S::neg_infinity() {
                continue;
            }
            let mut z = S::zero();
            for c in 0..cols {
                if live(base + c) {
                    z += (x.data()[base + c] / tau - m).exp();
                }
            }
            let lse = m + z.ln();
            for c in 0..cols {
                if live(base + c) {
                    out.data_mut()[base + c] = x.data()[base + c] / tau - lse;
                }
            }
        }
        let rg = self.requires_grad();
        Ok(self
            .tape
            .push_masked(out, Op::LogSoftmax { x: self.id, tau }, mask, rg))
    }

    pub fn sum(self) -> Var<'t, S> {
        let s = self.value().data().iter().fold(S::zero(), |a, &b| a + b);
        self.unary(Tensor::scalar(s), Op::Sum(self.id))
    }

    pub fn mean(self) -> Var<'t, S> {
        let n = self.value().len().max(1);
        self.sum().scale(S::one() / S::of_usize(n))
    }

    /// Sum along `axis`: 0 gives `[1, cols]`, 1 gives `[rows, 1]`.
    pub fn sum_axis(self, axis: usize) -> Result<Var<'t, S>> {
        let x = self.value();
        let out = match axis {
            0 => {
                let mut out = Tensor::zeros(1, x.cols());
                for r in 0..x.rows() {
                    for (o, &v) in out.data_mut().iter_mut().zip(x.row(r)) {
                        *o += v;
                    }
                }
                out
            }
            1 => Tensor::column_vector(
                (0..x.rows())
                    .map(|r| x.row(r).iter().fold(S::zero(), |a, &b| a + b))
                    .collect(),
            ),
            _ => return Err(Error::Dimension(format!("axis {axis} on a 2-d tensor"))),
        };
        Ok(self.unary(out, Op::SumAxis(self.id, axis)))
    }

    pub fn mean_axis(self, axis: usize) -> Result<Var<'t, S>> {
        let n = match axis {
            0 => self.shape()[0],
            1 => self.shape()[1],
            _ => return Err(Error::Dimension(format!("axis {axis} on a 2-d tensor"))),
        };
        Ok(self.sum_axis(axis)?.scale(S::one() / S::of_usize(n.max(1))))
    }

    /// Multiplies by a fixed mask (same shape); used for dropout.
    pub fn mask_mul(self, mask: Arc<Vec<S>>) -> Result<Var<'t, S>> {
        let x = self.value();
        if mask.len() != x.len() {
            return Err(Error::Dimension("mask length".into()));
        }
        let data = x.data().iter().zip(mask.iter()).map(|(&a, &m)| a * m).collect();
        let out = Tensor::new(x.rows(), x.cols(), data)?;
        Ok(self.unary(out, Op::MaskMul(self.id, mask)))
    }

    /// Inverted dropout: zero each entry with probability `rate`, scale the
    /// survivors by `1 / (1 - rate)`.
    pub fn dropout<R: Rng + ?Sized>(self, rate: f64, rng: &mut R) -> Result<Var<'t, S>> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::Parameter(format!("dropout rate {rate} not in [0, 1)")));
        }
        if rate == 0.0 {
            return Ok(self);
        }
        let keep = S::lit(1.0 / (1.0 - rate));
        let mask: Vec<S> = (0..self.value().len())
            .map(|_| if rng.gen::<f64>() < rate { S::zero() } else { keep })
            .collect();
        self.mask_mul(Arc::new(mask))
    }

    pub fn gather_rows(self, index: Arc<Vec<usize>>) -> Result<Var<'t, S>> {
        let x = self.value();
        if let Some(&bad) = index.iter().find(|&&i| i >= x.rows()) {
            return Err(Error::Dimension(format!("row {bad} of {}", x.rows())));
        }
        let out = x.gather_rows(&index);
        Ok(self.unary(out, Op::GatherRows(self.id, index)))
    }

    /// Picks flat (row-major) entries into a `[1, index.len()]` row.
    pub fn gather_elems(self, index: Arc<Vec<usize>>) -> Result<Var<'t, S>> {
        let x = self.value();
        if let Some(&bad) = index.iter().find(|&&i| i >= x.len()) {
            return Err(Error::Dimension(format!("element {bad} of {}", x.len())));
        }
        let out = Tensor::row_vector(index.iter().map(|&i| x.data()[i]).collect());
        Ok(self.unary(out, Op::GatherElems(self.id, index)))
    }

    /// Same data in row-major order under a new shape.
    pub fn reshape(self, rows: usize, cols: usize) -> Result<Var<'t, S>> {
        let x = self.value();
        let out = Tensor::new(rows, cols, x.data().to_vec())?;
        Ok(self.unary(out, Op::Reshape(self.id)))
    }

    /// Row `r` of the output is the mean of rows `members[offsets[r]..offsets[r+1]]`
    /// of `self`; empty segments give the zero row.
    pub fn segment_mean(
        self,
        offsets: Arc<Vec<usize>>,
        members: Arc<Vec<usize>>,
    ) -> Result<Var<'t, S>> {
        let x = self.value();
        if offsets.is_empty() || *offsets.last().unwrap() != members.len() {
            return Err(Error::Dimension("segment offsets do not cover members".into()));
        }
        if members.iter().any(|&m| m >= x.rows()) {
            return Err(Error::Dimension("segment member out of range".into()));
        }
        let cols = x.cols();
        let segs = offsets.len() - 1;
        let mut out = Tensor::zeros(segs, cols);
        for r in 0..segs {
            let seg = &members[offsets[r]..offsets[r + 1]];
            if seg.is_empty() {
                continue;
            }
            let inv = S::one() / S::of_usize(seg.len());
            let dst = out.row_mut(r);
            for &m in seg {
                for (d, &v) in dst.iter_mut().zip(x.row(m)) {
                    *d += v;
                }
            }
            dst.iter_mut().for_each(|d| *d *= inv);
        }
        Ok(self.unary(
            out,
            Op::SegmentMean {
                x: self.id,
                offsets,
                members,
            },
        ))
    }
}

fn check_tau<S: Scalar>(tau: S) -> Result<()> {
    if tau <= S::zero() || !tau.is_finite() {
        return Err(Error::Parameter(format!("temperature {tau} must be > 0")));
    }
    Ok(())
}

#[inline]
pub(crate) fn sigmoid<S: Scalar>(x: S) -> S {
    if x >= S::zero() {
        S::one() / (S::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (S::one() + e)
    }
}
