//! Dense row-major tensors with a define-by-run reverse-mode tape.
//!
//! Every tensor is two-dimensional (`[rows, cols]`); vectors are `[1, n]`
//! or `[n, 1]` and scalars are `[1, 1]`. That is all the models and losses
//! in this crate need.

mod kernels;
mod optim;
mod tape;

pub use kernels::{matmul, MatView, SparseRows};
pub use optim::{Adam, AdamConfig};
pub use tape::{Gradients, Tape, Var};

use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct Tensor<S> {
    shape: [usize; 2],
    data: Vec<S>,
    /// Gradient buffer filled after a backward pass; same shape as `data`.
    pub grad: Option<Vec<S>>,
    /// Compressed copy, built on first use as a matmul left operand.
    sparse: OnceLock<Option<SparseRows<S>>>,
}

impl<S: PartialEq> PartialEq for Tensor<S> {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.data == other.data && self.grad == other.grad
    }
}

impl<S: Scalar> Tensor<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values cannot fill a {rows}x{cols} tensor",
                data.len()
            )));
        }
        Ok(Self {
            shape: [rows, cols],
            data,
            grad: None,
            sparse: OnceLock::new(),
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            shape: [rows, cols],
            data: vec![S::zero(); rows * cols],
            grad: None,
            sparse: OnceLock::new(),
        }
    }

    pub fn filled(rows: usize, cols: usize, value: S) -> Self {
        Self {
            shape: [rows, cols],
            data: vec![value; rows * cols],
            grad: None,
            sparse: OnceLock::new(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self {
            shape: [rows, cols],
            data,
            grad: None,
            sparse: OnceLock::new(),
        }
    }

    pub fn scalar(value: S) -> Self {
        Self::filled(1, 1, value)
    }

    pub fn row_vector(values: Vec<S>) -> Self {
        let n = values.len();
        Self {
            shape: [1, n],
            data: values,
            grad: None,
            sparse: OnceLock::new(),
        }
    }

    pub fn column_vector(values: Vec<S>) -> Self {
        let n = values.len();
        Self {
            shape: [n, 1],
            data: values,
            grad: None,
            sparse: OnceLock::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { S::one() } else { S::zero() })
    }

    /// Xavier/Glorot uniform initialisation for a `fan_in x fan_out` weight.
    pub fn xavier_uniform<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let bound = (6.0 / (fan_in + fan_out).max(1) as f64).sqrt();
        Self::from_fn(fan_in, fan_out, |_, _| S::lit(rng.gen_range(-bound..=bound)))
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        self.sparse = OnceLock::new();
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        self.data[r * self.shape[1] + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: S) {
        let cols = self.shape[1];
        self.sparse = OnceLock::new();
        self.data[r * cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[S] {
        let c = self.shape[1];
        &self.data[r * c..(r + 1) * c]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [S] {
        let c = self.shape[1];
        self.sparse = OnceLock::new();
        &mut self.data[r * c..(r + 1) * c]
    }

    /// Value of a one-element tensor.
    pub fn item(&self) -> Result<S> {
        if self.data.len() != 1 {
            return Err(Error::Dimension(format!(
                "item() on a {}x{} tensor",
                self.shape[0], self.shape[1]
            )));
        }
        Ok(self.data[0])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn zero_grad(&mut self) {
        self.grad = None;
    }

    /// Plain dense view.
    pub fn view(&self) -> MatView<'_, S> {
        MatView::new(&self.data, self.shape[0], self.shape[1])
    }

    /// View carrying a cached compressed copy when the tensor is sparse
    /// enough for the zero-skipping kernel.
    pub fn matmul_view(&self) -> MatView<'_, S> {
        let sparse = self
            .sparse
            .get_or_init(|| SparseRows::from_dense(&self.data, self.shape[0], self.shape[1]));
        self.view().with_sparse(sparse.as_ref())
    }

    /// Rows selected by `index`, in that order.
    pub fn gather_rows(&self, index: &[usize]) -> Self {
        let c = self.shape[1];
        let mut data = Vec::with_capacity(index.len() * c);
        for &i in index {
            data.extend_from_slice(self.row(i));
        }
        Self {
            shape: [index.len(), c],
            data,
            grad: None,
            sparse: OnceLock::new(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        self.data
            .iter()
            .zip(&other.data)
            .fold(S::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn cast<T: Scalar>(&self) -> Tensor<T> {
        Tensor {
            shape: self.shape,
            data: self.data.iter().map(|v| T::lit(v.as_f64())).collect(),
            grad: None,
            sparse: OnceLock::new(),
        }
    }
}
