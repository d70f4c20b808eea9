use crate::scalar::Scalar;

/// Compressed rows of a mostly-zero matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRows<S> {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<S>,
}

impl<S: Scalar> SparseRows<S> {
    /// `None` unless the fill ratio is below the sparse threshold.
    pub fn from_dense(data: &[S], rows: usize, cols: usize) -> Option<Self> {
        if data.is_empty() {
            return None;
        }
        let nnz = data.iter().filter(|v| !v.is_zero()).count();
        if nnz as f64 / data.len() as f64 >= SPARSE_DENSITY {
            return None;
        }
        let mut out = Self {
            offsets: Vec::with_capacity(rows + 1),
            cols: Vec::with_capacity(nnz),
            vals: Vec::with_capacity(nnz),
        };
        out.offsets.push(0);
        for row in data.chunks(cols) {
            for (c, &v) in row.iter().enumerate() {
                if !v.is_zero() {
                    out.cols.push(c);
                    out.vals.push(v);
                }
            }
            out.offsets.push(out.cols.len());
        }
        Some(out)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

/// Borrowed row-major matrix, optionally read as its transpose.
#[derive(Clone, Copy, Debug)]
pub struct MatView<'a, S> {
    data: &'a [S],
    stored_rows: usize,
    stored_cols: usize,
    transposed: bool,
    sparse: Option<&'a SparseRows<S>>,
}

impl<'a, S: Scalar> MatView<'a, S> {
    pub fn new(data: &'a [S], rows: usize, cols: usize) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self {
            data,
            stored_rows: rows,
            stored_cols: cols,
            transposed: false,
            sparse: None,
        }
    }

    /// Attaches a compressed copy of the same matrix.
    pub fn with_sparse(self, sparse: Option<&'a SparseRows<S>>) -> Self {
        Self { sparse, ..self }
    }

    pub fn t(self) -> Self {
        Self {
            transposed: !self.transposed,
            ..self
        }
    }

    pub fn rows(&self) -> usize {
        if self.transposed {
            self.stored_cols
        } else {
            self.stored_rows
        }
    }

    pub fn cols(&self) -> usize {
        if self.transposed {
            self.stored_rows
        } else {
            self.stored_cols
        }
    }

    fn strides(&self) -> (isize, isize) {
        let c = self.stored_cols as isize;
        if self.transposed {
            (1, c)
        } else {
            (c, 1)
        }
    }
}

/// Left operands below this fill ratio go through the zero-skipping kernel.
/// Bag-of-words node features sit far below it.
const SPARSE_DENSITY: f64 = 0.05;

/// `out (+)= a * b` where `out` is a row-major `a.rows() x b.cols()` buffer.
pub fn matmul<S: Scalar>(a: MatView<'_, S>, b: MatView<'_, S>, out: &mut [S], accumulate: bool) {
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    assert_eq!(k, b.rows(), "inner dimensions must agree");
    assert_eq!(out.len(), m * n, "output buffer has wrong size");
    if !accumulate {
        out.iter_mut().for_each(|v| *v = S::zero());
    }
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    if let (Some(sp), false) = (a.sparse, b.transposed) {
        sparse_left(sp, a.transposed, b, out);
        return;
    }
    let (rsa, csa) = a.strides();
    let (rsb, csb) = b.strides();
    // SAFETY: the views were constructed over slices of exactly
    // stored_rows * stored_cols elements and out has m * n elements.
    unsafe {
        S::gemm(
            m,
            k,
            n,
            S::one(),
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            S::one(),
            out.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

fn sparse_left<S: Scalar>(a: &SparseRows<S>, transposed: bool, b: MatView<'_, S>, out: &mut [S]) {
    let n = b.cols();
    for r in 0..a.offsets.len() - 1 {
        for idx in a.offsets[r]..a.offsets[r + 1] {
            let (c, v) = (a.cols[idx], a.vals[idx]);
            let (i, kk) = if transposed { (c, r) } else { (r, c) };
            let brow = &b.data[kk * n..(kk + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += v * bv;
            }
        }
    }
}
