use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::C64;
use crate::error::{invalid, Error, Result};

/// Complex matrix stored by its nonzero entries.
///
/// Construction takes an arbitrary list of `(row, col, value)` triplets;
/// duplicates are summed and the result is kept in compressed-row form with
/// sorted column indices, so every stored key is unique.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseComplexMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl SparseComplexMatrix {
    /// Builds a matrix from triplets, summing duplicate keys and dropping
    /// entries that end up exactly zero.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        entries: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        let mut t: Vec<(usize, usize, C64)> = entries.into_iter().collect();
        for &(r, c, v) in &t {
            if r >= nrows || c >= ncols {
                return Err(invalid("triplet index out of bounds"));
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite("matrix entry".into()));
            }
        }
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<C64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        let m = Self { nrows, ncols, indptr, indices, data };
        Ok(m.pruned())
    }

    /// All-zero `nrows × ncols` matrix.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), data: Vec::new() }
    }

    /// Identity of size `n`.
    pub fn identity(n: usize) -> Self {
        Self::from_diagonal((0..n).map(|_| C64::new(1.0, 0.0)))
    }

    /// Square diagonal matrix.
    pub fn from_diagonal(diag: impl IntoIterator<Item = C64>) -> Self {
        let d: Vec<C64> = diag.into_iter().collect();
        let n = d.len();
        Self::from_triplets(n, n, d.into_iter().enumerate().map(|(i, v)| (i, i, v)))
            .expect("diagonal entries are in bounds")
    }

    /// Square diagonal matrix with real entries.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_diagonal(diag.iter().map(|&x| C64::new(x, 0.0)))
    }

    /// Converts a row-major dense array, keeping nonzero entries.
    pub fn from_dense(nrows: usize, ncols: usize, values: &[C64]) -> Result<Self> {
        if values.len() != nrows * ncols {
            return Err(Error::DimensionMismatch { expected: nrows * ncols, found: values.len() });
        }
        Self::from_triplets(
            nrows,
            ncols,
            values.iter().enumerate().map(|(k, &v)| (k / ncols, k % ncols, v)),
        )
    }

    /// Converts a dense nalgebra matrix.
    pub fn from_dmatrix(m: &DMatrix<C64>) -> Self {
        let (r, c) = m.shape();
        Self::from_triplets(
            r,
            c,
            (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).map(|(i, j)| (i, j, m[(i, j)])),
        )
        .expect("dense entries are in bounds")
    }

    /// Dense copy.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.nrows, self.ncols, C64::new(0.0, 0.0));
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    /// Number of rows.
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    /// Number of columns.
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// True for square matrices.
    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Entry `(r, c)`, zero if not stored.
    pub fn get(&self, r: usize, c: usize) -> C64 {
        let row = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        match row.binary_search(&c) {
            Ok(k) => self.data[self.indptr[r] + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Iterates stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.data[k]))
        })
    }

    /// Stored entries of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.data[k]))
    }

    /// Main diagonal (square part).
    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// y = A·x into a caller-provided buffer.
    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols, "matrix-vector dimension mismatch");
        assert_eq!(y.len(), self.nrows, "matrix-vector dimension mismatch");
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                s += self.data[k] * x[self.indices[k]];
            }
            *yr = s;
        }
    }

    /// A·x.
    pub fn mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, found: x.len() });
        }
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.mul_vec_into(x, &mut y);
        Ok(y)
    }

    /// ⟨x|A|x⟩ (x need not be normalized).
    pub fn expectation(&self, x: &[C64]) -> Result<C64> {
        let y = self.mul_vec(x)?;
        Ok(super::vector::dot(x, &y))
    }

    /// Elementwise α·A.
    pub fn scale(&self, alpha: C64) -> Self {
        let mut m = self.clone();
        for v in &mut m.data {
            *v *= alpha;
        }
        m.pruned()
    }

    /// Elementwise α·A for real α.
    pub fn scale_real(&self, alpha: f64) -> Self {
        self.scale(C64::new(alpha, 0.0))
    }

    /// Σₖ αₖ·Aₖ over same-shaped matrices.
    pub fn lin_comb(terms: &[(C64, &SparseComplexMatrix)]) -> Result<Self> {
        let (_, first) = terms.first().ok_or_else(|| invalid("empty linear combination"))?;
        let (nr, nc) = (first.nrows, first.ncols);
        let mut t = Vec::new();
        for (alpha, m) in terms {
            if m.nrows != nr || m.ncols != nc {
                return Err(Error::DimensionMismatch { expected: nr * nc, found: m.nrows * m.ncols });
            }
            t.extend(m.iter().map(|(r, c, v)| (r, c, alpha * v)));
        }
        Self::from_triplets(nr, nc, t)
    }

    /// A + B.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        Self::lin_comb(&[(one, self), (one, other)])
    }

    /// A − B.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::lin_comb(&[(C64::new(1.0, 0.0), self), (C64::new(-1.0, 0.0), other)])
    }

    /// Matrix product A·B.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch { expected: self.ncols, found: other.nrows });
        }
        let mut acc = vec![C64::new(0.0, 0.0); other.ncols];
        let mut seen = vec![false; other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != C64::new(0.0, 0.0) {
                    indices.push(c);
                    data.push(acc[c]);
                }
                acc[c] = C64::new(0.0, 0.0);
                seen[c] = false;
            }
            touched.clear();
            indptr[r + 1] = indices.len();
        }
        Ok(Self { nrows: self.nrows, ncols: other.ncols, indptr, indices, data })
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.iter().map(|(r, c, v)| (c, r, v.conj())))
            .expect("transposed indices are in bounds")
    }

    /// Plain transpose.
    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.iter().map(|(r, c, v)| (c, r, v)))
            .expect("transposed indices are in bounds")
    }

    /// max |A_ij − conj(A_ji)|; infinite for non-square matrices.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for (r, c, v) in self.iter() {
            dev = dev.max((v - self.get(c, r).conj()).norm());
        }
        dev
    }

    /// Hermiticity check with absolute tolerance `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm1(&self) -> f64 {
        let mut col = vec![0.0f64; self.ncols];
        for (_, c, v) in self.iter() {
            col[c] += v.norm();
        }
        col.into_iter().fold(0.0, f64::max)
    }

    /// Largest entrywise |A − B|.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    fn pruned(mut self) -> Self {
        if self.data.iter().all(|v| *v != C64::new(0.0, 0.0)) {
            return self;
        }
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.data[k] != C64::new(0.0, 0.0) {
                    indices.push(self.indices[k]);
                    data.push(self.data[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.data = data;
        self
    }
}

/// Kronecker product of a list of matrices, leftmost factor varying slowest.
pub fn kron(factors: &[&SparseComplexMatrix]) -> Result<SparseComplexMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| invalid("Kronecker product of an empty list"))?;
    let mut acc = (*first).clone();
    for b in rest {
        acc = kron2(&acc, b);
    }
    Ok(acc)
}

fn kron2(a: &SparseComplexMatrix, b: &SparseComplexMatrix) -> SparseComplexMatrix {
    let nrows = a.nrows * b.nrows;
    let ncols = a.ncols * b.ncols;
    let mut indptr = Vec::with_capacity(nrows + 1);
    indptr.push(0);
    let mut indices = Vec::with_capacity(a.nnz() * b.nnz());
    let mut data = Vec::with_capacity(a.nnz() * b.nnz());
    for ra in 0..a.nrows {
        for rb in 0..b.nrows {
            // Column index ca·q + cb is increasing because both rows are sorted.
            for (ca, va) in a.row(ra) {
                for (cb, vb) in b.row(rb) {
                    indices.push(ca * b.ncols + cb);
                    data.push(va * vb);
                }
            }
            indptr.push(indices.len());
        }
    }
    SparseComplexMatrix { nrows, ncols, indptr, indices, data }
}
