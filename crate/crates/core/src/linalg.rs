//! Dense row-major `f32` matrices and the handful of products the trainer
//! spends all of its time in.
//!
//! Storage is `f32`; every reduction (dot products, norms, the alignment
//! error) accumulates in `f64` and rounds once at the end. Each output entry
//! of a product is reduced in a fixed order that does not depend on how rows
//! are split across threads, so results are identical for any thread count.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Rows whose Euclidean norm is at or below this are left untouched by
/// [`normalize_rows`].
pub const DEGENERATE_NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    Empty { rows: usize, cols: usize },
    #[error("data length {len} does not match a {rows}x{cols} matrix")]
    DataLength { rows: usize, cols: usize, len: usize },
    #[error("{op}: incompatible shapes {left_rows}x{left_cols} and {right_rows}x{right_cols}")]
    Mismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
}

impl ShapeError {
    fn mismatch(op: &'static str, a: &Matrix, b: &Matrix) -> Self {
        ShapeError::Mismatch {
            op,
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        }
    }
}

/// Contiguous row-major matrix of `f32`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish_non_exhaustive()
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self, ShapeError> {
        if rows == 0 || cols == 0 {
            return Err(ShapeError::Empty { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(ShapeError::DataLength { rows, cols, len: data.len() });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self, ShapeError> {
        Matrix::new(rows, cols, vec![0.0; rows * cols])
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self, ShapeError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(ShapeError::DataLength { rows: rows.len(), cols, len: row.len() });
            }
            data.extend_from_slice(row);
        }
        Matrix::new(rows.len(), cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f32] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f32) {
        self.data[i * self.cols + j] = value;
    }

    pub fn iter_rows(&self) -> core::slice::ChunksExact<'_, f32> {
        self.data.chunks_exact(self.cols)
    }

    pub fn iter_rows_mut(&mut self) -> core::slice::ChunksExactMut<'_, f32> {
        self.data.chunks_exact_mut(self.cols)
    }

    /// Copies rows `start..end` into a new matrix.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Matrix, ShapeError> {
        let end = end.min(self.rows);
        let start = start.min(end);
        Matrix::new(end - start, self.cols, self.data[start * self.cols..end * self.cols].to_vec())
    }

    /// Copies the listed rows, in order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Matrix, ShapeError> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix::new(indices.len(), self.cols, data)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = vec![0.0f32; self.data.len()];
        const BLOCK: usize = 32;
        for ib in (0..self.rows).step_by(BLOCK) {
            for jb in (0..self.cols).step_by(BLOCK) {
                for i in ib..(ib + BLOCK).min(self.rows) {
                    for j in jb..(jb + BLOCK).min(self.cols) {
                        out[j * self.rows + i] = self.data[i * self.cols + j];
                    }
                }
            }
        }
        Matrix { rows: self.cols, cols: self.rows, data: out }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Euclidean norm of every row.
    pub fn row_norms(&self) -> Vec<f64> {
        self.iter_rows().map(norm).collect()
    }
}

/// Winner indices, one per row of the matrix they were taken from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexVector(Vec<usize>);

impl IndexVector {
    pub fn new(values: Vec<usize>) -> Self {
        IndexVector(values)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl core::ops::Index<usize> for IndexVector {
    type Output = usize;

    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

/// `f64`-accumulated dot product of two equally long `f32` slices.
///
/// Terms are added one at a time in index order. The matrix products below
/// reduce every output entry in exactly the same order, so `dot(a_n, b_k)`
/// is bit-identical to entry `(n, k)` of `matmul_nt(a, b)` before rounding.
#[inline]
pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        acc += *x as f64 * *y as f64;
    }
    acc
}

#[inline]
pub fn norm(a: &[f32]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `‖a − b‖²`, accumulated in `f64`.
#[inline]
pub fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = *x as f64 - *y as f64;
            d * d
        })
        .sum()
}

/// `a · bᵀ`: entry `(n, k)` is the dot product of row `n` of `a` with row `k`
/// of `b`.
pub fn matmul_nt(a: &Matrix, b: &Matrix) -> Result<Matrix, ShapeError> {
    let mut out = Matrix::zeros(a.rows, b.rows)?;
    matmul_nt_into(a, b, &mut out)?;
    Ok(out)
}

/// [`matmul_nt`] writing into an existing `a.rows x b.rows` matrix.
pub fn matmul_nt_into(a: &Matrix, b: &Matrix, out: &mut Matrix) -> Result<(), ShapeError> {
    if a.cols != b.cols {
        return Err(ShapeError::mismatch("matmul_nt", a, b));
    }
    if out.rows != a.rows || out.cols != b.rows {
        return Err(ShapeError::mismatch("matmul_nt output", a, out));
    }
    gemm::run(gemm::Operand::RowMajor(a), gemm::Operand::Transposed(b), out);
    Ok(())
}

/// `aᵀ · b` for `a: N x K`, `b: N x d`, giving `K x d`; each entry is reduced
/// over the shared `N` axis in index order.
pub fn matmul_tn(a: &Matrix, b: &Matrix) -> Result<Matrix, ShapeError> {
    let mut out = Matrix::zeros(a.cols, b.cols)?;
    matmul_tn_into(a, b, &mut out)?;
    Ok(out)
}

/// [`matmul_tn`] writing into an existing `a.cols x b.cols` matrix.
pub fn matmul_tn_into(a: &Matrix, b: &Matrix, out: &mut Matrix) -> Result<(), ShapeError> {
    if a.rows != b.rows {
        return Err(ShapeError::mismatch("matmul_tn", a, b));
    }
    if out.rows != a.cols || out.cols != b.cols {
        return Err(ShapeError::mismatch("matmul_tn output", a, out));
    }
    gemm::run(gemm::Operand::Transposed(a), gemm::Operand::RowMajor(b), out);
    Ok(())
}

/// Packed, cache-blocked `C = A·B` with `f32` storage and `f64` accumulation.
///
/// Blocks of A (`MR` rows) and B (`NR` columns) are widened to `f64` and
/// packed depth-major; the micro-kernel then does rank-1 updates of an
/// `MR x NR` tile. Each entry of C is a running sum over the depth axis in
/// index order, regardless of block sizes or threads.
mod gemm {
    use super::Matrix;
    use alloc::vec;
    use alloc::vec::Vec;

    const MR: usize = 6;
    const NR: usize = 16;
    /// Depth block; a depth at or below this is done in one pass.
    const KC: usize = 512;
    /// Rows of C per parallel task.
    const MC: usize = MR * 16;

    /// How a logical operand is stored.
    #[derive(Clone, Copy)]
    pub(super) enum Operand<'a> {
        /// The logical matrix is `m` itself.
        RowMajor(&'a Matrix),
        /// The logical matrix is `mᵀ`.
        Transposed(&'a Matrix),
    }

    impl Operand<'_> {
        /// (rows, cols) of the logical matrix.
        fn shape(&self) -> (usize, usize) {
            match self {
                Operand::RowMajor(m) => (m.rows, m.cols),
                Operand::Transposed(m) => (m.cols, m.rows),
            }
        }

        #[inline]
        fn at(&self, i: usize, j: usize) -> f32 {
            match self {
                Operand::RowMajor(m) => m.data[i * m.cols + j],
                Operand::Transposed(m) => m.data[j * m.cols + i],
            }
        }
    }

    /// Packs logical rows `i0..i0+MR` of `a`, depth `p0..p1`, as `[p][r]`.
    fn pack_a(a: Operand<'_>, i0: usize, p0: usize, p1: usize, out: &mut [f64]) {
        let rows = a.shape().0;
        let kc = p1 - p0;
        match a {
            Operand::RowMajor(m) => {
                for r in 0..MR {
                    let i = i0 + r;
                    if i < rows {
                        let src = &m.data[i * m.cols + p0..i * m.cols + p1];
                        for (p, v) in src.iter().enumerate() {
                            out[p * MR + r] = *v as f64;
                        }
                    } else {
                        for p in 0..kc {
                            out[p * MR + r] = 0.0;
                        }
                    }
                }
            }
            Operand::Transposed(_) => {
                for p in 0..kc {
                    for r in 0..MR {
                        let i = i0 + r;
                        out[p * MR + r] = if i < rows { a.at(i, p0 + p) as f64 } else { 0.0 };
                    }
                }
            }
        }
    }

    /// Packs every logical column of `b` as NR-wide panels, one depth block
    /// after another: `[block][panel][p][c]`.
    fn pack_b(b: Operand<'_>) -> Vec<f64> {
        let (depth, cols) = b.shape();
        let panels = cols.div_ceil(NR);
        let mut out = vec![0.0f64; depth * panels * NR];
        let mut p0 = 0;
        while p0 < depth {
            let p1 = (p0 + KC).min(depth);
            let kc = p1 - p0;
            let base = p0 * panels * NR;
            for panel in 0..panels {
                let dst = &mut out[base + panel * kc * NR..base + (panel + 1) * kc * NR];
                let j0 = panel * NR;
                let width = NR.min(cols - j0);
                match b {
                    Operand::RowMajor(m) => {
                        for p in 0..kc {
                            let src = &m.data[(p0 + p) * m.cols + j0..(p0 + p) * m.cols + j0 + width];
                            for (c, v) in src.iter().enumerate() {
                                dst[p * NR + c] = *v as f64;
                            }
                        }
                    }
                    Operand::Transposed(m) => {
                        for c in 0..width {
                            let src = &m.data[(j0 + c) * m.cols + p0..(j0 + c) * m.cols + p1];
                            for (p, v) in src.iter().enumerate() {
                                dst[p * NR + c] = *v as f64;
                            }
                        }
                    }
                }
            }
            p0 = p1;
        }
        out
    }

    #[inline(always)]
    fn micro_kernel(a: &[f64], b: &[f64], acc: &mut [[f64; NR]; MR]) {
        for (ap, bp) in a.chunks_exact(MR).zip(b.chunks_exact(NR)) {
            let ap: &[f64; MR] = ap.try_into().unwrap();
            let bp: &[f64; NR] = bp.try_into().unwrap();
            for r in 0..MR {
                let av = ap[r];
                for c in 0..NR {
                    acc[r][c] += av * bp[c];
                }
            }
        }
    }

    /// Adds depth block `p0..p1` into the running sums of C rows
    /// `row0..row0 + partial.len() / ncols`.
    fn row_block(a: Operand<'_>, b_block: &[f64], ncols: usize, row0: usize, p0: usize, p1: usize, partial: &mut [f64]) {
        let kc = p1 - p0;
        let rows = partial.len() / ncols;
        let panels = ncols.div_ceil(NR);
        let mut a_panel = vec![0.0f64; kc * MR];
        let mut i = 0;
        while i < rows {
            pack_a(a, row0 + i, p0, p1, &mut a_panel);
            let mr = MR.min(rows - i);
            for panel in 0..panels {
                let j0 = panel * NR;
                let nr = NR.min(ncols - j0);
                let mut acc = [[0.0f64; NR]; MR];
                if p0 > 0 {
                    for r in 0..mr {
                        acc[r][..nr].copy_from_slice(&partial[(i + r) * ncols + j0..(i + r) * ncols + j0 + nr]);
                    }
                }
                micro_kernel(&a_panel, &b_block[panel * kc * NR..(panel + 1) * kc * NR], &mut acc);
                for r in 0..mr {
                    partial[(i + r) * ncols + j0..(i + r) * ncols + j0 + nr].copy_from_slice(&acc[r][..nr]);
                }
            }
            i += MR;
        }
    }

    fn for_each_row_chunk<T: Send, F>(data: &mut [T], chunk: usize, f: F)
    where
        F: Fn((usize, &mut [T])) + Send + Sync,
    {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            data.par_chunks_mut(chunk).enumerate().for_each(f);
        }
        #[cfg(not(feature = "parallel"))]
        {
            data.chunks_mut(chunk).enumerate().for_each(f);
        }
    }

    pub(super) fn run(a: Operand<'_>, b: Operand<'_>, out: &mut Matrix) {
        let depth = a.shape().1;
        debug_assert_eq!(depth, b.shape().0);
        let ncols = b.shape().1;
        let panels = ncols.div_ceil(NR);
        let packed_b = pack_b(b);
        if depth <= KC {
            // One depth block: each task rounds its own rows straight into `out`.
            for_each_row_chunk(&mut out.data, MC * ncols, |(t, chunk)| {
                let mut partial = vec![0.0f64; chunk.len()];
                row_block(a, &packed_b, ncols, t * MC, 0, depth, &mut partial);
                for (o, p) in chunk.iter_mut().zip(&partial) {
                    *o = *p as f32;
                }
            });
            return;
        }
        let mut partial = vec![0.0f64; out.data.len()];
        let mut p0 = 0;
        while p0 < depth {
            let p1 = (p0 + KC).min(depth);
            let b_block = &packed_b[p0 * panels * NR..p1 * panels * NR];
            for_each_row_chunk(&mut partial, MC * ncols, |(t, chunk)| {
                row_block(a, b_block, ncols, t * MC, p0, p1, chunk);
            });
            p0 = p1;
        }
        for (o, p) in out.data.iter_mut().zip(&partial) {
            *o = *p as f32;
        }
    }
}

/// Scales every row with norm above `floor` to unit length, in place.
///
/// Rows at or below the floor are left as they are; their indices are
/// returned so the caller can decide what to do with them.
pub fn normalize_rows(m: &mut Matrix, floor: f64) -> Vec<usize> {
    let mut degenerate = Vec::new();
    for (i, row) in m.iter_rows_mut().enumerate() {
        let n = norm(row);
        if n > floor {
            for v in row.iter_mut() {
                *v = (*v as f64 / n) as f32;
            }
        } else {
            degenerate.push(i);
        }
    }
    degenerate
}

/// Column index of each row's maximum; ties go to the lowest index.
pub fn argmax_rows(m: &Matrix) -> IndexVector {
    IndexVector(m.iter_rows().map(argmax).collect())
}

/// Index of the first maximum of a non-empty slice. NaNs never win.
#[inline]
pub fn argmax(row: &[f32]) -> usize {
    let mut best = 0;
    let mut best_val = f32::NEG_INFINITY;
    for (k, &v) in row.iter().enumerate() {
        if v > best_val {
            best_val = v;
            best = k;
        }
    }
    best
}

/// `1 − (1/K) Σ_k u_k · v_k` for two codebooks of identical shape.
///
/// For unit rows the exact value lies in `[0, 2]`; the result is clamped to
/// that interval because rounding can push a unit-row dot product past 1.
pub fn mean_alignment_error(u: &Matrix, v: &Matrix) -> Result<f64, ShapeError> {
    if u.shape() != v.shape() {
        return Err(ShapeError::mismatch("mean_alignment_error", u, v));
    }
    let total: f64 = u.iter_rows().zip(v.iter_rows()).map(|(a, b)| dot(a, b)).sum();
    let delta = 1.0 - total / u.rows as f64;
    Ok(delta.clamp(0.0, 2.0))
}
