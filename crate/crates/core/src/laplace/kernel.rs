use nalgebra::{DMatrix, DVector};

use super::T2Grid;
use crate::{Error, Result};

/// Dense exponential kernel `K_ij = exp(-t_i / T2_j)`.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    pub entries: DMatrix<f64>,
    pub grid: T2Grid,
    pub times: Vec<f64>,
}

pub fn build_kernel(times: &[f64], grid: &T2Grid) -> Result<KernelMatrix> {
    if times.is_empty() {
        return Err(Error::invalid("kernel needs at least one time"));
    }
    if times[0] < 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("kernel times must be >= 0 and strictly increasing"));
    }
    let g = grid.points();
    let entries = DMatrix::from_fn(times.len(), g.len(), |i, j| (-times[i] / g[j]).exp());
    Ok(KernelMatrix { entries, grid: grid.clone(), times: times.to_vec() })
}

/// Truncated-SVD factorisation `K ~ U_r diag(sigma_r) V_r^T`.
#[derive(Clone, Debug)]
pub struct CompressedKernel {
    pub singular_values: Vec<f64>,
    /// Reduced operator `diag(sigma_r) V_r^T` (r x n).
    pub operator: DMatrix<f64>,
    /// Data transform `U_r^T` (r x m).
    pub transform: DMatrix<f64>,
}

impl CompressedKernel {
    pub fn rank(&self) -> usize {
        self.operator.nrows()
    }

    pub fn project(&self, data: &[f64]) -> Result<DVector<f64>> {
        if data.len() != self.transform.ncols() {
            return Err(Error::invalid("data length differs from kernel rows"));
        }
        Ok(&self.transform * DVector::from_column_slice(data))
    }
}

/// Keeps singular values `sigma_k >= rank_tol * sigma_1`.
pub fn compress_kernel(k: &KernelMatrix, rank_tol: f64) -> Result<CompressedKernel> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::invalid("rank_tol must lie in (0, 1)"));
    }
    let (u, s, vt) = sorted_svd(k.entries.clone());
    let r = rank_of(&s, rank_tol);
    let operator = DMatrix::from_fn(r, vt.ncols(), |i, j| s[i] * vt[(i, j)]);
    let transform = u.columns(0, r).transpose();
    Ok(CompressedKernel { singular_values: s[..r].to_vec(), operator, transform })
}

pub(crate) fn rank_of(s: &[f64], rank_tol: f64) -> usize {
    if s.is_empty() || !(s[0] > 0.0) {
        return 0;
    }
    s.iter().take_while(|&&x| x >= rank_tol * s[0]).count()
}

/// Thin SVD with singular values sorted in descending order.
pub(crate) fn sorted_svd(m: DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = m.svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let s = svd.singular_values;
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let u2 = DMatrix::from_fn(u.nrows(), idx.len(), |i, j| u[(i, idx[j])]);
    let vt2 = DMatrix::from_fn(idx.len(), vt.ncols(), |i, j| vt[(idx[i], j)]);
    (u2, idx.iter().map(|&i| s[i]).collect(), vt2)
}

/// Streaming block QR of a tall matrix `[A | b]` fed in row chunks.
///
/// Only the (n+1) x (n+1) triangular factor is kept, so arbitrarily many rows
/// can be absorbed with O(n^2) memory.
pub(crate) struct RowCompressor {
    ncols: usize,
    r: Option<DMatrix<f64>>,
    buf: Vec<f64>,
    buf_rows: usize,
    chunk: usize,
}

impl RowCompressor {
    pub fn new(ncols: usize) -> Self {
        let chunk = (4 * ncols).max(256);
        RowCompressor { ncols, r: None, buf: Vec::with_capacity(chunk * ncols), buf_rows: 0, chunk }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.ncols);
        self.buf.extend_from_slice(row);
        self.buf_rows += 1;
        if self.buf_rows == self.chunk {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.buf_rows == 0 {
            return;
        }
        let prev = self.r.as_ref().map_or(0, |r| r.nrows());
        let rows = prev + self.buf_rows;
        let mut m = DMatrix::zeros(rows, self.ncols);
        if let Some(r) = &self.r {
            m.view_mut((0, 0), (prev, self.ncols)).copy_from(r);
        }
        for i in 0..self.buf_rows {
            for j in 0..self.ncols {
                m[(prev + i, j)] = self.buf[i * self.ncols + j];
            }
        }
        self.buf.clear();
        self.buf_rows = 0;
        self.r = Some(m.qr().r());
    }

    /// Upper-triangular factor, padded with zero rows to `ncols x ncols`.
    pub fn finish(mut self) -> DMatrix<f64> {
        self.flush();
        let n = self.ncols;
        let mut out = DMatrix::zeros(n, n);
        if let Some(r) = self.r {
            let k = r.nrows().min(n);
            out.view_mut((0, 0), (k, n)).copy_from(&r.rows(0, k));
        }
        out
    }
}
