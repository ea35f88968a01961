//! Dense and compressed-sparse-row matrices behind one product interface.
//!
//! Every solver in this crate touches the data matrix only through
//! mat-vec, transpose-mat-vec, row dot products, and column extraction, so
//! both layouts are interchangeable.

/// Row-major dense or CSR sparse matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Dense {
        rows: usize,
        cols: usize,
        /// Row-major, `rows * cols` entries.
        data: Vec<f64>,
    },
    Csr {
        rows: usize,
        cols: usize,
        /// `rows + 1` offsets into `indices`/`values`.
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

impl Matrix {
    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "dense: bad data length");
        Matrix::Dense { rows, cols, data }
    }

    pub fn dense_from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "dense_from_rows: no rows");
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "dense_from_rows: ragged rows");
            data.extend_from_slice(r);
        }
        Matrix::dense(rows.len(), cols, data)
    }

    pub fn csr(
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        assert_eq!(indptr.len(), rows + 1, "csr: bad indptr length");
        assert_eq!(indices.len(), values.len(), "csr: indices/values mismatch");
        assert_eq!(*indptr.last().unwrap(), indices.len(), "csr: bad final offset");
        debug_assert!(indices.iter().all(|&j| j < cols), "csr: column index out of range");
        Matrix::Csr { rows, cols, indptr, indices, values }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Matrix::dense(n, n, data)
    }

    pub fn rows(&self) -> usize {
        match self {
            Matrix::Dense { rows, .. } | Matrix::Csr { rows, .. } => *rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Matrix::Dense { cols, .. } | Matrix::Csr { cols, .. } => *cols,
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, Matrix::Dense { .. })
    }

    pub fn nnz(&self) -> usize {
        match self {
            Matrix::Dense { data, .. } => data.iter().filter(|v| **v != 0.0).count(),
            Matrix::Csr { values, .. } => values.len(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows() && j < self.cols(), "get: index out of range");
        match self {
            Matrix::Dense { cols, data, .. } => data[i * cols + j],
            Matrix::Csr { indptr, indices, values, .. } => {
                for k in indptr[i]..indptr[i + 1] {
                    if indices[k] == j {
                        return values[k];
                    }
                }
                0.0
            }
        }
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.matvec_into(x, &mut out);
        out
    }

    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols(), "matvec: dimension mismatch");
        assert_eq!(out.len(), self.rows(), "matvec: bad output length");
        match self {
            Matrix::Dense { rows, cols, data } => {
                for i in 0..*rows {
                    let row = &data[i * cols..(i + 1) * cols];
                    out[i] = crate::vecops::dot(row, x);
                }
            }
            Matrix::Csr { rows, indptr, indices, values, .. } => {
                for i in 0..*rows {
                    let mut acc = 0.0;
                    for k in indptr[i]..indptr[i + 1] {
                        acc += values[k] * x[indices[k]];
                    }
                    out[i] = acc;
                }
            }
        }
    }

    /// `A' y`
    pub fn t_matvec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        self.t_matvec_into(y, &mut out);
        out
    }

    pub fn t_matvec_into(&self, y: &[f64], out: &mut [f64]) {
        assert_eq!(y.len(), self.rows(), "t_matvec: dimension mismatch");
        assert_eq!(out.len(), self.cols(), "t_matvec: bad output length");
        out.fill(0.0);
        match self {
            Matrix::Dense { rows, cols, data } => {
                for i in 0..*rows {
                    let yi = y[i];
                    if yi == 0.0 {
                        continue;
                    }
                    let row = &data[i * cols..(i + 1) * cols];
                    crate::vecops::axpy(yi, row, out);
                }
            }
            Matrix::Csr { rows, indptr, indices, values, .. } => {
                for i in 0..*rows {
                    let yi = y[i];
                    if yi == 0.0 {
                        continue;
                    }
                    for k in indptr[i]..indptr[i + 1] {
                        out[indices[k]] += yi * values[k];
                    }
                }
            }
        }
    }

    /// Dot product of row `i` with `x`.
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        assert!(i < self.rows());
        assert_eq!(x.len(), self.cols());
        match self {
            Matrix::Dense { cols, data, .. } => {
                crate::vecops::dot(&data[i * cols..(i + 1) * cols], x)
            }
            Matrix::Csr { indptr, indices, values, .. } => {
                let mut acc = 0.0;
                for k in indptr[i]..indptr[i + 1] {
                    acc += values[k] * x[indices[k]];
                }
                acc
            }
        }
    }

    /// Squared Euclidean norms of the columns.
    pub fn col_sq_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        match self {
            Matrix::Dense { rows, cols, data } => {
                for i in 0..*rows {
                    for j in 0..*cols {
                        let v = data[i * cols + j];
                        out[j] += v * v;
                    }
                }
            }
            Matrix::Csr { indices, values, .. } => {
                for (k, &j) in indices.iter().enumerate() {
                    out[j] += values[k] * values[k];
                }
            }
        }
        out
    }

    /// Columns as `(row, value)` lists; used by the coordinate solver.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.cols()];
        match self {
            Matrix::Dense { rows, cols: nc, data } => {
                for i in 0..*rows {
                    for j in 0..*nc {
                        let v = data[i * nc + j];
                        if v != 0.0 {
                            cols[j].push((i, v));
                        }
                    }
                }
            }
            Matrix::Csr { rows, indptr, indices, values, .. } => {
                for i in 0..*rows {
                    for k in indptr[i]..indptr[i + 1] {
                        cols[indices[k]].push((i, values[k]));
                    }
                }
            }
        }
        cols
    }

    /// New matrix with row `i` multiplied by `s[i]`, preserving storage.
    pub fn scale_rows(&self, s: &[f64]) -> Matrix {
        assert_eq!(s.len(), self.rows(), "scale_rows: dimension mismatch");
        match self {
            Matrix::Dense { rows, cols, data } => {
                let mut out = data.clone();
                for i in 0..*rows {
                    for v in &mut out[i * cols..(i + 1) * cols] {
                        *v *= s[i];
                    }
                }
                Matrix::Dense { rows: *rows, cols: *cols, data: out }
            }
            Matrix::Csr { rows, cols, indptr, indices, values } => {
                let mut out = values.clone();
                for i in 0..*rows {
                    for v in &mut out[indptr[i]..indptr[i + 1]] {
                        *v *= s[i];
                    }
                }
                Matrix::Csr {
                    rows: *rows,
                    cols: *cols,
                    indptr: indptr.clone(),
                    indices: indices.clone(),
                    values: out,
                }
            }
        }
    }

    /// New matrix keeping the listed rows in order, preserving storage.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        match self {
            Matrix::Dense { cols, data, .. } => {
                let mut out = Vec::with_capacity(idx.len() * cols);
                for &i in idx {
                    out.extend_from_slice(&data[i * cols..(i + 1) * cols]);
                }
                Matrix::dense(idx.len(), *cols, out)
            }
            Matrix::Csr { cols, indptr, indices, values, .. } => {
                let mut new_ptr = Vec::with_capacity(idx.len() + 1);
                let mut new_idx = Vec::new();
                let mut new_val = Vec::new();
                new_ptr.push(0);
                for &i in idx {
                    new_idx.extend_from_slice(&indices[indptr[i]..indptr[i + 1]]);
                    new_val.extend_from_slice(&values[indptr[i]..indptr[i + 1]]);
                    new_ptr.push(new_idx.len());
                }
                Matrix::csr(idx.len(), *cols, new_ptr, new_idx, new_val)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_dense() -> Matrix {
        Matrix::dense(2, 3, vec![1.0, 2.0, 0.0, 0.0, -1.0, 3.0])
    }

    fn small_csr() -> Matrix {
        Matrix::csr(2, 3, vec![0, 2, 4], vec![0, 1, 1, 2], vec![1.0, 2.0, -1.0, 3.0])
    }

    #[test]
    fn dense_and_csr_products_agree() {
        let d = small_dense();
        let s = small_csr();
        let x = [1.0, -2.0, 0.5];
        assert_eq!(d.matvec(&x), s.matvec(&x));
        let y = [3.0, -1.0];
        assert_eq!(d.t_matvec(&y), s.t_matvec(&y));
        assert_eq!(d.col_sq_norms(), s.col_sq_norms());
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(d.get(i, j), s.get(i, j));
            }
        }
    }

    #[test]
    fn select_and_scale_preserve_layout() {
        let d = small_dense().select_rows(&[1]);
        assert!(d.is_dense());
        assert_eq!(d.get(0, 2), 3.0);
        let s = small_csr().scale_rows(&[-1.0, 2.0]);
        assert!(!s.is_dense());
        assert_eq!(s.get(0, 0), -1.0);
        assert_eq!(s.get(1, 2), 6.0);
    }
}
