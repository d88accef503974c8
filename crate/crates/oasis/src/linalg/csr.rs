//! Compressed sparse row matrix.
//!
//! Feature matrices are stored row-major CSR because every objective in this
//! crate touches data row-wise: gradients and Hessian-vector products are
//! built from per-sample inner products `x_iᵀw` followed by a weighted
//! accumulation of rows. Only the handful of kernels those two passes need are
//! implemented — this is not a general sparse-algebra library.

use crate::error::{OasisError, Result};

/// Sparse matrix in CSR layout.
///
/// Invariants (checked at construction):
/// * `indptr.len() == n_rows + 1`, `indptr[0] == 0`, nondecreasing, and
///   `indptr[n_rows] == indices.len() == values.len()`;
/// * column indices are strictly increasing within each row and `< n_cols`;
/// * all stored values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from raw CSR arrays, validating the structural invariants.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if indptr.len() != n_rows + 1 {
            return Err(OasisError::Dimension(format!(
                "indptr has length {}, expected {}",
                indptr.len(),
                n_rows + 1
            )));
        }
        if indptr[0] != 0
            || *indptr.last().unwrap() != indices.len()
            || indices.len() != values.len()
        {
            return Err(OasisError::Dimension(format!(
                "indptr bounds ({}, {}) disagree with nnz arrays ({}, {})",
                indptr[0],
                indptr.last().unwrap(),
                indices.len(),
                values.len()
            )));
        }
        for r in 0..n_rows {
            let (lo, hi) = (indptr[r], indptr[r + 1]);
            if lo > hi {
                return Err(OasisError::Dimension(format!(
                    "indptr decreases at row {r}"
                )));
            }
            let mut prev: Option<usize> = None;
            for k in lo..hi {
                let c = indices[k];
                if c >= n_cols {
                    return Err(OasisError::Dimension(format!(
                        "column index {c} out of bounds in row {r} (n_cols = {n_cols})"
                    )));
                }
                if let Some(p) = prev {
                    if c <= p {
                        return Err(OasisError::Dimension(format!(
                            "column indices not strictly increasing in row {r} ({p} then {c})"
                        )));
                    }
                }
                prev = Some(c);
                if !values[k].is_finite() {
                    return Err(OasisError::Dimension(format!(
                        "non-finite value in row {r}, column {c}"
                    )));
                }
            }
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            indptr,
            indices,
            values,
        })
    }

    /// Build from per-row `(column, value)` lists. Each row must already be
    /// sorted by column with no duplicates; zeros are kept as given.
    pub fn from_rows(n_cols: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            for &(c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix::new(rows.len(), n_cols, indptr, indices, values)
    }

    /// Build from a dense row-major slice of rows, dropping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.len());
        let sparse: Vec<Vec<(usize, f64)>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(c, &v)| (c, v))
                    .collect()
            })
            .collect();
        CsrMatrix::from_rows(n_cols, &sparse)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    /// Inner product of row `i` with a dense vector.
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n_cols);
        let (cols, vals) = self.row(i);
        cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row_dot(i, x)).collect()
    }

    /// Row-subset product: `y_j = A[rows[j], :] · x`.
    pub fn spmv_rows(&self, x: &[f64], rows: &[usize]) -> Vec<f64> {
        rows.iter().map(|&i| self.row_dot(i, x)).collect()
    }

    /// `y = Aᵀ x`.
    pub fn spmv_t(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_rows);
        let mut y = vec![0.0; self.n_cols];
        for (i, &xi) in x.iter().enumerate() {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * xi;
            }
        }
        y
    }

    /// Accumulate a weighted sum of a subset of rows:
    /// `y = Σ_j coeffs[j] · A[rows[j], :]` as a dense `n_cols` vector.
    /// `coeffs` is aligned with `rows`.
    pub fn accumulate_rows(&self, coeffs: &[f64], rows: &[usize]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), rows.len());
        let mut y = vec![0.0; self.n_cols];
        for (&w, &i) in coeffs.iter().zip(rows) {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * w;
            }
        }
        y
    }

    /// Dense copy, row-major. Intended for small test fixtures.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, dense_row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                dense_row[c] = v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, Rng};

    /// Dense mat-vec oracle used to pin down the sparse kernels.
    fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|row| dot(row, x)).collect()
    }

    fn random_dense(rng: &mut Rng, n: usize, d: usize, density: f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        if rng.next_f64() < density {
                            rng.standard_normal()
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn spmv_matches_dense_oracle() {
        let mut rng = Rng::new(11);
        for trial in 0..20 {
            let (n, d) = (5 + trial % 7, 3 + trial % 5);
            let dense = random_dense(&mut rng, n, d, 0.6);
            let a = CsrMatrix::from_dense(&dense).unwrap();
            let x: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
            let got = a.spmv(&x);
            let want = dense_matvec(&dense, &x);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-12 * (1.0 + w.abs()));
            }
        }
    }

    #[test]
    fn spmv_t_matches_dense_oracle() {
        let mut rng = Rng::new(12);
        let dense = random_dense(&mut rng, 9, 6, 0.5);
        let a = CsrMatrix::from_dense(&dense).unwrap();
        let y: Vec<f64> = (0..9).map(|_| rng.standard_normal()).collect();
        let got = a.spmv_t(&y);
        // Oracle: (Aᵀy)_c = Σ_i a[i][c] y_i.
        for c in 0..6 {
            let want: f64 = (0..9).map(|i| dense[i][c] * y[i]).sum();
            assert!((got[c] - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn row_subset_kernels_match_full_kernels() {
        let mut rng = Rng::new(13);
        let dense = random_dense(&mut rng, 8, 5, 0.7);
        let a = CsrMatrix::from_dense(&dense).unwrap();
        let x: Vec<f64> = (0..5).map(|_| rng.standard_normal()).collect();
        let rows = [6usize, 0, 3];
        let sub = a.spmv_rows(&x, &rows);
        let full = a.spmv(&x);
        for (j, &i) in rows.iter().enumerate() {
            assert_eq!(sub[j], full[i]);
        }
        let coeffs = [0.5, -2.0, 1.25];
        let acc = a.accumulate_rows(&coeffs, &rows);
        for c in 0..5 {
            let want: f64 = rows
                .iter()
                .zip(&coeffs)
                .map(|(&i, &w)| dense[i][c] * w)
                .sum();
            assert!((acc[c] - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn gram_quadratic_form_is_nonnegative() {
        // xᵀ(Aᵀ(Ax)) = ‖Ax‖² ≥ 0 for any A and x.
        let mut rng = Rng::new(14);
        for _ in 0..50 {
            let dense = random_dense(&mut rng, 6, 4, 0.5);
            let a = CsrMatrix::from_dense(&dense).unwrap();
            let x: Vec<f64> = (0..4).map(|_| rng.standard_normal()).collect();
            let ax = a.spmv(&x);
            let gram_x = a.spmv_t(&ax);
            assert!(dot(&x, &gram_x) >= -1e-12);
        }
    }

    #[test]
    fn construction_rejects_bad_structure() {
        // indptr length.
        assert!(CsrMatrix::new(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
        // indptr end disagrees with nnz.
        assert!(CsrMatrix::new(1, 2, vec![0, 2], vec![0], vec![1.0]).is_err());
        // decreasing indptr.
        assert!(CsrMatrix::new(2, 2, vec![0, 2, 1], vec![0, 1], vec![1.0, 2.0]).is_err());
        // column out of bounds.
        assert!(CsrMatrix::new(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
        // duplicate / non-increasing columns within a row.
        assert!(CsrMatrix::new(1, 3, vec![0, 2], vec![1, 1], vec![1.0, 2.0]).is_err());
        assert!(CsrMatrix::new(1, 3, vec![0, 2], vec![2, 0], vec![1.0, 2.0]).is_err());
        // non-finite value.
        assert!(CsrMatrix::new(1, 1, vec![0, 1], vec![0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn empty_rows_are_fine() {
        let a = CsrMatrix::from_rows(3, &[vec![], vec![(0, 1.0), (2, -1.0)], vec![]]).unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.spmv(&[1.0, 1.0, 1.0]), vec![0.0, 0.0, 0.0]);
        let (cols, vals) = a.row(1);
        assert_eq!(cols, &[0, 2]);
        assert_eq!(vals, &[1.0, -1.0]);
    }

    #[test]
    fn dense_round_trip() {
        let dense = vec![vec![0.0, 1.5, 0.0], vec![-2.0, 0.0, 3.0]];
        let a = CsrMatrix::from_dense(&dense).unwrap();
        assert_eq!(a.to_dense(), dense);
        assert_eq!(a.nnz(), 3);
    }
}
