use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square, entrywise nonnegative matrix in compressed sparse row form.
///
/// Built from coordinate triplets that are sorted, duplicate-merged and
/// stripped of explicit zeros, so two matrices with the same entries have
/// the same representation. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Canonicalizes `(row, col, value)` triplets. Duplicate coordinates are
    /// summed; values must be finite and nonnegative.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(r, c, v) in &triplets {
            if r >= n || c >= n {
                return Err(Error::InvalidEntry {
                    row: r,
                    col: c,
                    reason: format!("index out of range for dimension {n}"),
                });
            }
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidEntry {
                    row: r,
                    col: c,
                    reason: format!("value {v} is not a finite nonnegative number"),
                });
            }
        }
        triplets.sort_by_key(|t| (t.0, t.1));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                col_idx.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        // drop explicit zeros after merging
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut k = 0;
        for i in 0..rows.len() {
            if values[i] != 0.0 {
                col_idx[k] = col_idx[i];
                values[k] = values[i];
                keep_rows.push(rows[i]);
                k += 1;
            }
        }
        col_idx.truncate(k);
        values.truncate(k);
        for r in keep_rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Row-major dense input of length `n * n`.
    pub fn from_dense(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        let triplets = data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(k, &v)| (k / n, k % n, v))
            .collect();
        Self::from_triplets(n, triplets)
    }

    pub fn zeros(n: usize) -> Self {
        SparseMatrix {
            n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Entries as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.n, t).expect("transpose of a valid matrix is valid")
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::param(format!("scale factor {c} must be finite and nonnegative")));
        }
        let t = self.triplets().map(|(i, j, v)| (i, j, c * v)).collect();
        Self::from_triplets(self.n, t)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for (_, j, v) in self.triplets() {
            s[j] += v;
        }
        s
    }

    /// Nonzero count per row and per column.
    pub fn support_counts(&self) -> (Vec<usize>, Vec<usize>) {
        let rows = (0..self.n)
            .map(|i| self.row_ptr[i + 1] - self.row_ptr[i])
            .collect();
        let mut cols = vec![0; self.n];
        for &j in &self.col_idx {
            cols[j] += 1;
        }
        (rows, cols)
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// `y = Aᵀ x`.
    pub fn mul_vec_transpose(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * x[i];
            }
        }
    }

    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mut acc = vec![0.0; self.n];
        let mut touched: Vec<usize> = Vec::new();
        let mut triplets = Vec::new();
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&k, &a) in cols.iter().zip(vals) {
                let (cols2, vals2) = other.row(k);
                for (&j, &b) in cols2.iter().zip(vals2) {
                    if acc[j] == 0.0 {
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            for &j in &touched {
                triplets.push((i, j, acc[j]));
                acc[j] = 0.0;
            }
            touched.clear();
        }
        Self::from_triplets(self.n, triplets)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for (i, j, v) in self.triplets() {
            d[i * self.n + j] = v;
        }
        d
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}
