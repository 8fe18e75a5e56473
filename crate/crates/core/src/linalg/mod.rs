//! Sparse row-compressed matrices and the iterative machinery built on them.

use thiserror::Error;

mod condest;
mod precond;
mod solvers;

pub use condest::{condest_1norm, onenormest};
pub use precond::{gauss_seidel, ilu, incomplete_cholesky, GaussSeidel, Identity, Ilu, IncompleteCholesky, Preconditioner};
pub use solvers::{cg, gmres, SolverConfig};

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("zero pivot in row {0}; consider a larger stencil or a diagonal shift")]
    ZeroPivot(usize),
    #[error("nonpositive pivot in row {0}; matrix does not look positive definite")]
    NegativePivot(usize),
    #[error("zero diagonal entry in row {0}")]
    ZeroDiagonal(usize),
    #[error("matrix is not symmetric positive definite (p'Ap <= 0 at iteration {0})")]
    NotSpd(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Square sparse matrix in compressed sparse row form. Column indices are
/// strictly ascending within each row; explicitly stored zeros are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRowMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRowMatrix {
    /// Builds from per-row `(column, value)` lists. Entries are sorted and
    /// duplicates within a row are summed; zero values are retained so the
    /// stored pattern reflects the assembly stencil.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n, "row count must equal dimension");
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                assert!(c < n, "column index {c} out of range");
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 == c {
                        v += v2;
                        iter.next();
                    } else {
                        break;
                    }
                }
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        SparseRowMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseRowMatrix::from_rows(n, (0..n).map(|i| vec![(i, 1.0)]).collect())
    }

    /// Builds from a dense row-major array; zeros are not stored.
    pub fn from_dense(n: usize, dense: &[f64]) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| dense[i * n + j] != 0.0)
                    .map(|j| (j, dense[i * n + j]))
                    .collect()
            })
            .collect();
        SparseRowMatrix::from_rows(n, rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[i] = acc;
        }
    }

    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * x[i];
            }
        }
    }

    pub fn transpose(&self) -> SparseRowMatrix {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                rows[c].push((i, v));
            }
        }
        SparseRowMatrix::from_rows(self.n, rows)
    }

    /// Matrix 1-norm: the largest absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut colsum = vec![0.0f64; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                colsum[c] += v.abs();
            }
        }
        colsum.into_iter().fold(0.0, f64::max)
    }

    /// Euclidean column norms, for the column-scaling condition bound.
    pub fn column_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[c] += v * v;
            }
        }
        for v in &mut out {
            *v = v.sqrt();
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

/// Outcome of an iterative solve.
///
/// `converged` holds exactly when `relative_residual <= tol`; `stagnated`
/// marks runs abandoned after a long stretch without residual progress.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
    pub stagnated: bool,
    /// Preconditioner build time; filled by the caller that owns the build.
    pub precond_seconds: f64,
    pub solve_seconds: f64,
    /// Relative residual estimate after each iteration.
    pub residual_history: Vec<f64>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
