//! Preconditioners: threshold incomplete LU, threshold incomplete Cholesky,
//! and a single Gauss-Seidel sweep.

use std::collections::BTreeSet;

use super::{LinalgError, SparseRowMatrix};

/// Application of an approximate inverse. `apply` computes `z = M^{-1} r`;
/// `apply_transpose` computes `z = M^{-T} r`, which the condition estimator
/// needs for products with the transposed operator.
pub trait Preconditioner: Sync {
    fn apply(&self, r: &[f64], z: &mut [f64]);
    fn apply_transpose(&self, r: &[f64], z: &mut [f64]);
}

/// No preconditioning.
pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
    fn apply_transpose(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// Threshold incomplete LU factorization: entries smaller than
/// `drop_tol * ||row of A||_2` are dropped during elimination, everything that
/// survives is kept. A drop tolerance of zero therefore produces the exact LU
/// factors.
pub struct Ilu {
    /// Strict lower triangle; unit diagonal implied.
    l: SparseRowMatrix,
    /// Upper triangle including the diagonal.
    u: SparseRowMatrix,
}

pub fn ilu(a: &SparseRowMatrix, drop_tol: f64) -> Result<Ilu, LinalgError> {
    let n = a.n();
    let mut l_rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut u_rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut u_diag = vec![0.0; n];

    let mut w = vec![0.0f64; n];
    let mut in_pattern = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    for i in 0..n {
        let (cols, vals) = a.row(i);
        let row_norm = vals.iter().map(|v| v * v).sum::<f64>().sqrt();
        let tau = drop_tol * row_norm;

        let mut active: BTreeSet<usize> = BTreeSet::new();
        for (&c, &v) in cols.iter().zip(vals) {
            w[c] = v;
            in_pattern[c] = true;
            touched.push(c);
            if c < i {
                active.insert(c);
            }
        }

        while let Some(k) = active.pop_first() {
            let raw = w[k];
            if raw == 0.0 {
                continue;
            }
            // Drop on the original row scale, before dividing by the pivot,
            // so strongly scaled rows keep their multipliers.
            if raw.abs() < tau {
                w[k] = 0.0;
                continue;
            }
            let wk = raw / u_diag[k];
            w[k] = wk;
            for &(j, ukj) in &u_rows[k] {
                if j == k {
                    continue;
                }
                if !in_pattern[j] {
                    in_pattern[j] = true;
                    touched.push(j);
                    if j < i {
                        active.insert(j);
                    }
                }
                w[j] -= wk * ukj;
            }
        }

        touched.sort_unstable();
        let mut lrow = Vec::new();
        let mut urow = Vec::new();
        for &j in &touched {
            let v = w[j];
            if j < i {
                if v != 0.0 {
                    lrow.push((j, v));
                }
            } else if j == i || v.abs() >= tau {
                urow.push((j, v));
            }
        }
        let diag = urow.first().filter(|&&(j, _)| j == i).map(|&(_, v)| v);
        let diag = diag.unwrap_or(0.0);
        if diag == 0.0 {
            return Err(LinalgError::ZeroPivot(i));
        }
        u_diag[i] = diag;
        for &j in &touched {
            w[j] = 0.0;
            in_pattern[j] = false;
        }
        touched.clear();
        l_rows.push(lrow);
        u_rows.push(urow);
    }

    Ok(Ilu {
        l: SparseRowMatrix::from_rows(n, l_rows),
        u: SparseRowMatrix::from_rows(n, u_rows),
    })
}

impl Preconditioner for Ilu {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.l.n();
        // Forward solve L y = r (unit diagonal).
        z.copy_from_slice(r);
        for i in 0..n {
            let (cols, vals) = self.l.row(i);
            let mut acc = z[i];
            for (&c, &v) in cols.iter().zip(vals) {
                acc -= v * z[c];
            }
            z[i] = acc;
        }
        // Backward solve U z = y.
        for i in (0..n).rev() {
            let (cols, vals) = self.u.row(i);
            let mut acc = z[i];
            let mut diag = 1.0;
            for (&c, &v) in cols.iter().zip(vals) {
                if c == i {
                    diag = v;
                } else {
                    acc -= v * z[c];
                }
            }
            z[i] = acc / diag;
        }
    }

    fn apply_transpose(&self, r: &[f64], z: &mut [f64]) {
        let n = self.l.n();
        // Forward solve U' y = r, column-oriented over U's rows.
        z.copy_from_slice(r);
        for i in 0..n {
            let (cols, vals) = self.u.row(i);
            let mut diag = 1.0;
            for (&c, &v) in cols.iter().zip(vals) {
                if c == i {
                    diag = v;
                }
            }
            z[i] /= diag;
            let zi = z[i];
            for (&c, &v) in cols.iter().zip(vals) {
                if c > i {
                    z[c] -= v * zi;
                }
            }
        }
        // Backward solve L' z = y (unit diagonal).
        for i in (0..n).rev() {
            let zi = z[i];
            let (cols, vals) = self.l.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                z[c] -= v * zi;
            }
        }
    }
}

/// One forward Gauss-Seidel sweep: application of `(D + L)^{-1}`.
pub struct GaussSeidel {
    a: SparseRowMatrix,
}

pub fn gauss_seidel(a: &SparseRowMatrix) -> Result<GaussSeidel, LinalgError> {
    for i in 0..a.n() {
        if a.get(i, i) == 0.0 {
            return Err(LinalgError::ZeroDiagonal(i));
        }
    }
    Ok(GaussSeidel { a: a.clone() })
}

impl Preconditioner for GaussSeidel {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.a.n();
        for i in 0..n {
            let (cols, vals) = self.a.row(i);
            let mut acc = r[i];
            let mut diag = 1.0;
            for (&c, &v) in cols.iter().zip(vals) {
                if c < i {
                    acc -= v * z[c];
                } else if c == i {
                    diag = v;
                }
            }
            z[i] = acc / diag;
        }
    }

    fn apply_transpose(&self, r: &[f64], z: &mut [f64]) {
        // (D + L)' is upper triangular; solve column-wise from the bottom.
        let n = self.a.n();
        z.copy_from_slice(r);
        for i in (0..n).rev() {
            let (cols, vals) = self.a.row(i);
            let mut diag = 1.0;
            for (&c, &v) in cols.iter().zip(vals) {
                if c == i {
                    diag = v;
                }
            }
            z[i] /= diag;
            let zi = z[i];
            for (&c, &v) in cols.iter().zip(vals) {
                if c < i {
                    z[c] -= v * zi;
                }
            }
        }
    }
}

/// Threshold incomplete Cholesky `A ~ L L'` for symmetric positive definite
/// matrices, built column by column. Entries below
/// `drop_tol * ||lower column of A||_2` are dropped; zero drop tolerance gives
/// the exact factor.
pub struct IncompleteCholesky {
    n: usize,
    // L stored by columns, diagonal entry first.
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

pub fn incomplete_cholesky(
    a: &SparseRowMatrix,
    drop_tol: f64,
) -> Result<IncompleteCholesky, LinalgError> {
    let n = a.n();
    let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    // Columns j with a stored entry L[r, j], per row r, discovered as columns
    // are emitted; drives the sparse column updates.
    let mut row_lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];

    let mut w = vec![0.0f64; n];
    let mut in_pattern = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    for k in 0..n {
        // Lower column k of A is row k's tail, by symmetry.
        let (acols, avals) = a.row(k);
        let mut norm_sq = 0.0;
        for (&c, &v) in acols.iter().zip(avals) {
            if c >= k {
                w[c] = v;
                in_pattern[c] = true;
                touched.push(c);
                norm_sq += v * v;
            }
        }
        let tau = drop_tol * norm_sq.sqrt();

        for &(j, lkj) in &row_lists[k] {
            for &(r, v) in &cols[j] {
                if r < k {
                    continue;
                }
                if !in_pattern[r] {
                    in_pattern[r] = true;
                    touched.push(r);
                }
                w[r] -= lkj * v;
            }
        }

        let pivot = w[k];
        if pivot <= 0.0 {
            return Err(LinalgError::NegativePivot(k));
        }
        let lkk = pivot.sqrt();
        let mut col = vec![(k, lkk)];
        touched.sort_unstable();
        for &r in &touched {
            if r <= k {
                continue;
            }
            let v = w[r];
            if v != 0.0 && (drop_tol == 0.0 || v.abs() >= tau) {
                col.push((r, v / lkk));
            }
        }
        for &r in &touched {
            w[r] = 0.0;
            in_pattern[r] = false;
        }
        touched.clear();
        for &(r, v) in col.iter().skip(1) {
            row_lists[r].push((k, v));
        }
        cols.push(col);
    }

    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    col_ptr.push(0);
    for col in cols {
        for (r, v) in col {
            row_idx.push(r);
            values.push(v);
        }
        col_ptr.push(row_idx.len());
    }
    Ok(IncompleteCholesky {
        n,
        col_ptr,
        row_idx,
        values,
    })
}

impl Preconditioner for IncompleteCholesky {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.n;
        // Forward solve L y = r, column-oriented.
        z.copy_from_slice(r);
        for k in 0..n {
            let lo = self.col_ptr[k];
            let hi = self.col_ptr[k + 1];
            let diag = self.values[lo];
            z[k] /= diag;
            let zk = z[k];
            for idx in lo + 1..hi {
                z[self.row_idx[idx]] -= self.values[idx] * zk;
            }
        }
        // Backward solve L' z = y.
        for k in (0..n).rev() {
            let lo = self.col_ptr[k];
            let hi = self.col_ptr[k + 1];
            let mut acc = z[k];
            for idx in lo + 1..hi {
                acc -= self.values[idx] * z[self.row_idx[idx]];
            }
            z[k] = acc / self.values[lo];
        }
    }

    fn apply_transpose(&self, r: &[f64], z: &mut [f64]) {
        self.apply(r, z);
    }
}
