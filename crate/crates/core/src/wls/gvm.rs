//! Generalized Vandermonde factorization and derivative weights.
//!
//! For a stencil of `m` points and a degree-`d` basis of `n` terms, the
//! Vandermonde matrix `V` holds the Taylor terms `u^j v^k / (j! k!)` of every
//! point. Rows are weighted by the stencil weights `W`, columns normalized to
//! unit Euclidean length by `S`, and the result factored by Householder QR
//! with column pivoting in which the constant column is pinned in place. The
//! numerical rank is the largest leading block of `R` whose estimated 1-norm
//! condition number stays below `1/eps`; truncating to that block keeps every
//! derivative query stable, and the pinned first column preserves the
//! partition of unity of the induced basis functions.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::linalg::onenormest;

use super::{monomials_eval, LocalStencil, MonomialBasis, WlsError};

static DIFF_WLS_CALLS: AtomicUsize = AtomicUsize::new(0);

#[doc(hidden)]
pub fn diff_wls_call_count() -> usize {
    DIFF_WLS_CALLS.load(Ordering::Relaxed)
}

#[doc(hidden)]
pub fn reset_diff_wls_call_count() {
    DIFF_WLS_CALLS.store(0, Ordering::Relaxed);
}

/// Factored, scaled, weighted Vandermonde system for one stencil.
#[derive(Debug, Clone)]
pub struct GvmFactor {
    basis: MonomialBasis,
    m: usize,
    row_weights: Vec<f64>,
    col_scale: Vec<f64>,
    taylor: Vec<f64>,
    /// Thin orthogonal factor, `m x k` row-major with `k = min(m, n)`.
    q: Vec<f64>,
    /// Upper trapezoidal factor, `k x n` row-major, columns permuted.
    r: Vec<f64>,
    /// `perm[j]` is the original column sitting at permuted position `j`;
    /// `perm[0] == 0` always.
    perm: Vec<usize>,
    rank: usize,
}

impl GvmFactor {
    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn stencil_len(&self) -> usize {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn row_weights(&self) -> &[f64] {
        &self.row_weights
    }

    pub fn column_scaling(&self) -> &[f64] {
        &self.col_scale
    }

    pub fn r_diagonal(&self) -> Vec<f64> {
        let k = self.q.len() / self.m.max(1);
        let n = self.basis.n_terms();
        (0..k.min(n)).map(|i| self.r[i * n + i]).collect()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.basis.n_terms()
    }
}

/// Assembles and factors the stencil's weighted, scaled Vandermonde system.
pub fn build_gvm(
    stencil: &LocalStencil,
    degree: usize,
    rank_eps: f64,
) -> Result<GvmFactor, WlsError> {
    if stencil.is_empty() {
        return Err(WlsError::EmptyStencil);
    }
    let dim = if stencil.local_coords.iter().all(|p| p[2] == 0.0) {
        2
    } else {
        3
    };
    build_gvm_with_dim(stencil, dim, degree, rank_eps)
}

/// As [`build_gvm`] with the spatial dimension stated explicitly (planar
/// point sets in 3D would otherwise be ambiguous).
pub fn build_gvm_with_dim(
    stencil: &LocalStencil,
    dim: usize,
    degree: usize,
    rank_eps: f64,
) -> Result<GvmFactor, WlsError> {
    if stencil.is_empty() {
        return Err(WlsError::EmptyStencil);
    }
    let basis = MonomialBasis::new(dim, degree);
    let n = basis.n_terms();
    let m = stencil.len();
    let taylor = basis.taylor_diagonal();
    let w = &stencil.row_weights;

    // Weighted Vandermonde with the Taylor factors folded in.
    let mut mat = vec![0.0f64; m * n];
    for (i, &p) in stencil.local_coords.iter().enumerate() {
        let row = monomials_eval(&basis, p, [0, 0, 0]);
        for j in 0..n {
            mat[i * n + j] = w[i] * row[j] * taylor[j];
        }
    }

    // Unit column scaling; exactly-zero columns are left alone and fall to
    // the back under pivoting.
    let mut col_scale = vec![1.0f64; n];
    for j in 0..n {
        let norm = (0..m).map(|i| mat[i * n + j].powi(2)).sum::<f64>().sqrt();
        if norm > 0.0 {
            col_scale[j] = 1.0 / norm;
            for i in 0..m {
                mat[i * n + j] *= col_scale[j];
            }
        }
    }

    let (q, r, perm) = qrcp_pinned(&mut mat, m, n);
    let k = m.min(n);
    let rank = estimate_rank(&r, k, n, rank_eps);

    Ok(GvmFactor {
        basis,
        m,
        row_weights: w.clone(),
        col_scale,
        taylor,
        q,
        r,
        perm,
        rank,
    })
}

/// Householder QR with column pivoting over columns `2..n`; the first column
/// never moves. Returns the explicit thin `Q`, the trapezoidal `R`, and the
/// permutation.
fn qrcp_pinned(mat: &mut [f64], m: usize, n: usize) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let k_max = m.min(n);
    let mut perm: Vec<usize> = (0..n).collect();
    // Householder vectors, one per step, padded to full column height.
    let mut reflectors: Vec<(usize, Vec<f64>, f64)> = Vec::with_capacity(k_max);

    for k in 0..k_max {
        if k > 0 {
            // Pivot: bring the remaining column with the largest residual
            // norm to position k. Smallest index wins ties.
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..n {
                let norm_sq: f64 = (k..m).map(|i| mat[i * n + j].powi(2)).sum();
                if norm_sq > best_norm {
                    best_norm = norm_sq;
                    best = j;
                }
            }
            if best != k {
                for i in 0..m {
                    mat.swap(i * n + k, i * n + best);
                }
                perm.swap(k, best);
            }
        }

        let norm: f64 = (k..m)
            .map(|i| mat[i * n + k].powi(2))
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            reflectors.push((k, Vec::new(), 0.0));
            continue;
        }
        let x0 = mat[k * n + k];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| mat[i * n + k]).collect();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        let beta = if vtv == 0.0 { 0.0 } else { 2.0 / vtv };

        mat[k * n + k] = alpha;
        for i in k + 1..m {
            mat[i * n + k] = 0.0;
        }
        for j in k + 1..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * mat[i * n + j]).sum();
            let scale = beta * dot;
            for i in k..m {
                mat[i * n + j] -= scale * v[i - k];
            }
        }
        reflectors.push((k, v, beta));
    }

    let mut r = vec![0.0f64; k_max * n];
    for i in 0..k_max {
        for j in i..n {
            r[i * n + j] = mat[i * n + j];
        }
    }

    // Form the thin Q by applying the reflectors to the identity in reverse.
    let mut q = vec![0.0f64; m * k_max];
    for c in 0..k_max {
        q[c * k_max + c] = 1.0;
    }
    for &(k, ref v, beta) in reflectors.iter().rev() {
        if beta == 0.0 {
            continue;
        }
        for c in 0..k_max {
            let dot: f64 = (k..m).map(|i| v[i - k] * q[i * k_max + c]).sum();
            let scale = beta * dot;
            for i in k..m {
                q[i * k_max + c] -= scale * v[i - k];
            }
        }
    }

    (q, r, perm)
}

/// Numerical rank of an upper trapezoidal `rows x cols` factor: the largest
/// `r` whose leading `r x r` block has an estimated 1-norm condition number
/// at most `1/eps`.
pub fn estimate_rank(r: &[f64], rows: usize, cols: usize, eps: f64) -> usize {
    let k = rows.min(cols);
    let threshold = 1.0 / eps;
    let mut rank = 0;
    for i in 1..=k {
        let cond = cond1_upper(r, cols, i);
        if cond <= threshold {
            rank = i;
        }
    }
    rank
}

/// Estimated 1-norm condition number of the leading `size x size` block of an
/// upper triangular matrix stored row-major with stride `stride`.
fn cond1_upper(r: &[f64], stride: usize, size: usize) -> f64 {
    for i in 0..size {
        if r[i * stride + i] == 0.0 {
            return f64::INFINITY;
        }
    }
    let mut norm = 0.0f64;
    for j in 0..size {
        let col: f64 = (0..=j).map(|i| r[i * stride + j].abs()).sum();
        norm = norm.max(col);
    }
    let inv_norm = onenormest(
        size,
        |x| {
            // Solve R y = x (backward).
            let mut y = x.to_vec();
            for i in (0..size).rev() {
                let mut acc = y[i];
                for j in i + 1..size {
                    acc -= r[i * stride + j] * y[j];
                }
                y[i] = acc / r[i * stride + i];
            }
            y
        },
        |x| {
            // Solve R' y = x (forward).
            let mut y = x.to_vec();
            for i in 0..size {
                let mut acc = y[i];
                for j in 0..i {
                    acc -= r[j * stride + i] * y[j];
                }
                y[i] = acc / r[i * stride + i];
            }
            y
        },
    );
    norm * inv_norm
}

/// Weights `d` over the stencil such that `d . g` approximates the derivative
/// encoded by `a = D P(x)`, the selected derivative of the raw monomial
/// vector at the evaluation point. The weights are exact for polynomials up
/// to the basis degree whenever the factor has full rank.
pub fn diff_wls(gvm: &GvmFactor, a: &[f64]) -> Vec<f64> {
    DIFF_WLS_CALLS.fetch_add(1, Ordering::Relaxed);
    let n = gvm.basis.n_terms();
    let m = gvm.m;
    let k_max = m.min(n);
    let r = gvm.rank;
    debug_assert_eq!(a.len(), n);

    // Scale into the factored column basis: the Taylor factors fold the
    // raw-monomial derivative onto the stored columns, then the column
    // scaling and permutation select the leading rank-r block.
    let mut t = vec![0.0f64; r];
    for (pos, slot) in t.iter_mut().enumerate() {
        let j = gvm.perm[pos];
        *slot = gvm.col_scale[j] * gvm.taylor[j] * a[j];
    }

    // Solve R' y = t on the leading block (forward substitution).
    let stride = n;
    for i in 0..r {
        let mut acc = t[i];
        for j in 0..i {
            acc -= gvm.r[j * stride + i] * t[j];
        }
        t[i] = acc / gvm.r[i * stride + i];
    }

    // d = W Q[:, 0..r] y.
    let mut d = vec![0.0f64; m];
    for i in 0..m {
        let mut acc = 0.0;
        for j in 0..r {
            acc += gvm.q[i * k_max + j] * t[j];
        }
        d[i] = gvm.row_weights[i] * acc;
    }
    d
}

/// Values (or the selected derivative) of all basis functions at `x`, in
/// stencil-local coordinates. Identical to [`diff_wls`] with
/// `a = D P(x)`.
pub fn glp_basis_eval(gvm: &GvmFactor, x: [f64; 3], derivative: [usize; 3]) -> Vec<f64> {
    let a = monomials_eval(&gvm.basis, x, derivative);
    diff_wls(gvm, &a)
}
