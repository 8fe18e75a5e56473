//! Left-preconditioned GMRES and conjugate gradients.

use std::time::Instant;

use super::precond::Preconditioner;
use super::{axpy, dot, norm2, LinalgError, SolveReport, SparseRowMatrix};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Relative residual tolerance. GMRES measures the preconditioned
    /// residual, CG the plain residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Krylov basis length before a GMRES restart; `None` runs full GMRES.
    pub restart: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iter: 1000,
            restart: None,
        }
    }
}

/// Solves `A x = b` by non-restarted (or optionally restarted) GMRES with
/// left preconditioning, minimizing the preconditioned residual over the
/// Krylov subspace via Arnoldi with modified Gram-Schmidt and Givens
/// rotations.
///
/// An Arnoldi breakdown triggers an immediate solve of the current subspace;
/// the run is then reported converged only if the residual actually meets the
/// tolerance.
pub fn gmres(
    a: &SparseRowMatrix,
    b: &[f64],
    precond: &dyn Preconditioner,
    cfg: &SolverConfig,
) -> (Vec<f64>, SolveReport) {
    let start = Instant::now();
    let n = a.n();
    let mut x = vec![0.0; n];
    let mut history = Vec::new();

    let mut z0 = vec![0.0; n];
    precond.apply(b, &mut z0);
    let beta0 = norm2(&z0);
    if beta0 == 0.0 {
        return (
            x,
            SolveReport {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
                stagnated: false,
                precond_seconds: 0.0,
                solve_seconds: start.elapsed().as_secs_f64(),
                residual_history: history,
            },
        );
    }

    let mut total_iters = 0usize;
    let mut work = vec![0.0; n];
    'outer: loop {
        // Preconditioned residual of the current iterate.
        a.matvec(&x, &mut work);
        let r: Vec<f64> = b.iter().zip(&work).map(|(bi, wi)| bi - wi).collect();
        let mut z = vec![0.0; n];
        precond.apply(&r, &mut z);
        let beta = norm2(&z);
        if beta / beta0 <= cfg.tol || total_iters >= cfg.max_iter {
            break;
        }

        let m = cfg
            .restart
            .unwrap_or(cfg.max_iter)
            .min(cfg.max_iter - total_iters)
            .max(1);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        for zi in &mut z {
            *zi /= beta;
        }
        basis.push(z);

        // Column-major Hessenberg, plus the Givens-rotated residual vector.
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;

        for k in 0..m {
            a.matvec(&basis[k], &mut work);
            let mut w = vec![0.0; n];
            precond.apply(&work, &mut w);
            let mut hk = vec![0.0; k + 2];
            for (i, v) in basis.iter().enumerate() {
                let hik = dot(&w, v);
                hk[i] = hik;
                axpy(-hik, v, &mut w);
            }
            let hnext = norm2(&w);
            hk[k + 1] = hnext;

            // Apply accumulated rotations, then eliminate the subdiagonal.
            for i in 0..k {
                let t = cs[i] * hk[i] + sn[i] * hk[i + 1];
                hk[i + 1] = -sn[i] * hk[i] + cs[i] * hk[i + 1];
                hk[i] = t;
            }
            let denom = (hk[k] * hk[k] + hk[k + 1] * hk[k + 1]).sqrt();
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (hk[k] / denom, hk[k + 1] / denom)
            };
            cs.push(c);
            sn.push(s);
            hk[k] = denom;
            hk[k + 1] = 0.0;
            g[k + 1] = -s * g[k];
            g[k] *= c;
            h.push(hk);

            total_iters += 1;
            k_used = k + 1;
            let res_est = g[k + 1].abs() / beta0;
            history.push(res_est);

            let breakdown = hnext <= f64::EPSILON * beta0;
            if res_est <= cfg.tol || breakdown || total_iters >= cfg.max_iter {
                break;
            }
            for wi in &mut w {
                *wi /= hnext;
            }
            basis.push(w);
        }

        // Back-substitute y from the triangularized Hessenberg system and
        // update the iterate.
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in (i + 1)..k_used {
                acc -= h[j][i] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        for (j, &yj) in y.iter().enumerate() {
            axpy(yj, &basis[j], &mut x);
        }

        if total_iters >= cfg.max_iter {
            break 'outer;
        }
        if cfg.restart.is_none() {
            break;
        }
    }

    // Report the true preconditioned residual of the returned iterate.
    a.matvec(&x, &mut work);
    let r: Vec<f64> = b.iter().zip(&work).map(|(bi, wi)| bi - wi).collect();
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let rel = norm2(&z) / beta0;
    (
        x,
        SolveReport {
            iterations: total_iters,
            relative_residual: rel,
            converged: rel <= cfg.tol,
            stagnated: false,
            precond_seconds: 0.0,
            solve_seconds: start.elapsed().as_secs_f64(),
            residual_history: history,
        },
    )
}

/// How many CG iterations without residual improvement count as stagnation.
const CG_STAGNATION_WINDOW: usize = 50;

/// Preconditioned conjugate gradients for symmetric positive definite
/// systems. Detects indefiniteness through a nonpositive `p'Ap` and reports
/// stagnation distinctly when the residual stops improving.
pub fn cg(
    a: &SparseRowMatrix,
    b: &[f64],
    precond: &dyn Preconditioner,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport), LinalgError> {
    let start = Instant::now();
    let n = a.n();
    if b.len() != n {
        return Err(LinalgError::Dimension(format!(
            "rhs length {} vs matrix dimension {n}",
            b.len()
        )));
    }
    let mut x = vec![0.0; n];
    let b_norm = norm2(b);
    let mut history = Vec::new();
    if b_norm == 0.0 {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
                stagnated: false,
                precond_seconds: 0.0,
                solve_seconds: start.elapsed().as_secs_f64(),
                residual_history: history,
            },
        ));
    }

    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    let mut best = f64::INFINITY;
    let mut since_best = 0usize;
    let mut iterations = 0usize;
    let mut stagnated = false;

    for k in 0..cfg.max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(LinalgError::NotSpd(k));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        iterations = k + 1;
        let rel = norm2(&r) / b_norm;
        history.push(rel);
        if rel <= cfg.tol {
            break;
        }
        if rel < best * (1.0 - 1e-12) {
            best = rel;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= CG_STAGNATION_WINDOW {
                stagnated = true;
                break;
            }
        }
        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }

    let rel = norm2(&r) / b_norm;
    Ok((
        x,
        SolveReport {
            iterations,
            relative_residual: rel,
            converged: rel <= cfg.tol,
            stagnated,
            precond_seconds: 0.0,
            solve_seconds: start.elapsed().as_secs_f64(),
            residual_history: history,
        },
    ))
}
