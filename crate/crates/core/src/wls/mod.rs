//! Weighted least-squares polynomial approximation over local stencils.
//!
//! A stencil is a set of points expressed relative to a center node. Function
//! values on the stencil determine a degree-`d` Taylor polynomial through a
//! weighted least-squares fit; derivatives of that polynomial at any point
//! are linear in the stencil values, so each derivative query reduces to a
//! weight vector over the stencil. The same machinery evaluates the
//! generalized Lagrange polynomial basis functions used for assembly: basis
//! function `j` is the fit of the `j`-th unit vector, and pinning the
//! constant column during factorization keeps the basis a partition of unity
//! even under rank truncation.

use thiserror::Error;

mod gvm;

pub use gvm::{build_gvm, build_gvm_with_dim, diff_wls, estimate_rank, glp_basis_eval, GvmFactor};

#[doc(hidden)]
pub use gvm::{diff_wls_call_count, reset_diff_wls_call_count};

#[derive(Debug, Error)]
pub enum WlsError {
    #[error("stencil is empty")]
    EmptyStencil,
    #[error("degenerate stencil: all points coincide with the center")]
    DegenerateStencil,
    #[error("first stencil point must be the center at the origin")]
    CenterNotFirst,
}

/// All monomials of degree `<= degree` in `dim` variables, graded
/// lexicographic, constant term first. Degree 2 gives
/// `[1, x, y, x^2, xy, y^2]` in 2D and
/// `[1, x, y, z, x^2, xy, xz, y^2, yz, z^2]` in 3D.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    dim: usize,
    degree: usize,
    exponents: Vec<[usize; 3]>,
}

impl MonomialBasis {
    pub fn new(dim: usize, degree: usize) -> Self {
        assert!(dim == 2 || dim == 3, "dimension must be 2 or 3");
        assert!(degree >= 1, "degree must be at least 1");
        let mut exponents = Vec::new();
        for p in 0..=degree {
            if dim == 2 {
                for i in (0..=p).rev() {
                    exponents.push([i, p - i, 0]);
                }
            } else {
                for i in (0..=p).rev() {
                    for j in (0..=p - i).rev() {
                        exponents.push([i, j, p - i - j]);
                    }
                }
            }
        }
        MonomialBasis {
            dim,
            degree,
            exponents,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_terms(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[[usize; 3]] {
        &self.exponents
    }

    /// Reciprocal factorial diagonal `1/(j! k! l!)` aligned with the term
    /// ordering; the first entry is 1 and all entries lie in (0, 1].
    pub fn taylor_diagonal(&self) -> Vec<f64> {
        self.exponents
            .iter()
            .map(|e| 1.0 / (factorial(e[0]) * factorial(e[1]) * factorial(e[2])))
            .collect()
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product::<f64>().max(1.0)
}

/// Evaluates the given partial derivative of every monomial at `x`.
/// A zero multi-index evaluates the monomials themselves; derivative orders
/// above the term's exponent yield zeros.
pub fn monomials_eval(basis: &MonomialBasis, x: [f64; 3], derivative: [usize; 3]) -> Vec<f64> {
    basis
        .exponents
        .iter()
        .map(|e| {
            let mut acc = 1.0;
            for axis in 0..3 {
                let (exp, ord) = (e[axis], derivative[axis]);
                if ord > exp {
                    return 0.0;
                }
                // Falling factorial exp (exp-1) ... (exp-ord+1).
                for s in 0..ord {
                    acc *= (exp - s) as f64;
                }
                acc *= x[axis].powi((exp - ord) as i32);
            }
            acc
        })
        .collect()
}

/// Row weights `w_i = (||u_i|| / h + eps)^{-1}` with `h` the stencil radius.
/// Closer points get heavier weights; the regularizer keeps the center weight
/// finite at `1/eps`.
pub fn compute_row_weights(local_coords: &[[f64; 3]], eps: f64) -> Result<Vec<f64>, WlsError> {
    if local_coords.is_empty() {
        return Err(WlsError::EmptyStencil);
    }
    let norms: Vec<f64> = local_coords
        .iter()
        .map(|&p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
        .collect();
    let h = norms.iter().cloned().fold(0.0, f64::max);
    if h == 0.0 {
        return Err(WlsError::DegenerateStencil);
    }
    Ok(norms.iter().map(|&r| 1.0 / (r / h + eps)).collect())
}

/// A stencil in center-relative coordinates: the center itself sits at the
/// origin as the first point.
#[derive(Debug, Clone)]
pub struct LocalStencil {
    pub center: usize,
    /// Global node ids, center first.
    pub nodes: Vec<usize>,
    pub local_coords: Vec<[f64; 3]>,
    pub row_weights: Vec<f64>,
    pub radius: f64,
}

impl LocalStencil {
    pub fn new(
        center: usize,
        nodes: Vec<usize>,
        local_coords: Vec<[f64; 3]>,
        weight_eps: f64,
    ) -> Result<Self, WlsError> {
        if local_coords.is_empty() {
            return Err(WlsError::EmptyStencil);
        }
        if local_coords[0] != [0.0, 0.0, 0.0] {
            return Err(WlsError::CenterNotFirst);
        }
        let row_weights = compute_row_weights(&local_coords, weight_eps)?;
        let radius = local_coords
            .iter()
            .map(|&p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
            .fold(0.0, f64::max);
        Ok(LocalStencil {
            center,
            nodes,
            local_coords,
            row_weights,
            radius,
        })
    }

    pub fn len(&self) -> usize {
        self.local_coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.local_coords.is_empty()
    }
}
