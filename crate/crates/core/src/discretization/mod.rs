//! Linear system assembly for Poisson and convection-diffusion problems.
//!
//! Three discretizations share the same Dirichlet handling and sparse row
//! storage: extended-stencil FEM (weighted-residual form with hat test
//! functions and stencil-polynomial trial functions), classical linear FEM,
//! and strong-form generalized finite differences. Systems contain rows only
//! for free (non-Dirichlet) nodes; contributions of boundary columns move to
//! the right-hand side during assembly, so no Lagrange multipliers or penalty
//! terms appear.

use thiserror::Error;

use crate::linalg::SparseRowMatrix;
use crate::mesh::{MeshError, MeshTopology};
use crate::wls::WlsError;

mod aes;
mod fem;
mod gfd;
mod quadrature;
mod stencil;

pub use aes::{assemble_aes_fem, assemble_aes_fem_both};
pub use fem::assemble_linear_fem;
pub use gfd::assemble_gfd;
pub use quadrature::{quadrature_rule, QuadraturePurpose, QuadratureRule};
pub use stencil::{adaptive_stencil, WlsConfig};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("stencil for node {node}: {source}")]
    Stencil {
        node: usize,
        #[source]
        source: WlsError,
    },
    #[error("element {0} is inverted or degenerate")]
    InvertedElement(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Which equation is being discretized. The convection vector is ignored for
/// Poisson problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PdeKind {
    Poisson,
    ConvectionDiffusion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeSpec {
    pub kind: PdeKind,
    pub convection: [f64; 3],
}

impl PdeSpec {
    pub fn poisson() -> Self {
        PdeSpec {
            kind: PdeKind::Poisson,
            convection: [0.0; 3],
        }
    }

    pub fn convection_diffusion(c: [f64; 3]) -> Self {
        PdeSpec {
            kind: PdeKind::ConvectionDiffusion,
            convection: c,
        }
    }

    pub(crate) fn convection_term(&self) -> Option<[f64; 3]> {
        match self.kind {
            PdeKind::Poisson => None,
            PdeKind::ConvectionDiffusion => Some(self.convection),
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            PdeKind::Poisson => "poisson",
            PdeKind::ConvectionDiffusion => "convection-diffusion",
        }
    }
}

/// Load-vector variant of the extended-stencil method: interpolate the source
/// with element hat functions, or with the stencil basis functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadMode {
    AesFem1,
    AesFem2,
}

/// Problem data the assemblers need: the source term and the Dirichlet value,
/// both as point functions.
pub trait ProblemData: Sync {
    fn source(&self, x: [f64; 3]) -> f64;
    fn dirichlet(&self, x: [f64; 3]) -> f64;
}

/// Assembled system over the free nodes, with the Dirichlet bookkeeping
/// needed to expand a solution back to nodal values.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: SparseRowMatrix,
    pub rhs: Vec<f64>,
    /// Free index -> node id.
    pub free_nodes: Vec<usize>,
    /// Node id -> free index.
    pub free_index: Vec<Option<usize>>,
    /// Node id -> prescribed boundary value.
    pub dirichlet_values: Vec<Option<f64>>,
}

impl LinearSystem {
    pub fn n_free(&self) -> usize {
        self.free_nodes.len()
    }

    /// Expands a free-node solution to a full nodal vector, filling Dirichlet
    /// nodes with their prescribed values. Unreferenced nodes stay zero.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.free_index.len()];
        for (fi, &node) in self.free_nodes.iter().enumerate() {
            out[node] = x[fi];
        }
        for (node, g) in self.dirichlet_values.iter().enumerate() {
            if let Some(g) = g {
                out[node] = *g;
            }
        }
        out
    }
}

/// Splits nodes into free interiors and Dirichlet boundary nodes, evaluating
/// the boundary data. Unreferenced nodes belong to neither set.
pub(crate) fn partition_nodes(
    mesh: &MeshTopology,
    problem: &dyn ProblemData,
) -> (Vec<usize>, Vec<Option<usize>>, Vec<Option<f64>>) {
    let n = mesh.n_nodes();
    let mut free_nodes = Vec::new();
    let mut free_index = vec![None; n];
    let mut dirichlet = vec![None; n];
    for v in 0..n {
        if mesh.v2hf(v).is_none() {
            continue;
        }
        if mesh.is_boundary_node(v) {
            dirichlet[v] = Some(problem.dirichlet(mesh.coord(v)));
        } else {
            free_index[v] = Some(free_nodes.len());
            free_nodes.push(v);
        }
    }
    (free_nodes, free_index, dirichlet)
}

/// Gradients of the element hat functions (constant over an affine simplex)
/// and the Jacobian determinant, which equals `2 * area` in 2D and
/// `6 * volume` in 3D.
pub(crate) fn hat_gradients(dim: usize, p: &[[f64; 3]]) -> ([[f64; 3]; 4], f64) {
    let mut grads = [[0.0; 3]; 4];
    if dim == 2 {
        let (a, c) = (p[1][0] - p[0][0], p[1][1] - p[0][1]);
        let (b, d) = (p[2][0] - p[0][0], p[2][1] - p[0][1]);
        let det = a * d - b * c;
        grads[1] = [d / det, -b / det, 0.0];
        grads[2] = [-c / det, a / det, 0.0];
        grads[0] = [-grads[1][0] - grads[2][0], -grads[1][1] - grads[2][1], 0.0];
        (grads, det)
    } else {
        let c1 = crate::mesh::sub(p[1], p[0]);
        let c2 = crate::mesh::sub(p[2], p[0]);
        let c3 = crate::mesh::sub(p[3], p[0]);
        let det = crate::mesh::dot(crate::mesh::cross(c1, c2), c3);
        let r1 = crate::mesh::cross(c2, c3);
        let r2 = crate::mesh::cross(c3, c1);
        let r3 = crate::mesh::cross(c1, c2);
        for k in 0..3 {
            grads[1][k] = r1[k] / det;
            grads[2][k] = r2[k] / det;
            grads[3][k] = r3[k] / det;
            grads[0][k] = -grads[1][k] - grads[2][k] - grads[3][k];
        }
        (grads, det)
    }
}

/// Maps a barycentric quadrature point to physical coordinates.
pub(crate) fn barycentric_to_physical(bary: [f64; 4], p: &[[f64; 3]]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (b, pt) in bary.iter().zip(p) {
        for k in 0..3 {
            out[k] += b * pt[k];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_mesh;

    struct Zero;
    impl ProblemData for Zero {
        fn source(&self, _: [f64; 3]) -> f64 {
            0.0
        }
        fn dirichlet(&self, _: [f64; 3]) -> f64 {
            0.0
        }
    }

    #[test]
    fn reference_triangle_hat_gradients() {
        let p = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
        ];
        let (g, det) = hat_gradients(2, &p);
        assert!((det - 1.0).abs() < 1e-15);
        assert_eq!(g[0][..2], [-1.0, -1.0]);
        assert_eq!(g[1][..2], [1.0, 0.0]);
        assert_eq!(g[2][..2], [0.0, 1.0]);
    }

    #[test]
    fn reference_tet_hat_gradients_sum_to_zero() {
        let p = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let (g, det) = hat_gradients(3, &p);
        assert!((det - 1.0).abs() < 1e-15);
        for k in 0..3 {
            let sum: f64 = (0..4).map(|i| g[i][k]).sum();
            assert!(sum.abs() < 1e-14);
        }
        assert_eq!(g[1][..3], [1.0, 0.0, 0.0]);
    }

    #[test]
    fn partition_marks_boundary_and_interior() {
        let mesh = structured_mesh(2, 4).unwrap();
        let (free, index, dirichlet) = partition_nodes(&mesh, &Zero);
        assert_eq!(free.len(), 4); // 2x2 interior
        for &v in &free {
            assert!(!mesh.is_boundary_node(v));
            assert!(index[v].is_some());
            assert!(dirichlet[v].is_none());
        }
        let n_dirichlet = dirichlet.iter().filter(|d| d.is_some()).count();
        assert_eq!(n_dirichlet, 12);
    }
}
