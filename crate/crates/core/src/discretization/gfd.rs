//! Strong-form generalized finite difference collocation.
//!
//! Each free node contributes one row: the weighted-least-squares derivative
//! weights of the PDE operator at the node, over its adaptive stencil. The
//! right-hand side is the source evaluated pointwise at the node. One weight
//! query per node suffices, against one per incident element for the
//! weak-form assembly.

use rayon::prelude::*;

use crate::linalg::SparseRowMatrix;
use crate::mesh::MeshTopology;
use crate::wls::{diff_wls, monomials_eval};

use super::stencil::{adaptive_stencil, WlsConfig};
use super::{partition_nodes, AssemblyError, LinearSystem, PdeSpec, ProblemData};

pub fn assemble_gfd(
    mesh: &MeshTopology,
    pde: &PdeSpec,
    problem: &dyn ProblemData,
    wls: &WlsConfig,
) -> Result<LinearSystem, AssemblyError> {
    let dim = mesh.dim();
    let (free_nodes, free_index, dirichlet) = partition_nodes(mesh, problem);
    let convection = pde.convection_term();

    let rows: Vec<(Vec<(usize, f64)>, f64)> = free_nodes
        .par_iter()
        .map(|&node| -> Result<(Vec<(usize, f64)>, f64), AssemblyError> {
            let (stencil, gvm) = adaptive_stencil(mesh, node, wls)?;

            // Operator vector a = D P(0) for D = -laplacian (+ c . grad),
            // evaluated at the stencil center.
            let n_terms = gvm.basis().n_terms();
            let mut a = vec![0.0f64; n_terms];
            for axis in 0..dim {
                let mut second = [0usize; 3];
                second[axis] = 2;
                for (slot, v) in a
                    .iter_mut()
                    .zip(monomials_eval(gvm.basis(), [0.0; 3], second))
                {
                    *slot -= v;
                }
            }
            if let Some(c) = convection {
                for axis in 0..dim {
                    let mut first = [0usize; 3];
                    first[axis] = 1;
                    for (slot, v) in a
                        .iter_mut()
                        .zip(monomials_eval(gvm.basis(), [0.0; 3], first))
                    {
                        *slot += c[axis] * v;
                    }
                }
            }
            let d = diff_wls(&gvm, &a);

            let mut rhs = problem.source(mesh.coord(node));
            let mut entries = Vec::with_capacity(d.len());
            for (j, &gnode) in stencil.nodes.iter().enumerate() {
                if let Some(fj) = free_index[gnode] {
                    entries.push((fj, d[j]));
                } else if let Some(g) = dirichlet[gnode] {
                    rhs -= d[j] * g;
                }
            }
            Ok((entries, rhs))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let n_free = free_nodes.len();
    let mut row_entries = Vec::with_capacity(n_free);
    let mut rhs = Vec::with_capacity(n_free);
    for (entries, b) in rows {
        row_entries.push(entries);
        rhs.push(b);
    }
    Ok(LinearSystem {
        matrix: SparseRowMatrix::from_rows(n_free, row_entries),
        rhs,
        free_nodes,
        free_index,
        dirichlet_values: dirichlet,
    })
}
