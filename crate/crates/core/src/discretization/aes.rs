//! Row-by-row assembly of the extended-stencil weighted-residual system.
//!
//! Each free node owns one matrix row. Its stencil and Vandermonde
//! factorization are built once; then for every incident element the weak
//! form is integrated with the node's hat function as the test function and
//! the stencil basis functions as trial functions. Because derivative weights
//! are linear in the monomial-derivative vector, all quadrature contributions
//! of an element collapse into a single weight query per element, plus one
//! more for the stencil-interpolated load variant.
//!
//! The assembled operator discretizes `-div(grad u) (+ c . grad u)`: matrix
//! entries are `+int grad(psi_i) . grad(phi_j) (+ int psi_i c . grad phi_j)`,
//! and the load is `int psi_i f`.

use rayon::prelude::*;

use crate::linalg::SparseRowMatrix;
use crate::mesh::{sub, MeshTopology};
use crate::wls::{diff_wls, monomials_eval};

use super::quadrature::{quadrature_rule, QuadraturePurpose};
use super::stencil::{adaptive_stencil, WlsConfig};
use super::{
    barycentric_to_physical, hat_gradients, partition_nodes, AssemblyError, LinearSystem, LoadMode,
    PdeSpec, ProblemData,
};

struct RowContribution {
    entries: Vec<(usize, f64)>,
    rhs_hat: f64,
    rhs_glp: f64,
}

/// Assembles the extended-stencil system with the requested load variant.
pub fn assemble_aes_fem(
    mesh: &MeshTopology,
    pde: &PdeSpec,
    problem: &dyn ProblemData,
    mode: LoadMode,
    wls: &WlsConfig,
) -> Result<LinearSystem, AssemblyError> {
    let (system, _) = assemble_inner(
        mesh,
        pde,
        problem,
        wls,
        mode == LoadMode::AesFem1,
        mode == LoadMode::AesFem2,
        mode,
    )?;
    Ok(system)
}

/// Assembles both load variants over one shared stiffness matrix. Returns the
/// system carrying the hat-interpolated load, plus the stencil-interpolated
/// load vector for the same matrix and node maps.
pub fn assemble_aes_fem_both(
    mesh: &MeshTopology,
    pde: &PdeSpec,
    problem: &dyn ProblemData,
    wls: &WlsConfig,
) -> Result<(LinearSystem, Vec<f64>), AssemblyError> {
    let (system, rhs2) = assemble_inner(mesh, pde, problem, wls, true, true, LoadMode::AesFem1)?;
    Ok((system, rhs2.expect("requested load variant")))
}

#[allow(clippy::too_many_arguments)]
fn assemble_inner(
    mesh: &MeshTopology,
    pde: &PdeSpec,
    problem: &dyn ProblemData,
    wls: &WlsConfig,
    want_hat: bool,
    want_glp: bool,
    primary: LoadMode,
) -> Result<(LinearSystem, Option<Vec<f64>>), AssemblyError> {
    let dim = mesh.dim();
    let npe = mesh.nodes_per_elem();
    let (free_nodes, free_index, dirichlet) = partition_nodes(mesh, problem);
    let stiff_rule = quadrature_rule(dim, QuadraturePurpose::Stiffness);
    // The convection block stays on the degree-2 rule (its integrand is
    // quadratic, so the rule is exact); only the source integration may be
    // upgraded.
    let conv_rule = quadrature_rule(dim, QuadraturePurpose::Load);
    let load_rule = quadrature_rule(
        dim,
        if wls.cubic_load_rule {
            QuadraturePurpose::LoadCubic
        } else {
            QuadraturePurpose::Load
        },
    );
    let convection = pde.convection_term();

    let unit = |axis: usize| {
        let mut d = [0usize; 3];
        d[axis] = 1;
        d
    };

    let contributions: Vec<RowContribution> = free_nodes
        .par_iter()
        .map(|&node| -> Result<RowContribution, AssemblyError> {
            let (stencil, gvm) = adaptive_stencil(mesh, node, wls)?;
            let m = stencil.len();
            let n_terms = gvm.basis().n_terms();
            let center = mesh.coord(node);
            let mut acc = vec![0.0f64; m];
            let mut rhs_hat = 0.0f64;
            let mut rhs_glp = 0.0f64;

            let f_stencil: Vec<f64> = if want_glp {
                stencil
                    .nodes
                    .iter()
                    .map(|&v| problem.source(mesh.coord(v)))
                    .collect()
            } else {
                Vec::new()
            };

            for e in mesh.one_ring_elements(node)? {
                let elem = mesh.elem(e);
                let pts: Vec<[f64; 3]> = elem.iter().map(|&v| mesh.coord(v)).collect();
                let (grads, detj) = hat_gradients(dim, &pts);
                if detj <= 0.0 {
                    return Err(AssemblyError::InvertedElement(e));
                }
                let local = elem.iter().position(|&v| v == node).expect("incident");
                let gpsi = grads[local];

                // Monomial-derivative accumulator for every matrix
                // contribution of this element; one weight query resolves it.
                let mut a_mat = vec![0.0f64; n_terms];
                for (bary, w) in stiff_rule.points.iter().zip(&stiff_rule.weights) {
                    let xq = sub(barycentric_to_physical(*bary, &pts), center);
                    let w_phys = w * detj;
                    for axis in 0..dim {
                        let coeff = w_phys * gpsi[axis];
                        if coeff == 0.0 {
                            continue;
                        }
                        for (slot, v) in a_mat
                            .iter_mut()
                            .zip(monomials_eval(gvm.basis(), xq, unit(axis)))
                        {
                            *slot += coeff * v;
                        }
                    }
                }
                if let Some(c) = convection {
                    for (bary, w) in conv_rule.points.iter().zip(&conv_rule.weights) {
                        let xq = sub(barycentric_to_physical(*bary, &pts), center);
                        let w_psi = w * detj * bary[local];
                        for axis in 0..dim {
                            let coeff = w_psi * c[axis];
                            if coeff == 0.0 {
                                continue;
                            }
                            for (slot, v) in a_mat
                                .iter_mut()
                                .zip(monomials_eval(gvm.basis(), xq, unit(axis)))
                            {
                                *slot += coeff * v;
                            }
                        }
                    }
                }
                let d = diff_wls(&gvm, &a_mat);
                for (slot, v) in acc.iter_mut().zip(&d) {
                    *slot += v;
                }

                if want_hat {
                    let f_vertices: Vec<f64> =
                        pts.iter().map(|&p| problem.source(p)).collect();
                    for (bary, w) in load_rule.points.iter().zip(&load_rule.weights) {
                        let f_q: f64 = (0..npe).map(|v| bary[v] * f_vertices[v]).sum();
                        rhs_hat += w * detj * bary[local] * f_q;
                    }
                }
                if want_glp {
                    let mut a_load = vec![0.0f64; n_terms];
                    for (bary, w) in load_rule.points.iter().zip(&load_rule.weights) {
                        let xq = sub(barycentric_to_physical(*bary, &pts), center);
                        let coeff = w * detj * bary[local];
                        for (slot, v) in a_load
                            .iter_mut()
                            .zip(monomials_eval(gvm.basis(), xq, [0, 0, 0]))
                        {
                            *slot += coeff * v;
                        }
                    }
                    let dl = diff_wls(&gvm, &a_load);
                    rhs_glp += dl.iter().zip(&f_stencil).map(|(a, b)| a * b).sum::<f64>();
                }
            }

            // Split the row over free columns; Dirichlet columns fold into
            // both load variants identically.
            let mut entries = Vec::with_capacity(m);
            for (j, &gnode) in stencil.nodes.iter().enumerate() {
                let v = acc[j];
                if let Some(fj) = free_index[gnode] {
                    entries.push((fj, v));
                } else if let Some(g) = dirichlet[gnode] {
                    rhs_hat -= v * g;
                    rhs_glp -= v * g;
                }
            }
            Ok(RowContribution {
                entries,
                rhs_hat,
                rhs_glp,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let n_free = free_nodes.len();
    let mut rows = Vec::with_capacity(n_free);
    let mut rhs_hat = vec![0.0; n_free];
    let mut rhs_glp = vec![0.0; n_free];
    for (i, c) in contributions.into_iter().enumerate() {
        rows.push(c.entries);
        rhs_hat[i] = c.rhs_hat;
        rhs_glp[i] = c.rhs_glp;
    }
    let matrix = SparseRowMatrix::from_rows(n_free, rows);

    let (rhs, secondary) = match (primary, want_glp) {
        (LoadMode::AesFem1, true) => (rhs_hat, Some(rhs_glp)),
        (LoadMode::AesFem1, false) => (rhs_hat, None),
        (LoadMode::AesFem2, _) => (rhs_glp, None),
    };
    Ok((
        LinearSystem {
            matrix,
            rhs,
            free_nodes,
            free_index,
            dirichlet_values: dirichlet,
        },
        secondary,
    ))
}
