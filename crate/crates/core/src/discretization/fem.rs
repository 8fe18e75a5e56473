//! Classical linear finite elements, assembled element by element.

use crate::linalg::SparseRowMatrix;
use crate::mesh::MeshTopology;

use super::quadrature::{quadrature_rule, QuadraturePurpose};
use super::{
    hat_gradients, partition_nodes, AssemblyError, LinearSystem, PdeSpec, ProblemData,
};

/// Galerkin linear FEM for `-div(grad u) (+ c . grad u) = f`. The diffusion
/// block is symmetric positive definite on the free nodes; the convection
/// term, when present, makes the matrix nonsymmetric.
pub fn assemble_linear_fem(
    mesh: &MeshTopology,
    pde: &PdeSpec,
    problem: &dyn ProblemData,
) -> Result<LinearSystem, AssemblyError> {
    let dim = mesh.dim();
    let npe = mesh.nodes_per_elem();
    let (free_nodes, free_index, dirichlet) = partition_nodes(mesh, problem);
    let load_rule = quadrature_rule(dim, QuadraturePurpose::Load);
    let convection = pde.convection_term();

    let n_free = free_nodes.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_free];
    let mut rhs = vec![0.0f64; n_free];

    for e in 0..mesh.n_elems() {
        let elem = mesh.elem(e);
        let pts: Vec<[f64; 3]> = elem.iter().map(|&v| mesh.coord(v)).collect();
        let (grads, detj) = hat_gradients(dim, &pts);
        if detj <= 0.0 {
            return Err(AssemblyError::InvertedElement(e));
        }
        let measure = detj / if dim == 2 { 2.0 } else { 6.0 };
        let f_vertices: Vec<f64> = pts.iter().map(|&p| problem.source(p)).collect();

        for a in 0..npe {
            let Some(fi) = free_index[elem[a]] else {
                continue;
            };
            for b in 0..npe {
                let mut k = measure
                    * (grads[a][0] * grads[b][0]
                        + grads[a][1] * grads[b][1]
                        + grads[a][2] * grads[b][2]);
                if let Some(c) = convection {
                    let c_dot = c[0] * grads[b][0] + c[1] * grads[b][1] + c[2] * grads[b][2];
                    for (bary, w) in load_rule.points.iter().zip(&load_rule.weights) {
                        k += w * detj * bary[a] * c_dot;
                    }
                }
                if let Some(fj) = free_index[elem[b]] {
                    rows[fi].push((fj, k));
                } else if let Some(g) = dirichlet[elem[b]] {
                    rhs[fi] -= k * g;
                }
            }
            for (bary, w) in load_rule.points.iter().zip(&load_rule.weights) {
                let f_q: f64 = (0..npe).map(|v| bary[v] * f_vertices[v]).sum();
                rhs[fi] += w * detj * bary[a] * f_q;
            }
        }
    }

    Ok(LinearSystem {
        matrix: SparseRowMatrix::from_rows(n_free, rows),
        rhs,
        free_nodes,
        free_index,
        dirichlet_values: dirichlet,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_mesh;

    struct Constant {
        f: f64,
        g: f64,
    }
    impl ProblemData for Constant {
        fn source(&self, _: [f64; 3]) -> f64 {
            self.f
        }
        fn dirichlet(&self, _: [f64; 3]) -> f64 {
            self.g
        }
    }

    #[test]
    fn interior_row_is_five_point_stencil() {
        // On the 45-degree structured mesh the diagonal couplings cancel,
        // leaving the classical 4 / -1 pattern at any grid spacing.
        let n = 5;
        let mesh = structured_mesh(2, n).unwrap();
        let sys = assemble_linear_fem(
            &mesh,
            &PdeSpec::poisson(),
            &Constant { f: 0.0, g: 0.0 },
        )
        .unwrap();
        let node = 2 * n + 2;
        let fi = sys.free_index[node].unwrap();
        let (cols, vals) = sys.matrix.row(fi);
        for (&c, &v) in cols.iter().zip(vals) {
            let gnode = sys.free_nodes[c];
            let expected = if gnode == node {
                4.0
            } else if gnode == node - 1 || gnode == node + 1 || gnode == node - n || gnode == node + n
            {
                -1.0
            } else {
                0.0
            };
            assert!(
                (v - expected).abs() < 1e-12,
                "entry ({fi}, {c}) = {v}, expected {expected}"
            );
        }
    }

    #[test]
    fn poisson_matrix_is_exactly_symmetric() {
        let mesh = structured_mesh(2, 7).unwrap();
        let sys = assemble_linear_fem(
            &mesh,
            &PdeSpec::poisson(),
            &Constant { f: 1.0, g: 0.0 },
        )
        .unwrap();
        let n = sys.n_free();
        for i in 0..n {
            let (cols, vals) = sys.matrix.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                assert_eq!(v, sys.matrix.get(j, i), "asymmetry at ({i}, {j})");
            }
        }
    }

    #[test]
    fn convection_breaks_symmetry() {
        let mesh = structured_mesh(2, 6).unwrap();
        let sys = assemble_linear_fem(
            &mesh,
            &PdeSpec::convection_diffusion([1.0, 1.0, 0.0]),
            &Constant { f: 1.0, g: 0.0 },
        )
        .unwrap();
        let n = sys.n_free();
        let asym = (0..n).any(|i| {
            let (cols, vals) = sys.matrix.row(i);
            cols.iter()
                .zip(vals)
                .any(|(&j, &v)| (v - sys.matrix.get(j, i)).abs() > 1e-14)
        });
        assert!(asym);
    }

    #[test]
    fn constant_solution_is_reproduced() {
        let mesh = structured_mesh(2, 6).unwrap();
        let sys = assemble_linear_fem(
            &mesh,
            &PdeSpec::poisson(),
            &Constant { f: 0.0, g: 2.5 },
        )
        .unwrap();
        let ones: Vec<f64> = vec![2.5; sys.n_free()];
        let mut k1 = vec![0.0; sys.n_free()];
        sys.matrix.matvec(&ones, &mut k1);
        for (ki, bi) in k1.iter().zip(&sys.rhs) {
            assert!((ki - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn three_dimensional_assembly_runs() {
        let mesh = structured_mesh(3, 4).unwrap();
        let sys = assemble_linear_fem(
            &mesh,
            &PdeSpec::poisson(),
            &Constant { f: 1.0, g: 0.0 },
        )
        .unwrap();
        assert_eq!(sys.n_free(), 8); // 2^3 interior nodes
        for i in 0..sys.n_free() {
            assert!(sys.matrix.get(i, i) > 0.0);
        }
    }
}
