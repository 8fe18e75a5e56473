//! Discrete error norms and the endpoint convergence-rate formula.

use crate::discretization::{quadrature_rule, QuadraturePurpose};
use crate::mesh::MeshTopology;

use super::problems::ProblemCase;

/// Discrete L2 and max-norm errors of a nodal solution.
///
/// The max norm runs over the referenced nodes. The L2 norm integrates the
/// square of the linearly interpolated nodal error field with the degree-2
/// element rule, which is exact for that piecewise-quadratic integrand.
pub fn error_norms(mesh: &MeshTopology, nodal: &[f64], problem: &ProblemCase) -> (f64, f64) {
    let dim = mesh.dim();
    let npe = mesh.nodes_per_elem();
    let rule = quadrature_rule(dim, QuadraturePurpose::Load);

    let mut linf = 0.0f64;
    let errors: Vec<f64> = (0..mesh.n_nodes())
        .map(|v| {
            if mesh.v2hf(v).is_none() {
                return 0.0;
            }
            let e = nodal[v] - problem.exact(mesh.coord(v));
            linf = linf.max(e.abs());
            e
        })
        .collect();

    let mut acc = 0.0f64;
    for e in 0..mesh.n_elems() {
        let elem = mesh.elem(e);
        let pts: Vec<[f64; 3]> = elem.iter().map(|&v| mesh.coord(v)).collect();
        let (_, detj) = crate::discretization::hat_gradients(dim, &pts);
        for (bary, w) in rule.points.iter().zip(&rule.weights) {
            let eq: f64 = (0..npe).map(|v| bary[v] * errors[elem[v]]).sum();
            acc += w * detj * eq * eq;
        }
    }
    (acc.sqrt(), linf)
}

/// Average convergence rate between the first and last refinement levels:
/// `-log2(e_first / e_last) / log2((N_first / N_last)^(1/d))`. Zero errors
/// yield an infinite rate.
pub fn convergence_rate(errors: &[f64], node_counts: &[usize], dim: usize) -> f64 {
    assert!(errors.len() >= 2 && errors.len() == node_counts.len());
    let e_first = errors[0];
    let e_last = *errors.last().unwrap();
    if e_first == 0.0 || e_last == 0.0 {
        return f64::INFINITY;
    }
    let n_ratio = node_counts[0] as f64 / *node_counts.last().unwrap() as f64;
    -(e_first / e_last).log2() / (n_ratio.powf(1.0 / dim as f64)).log2()
}
