//! Randomized structural invariants across the mesh, stencil, and solver
//! layers.

use proptest::prelude::*;

use aesfem::linalg::{cg, gmres, ilu, Identity, SolverConfig, SparseRowMatrix};
use aesfem::mesh::{structured_mesh, HalfFacetId, MeshTopology, RingFraction, RingSize};
use aesfem::wls::{build_gvm_with_dim, glp_basis_eval, LocalStencil};

/// Random manifold sub-triangulations: a structured mesh with a random
/// nonempty subset of elements kept. Deleting elements preserves
/// manifoldness and creates interesting boundaries.
fn arb_submesh(dim: usize) -> impl Strategy<Value = MeshTopology> {
    let max_n = if dim == 2 { 6usize } else { 4 };
    (2..=max_n, any::<u64>()).prop_map(move |(n, seed)| {
        let base = structured_mesh(dim, n).unwrap();
        let mut kept = Vec::new();
        let mut state = seed | 1;
        for e in 0..base.n_elems() {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            if state >> 33 & 3 != 0 {
                kept.extend_from_slice(base.elem(e));
            }
        }
        if kept.is_empty() {
            kept.extend_from_slice(base.elem(0));
        }
        let coords = (0..base.n_nodes()).map(|v| base.coord(v)).collect();
        MeshTopology::from_parts(dim, coords, kept).unwrap()
    })
}

fn check_sibling_invariants(mesh: &MeshTopology) {
    let npe = mesh.dim() + 1;
    for e in 0..mesh.n_elems() {
        for f in 0..npe {
            let hf = HalfFacetId {
                element: e,
                local_facet: f,
            };
            let Some(sib) = mesh.sibling(hf) else {
                continue;
            };
            // Involution.
            assert_eq!(mesh.sibling(sib), Some(hf));
            let a = mesh.facet_nodes(e, f);
            let b = mesh.facet_nodes(sib.element, sib.local_facet);
            if mesh.dim() == 2 {
                // Opposite orientation of the shared edge.
                assert_eq!(a[0], b[1]);
                assert_eq!(a[1], b[0]);
            } else {
                // Same node set; every directed edge of one appears reversed
                // in the other.
                let mut sa = a.clone();
                let mut sb = b.clone();
                sa.sort_unstable();
                sb.sort_unstable();
                assert_eq!(sa, sb);
                for i in 0..3 {
                    let (x, y) = (a[i], a[(i + 1) % 3]);
                    let reversed = (0..3).any(|j| b[j] == y && b[(j + 1) % 3] == x);
                    assert!(reversed, "edge ({x},{y}) not reversed in sibling");
                }
            }
        }
    }
}

fn brute_force_one_ring(mesh: &MeshTopology, node: usize) -> Vec<usize> {
    (0..mesh.n_elems())
        .filter(|&e| mesh.elem(e).contains(&node))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ahf_invariants_on_random_2d_submeshes(mesh in arb_submesh(2)) {
        check_sibling_invariants(&mesh);
        for v in 0..mesh.n_nodes() {
            if mesh.v2hf(v).is_none() {
                prop_assert!(brute_force_one_ring(&mesh, v).is_empty());
                continue;
            }
            let ring = mesh.one_ring_elements(v).unwrap();
            prop_assert_eq!(ring, brute_force_one_ring(&mesh, v));
        }
    }

    #[test]
    fn ahf_invariants_on_random_3d_submeshes(mesh in arb_submesh(3)) {
        check_sibling_invariants(&mesh);
        for v in 0..mesh.n_nodes() {
            if mesh.v2hf(v).is_none() {
                continue;
            }
            let ring = mesh.one_ring_elements(v).unwrap();
            prop_assert_eq!(ring, brute_force_one_ring(&mesh, v));
        }
    }

    #[test]
    fn rings_grow_monotonically_2d(mesh in arb_submesh(2), node_pick in any::<u32>()) {
        let referenced: Vec<usize> =
            (0..mesh.n_nodes()).filter(|&v| mesh.v2hf(v).is_some()).collect();
        let node = referenced[node_pick as usize % referenced.len()];
        let sizes = [
            RingSize::new(1, RingFraction::Zero),
            RingSize::new(1, RingFraction::Half),
            RingSize::new(2, RingFraction::Zero),
            RingSize::new(2, RingFraction::Half),
        ];
        let mut prev: Vec<usize> = Vec::new();
        for (k, ring) in sizes.iter().enumerate() {
            let mut nodes = mesh.ring_neighborhood(node, *ring).unwrap();
            prop_assert_eq!(nodes[0], node);
            nodes.sort_unstable();
            for v in &prev {
                prop_assert!(nodes.binary_search(v).is_ok(),
                    "ring {k} lost node {v}");
            }
            prev = nodes;
        }
    }

    #[test]
    fn rings_grow_monotonically_3d(mesh in arb_submesh(3), node_pick in any::<u32>()) {
        let referenced: Vec<usize> =
            (0..mesh.n_nodes()).filter(|&v| mesh.v2hf(v).is_some()).collect();
        let node = referenced[node_pick as usize % referenced.len()];
        let sizes = [
            RingSize::new(1, RingFraction::Zero),
            RingSize::new(1, RingFraction::Third),
            RingSize::new(1, RingFraction::TwoThirds),
            RingSize::new(2, RingFraction::Zero),
        ];
        let mut prev: Vec<usize> = Vec::new();
        for ring in sizes {
            let mut nodes = mesh.ring_neighborhood(node, ring).unwrap();
            nodes.sort_unstable();
            for v in &prev {
                prop_assert!(nodes.binary_search(v).is_ok());
            }
            prev = nodes;
        }
    }

    /// The pinned factorization keeps the basis a partition of unity at any
    /// point, for any stencil geometry. The tightly pinned corpus bound lives
    /// in the acceptance suite; this fuzz allows conditioning slack.
    #[test]
    fn partition_of_unity_fuzz(
        raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4..16),
        eval in (-1.5f64..1.5, -1.5f64..1.5),
    ) {
        let mut coords = vec![[0.0f64; 3]];
        coords.extend(raw.iter().map(|&(x, y)| [x, y, 0.0]));
        let Ok(stencil) = LocalStencil::new(0, (0..coords.len()).collect(), coords, 0.01) else {
            return Ok(());
        };
        let gvm = build_gvm_with_dim(&stencil, 2, 2, 1e-4).unwrap();
        let phi = glp_basis_eval(&gvm, [eval.0, eval.1, 0.0], [0, 0, 0]);
        let sum: f64 = phi.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-11, "sum {sum}, rank {}", gvm.rank());
        let dphi = glp_basis_eval(&gvm, [eval.0, eval.1, 0.0], [1, 0, 0]);
        let dsum: f64 = dphi.iter().sum();
        prop_assert!(dsum.abs() < 1e-10);
    }

    /// Scaling every stencil coordinate and the evaluation point by the same
    /// factor leaves basis values unchanged.
    #[test]
    fn basis_values_are_scale_invariant(
        raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6..14),
        eval in (-0.8f64..0.8, -0.8f64..0.8),
        lambda in 0.05f64..20.0,
    ) {
        let mut coords = vec![[0.0f64; 3]];
        coords.extend(raw.iter().map(|&(x, y)| [x, y, 0.0]));
        let Ok(st1) = LocalStencil::new(0, (0..coords.len()).collect(), coords.clone(), 0.01)
        else {
            return Ok(());
        };
        let scaled: Vec<[f64; 3]> = coords
            .iter()
            .map(|p| [p[0] * lambda, p[1] * lambda, 0.0])
            .collect();
        let st2 = LocalStencil::new(0, (0..scaled.len()).collect(), scaled, 0.01).unwrap();
        let g1 = build_gvm_with_dim(&st1, 2, 2, 1e-4).unwrap();
        let g2 = build_gvm_with_dim(&st2, 2, 2, 1e-4).unwrap();
        let p1 = glp_basis_eval(&g1, [eval.0, eval.1, 0.0], [0, 0, 0]);
        let p2 = glp_basis_eval(&g2, [eval.0 * lambda, eval.1 * lambda, 0.0], [0, 0, 0]);
        for (a, b) in p1.iter().zip(&p2) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }
}

fn arb_diag_dominant(n: usize) -> impl Strategy<Value = SparseRowMatrix> {
    proptest::collection::vec(-1.0f64..1.0, n * 3).prop_map(move |vals| {
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = vec![(i, 4.0 + vals[i * 3].abs())];
            if i > 0 {
                row.push((i - 1, vals[i * 3 + 1]));
            }
            if i + 1 < n {
                row.push((i + 1, vals[i * 3 + 2]));
            }
            rows.push(row);
        }
        SparseRowMatrix::from_rows(n, rows)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gmres_residuals_never_increase(a in arb_diag_dominant(30),
                                      b in proptest::collection::vec(-1.0f64..1.0, 30)) {
        let cfg = SolverConfig { tol: 1e-12, max_iter: 60, restart: None };
        let (_, rep) = gmres(&a, &b, &Identity, &cfg);
        for w in rep.residual_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    /// Preconditioning changes the iteration count, never the fixed point.
    #[test]
    fn preconditioning_preserves_the_solution(a in arb_diag_dominant(25),
                                              b in proptest::collection::vec(-1.0f64..1.0, 25)) {
        let cfg = SolverConfig { tol: 1e-12, max_iter: 200, restart: None };
        let (x_plain, r1) = gmres(&a, &b, &Identity, &cfg);
        let m = ilu(&a, 1e-2).unwrap();
        let (x_pre, r2) = gmres(&a, &b, &m, &cfg);
        prop_assert!(r1.converged && r2.converged);
        let scale = x_plain.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for (p, q) in x_plain.iter().zip(&x_pre) {
            prop_assert!((p - q).abs() < 1e-9 * scale);
        }
    }

    /// CG and GMRES agree on symmetric positive definite systems.
    #[test]
    fn cg_and_gmres_agree_on_spd(b in proptest::collection::vec(-1.0f64..1.0, 40),
                                 shift in 0.1f64..2.0) {
        let n = 40;
        let mut rows = Vec::new();
        for i in 0..n {
            let mut row = vec![(i, 2.0 + shift)];
            if i > 0 {
                row.push((i - 1, -1.0));
            }
            if i + 1 < n {
                row.push((i + 1, -1.0));
            }
            rows.push(row);
        }
        let a = SparseRowMatrix::from_rows(n, rows);
        let cfg = SolverConfig { tol: 1e-12, max_iter: 500, restart: None };
        let (x_cg, r1) = cg(&a, &b, &Identity, &cfg).unwrap();
        let (x_gm, r2) = gmres(&a, &b, &Identity, &cfg);
        prop_assert!(r1.converged && r2.converged);
        let scale = x_cg.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for (p, q) in x_cg.iter().zip(&x_gm) {
            prop_assert!((p - q).abs() < 1e-8 * scale);
        }
    }
}
