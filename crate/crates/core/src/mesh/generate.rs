//! Structured meshes over the unit square and unit cube.
//!
//! Grid cells are split deterministically: squares along the diagonal that
//! runs from the low corner to the high corner, cubes into the six
//! permutation tetrahedra sharing the main diagonal. On a regular grid this
//! gives 45/90-degree triangles, and element counts follow closed forms:
//! `2(n-1)^2` triangles or `6(n-1)^3` tetrahedra for `n` nodes per side.

use super::{signed_measure, MeshError, MeshTopology};

/// Builds an `n`-nodes-per-side structured mesh of the unit square or cube.
pub fn structured_mesh(dim: usize, n: usize) -> Result<MeshTopology, MeshError> {
    if n < 2 {
        return Err(MeshError::InvalidArgument(format!(
            "structured mesh needs at least 2 nodes per side, got {n}"
        )));
    }
    match dim {
        2 => structured_2d(n),
        3 => structured_3d(n),
        _ => Err(MeshError::InvalidArgument(format!(
            "dimension must be 2 or 3, got {dim}"
        ))),
    }
}

fn structured_2d(n: usize) -> Result<MeshTopology, MeshError> {
    let h = 1.0 / (n - 1) as f64;
    let node = |i: usize, j: usize| j * n + i;
    let mut coords = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            coords.push([i as f64 * h, j as f64 * h, 0.0]);
        }
    }
    let mut elems = Vec::with_capacity(6 * (n - 1) * (n - 1));
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let a = node(i, j);
            let b = node(i + 1, j);
            let c = node(i, j + 1);
            let d = node(i + 1, j + 1);
            elems.extend_from_slice(&[a, b, d]);
            elems.extend_from_slice(&[a, d, c]);
        }
    }
    MeshTopology::from_parts(2, coords, elems)
}

fn structured_3d(n: usize) -> Result<MeshTopology, MeshError> {
    let h = 1.0 / (n - 1) as f64;
    let node = |i: usize, j: usize, k: usize| (k * n + j) * n + i;
    let mut coords = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                coords.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    // Six tetrahedra per cube, one per permutation of the axis walk from the
    // low corner to the high corner.
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut elems = Vec::with_capacity(24 * (n - 1) * (n - 1) * (n - 1));
    for k in 0..n - 1 {
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                for perm in PERMS {
                    let mut at = [i, j, k];
                    let mut tet = [node(at[0], at[1], at[2]), 0, 0, 0];
                    for (step, &axis) in perm.iter().enumerate() {
                        at[axis] += 1;
                        tet[step + 1] = node(at[0], at[1], at[2]);
                    }
                    // Odd permutations produce negative volume; swap to fix.
                    let p: Vec<[f64; 3]> = tet.iter().map(|&v| coords[v]).collect();
                    if signed_measure(3, &p) < 0.0 {
                        tet.swap(2, 3);
                    }
                    elems.extend_from_slice(&tet);
                }
            }
        }
    }
    MeshTopology::from_parts(3, coords, elems)
}
