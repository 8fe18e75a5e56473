//! Element shape quality metrics and controlled mesh degradation.

use super::{cross, dot, norm, signed_measure, sub, MeshError, MeshTopology};

/// Shape quality extrema over a mesh. Angles are planar in 2D and dihedral in
/// 3D, in degrees. The aspect ratio is longest/shortest edge in 2D and
/// longest edge over smallest height in 3D.
#[derive(Debug, Clone, Copy)]
pub struct QualityReport {
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    pub max_aspect_ratio: f64,
}

impl QualityReport {
    /// Cotangent of the minimum angle, the mesh-quality abscissa used by the
    /// degradation sweeps.
    pub fn cot_min_angle(&self) -> f64 {
        let rad = self.min_angle_deg.to_radians();
        rad.cos() / rad.sin()
    }
}

pub(super) fn mesh_quality(mesh: &MeshTopology) -> QualityReport {
    let mut min_angle = f64::INFINITY;
    let mut max_angle = f64::NEG_INFINITY;
    let mut max_aspect = 0.0f64;
    for e in 0..mesh.n_elems() {
        let pts: Vec<[f64; 3]> = mesh.elem(e).iter().map(|&v| mesh.coord(v)).collect();
        let (lo, hi, aspect) = if mesh.dim() == 2 {
            triangle_quality(&pts)
        } else {
            tet_quality(&pts)
        };
        min_angle = min_angle.min(lo);
        max_angle = max_angle.max(hi);
        max_aspect = max_aspect.max(aspect);
    }
    QualityReport {
        min_angle_deg: min_angle,
        max_angle_deg: max_angle,
        max_aspect_ratio: max_aspect,
    }
}

fn triangle_quality(p: &[[f64; 3]]) -> (f64, f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut emin = f64::INFINITY;
    let mut emax = 0.0f64;
    for i in 0..3 {
        let a = sub(p[(i + 1) % 3], p[i]);
        let b = sub(p[(i + 2) % 3], p[i]);
        let (na, nb) = (norm(a), norm(b));
        let angle = if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            (dot(a, b) / (na * nb)).clamp(-1.0, 1.0).acos().to_degrees()
        };
        lo = lo.min(angle);
        hi = hi.max(angle);
        let edge = norm(sub(p[(i + 1) % 3], p[(i + 2) % 3]));
        emin = emin.min(edge);
        emax = emax.max(edge);
    }
    let aspect = if emin == 0.0 || signed_measure(2, p) == 0.0 {
        f64::INFINITY
    } else {
        emax / emin
    };
    (lo, hi, aspect)
}

fn tet_quality(p: &[[f64; 3]]) -> (f64, f64, f64) {
    // Outward face normals of a positively oriented tetrahedron, indexed by
    // the opposite vertex.
    let normals: Vec<[f64; 3]> = (0..4)
        .map(|f| {
            let face = super::TET_FACETS[f];
            let a = sub(p[face[1]], p[face[0]]);
            let b = sub(p[face[2]], p[face[0]]);
            cross(a, b)
        })
        .collect();

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    // Each of the six edges is shared by the two faces opposite its two
    // missing vertices; the interior dihedral satisfies
    // cos(theta) = -(n_a . n_b) / (|n_a||n_b|).
    for a in 0..4 {
        for b in (a + 1)..4 {
            let (na, nb) = (norm(normals[a]), norm(normals[b]));
            let angle = if na == 0.0 || nb == 0.0 {
                0.0
            } else {
                (-dot(normals[a], normals[b]) / (na * nb))
                    .clamp(-1.0, 1.0)
                    .acos()
                    .to_degrees()
            };
            lo = lo.min(angle);
            hi = hi.max(angle);
        }
    }

    let mut emax = 0.0f64;
    for i in 0..4 {
        for j in (i + 1)..4 {
            emax = emax.max(norm(sub(p[i], p[j])));
        }
    }
    let volume = signed_measure(3, p);
    let max_face_area = normals.iter().map(|n| 0.5 * norm(*n)).fold(0.0, f64::max);
    let aspect = if volume <= 0.0 || max_face_area == 0.0 {
        f64::INFINITY
    } else {
        // Smallest height of the tet is 3V / (largest face area).
        emax * max_face_area / (3.0 * volume)
    };
    (lo, hi, aspect)
}

pub(super) fn degrade_mesh(
    mesh: &MeshTopology,
    targets: &[usize],
    fraction: f64,
) -> Result<MeshTopology, MeshError> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(MeshError::InvalidArgument(format!(
            "degradation fraction must lie in [0, 1), got {fraction}"
        )));
    }
    let mut out = mesh.clone();
    for &e in targets {
        if e >= mesh.n_elems() {
            return Err(MeshError::InvalidArgument(format!(
                "target element {e} out of range ({} elements)",
                mesh.n_elems()
            )));
        }
        let elem = mesh.elem(e);
        // Deterministic choice: the highest local vertex moves toward the
        // opposite facet.
        let moved = elem[mesh.dim()];
        let p = out.coords[moved];
        let facet: Vec<[f64; 3]> = mesh
            .facet_nodes(e, mesh.dim())
            .iter()
            .map(|&v| out.coords[v])
            .collect();
        let proj = if mesh.dim() == 2 {
            project_on_line(p, facet[0], facet[1])
        } else {
            project_on_plane(p, facet[0], facet[1], facet[2])
        };
        for d in 0..3 {
            out.coords[moved][d] = p[d] + fraction * (proj[d] - p[d]);
        }
        // Every element containing the moved node must stay positive.
        for n in mesh.one_ring_elements(moved)? {
            if out.signed_measure(n) <= 0.0 {
                return Err(MeshError::DegradeCollapse {
                    elem: e,
                    fraction,
                    failed: n,
                });
            }
        }
    }
    Ok(out)
}

fn project_on_line(p: [f64; 3], a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    let ab = sub(b, a);
    let t = dot(sub(p, a), ab) / dot(ab, ab);
    [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]]
}

fn project_on_plane(p: [f64; 3], a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [f64; 3] {
    let n = cross(sub(b, a), sub(c, a));
    let nn = dot(n, n);
    let t = dot(sub(p, a), n) / nn;
    [p[0] - t * n[0], p[1] - t * n[1], p[2] - t * n[2]]
}
