//! Unstructured simplicial meshes with array-based half-facet adjacency.
//!
//! A mesh stores positively oriented triangles (2D) or tetrahedra (3D) over a
//! flat coordinate array. Facets are edges in 2D and faces in 3D; each facet
//! of an element is a *half-facet*, and every interior facet of a manifold
//! mesh consists of two sibling half-facets with opposite orientation.
//! Boundary half-facets have no sibling. Alongside the sibling map, each node
//! records one incident half-facet (preferring a boundary one when the node
//! lies on the boundary), which makes vertex-local adjacency queries run in
//! constant time for bounded valence.

use std::collections::HashMap;

use thiserror::Error;

mod generate;
mod io;
mod quality;

pub use generate::structured_mesh;
pub use quality::QualityReport;

/// Local facet `f` of a triangle is the edge opposite vertex `f`, oriented
/// along the counterclockwise boundary.
const TRI_FACETS: [[usize; 2]; 3] = [[1, 2], [2, 0], [0, 1]];

/// Local facet `f` of a tetrahedron is the face opposite vertex `f`, with
/// vertices ordered so the face normal points outward for a positively
/// oriented element.
const TET_FACETS: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("element {elem} has nonpositive signed {measure}")]
    NonpositiveMeasure { elem: usize, measure: &'static str },
    #[error("facet {nodes:?} is shared by more than two elements")]
    NonManifold { nodes: Vec<usize> },
    #[error("node {0} is not referenced by any element")]
    UnreferencedNode(usize),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("degrading element {elem} by {fraction} would collapse element {failed}")]
    DegradeCollapse {
        elem: usize,
        fraction: f64,
        failed: usize,
    },
}

/// One side of a facet: an element together with a local facet index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfFacetId {
    pub element: usize,
    pub local_facet: usize,
}

/// Fractional part of a ring size. Half rings exist in 2D; third and
/// two-third rings exist in 3D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RingFraction {
    Zero,
    Third,
    Half,
    TwoThirds,
}

impl RingFraction {
    pub fn value(self) -> f64 {
        match self {
            RingFraction::Zero => 0.0,
            RingFraction::Third => 1.0 / 3.0,
            RingFraction::Half => 0.5,
            RingFraction::TwoThirds => 2.0 / 3.0,
        }
    }

    fn legal_for_dim(self, dim: usize) -> bool {
        match self {
            RingFraction::Zero => true,
            RingFraction::Half => dim == 2,
            RingFraction::Third | RingFraction::TwoThirds => dim == 3,
        }
    }
}

/// Graded stencil neighborhood size: whole rings plus a fractional step.
///
/// Ordering is lexicographic in `(whole, fraction)`, which coincides with
/// ordering by numeric value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RingSize {
    pub whole: usize,
    pub fraction: RingFraction,
}

impl RingSize {
    pub const ONE: RingSize = RingSize {
        whole: 1,
        fraction: RingFraction::Zero,
    };

    pub fn new(whole: usize, fraction: RingFraction) -> Self {
        RingSize { whole, fraction }
    }

    pub fn value(self) -> f64 {
        self.whole as f64 + self.fraction.value()
    }

    /// The next finer growth step: +1/2 ring in 2D, +1/3 ring in 3D.
    pub fn next(self, dim: usize) -> RingSize {
        match (dim, self.fraction) {
            (2, RingFraction::Zero) => RingSize::new(self.whole, RingFraction::Half),
            (2, RingFraction::Half) => RingSize::new(self.whole + 1, RingFraction::Zero),
            (3, RingFraction::Zero) => RingSize::new(self.whole, RingFraction::Third),
            (3, RingFraction::Third) => RingSize::new(self.whole, RingFraction::TwoThirds),
            (3, RingFraction::TwoThirds) => RingSize::new(self.whole + 1, RingFraction::Zero),
            _ => unreachable!("ring fraction {:?} is illegal in {}D", self.fraction, dim),
        }
    }
}

/// Simplicial mesh with half-facet adjacency. Immutable after construction;
/// degradation produces a new value.
#[derive(Debug, Clone)]
pub struct MeshTopology {
    dim: usize,
    coords: Vec<[f64; 3]>,
    /// Flat connectivity, `dim + 1` node ids per element.
    elems: Vec<usize>,
    /// Sibling half-facet per half-facet; `None` on the boundary.
    sibhfs: Vec<Option<HalfFacetId>>,
    /// One incident half-facet per node, boundary-preferring; `None` for
    /// unreferenced nodes.
    v2hf: Vec<Option<HalfFacetId>>,
}

impl MeshTopology {
    /// Builds a mesh from raw coordinates and connectivity, constructing the
    /// half-facet adjacency and validating orientation and manifoldness.
    pub fn from_parts(
        dim: usize,
        coords: Vec<[f64; 3]>,
        elems: Vec<usize>,
    ) -> Result<Self, MeshError> {
        if dim != 2 && dim != 3 {
            return Err(MeshError::InvalidArgument(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        let npe = dim + 1;
        if elems.len() % npe != 0 {
            return Err(MeshError::InvalidArgument(format!(
                "connectivity length {} is not a multiple of {npe}",
                elems.len()
            )));
        }
        let n_nodes = coords.len();
        for (e, chunk) in elems.chunks(npe).enumerate() {
            for &v in chunk {
                if v >= n_nodes {
                    return Err(MeshError::InvalidArgument(format!(
                        "element {e} references node {v}, but the mesh has {n_nodes} nodes"
                    )));
                }
            }
        }
        let mut mesh = MeshTopology {
            dim,
            coords,
            elems,
            sibhfs: Vec::new(),
            v2hf: Vec::new(),
        };
        for e in 0..mesh.n_elems() {
            if mesh.signed_measure(e) <= 0.0 {
                return Err(MeshError::NonpositiveMeasure {
                    elem: e,
                    measure: if dim == 2 { "area" } else { "volume" },
                });
            }
        }
        mesh.build_adjacency()?;
        Ok(mesh)
    }

    /// Reads a mesh from Triangle/TetGen `.node` and `.ele` files.
    pub fn from_files(
        node_path: impl AsRef<std::path::Path>,
        ele_path: impl AsRef<std::path::Path>,
    ) -> Result<Self, MeshError> {
        io::load_mesh(node_path.as_ref(), ele_path.as_ref())
    }

    /// Writes the mesh as a 1-based `.node`/`.ele` pair.
    pub fn write_files(
        &self,
        node_path: impl AsRef<std::path::Path>,
        ele_path: impl AsRef<std::path::Path>,
    ) -> Result<(), MeshError> {
        io::write_mesh(self, node_path.as_ref(), ele_path.as_ref())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn n_elems(&self) -> usize {
        self.elems.len() / (self.dim + 1)
    }

    pub fn nodes_per_elem(&self) -> usize {
        self.dim + 1
    }

    pub fn coord(&self, node: usize) -> [f64; 3] {
        self.coords[node]
    }

    pub fn coords(&self) -> &[[f64; 3]] {
        &self.coords
    }

    pub fn elem(&self, e: usize) -> &[usize] {
        let npe = self.dim + 1;
        &self.elems[e * npe..(e + 1) * npe]
    }

    pub fn sibling(&self, hf: HalfFacetId) -> Option<HalfFacetId> {
        self.sibhfs[hf.element * (self.dim + 1) + hf.local_facet]
    }

    pub fn v2hf(&self, node: usize) -> Option<HalfFacetId> {
        self.v2hf[node]
    }

    pub fn is_boundary_facet(&self, hf: HalfFacetId) -> bool {
        self.sibling(hf).is_none()
    }

    /// A node lies on the boundary iff some incident half-facet has no
    /// sibling. `v2hf` prefers boundary half-facets, so one lookup suffices.
    pub fn is_boundary_node(&self, node: usize) -> bool {
        match self.v2hf[node] {
            Some(hf) => self.is_boundary_facet(hf),
            None => false,
        }
    }

    /// Node ids of local facet `f` of element `e`, in facet orientation.
    pub fn facet_nodes(&self, e: usize, f: usize) -> Vec<usize> {
        let elem = self.elem(e);
        match self.dim {
            2 => TRI_FACETS[f].iter().map(|&i| elem[i]).collect(),
            _ => TET_FACETS[f].iter().map(|&i| elem[i]).collect(),
        }
    }

    /// Signed area (2D) or volume (3D) of an element.
    pub fn signed_measure(&self, e: usize) -> f64 {
        let elem = self.elem(e);
        let p: Vec<[f64; 3]> = elem.iter().map(|&v| self.coords[v]).collect();
        signed_measure(self.dim, &p)
    }

    /// Number of boundary half-facets.
    pub fn n_boundary_facets(&self) -> usize {
        self.sibhfs.iter().filter(|s| s.is_none()).count()
    }

    fn build_adjacency(&mut self) -> Result<(), MeshError> {
        let npe = self.dim + 1;
        let n_elems = self.n_elems();
        self.sibhfs = vec![None; n_elems * npe];
        self.v2hf = vec![None; self.n_nodes()];

        // Pair half-facets by their sorted node sets.
        let mut facet_map: HashMap<[usize; 3], HalfFacetId> = HashMap::new();
        for e in 0..n_elems {
            for f in 0..npe {
                let nodes = self.facet_nodes(e, f);
                let mut key = [usize::MAX; 3];
                for (slot, &v) in key.iter_mut().zip(nodes.iter()) {
                    *slot = v;
                }
                key.sort_unstable();
                let here = HalfFacetId {
                    element: e,
                    local_facet: f,
                };
                match facet_map.get(&key) {
                    None => {
                        facet_map.insert(key, here);
                    }
                    Some(&other) => {
                        // A third element on the same facet finds the first
                        // one already paired.
                        if self.sibhfs[other.element * npe + other.local_facet].is_some() {
                            return Err(MeshError::NonManifold { nodes });
                        }
                        self.sibhfs[e * npe + f] = Some(other);
                        self.sibhfs[other.element * npe + other.local_facet] = Some(here);
                    }
                }
            }
        }

        // First pass: any incident half-facet.
        for e in 0..n_elems {
            let elem: Vec<usize> = self.elem(e).to_vec();
            for f in 0..npe {
                // Half-facet f contains every vertex except the opposite one.
                for (local, &v) in elem.iter().enumerate() {
                    if local != f && self.v2hf[v].is_none() {
                        self.v2hf[v] = Some(HalfFacetId {
                            element: e,
                            local_facet: f,
                        });
                    }
                }
            }
        }
        // Second pass: prefer boundary half-facets so boundary detection is a
        // single lookup.
        for e in 0..n_elems {
            let elem: Vec<usize> = self.elem(e).to_vec();
            for f in 0..npe {
                if self.sibhfs[e * npe + f].is_some() {
                    continue;
                }
                let hf = HalfFacetId {
                    element: e,
                    local_facet: f,
                };
                for (local, &v) in elem.iter().enumerate() {
                    if local == f {
                        continue;
                    }
                    let cur = self.v2hf[v].expect("referenced node");
                    if !self.is_boundary_facet(cur) {
                        self.v2hf[v] = Some(hf);
                    }
                }
            }
        }
        Ok(())
    }

    /// All elements containing `node`, ascending, found by walking sibling
    /// half-facets from the node's stored half-facet.
    pub fn one_ring_elements(&self, node: usize) -> Result<Vec<usize>, MeshError> {
        let start = self.v2hf[node].ok_or(MeshError::UnreferencedNode(node))?;
        let npe = self.dim + 1;
        let mut found = vec![start.element];
        let mut stack = vec![start.element];
        while let Some(e) = stack.pop() {
            let elem = self.elem(e);
            for f in 0..npe {
                // Cross only facets that contain the node.
                if elem[f] == node {
                    continue;
                }
                if let Some(sib) = self.sibhfs[e * npe + f] {
                    if !found.contains(&sib.element) {
                        found.push(sib.element);
                        stack.push(sib.element);
                    }
                }
            }
        }
        found.sort_unstable();
        Ok(found)
    }

    /// Nodes of the given ring neighborhood of `node`: the node itself first,
    /// then the remaining ring members ascending by id.
    ///
    /// The 1-ring contains the nodes of all incident elements. The
    /// `(k+1)`-ring adds the 1-rings of every k-ring member. A half ring (2D)
    /// adds the nodes of triangles sharing an edge with the current set; in
    /// 3D, +1/3 adds the nodes of elements sharing a face and +2/3 adds the
    /// nodes of faces sharing an edge.
    pub fn ring_neighborhood(&self, node: usize, ring: RingSize) -> Result<Vec<usize>, MeshError> {
        if ring.whole < 1 {
            return Err(MeshError::InvalidArgument(
                "ring size must be at least 1".into(),
            ));
        }
        if !ring.fraction.legal_for_dim(self.dim) {
            return Err(MeshError::InvalidArgument(format!(
                "ring fraction {:?} is illegal in {}D",
                ring.fraction, self.dim
            )));
        }

        let mut set = vec![node];
        self.expand_one_ring(&[node], &mut set)?;
        set.sort_unstable();
        set.dedup();
        for _ in 1..ring.whole {
            let snapshot = set.clone();
            self.expand_one_ring(&snapshot, &mut set)?;
            set.sort_unstable();
            set.dedup();
        }

        if ring.fraction != RingFraction::Zero {
            let snapshot = set.clone();
            let candidates = self.incident_elements(&snapshot)?;
            let mut extra = Vec::new();
            for e in candidates {
                let elem = self.elem(e);
                match ring.fraction {
                    RingFraction::Half => {
                        // Triangle sharing an edge with the set.
                        for f in 0..3 {
                            let edge = TRI_FACETS[f].map(|i| elem[i]);
                            if contains(&snapshot, edge[0]) && contains(&snapshot, edge[1]) {
                                extra.extend_from_slice(elem);
                                break;
                            }
                        }
                    }
                    RingFraction::Third => {
                        // Tetrahedron sharing a whole face with the set.
                        for f in 0..4 {
                            let face = TET_FACETS[f].map(|i| elem[i]);
                            if face.iter().all(|&v| contains(&snapshot, v)) {
                                extra.extend_from_slice(elem);
                                break;
                            }
                        }
                    }
                    RingFraction::TwoThirds => {
                        // Faces sharing an edge with the set contribute their
                        // own nodes (not the whole element).
                        for f in 0..4 {
                            let face = TET_FACETS[f].map(|i| elem[i]);
                            let shares_edge = (0..3).any(|a| {
                                let b = (a + 1) % 3;
                                contains(&snapshot, face[a]) && contains(&snapshot, face[b])
                            });
                            if shares_edge {
                                extra.extend_from_slice(&face);
                            }
                        }
                    }
                    RingFraction::Zero => unreachable!(),
                }
            }
            set.extend(extra);
            set.sort_unstable();
            set.dedup();
        }

        let mut out = Vec::with_capacity(set.len());
        out.push(node);
        out.extend(set.into_iter().filter(|&v| v != node));
        Ok(out)
    }

    fn expand_one_ring(&self, members: &[usize], out: &mut Vec<usize>) -> Result<(), MeshError> {
        for &v in members {
            for e in self.one_ring_elements(v)? {
                out.extend_from_slice(self.elem(e));
            }
        }
        Ok(())
    }

    /// Elements incident on at least one node of the sorted set.
    fn incident_elements(&self, sorted_nodes: &[usize]) -> Result<Vec<usize>, MeshError> {
        let mut elems = Vec::new();
        for &v in sorted_nodes {
            if self.v2hf[v].is_some() {
                elems.extend(self.one_ring_elements(v)?);
            }
        }
        elems.sort_unstable();
        elems.dedup();
        Ok(elems)
    }

    /// Moves one node of each target element toward its orthogonal projection
    /// on the opposite facet, by the given fraction of the distance. The moved
    /// node is the element's highest local vertex. Connectivity is unchanged;
    /// the result is a new mesh.
    pub fn degrade(&self, targets: &[usize], fraction: f64) -> Result<MeshTopology, MeshError> {
        quality::degrade_mesh(self, targets, fraction)
    }

    /// Extremal angles and aspect ratio over all elements.
    pub fn quality(&self) -> QualityReport {
        quality::mesh_quality(self)
    }
}

fn contains(sorted: &[usize], v: usize) -> bool {
    sorted.binary_search(&v).is_ok()
}

pub(crate) fn signed_measure(dim: usize, p: &[[f64; 3]]) -> f64 {
    match dim {
        2 => {
            let ax = p[1][0] - p[0][0];
            let ay = p[1][1] - p[0][1];
            let bx = p[2][0] - p[0][0];
            let by = p[2][1] - p[0][1];
            0.5 * (ax * by - ay * bx)
        }
        _ => {
            let a = sub(p[1], p[0]);
            let b = sub(p[2], p[0]);
            let c = sub(p[3], p[0]);
            dot(cross(a, b), c) / 6.0
        }
    }
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
