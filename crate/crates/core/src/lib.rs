//! Finite element and generalized finite difference solvers whose trial
//! functions are weighted-least-squares polynomial fits over adaptive vertex
//! stencils.
//!
//! The crate is organized bottom-up:
//!
//! - [`mesh`]: simplicial meshes (triangles / tetrahedra) with array-based
//!   half-facet adjacency, ring-neighborhood queries, file I/O, structured
//!   generation, quality metrics, and controlled degradation.
//! - [`wls`]: scaled, weighted generalized Vandermonde systems per stencil,
//!   factored by pinned column-pivoted QR; derivative weights and basis
//!   function evaluation.
//! - [`linalg`]: compressed sparse row matrices, GMRES/CG, ILU / incomplete
//!   Cholesky / Gauss-Seidel preconditioners, and a 1-norm condition
//!   estimator.
//! - [`discretization`]: system assembly for Poisson and convection-diffusion
//!   problems with extended-stencil FEM, classical linear FEM, and strong-form
//!   generalized finite differences.
//! - [`harness`]: analytic benchmark problems, error norms, convergence and
//!   mesh-quality studies, and CSV reporting for the CLI.

pub mod discretization;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod wls;
