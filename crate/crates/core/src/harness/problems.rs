//! Analytic test problems with manufactured sources.
//!
//! Each case carries the exact solution, its gradient, and its Laplacian in
//! closed form; the source is derived as `f = -lap u (+ c . grad u)` so the
//! solution solves the selected equation exactly. Dirichlet data is the exact
//! solution restricted to the boundary.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::discretization::{PdeSpec, ProblemData};

type Scalar = Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>;
type Vector = Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;

/// The three analytic solutions used throughout the experiments: a polynomial
/// bump, a trigonometric product, and a hyperbolic product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionId {
    U1,
    U2,
    U3,
}

impl SolutionId {
    pub fn label(self) -> &'static str {
        match self {
            SolutionId::U1 => "u1",
            SolutionId::U2 => "u2",
            SolutionId::U3 => "u3",
        }
    }
}

#[derive(Clone)]
pub struct ProblemCase {
    pub dim: usize,
    pub pde: PdeSpec,
    pub label: String,
    u: Scalar,
    grad_u: Vector,
    laplacian_u: Scalar,
}

impl ProblemCase {
    /// One of the named analytic solutions on the unit square or cube.
    pub fn analytic(id: SolutionId, dim: usize, pde: PdeSpec) -> ProblemCase {
        assert!(dim == 2 || dim == 3);
        let (u, grad_u, laplacian_u): (Scalar, Vector, Scalar) = match (id, dim) {
            (SolutionId::U1, 2) => (
                Arc::new(|p: [f64; 3]| 16.0 * p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1])),
                Arc::new(|p: [f64; 3]| {
                    [
                        16.0 * (1.0 - 2.0 * p[0]) * p[1] * (1.0 - p[1]),
                        16.0 * p[0] * (1.0 - p[0]) * (1.0 - 2.0 * p[1]),
                        0.0,
                    ]
                }),
                Arc::new(|p: [f64; 3]| {
                    -32.0 * (p[1] * (1.0 - p[1]) + p[0] * (1.0 - p[0]))
                }),
            ),
            (SolutionId::U2, 2) => (
                Arc::new(|p: [f64; 3]| (PI * p[0]).cos() * (PI * p[1]).cos()),
                Arc::new(|p: [f64; 3]| {
                    [
                        -PI * (PI * p[0]).sin() * (PI * p[1]).cos(),
                        -PI * (PI * p[0]).cos() * (PI * p[1]).sin(),
                        0.0,
                    ]
                }),
                Arc::new(|p: [f64; 3]| {
                    -2.0 * PI * PI * (PI * p[0]).cos() * (PI * p[1]).cos()
                }),
            ),
            (SolutionId::U3, 2) => {
                let c = 1.0 / (PI.sinh() * PI.cosh());
                (
                    Arc::new(move |p: [f64; 3]| c * (PI * p[0]).sinh() * (PI * p[1]).cosh()),
                    Arc::new(move |p: [f64; 3]| {
                        [
                            c * PI * (PI * p[0]).cosh() * (PI * p[1]).cosh(),
                            c * PI * (PI * p[0]).sinh() * (PI * p[1]).sinh(),
                            0.0,
                        ]
                    }),
                    Arc::new(move |p: [f64; 3]| {
                        2.0 * PI * PI * c * (PI * p[0]).sinh() * (PI * p[1]).cosh()
                    }),
                )
            }
            (SolutionId::U1, 3) => (
                Arc::new(|p: [f64; 3]| {
                    64.0 * p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]) * p[2] * (1.0 - p[2])
                }),
                Arc::new(|p: [f64; 3]| {
                    let (x, y, z) = (p[0], p[1], p[2]);
                    [
                        64.0 * (1.0 - 2.0 * x) * y * (1.0 - y) * z * (1.0 - z),
                        64.0 * x * (1.0 - x) * (1.0 - 2.0 * y) * z * (1.0 - z),
                        64.0 * x * (1.0 - x) * y * (1.0 - y) * (1.0 - 2.0 * z),
                    ]
                }),
                Arc::new(|p: [f64; 3]| {
                    let (x, y, z) = (p[0], p[1], p[2]);
                    -128.0
                        * (y * (1.0 - y) * z * (1.0 - z)
                            + x * (1.0 - x) * z * (1.0 - z)
                            + x * (1.0 - x) * y * (1.0 - y))
                }),
            ),
            (SolutionId::U2, 3) => (
                Arc::new(|p: [f64; 3]| {
                    (PI * p[0]).cos() * (PI * p[1]).cos() * (PI * p[2]).cos()
                }),
                Arc::new(|p: [f64; 3]| {
                    let (cx, cy, cz) = ((PI * p[0]).cos(), (PI * p[1]).cos(), (PI * p[2]).cos());
                    let (sx, sy, sz) = ((PI * p[0]).sin(), (PI * p[1]).sin(), (PI * p[2]).sin());
                    [-PI * sx * cy * cz, -PI * cx * sy * cz, -PI * cx * cy * sz]
                }),
                Arc::new(|p: [f64; 3]| {
                    -3.0 * PI * PI * (PI * p[0]).cos() * (PI * p[1]).cos() * (PI * p[2]).cos()
                }),
            ),
            (SolutionId::U3, 3) => {
                let c = 1.0 / (PI.sinh() * PI.cosh() * PI.cosh());
                (
                    Arc::new(move |p: [f64; 3]| {
                        c * (PI * p[0]).sinh() * (PI * p[1]).cosh() * (PI * p[2]).cosh()
                    }),
                    Arc::new(move |p: [f64; 3]| {
                        let (shx, chx) = ((PI * p[0]).sinh(), (PI * p[0]).cosh());
                        let (shy, chy) = ((PI * p[1]).sinh(), (PI * p[1]).cosh());
                        let (shz, chz) = ((PI * p[2]).sinh(), (PI * p[2]).cosh());
                        [
                            c * PI * chx * chy * chz,
                            c * PI * shx * shy * chz,
                            c * PI * shx * chy * shz,
                        ]
                    }),
                    Arc::new(move |p: [f64; 3]| {
                        3.0 * PI
                            * PI
                            * c
                            * (PI * p[0]).sinh()
                            * (PI * p[1]).cosh()
                            * (PI * p[2]).cosh()
                    }),
                )
            }
            _ => unreachable!(),
        };
        ProblemCase {
            dim,
            pde,
            label: id.label().to_string(),
            u,
            grad_u,
            laplacian_u,
        }
    }

    /// A case from arbitrary closed forms; the source is manufactured from
    /// the Laplacian and gradient.
    pub fn from_parts(
        dim: usize,
        pde: PdeSpec,
        label: impl Into<String>,
        u: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static,
        grad_u: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static,
        laplacian_u: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static,
    ) -> ProblemCase {
        ProblemCase {
            dim,
            pde,
            label: label.into(),
            u: Arc::new(u),
            grad_u: Arc::new(grad_u),
            laplacian_u: Arc::new(laplacian_u),
        }
    }

    pub fn exact(&self, x: [f64; 3]) -> f64 {
        (self.u)(x)
    }

    pub fn exact_gradient(&self, x: [f64; 3]) -> [f64; 3] {
        (self.grad_u)(x)
    }

    pub fn exact_laplacian(&self, x: [f64; 3]) -> f64 {
        (self.laplacian_u)(x)
    }
}

impl ProblemData for ProblemCase {
    fn source(&self, x: [f64; 3]) -> f64 {
        let mut f = -(self.laplacian_u)(x);
        if let Some(c) = self.pde.convection_term() {
            let g = (self.grad_u)(x);
            f += c[0] * g[0] + c[1] * g[1] + c[2] * g[2];
        }
        f
    }

    fn dirichlet(&self, x: [f64; 3]) -> f64 {
        (self.u)(x)
    }
}

impl std::fmt::Debug for ProblemCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemCase")
            .field("dim", &self.dim)
            .field("pde", &self.pde)
            .field("label", &self.label)
            .finish()
    }
}
