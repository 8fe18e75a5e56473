//! Benchmark problems, error norms, experiment drivers, and CSV reporting.

use thiserror::Error;

use crate::discretization::AssemblyError;
use crate::linalg::LinalgError;
use crate::mesh::MeshError;

mod norms;
mod problems;
mod report;
mod runner;

pub use norms::{convergence_rate, error_norms};
pub use problems::{ProblemCase, SolutionId};
pub use report::{csv_header, csv_row, CONVERGENCE_EXTRA_COLUMNS};
pub use runner::{
    convergence_study, jittered_unit_square, quality_sweep, run_case, ConvergenceStudy,
    KrylovKind, Method, PrecondKind, RunConfig, RunReport, SolverSettings, SweepConfig,
    SweepOutcome, SweepPoint,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Config(String),
}
