//! Experiment drivers: single solves, convergence studies, and the
//! element-quality degradation sweep.

use std::time::Instant;

use crate::discretization::{
    assemble_aes_fem, assemble_aes_fem_both, assemble_gfd, assemble_linear_fem, LinearSystem,
    LoadMode, WlsConfig,
};
use crate::linalg::{
    cg, condest_1norm, gauss_seidel, gmres, ilu, incomplete_cholesky, Identity, Preconditioner,
    SolveReport, SolverConfig, SparseRowMatrix,
};
use crate::mesh::{MeshError, MeshTopology, QualityReport};

use super::norms::{convergence_rate, error_norms};
use super::problems::ProblemCase;
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Fem,
    AesFem1,
    AesFem2,
    Gfd,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Fem => "FEM",
            Method::AesFem1 => "AesFem1",
            Method::AesFem2 => "AesFem2",
            Method::Gfd => "GFD",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    Ilu,
    GaussSeidel,
    IncompleteCholesky,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrylovKind {
    Gmres,
    Cg,
}

#[derive(Debug, Clone)]
pub struct SolverSettings {
    pub krylov: KrylovKind,
    pub precond: PrecondKind,
    pub tol: f64,
    pub drop_tol: f64,
    pub max_iter: usize,
    pub restart: Option<usize>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            krylov: KrylovKind::Gmres,
            precond: PrecondKind::Ilu,
            tol: 1e-8,
            drop_tol: 1e-3,
            max_iter: 2000,
            restart: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub method: Method,
    pub wls: WlsConfig,
    pub solver: SolverSettings,
    pub condest: bool,
}

impl RunConfig {
    pub fn new(method: Method) -> Self {
        RunConfig {
            method,
            wls: WlsConfig::default(),
            solver: SolverSettings::default(),
            condest: false,
        }
    }
}

/// Everything one solve produces, including the wall-time decomposition into
/// initialization, assembly, preconditioner construction, and solve.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub method: Method,
    pub dim: usize,
    pub pde_label: String,
    pub solution_label: String,
    pub nodes: usize,
    pub elements: usize,
    pub quality: QualityReport,
    pub l2_error: f64,
    pub linf_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stagnated: bool,
    pub condest: Option<f64>,
    pub t_init_s: f64,
    pub t_assembly_s: f64,
    pub t_precond_s: f64,
    pub t_solve_s: f64,
}

fn build_preconditioner(
    matrix: &SparseRowMatrix,
    settings: &SolverSettings,
) -> Result<Box<dyn Preconditioner>, HarnessError> {
    Ok(match settings.precond {
        PrecondKind::Ilu => Box::new(ilu(matrix, settings.drop_tol)?),
        PrecondKind::GaussSeidel => Box::new(gauss_seidel(matrix)?),
        PrecondKind::IncompleteCholesky => {
            Box::new(incomplete_cholesky(matrix, settings.drop_tol)?)
        }
        PrecondKind::None => Box::new(Identity),
    })
}

/// Preconditioner build plus Krylov solve, with both timings filled in.
fn solve_system(
    matrix: &SparseRowMatrix,
    rhs: &[f64],
    settings: &SolverSettings,
) -> Result<(Vec<f64>, SolveReport), HarnessError> {
    let t0 = Instant::now();
    let precond = build_preconditioner(matrix, settings)?;
    let t_precond = t0.elapsed().as_secs_f64();
    let cfg = SolverConfig {
        tol: settings.tol,
        max_iter: settings.max_iter,
        restart: settings.restart,
    };
    let (x, mut report) = match settings.krylov {
        KrylovKind::Gmres => gmres(matrix, rhs, precond.as_ref(), &cfg),
        KrylovKind::Cg => cg(matrix, rhs, precond.as_ref(), &cfg)?,
    };
    report.precond_seconds = t_precond;
    Ok((x, report))
}

fn assemble(
    mesh: &MeshTopology,
    problem: &ProblemCase,
    method: Method,
    wls: &WlsConfig,
) -> Result<LinearSystem, HarnessError> {
    Ok(match method {
        Method::Fem => assemble_linear_fem(mesh, &problem.pde, problem)?,
        Method::AesFem1 => assemble_aes_fem(mesh, &problem.pde, problem, LoadMode::AesFem1, wls)?,
        Method::AesFem2 => assemble_aes_fem(mesh, &problem.pde, problem, LoadMode::AesFem2, wls)?,
        Method::Gfd => assemble_gfd(mesh, &problem.pde, problem, wls)?,
    })
}

fn finish_report(
    mesh: &MeshTopology,
    problem: &ProblemCase,
    method: Method,
    system: &LinearSystem,
    x: &[f64],
    solve: &SolveReport,
    condest: Option<f64>,
    quality: QualityReport,
    t_init: f64,
    t_assembly: f64,
) -> RunReport {
    let nodal = system.expand(x);
    let (l2, linf) = error_norms(mesh, &nodal, problem);
    RunReport {
        method,
        dim: mesh.dim(),
        pde_label: problem.pde.label().to_string(),
        solution_label: problem.label.clone(),
        nodes: mesh.n_nodes(),
        elements: mesh.n_elems(),
        quality,
        l2_error: l2,
        linf_error: linf,
        iterations: solve.iterations,
        converged: solve.converged,
        stagnated: solve.stagnated,
        condest,
        t_init_s: t_init,
        t_assembly_s: t_assembly,
        t_precond_s: solve.precond_seconds,
        t_solve_s: solve.solve_seconds,
    }
}

/// Assembles, preconditions, solves, and evaluates one case. `load_seconds`
/// is added to the initialization bucket so mesh loading done by the caller
/// is accounted for. Non-convergence is reported, not raised.
pub fn run_case(
    mesh: &MeshTopology,
    problem: &ProblemCase,
    cfg: &RunConfig,
    load_seconds: f64,
) -> Result<RunReport, HarnessError> {
    let t0 = Instant::now();
    let quality = mesh.quality();
    let t_init = load_seconds + t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let system = assemble(mesh, problem, cfg.method, &cfg.wls)?;
    let t_assembly = t1.elapsed().as_secs_f64();

    let (x, solve) = solve_system(&system.matrix, &system.rhs, &cfg.solver)?;
    let condest = cfg.condest.then(|| condest_1norm(&system.matrix));
    Ok(finish_report(
        mesh, problem, cfg.method, &system, &x, &solve, condest, quality, t_init, t_assembly,
    ))
}

/// Per-level reports plus endpoint convergence rates for both norms.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub reports: Vec<RunReport>,
    pub rate_l2: f64,
    pub rate_linf: f64,
}

pub fn convergence_study(
    meshes: &[MeshTopology],
    problem: &ProblemCase,
    cfg: &RunConfig,
) -> Result<ConvergenceStudy, HarnessError> {
    if meshes.len() < 2 {
        return Err(HarnessError::Config(
            "a convergence study needs at least two meshes".into(),
        ));
    }
    let mut reports = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        reports.push(run_case(mesh, problem, cfg, 0.0)?);
    }
    let nodes: Vec<usize> = reports.iter().map(|r| r.nodes).collect();
    let l2: Vec<f64> = reports.iter().map(|r| r.l2_error).collect();
    let linf: Vec<f64> = reports.iter().map(|r| r.linf_error).collect();
    let dim = meshes[0].dim();
    Ok(ConvergenceStudy {
        rate_l2: convergence_rate(&l2, &nodes, dim),
        rate_linf: convergence_rate(&linf, &nodes, dim),
        reports,
    })
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub wls: WlsConfig,
    /// Solver used for the symmetric FEM systems.
    pub fem_solver: SolverSettings,
    /// Solver used for the nonsymmetric extended-stencil and collocation
    /// systems.
    pub krylov_solver: SolverSettings,
    pub condest: bool,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub fraction: f64,
    pub quality: QualityReport,
    pub reports: Vec<RunReport>,
}

/// Sweep results; `halted` records a degradation failure that cut the sweep
/// short, with the partial results kept.
#[derive(Debug)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    pub halted: Option<String>,
}

/// Degrades the base mesh through the given fractions and runs every
/// requested method at each step. When both load variants of the extended
/// stencil method are requested, the shared stiffness matrix is assembled,
/// preconditioned, and condition-estimated once.
pub fn quality_sweep(
    base: &MeshTopology,
    targets: &[usize],
    fractions: &[f64],
    methods: &[Method],
    problem: &ProblemCase,
    cfg: &SweepConfig,
) -> Result<SweepOutcome, HarnessError> {
    if fractions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HarnessError::Config(
            "sweep fractions must be strictly increasing".into(),
        ));
    }
    let both_aes =
        methods.contains(&Method::AesFem1) && methods.contains(&Method::AesFem2);

    let mut points = Vec::new();
    let mut halted = None;
    for &fraction in fractions {
        let mesh = if fraction == 0.0 {
            base.clone()
        } else {
            match base.degrade(targets, fraction) {
                Ok(m) => m,
                Err(e) => {
                    halted = Some(format!("degradation stopped at fraction {fraction}: {e}"));
                    break;
                }
            }
        };
        let quality = mesh.quality();
        let mut reports = Vec::new();

        for &method in methods {
            match method {
                Method::Fem => {
                    reports.push(run_case_with(
                        &mesh,
                        problem,
                        method,
                        &cfg.wls,
                        &cfg.fem_solver,
                        cfg.condest,
                        quality,
                    )?);
                }
                Method::Gfd => {
                    reports.push(run_case_with(
                        &mesh,
                        problem,
                        method,
                        &cfg.wls,
                        &cfg.krylov_solver,
                        cfg.condest,
                        quality,
                    )?);
                }
                Method::AesFem1 if both_aes => {
                    // Shared-matrix fast path emits both variants at once.
                    let t1 = Instant::now();
                    let (system, rhs2) =
                        assemble_aes_fem_both(&mesh, &problem.pde, problem, &cfg.wls)?;
                    let t_assembly = t1.elapsed().as_secs_f64();
                    let condest = cfg.condest.then(|| condest_1norm(&system.matrix));

                    let (x1, solve1) =
                        solve_system(&system.matrix, &system.rhs, &cfg.krylov_solver)?;
                    reports.push(finish_report(
                        &mesh, problem, Method::AesFem1, &system, &x1, &solve1, condest,
                        quality, 0.0, t_assembly,
                    ));
                    let (x2, solve2) = solve_system(&system.matrix, &rhs2, &cfg.krylov_solver)?;
                    reports.push(finish_report(
                        &mesh, problem, Method::AesFem2, &system, &x2, &solve2, condest,
                        quality, 0.0, t_assembly,
                    ));
                }
                Method::AesFem2 if both_aes => {} // covered above
                Method::AesFem1 | Method::AesFem2 => {
                    reports.push(run_case_with(
                        &mesh,
                        problem,
                        method,
                        &cfg.wls,
                        &cfg.krylov_solver,
                        cfg.condest,
                        quality,
                    )?);
                }
            }
        }
        points.push(SweepPoint {
            fraction,
            quality,
            reports,
        });
    }
    Ok(SweepOutcome { points, halted })
}

fn run_case_with(
    mesh: &MeshTopology,
    problem: &ProblemCase,
    method: Method,
    wls: &WlsConfig,
    solver: &SolverSettings,
    condest: bool,
    quality: QualityReport,
) -> Result<RunReport, HarnessError> {
    let t1 = Instant::now();
    let system = assemble(mesh, problem, method, wls)?;
    let t_assembly = t1.elapsed().as_secs_f64();
    let (x, solve) = solve_system(&system.matrix, &system.rhs, solver)?;
    let est = condest.then(|| condest_1norm(&system.matrix));
    Ok(finish_report(
        mesh, problem, method, &system, &x, &solve, est, quality, 0.0, t_assembly,
    ))
}

/// Unit-square mesh of unstructured quality without an external mesher:
/// grid nodes displaced by a deterministic pseudo-random jitter, and each
/// cell split along a pseudo-randomly chosen diagonal so node valences vary
/// between four and eight. `amplitude` is in units of the grid spacing;
/// values up to about 0.25 keep all elements positively oriented.
pub fn jittered_unit_square(n: usize, amplitude: f64) -> Result<MeshTopology, MeshError> {
    if n < 2 {
        return Err(MeshError::InvalidArgument(
            "jittered mesh needs at least 2 nodes per side".into(),
        ));
    }
    let h = 1.0 / (n - 1) as f64;
    let node = |i: usize, j: usize| j * n + i;
    let mut coords = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let mut c = [i as f64 * h, j as f64 * h, 0.0];
            if i > 0 && i < n - 1 && j > 0 && j < n - 1 {
                let v = node(i, j) as u64;
                c[0] += amplitude * h * to_unit(splitmix64(v * 2 + 1));
                c[1] += amplitude * h * to_unit(splitmix64(v * 2 + 2));
            }
            coords.push(c);
        }
    }
    let mut elems = Vec::with_capacity(6 * (n - 1) * (n - 1));
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let a = node(i, j);
            let b = node(i + 1, j);
            let c = node(i, j + 1);
            let d = node(i + 1, j + 1);
            if splitmix64((j * (n - 1) + i) as u64 ^ 0xD15EA5E) & 1 == 0 {
                elems.extend_from_slice(&[a, b, d]);
                elems.extend_from_slice(&[a, d, c]);
            } else {
                elems.extend_from_slice(&[a, b, c]);
                elems.extend_from_slice(&[b, d, c]);
            }
        }
    }
    MeshTopology::from_parts(2, coords, elems)
}

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Maps to [-1, 1).
fn to_unit(r: u64) -> f64 {
    (r >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}
