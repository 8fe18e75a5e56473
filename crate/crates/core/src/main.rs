//! Command-line harness: mesh generation and inspection, single solves,
//! convergence studies, and element-quality sweeps, all reporting CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aesfem::discretization::{PdeSpec, WlsConfig};
use aesfem::harness::{
    convergence_study, csv_header, csv_row, quality_sweep, run_case, KrylovKind, Method,
    PrecondKind, ProblemCase, RunConfig, SolutionId, SolverSettings, SweepConfig,
};
use aesfem::mesh::{structured_mesh, MeshTopology};

#[derive(Parser)]
#[command(
    name = "aesfem",
    about = "Extended-stencil finite elements with FEM and generalized finite difference comparators",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a structured unit square/cube mesh as a .node/.ele pair.
    GenMesh {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Nodes per side.
        #[arg(long)]
        n: usize,
        /// Output path prefix; writes <out>.node and <out>.ele.
        #[arg(long, default_value = "mesh")]
        out: String,
    },
    /// Report mesh size and shape quality.
    MeshInfo {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble and solve one problem, emitting one CSV row.
    Solve {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Load-vector variant when --method aesfem is given without a digit.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        load_mode: u8,
        #[command(flatten)]
        wls: WlsArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Also estimate the 1-norm condition number of the system matrix.
        #[arg(long)]
        condest: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a mesh refinement series and report per-level errors plus rates.
    Convergence {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Comma-separated nodes-per-side list for generated meshes.
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        ns: Vec<usize>,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        load_mode: u8,
        #[command(flatten)]
        wls: WlsArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degrade selected elements through a fraction ladder and compare
    /// conditioning, iteration counts, and accuracy across methods.
    QualitySweep {
        #[command(flatten)]
        mesh: MeshArgs,
        /// Element ids whose highest-index vertex moves toward the opposite
        /// facet.
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<usize>,
        /// Strictly increasing degradation fractions in [0, 1).
        #[arg(long, value_delimiter = ',', required = true)]
        fractions: Vec<f64>,
        /// Methods to run at every sweep point.
        #[arg(long, value_delimiter = ',', default_value = "fem,aesfem1,aesfem2,gfd")]
        methods: Vec<MethodArg>,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        wls: WlsArgs,
        /// Solver for the extended-stencil and collocation systems.
        #[command(flatten)]
        solver: SolverArgs,
        /// Preconditioner for the FEM solve (CG path).
        #[arg(long, value_enum, default_value_t = PrecondArg::Ic)]
        fem_precond: PrecondArg,
        #[arg(long)]
        condest: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MeshArgs {
    /// Mesh file prefix; reads <mesh>.node and <mesh>.ele.
    #[arg(long, conflicts_with = "n")]
    mesh: Option<String>,
    /// Generate a structured mesh with this many nodes per side instead.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
}

impl MeshArgs {
    fn load(&self) -> anyhow_like::Result<(MeshTopology, f64)> {
        let t0 = Instant::now();
        let mesh = match (&self.mesh, self.n) {
            (Some(prefix), None) => MeshTopology::from_files(
                format!("{prefix}.node"),
                format!("{prefix}.ele"),
            )?,
            (None, Some(n)) => structured_mesh(self.dim, n)?,
            _ => {
                return Err("exactly one of --mesh or --n is required".into());
            }
        };
        Ok((mesh, t0.elapsed().as_secs_f64()))
    }
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_enum, default_value_t = PdeArg::Poisson)]
    pde: PdeArg,
    #[arg(long, value_enum, default_value_t = SolutionArg::U1)]
    solution: SolutionArg,
    /// Convection vector components for the convection-diffusion equation.
    #[arg(long, value_delimiter = ',', num_args = 2..=3)]
    convection: Option<Vec<f64>>,
}

impl ProblemArgs {
    fn build(&self, dim: usize) -> ProblemCase {
        let pde = match self.pde {
            PdeArg::Poisson => PdeSpec::poisson(),
            PdeArg::ConvectionDiffusion => {
                let mut c = [1.0, 1.0, if dim == 3 { 1.0 } else { 0.0 }];
                if let Some(v) = &self.convection {
                    for (slot, &x) in c.iter_mut().zip(v) {
                        *slot = x;
                    }
                    if v.len() < 3 {
                        c[2] = 0.0;
                    }
                }
                PdeSpec::convection_diffusion(c)
            }
        };
        ProblemCase::analytic(self.solution.into(), dim, pde)
    }
}

#[derive(Args)]
struct WlsArgs {
    /// Polynomial degree of the stencil basis.
    #[arg(long, default_value_t = 2)]
    degree: usize,
    /// Regularizer in the inverse-distance row weights.
    #[arg(long, default_value_t = 0.01)]
    weight_eps: f64,
    /// Rank-truncation tolerance for the stencil factorization.
    #[arg(long, default_value_t = 1e-4)]
    rank_eps: f64,
}

impl WlsArgs {
    fn build(&self) -> WlsConfig {
        WlsConfig {
            degree: self.degree,
            weight_eps: self.weight_eps,
            rank_eps: self.rank_eps,
            cubic_load_rule: false,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Preconditioner drop tolerance.
    #[arg(long, default_value_t = 1e-3)]
    droptol: f64,
    #[arg(long, value_enum, default_value_t = PrecondArg::Ilu)]
    precond: PrecondArg,
    #[arg(long, value_enum, default_value_t = KrylovArg::Gmres)]
    krylov: KrylovArg,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// GMRES restart length; omitted means full GMRES.
    #[arg(long)]
    restart: Option<usize>,
}

impl SolverArgs {
    fn build(&self) -> SolverSettings {
        SolverSettings {
            krylov: self.krylov.into(),
            precond: self.precond.into(),
            tol: self.tol,
            drop_tol: self.droptol,
            max_iter: self.max_iter,
            restart: self.restart,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Fem,
    Aesfem,
    Aesfem1,
    Aesfem2,
    Gfd,
}

impl MethodArg {
    fn resolve(self, load_mode: u8) -> Method {
        match self {
            MethodArg::Fem => Method::Fem,
            MethodArg::Aesfem1 => Method::AesFem1,
            MethodArg::Aesfem2 => Method::AesFem2,
            MethodArg::Aesfem => {
                if load_mode == 1 {
                    Method::AesFem1
                } else {
                    Method::AesFem2
                }
            }
            MethodArg::Gfd => Method::Gfd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PdeArg {
    Poisson,
    #[value(alias = "cd")]
    ConvectionDiffusion,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolutionArg {
    U1,
    U2,
    U3,
}

impl From<SolutionArg> for SolutionId {
    fn from(s: SolutionArg) -> SolutionId {
        match s {
            SolutionArg::U1 => SolutionId::U1,
            SolutionArg::U2 => SolutionId::U2,
            SolutionArg::U3 => SolutionId::U3,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum PrecondArg {
    Ilu,
    Gs,
    Ic,
    None,
}

impl From<PrecondArg> for PrecondKind {
    fn from(p: PrecondArg) -> PrecondKind {
        match p {
            PrecondArg::Ilu => PrecondKind::Ilu,
            PrecondArg::Gs => PrecondKind::GaussSeidel,
            PrecondArg::Ic => PrecondKind::IncompleteCholesky,
            PrecondArg::None => PrecondKind::None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KrylovArg {
    Gmres,
    Cg,
}

impl From<KrylovArg> for KrylovKind {
    fn from(k: KrylovArg) -> KrylovKind {
        match k {
            KrylovArg::Gmres => KrylovKind::Gmres,
            KrylovArg::Cg => KrylovKind::Cg,
        }
    }
}

/// Minimal boxed-error plumbing for the binary.
mod anyhow_like {
    pub type Error = Box<dyn std::error::Error>;
    pub type Result<T> = std::result::Result<T, Error>;
}

use anyhow_like::Result;

/// Line-buffered sink that flushes after every row so partial output survives
/// late numeric failures.
struct Sink {
    out: Box<dyn Write>,
}

impl Sink {
    fn create(path: &Option<PathBuf>) -> Result<Sink> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(std::io::stdout()),
        };
        Ok(Sink { out })
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}")?;
        self.out.flush()?;
        Ok(())
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenMesh { dim, n, out } => {
            let mesh = structured_mesh(dim, n)?;
            mesh.write_files(format!("{out}.node"), format!("{out}.ele"))?;
            eprintln!(
                "wrote {}.node / {}.ele ({} nodes, {} elements)",
                out,
                out,
                mesh.n_nodes(),
                mesh.n_elems()
            );
            Ok(())
        }
        Command::MeshInfo { mesh, out } => {
            let (mesh, _) = mesh.load()?;
            let q = mesh.quality();
            let mut sink = Sink::create(&out)?;
            sink.line("nodes,elements,dim,min_angle_deg,max_angle_deg,max_aspect_ratio")?;
            sink.line(&format!(
                "{},{},{},{:.6},{:.6},{:.6}",
                mesh.n_nodes(),
                mesh.n_elems(),
                mesh.dim(),
                q.min_angle_deg,
                q.max_angle_deg,
                q.max_aspect_ratio
            ))?;
            Ok(())
        }
        Command::Solve {
            mesh,
            problem,
            method,
            load_mode,
            wls,
            solver,
            condest,
            out,
        } => {
            let (mesh, load_s) = mesh.load()?;
            let problem = problem.build(mesh.dim());
            let cfg = RunConfig {
                method: method.resolve(load_mode),
                wls: wls.build(),
                solver: solver.build(),
                condest,
            };
            let report = run_case(&mesh, &problem, &cfg, load_s)?;
            let mut sink = Sink::create(&out)?;
            sink.line(&csv_header(false))?;
            sink.line(&csv_row(&report, None))?;
            if !report.converged {
                eprintln!(
                    "warning: solver did not converge after {} iterations{}",
                    report.iterations,
                    if report.stagnated { " (stagnated)" } else { "" }
                );
            }
            Ok(())
        }
        Command::Convergence {
            dim,
            ns,
            problem,
            method,
            load_mode,
            wls,
            solver,
            out,
        } => {
            if ns.len() < 2 {
                return Err("convergence needs at least two refinement levels".into());
            }
            let meshes: Vec<MeshTopology> = ns
                .iter()
                .map(|&n| structured_mesh(dim, n))
                .collect::<std::result::Result<_, _>>()?;
            let problem = problem.build(dim);
            let cfg = RunConfig {
                method: method.resolve(load_mode),
                wls: wls.build(),
                solver: solver.build(),
                condest: false,
            };
            let study = convergence_study(&meshes, &problem, &cfg)?;
            let mut sink = Sink::create(&out)?;
            sink.line(&csv_header(true))?;
            let last = study.reports.len() - 1;
            for (i, report) in study.reports.iter().enumerate() {
                if i == last {
                    sink.line(&csv_row(report, Some((study.rate_l2, study.rate_linf))))?;
                } else {
                    // Earlier levels carry empty rate cells.
                    sink.line(&format!("{},,", csv_row(report, None)))?;
                }
            }
            Ok(())
        }
        Command::QualitySweep {
            mesh,
            targets,
            fractions,
            methods,
            problem,
            wls,
            solver,
            fem_precond,
            condest,
            out,
        } => {
            let (mesh, _) = mesh.load()?;
            let problem = problem.build(mesh.dim());
            let methods: Vec<Method> = methods.iter().map(|m| m.resolve(2)).collect();
            let mut fem_solver = solver.build();
            fem_solver.krylov = KrylovKind::Cg;
            fem_solver.precond = fem_precond.into();
            let cfg = SweepConfig {
                wls: wls.build(),
                fem_solver,
                krylov_solver: solver.build(),
                condest,
            };
            let mut sink = Sink::create(&out)?;
            sink.line(&csv_header(false))?;
            let outcome = quality_sweep(&mesh, &targets, &fractions, &methods, &problem, &cfg)?;
            for point in &outcome.points {
                for report in &point.reports {
                    sink.line(&csv_row(report, None))?;
                }
            }
            if let Some(halt) = outcome.halted {
                return Err(halt.into());
            }
            Ok(())
        }
    }
}
