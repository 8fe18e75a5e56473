//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them on success).
//!
//! The criteria check the substantive claims end to end: partition of unity
//! and polynomial reproduction of the stencil bases, quadratic patch
//! exactness on a sliver mesh, convergence rates, element-quality
//! independence of conditioning and iteration counts, relative accuracy
//! ordering between methods, stiffness-matrix identity across load variants,
//! solver agreement with dense oracles, and the assembly-cost ordering.

use std::sync::Mutex;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Criteria run one at a time: several measure wall time or saturate every
/// core, and concurrent execution would contaminate both.
static SERIAL: Mutex<()> = Mutex::new(());

use aesfem::discretization::{
    assemble_aes_fem, assemble_gfd, assemble_linear_fem, LinearSystem, LoadMode, PdeSpec,
    WlsConfig,
};
use aesfem::harness::{
    convergence_study, jittered_unit_square, quality_sweep, run_case, KrylovKind, Method,
    PrecondKind, ProblemCase, RunConfig, SolutionId, SolverSettings, SweepConfig,
};
use aesfem::linalg::{condest_1norm, SparseRowMatrix};
use aesfem::mesh::{structured_mesh, MeshTopology, RingFraction, RingSize};
use aesfem::wls::{build_gvm_with_dim, glp_basis_eval, monomials_eval, LocalStencil, MonomialBasis};

struct Criterion {
    name: &'static str,
    started: Instant,
    budget_s: f64,
    failures: Vec<String>,
    _guard: std::sync::MutexGuard<'static, ()>,
}

impl Criterion {
    fn new(name: &'static str, budget_s: f64) -> Self {
        let guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
        Criterion {
            name,
            started: Instant::now(),
            budget_s,
            failures: Vec::new(),
            _guard: guard,
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(msg());
        }
    }

    fn finish(mut self) {
        let elapsed = self.started.elapsed().as_secs_f64();
        if elapsed >= self.budget_s {
            self.failures.push(format!(
                "runtime {elapsed:.1}s exceeded the {:.0}s budget",
                self.budget_s
            ));
        }
        let verdict = if self.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!("criterion {}: {verdict} ({elapsed:.1}s)", self.name);
        for f in &self.failures {
            println!("  - {f}");
        }
        assert!(
            self.failures.is_empty(),
            "criterion {} failed:\n{}",
            self.name,
            self.failures.join("\n")
        );
    }
}

fn random_stencil(rng: &mut StdRng, dim: usize, m: usize) -> LocalStencil {
    loop {
        let mut coords = vec![[0.0f64; 3]];
        for _ in 1..m {
            let mut p = [0.0; 3];
            for slot in p.iter_mut().take(dim) {
                *slot = rng.gen_range(-1.0..1.0);
            }
            coords.push(p);
        }
        if let Ok(st) = LocalStencil::new(0, (0..m).collect(), coords, 0.01) {
            return st;
        }
    }
}

fn full_rank_stencil(rng: &mut StdRng, dim: usize, m: usize) -> (LocalStencil, aesfem::wls::GvmFactor) {
    let n_terms = MonomialBasis::new(dim, 2).n_terms();
    for _ in 0..50 {
        let st = random_stencil(rng, dim, m);
        let gvm = build_gvm_with_dim(&st, dim, 2, 1e-4).unwrap();
        if gvm.rank() == n_terms {
            return (st, gvm);
        }
    }
    panic!("could not draw a full-rank stencil with {m} points in {dim}D");
}

fn degenerate_stencil(rng: &mut StdRng, dim: usize, m: usize) -> LocalStencil {
    // Points on a line (2D) or plane (3D): quadratic rank is unreachable.
    let mut coords = vec![[0.0f64; 3]];
    let dir = [rng.gen_range(0.2..1.0), rng.gen_range(-1.0..1.0), 0.3];
    for _ in 1..m {
        let t = rng.gen_range(-1.0..1.0);
        let s = rng.gen_range(-1.0..1.0);
        coords.push(match dim {
            2 => [t * dir[0], t * dir[1], 0.0],
            _ => [t * dir[0], t * dir[1], s],
        });
    }
    LocalStencil::new(0, (0..m).collect(), coords, 0.01).unwrap()
}

/// Criterion 1: partition of unity to 1e-12 over 200 randomized stencils
/// (at least 20 rank-deficient), and quadratic reproduction to 1e-10 relative
/// on the full-rank ones.
#[test]
fn criterion_1_partition_of_unity_and_reproduction() {
    let mut c = Criterion::new("1 (partition of unity & reproduction)", 5.0);
    let mut rng = StdRng::seed_from_u64(0x00AE5FE1);

    let mut deficient_checked = 0usize;
    for case in 0..200 {
        let dim = if case % 2 == 0 { 2 } else { 3 };
        let n_terms = MonomialBasis::new(dim, 2).n_terms();
        let deficient = case % 10 < 3;
        let (stencil, gvm) = if deficient {
            let m = rng.gen_range(5..=20);
            let st = degenerate_stencil(&mut rng, dim, m.max(4));
            let gvm = build_gvm_with_dim(&st, dim, 2, 1e-4).unwrap();
            deficient_checked += 1;
            (st, gvm)
        } else {
            let m = rng.gen_range((n_terms + 1)..=20);
            full_rank_stencil(&mut rng, dim, m)
        };
        if deficient {
            c.check(gvm.rank() < n_terms, || {
                format!("case {case}: expected rank deficiency, got {}", gvm.rank())
            });
        }

        // Partition of unity holds for every rank.
        for _ in 0..10 {
            let x = [
                rng.gen_range(-1.2..1.2),
                rng.gen_range(-1.2..1.2),
                if dim == 3 { rng.gen_range(-1.2..1.2) } else { 0.0 },
            ];
            let phi = glp_basis_eval(&gvm, x, [0, 0, 0]);
            let sum: f64 = phi.iter().sum();
            c.check((sum - 1.0).abs() <= 1e-12, || {
                format!("case {case}: |sum(phi) - 1| = {:.3e}", (sum - 1.0).abs())
            });
        }

        if deficient {
            continue;
        }
        // Quadratic reproduction (values and gradients) on full-rank cases.
        let basis = gvm.basis().clone();
        for _ in 0..3 {
            let x = [
                rng.gen_range(-0.9..0.9),
                rng.gen_range(-0.9..0.9),
                if dim == 3 { rng.gen_range(-0.9..0.9) } else { 0.0 },
            ];
            let phi = glp_basis_eval(&gvm, x, [0, 0, 0]);
            let grads: Vec<Vec<f64>> = (0..dim)
                .map(|axis| {
                    let mut d = [0usize; 3];
                    d[axis] = 1;
                    glp_basis_eval(&gvm, x, d)
                })
                .collect();
            for (term, &e) in basis.exponents().iter().enumerate() {
                let q = |p: [f64; 3]| {
                    p[0].powi(e[0] as i32) * p[1].powi(e[1] as i32) * p[2].powi(e[2] as i32)
                };
                let want = monomials_eval(&basis, x, [0, 0, 0])[term];
                let got: f64 = stencil
                    .local_coords
                    .iter()
                    .zip(&phi)
                    .map(|(&p, &w)| q(p) * w)
                    .sum();
                c.check((got - want).abs() <= 1e-10 * want.abs().max(1.0), || {
                    format!(
                        "case {case}: monomial {e:?} value error {:.3e}",
                        (got - want).abs()
                    )
                });
                for (axis, dphi) in grads.iter().enumerate() {
                    let mut d = [0usize; 3];
                    d[axis] = 1;
                    let want = monomials_eval(&basis, x, d)[term];
                    let got: f64 = stencil
                        .local_coords
                        .iter()
                        .zip(dphi)
                        .map(|(&p, &w)| q(p) * w)
                        .sum();
                    c.check((got - want).abs() <= 1e-10 * want.abs().max(1.0), || {
                        format!(
                            "case {case}: monomial {e:?} d/dx{axis} error {:.3e}",
                            (got - want).abs()
                        )
                    });
                }
            }
        }
    }
    c.check(deficient_checked >= 20, || {
        format!("only {deficient_checked} rank-deficient stencils in the corpus")
    });
    c.finish();
}

fn nearest_node_gap(mesh: &MeshTopology, node: usize) -> f64 {
    let p = mesh.coord(node);
    let ring = mesh
        .ring_neighborhood(node, RingSize::new(2, RingFraction::Zero))
        .unwrap();
    ring[1..]
        .iter()
        .map(|&v| {
            let q = mesh.coord(v);
            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Degradation targets near preferred grid cells, valid through the deepest
/// fraction. Element areas are affine in the moved coordinate, so validity at
/// the deepest fraction implies validity throughout. The moved node must stay
/// clear of other nodes: collapsing elements is the experiment, clustering
/// points is not (point clustering is the known failure mode left out of
/// scope by the stencil-topology argument).
fn pick_targets(
    base: &MeshTopology,
    n: usize,
    cells: &[(usize, usize)],
    max_frac: f64,
) -> Vec<usize> {
    let h = 1.0 / (n - 1) as f64;
    let mut targets = Vec::new();
    for &(ci, cj) in cells {
        'search: for dj in 0..16 {
            for di in 0..16 {
                let e = 2 * ((cj + dj) * (n - 1) + ci + di) + 1;
                if let Ok(deg) = base.degrade(&[e], max_frac) {
                    let moved = base.elem(e)[2];
                    if nearest_node_gap(&deg, moved) >= 0.15 * h {
                        targets.push(e);
                        break 'search;
                    }
                }
            }
        }
    }
    targets
}

fn solver(krylov: KrylovKind, precond: PrecondKind, tol: f64, drop_tol: f64) -> SolverSettings {
    SolverSettings {
        krylov,
        precond,
        tol,
        drop_tol,
        max_iter: 20_000,
        restart: None,
    }
}

/// Criterion 2: quadratic patch test on a ~1,000-node unstructured-quality
/// mesh containing a sub-degree sliver; the stencil methods hit solver
/// accuracy while linear elements keep a visible discretization error.
#[test]
fn criterion_2_quadratic_patch_with_sliver() {
    let mut c = Criterion::new("2 (quadratic patch test with sliver)", 30.0);
    let n = 33;
    let base = jittered_unit_square(n, 0.2).unwrap();
    let targets = pick_targets(&base, n, &[(14, 14)], 0.9999);
    c.check(targets.len() == 1, || "no valid sliver target".into());
    let mesh = base.degrade(&targets, 0.9999).unwrap();
    let quality = mesh.quality();
    c.check(mesh.n_nodes() >= 1000, || {
        format!("mesh has {} nodes", mesh.n_nodes())
    });
    c.check(quality.min_angle_deg < 1.0, || {
        format!("min angle {:.4} deg is not a sliver", quality.min_angle_deg)
    });

    let problem = ProblemCase::from_parts(
        2,
        PdeSpec::poisson(),
        "quadratic",
        |p| p[0] * p[0] + p[0] * p[1] + p[1] * p[1] + p[0] - p[1] + 1.0,
        |p| [2.0 * p[0] + p[1] + 1.0, p[0] + 2.0 * p[1] - 1.0, 0.0],
        |_| 4.0,
    );
    for method in [Method::AesFem1, Method::AesFem2, Method::Gfd] {
        let cfg = RunConfig {
            method,
            wls: WlsConfig::default(),
            solver: solver(KrylovKind::Gmres, PrecondKind::Ilu, 1e-10, 1e-3),
            condest: false,
        };
        let r = run_case(&mesh, &problem, &cfg, 0.0).unwrap();
        c.check(r.converged, || format!("{:?} did not converge", method));
        c.check(r.linf_error <= 1e-7, || {
            format!("{:?} Linf {:.3e} above 1e-7", method, r.linf_error)
        });
    }
    let cfg = RunConfig {
        method: Method::Fem,
        wls: WlsConfig::default(),
        solver: solver(KrylovKind::Gmres, PrecondKind::Ilu, 1e-10, 1e-3),
        condest: false,
    };
    let r = run_case(&mesh, &problem, &cfg, 0.0).unwrap();
    c.check(r.linf_error >= 1e-5, || {
        format!("FEM Linf {:.3e} unexpectedly small", r.linf_error)
    });
    c.finish();
}

/// Criterion 3: second-order rates for linear elements and the extended
/// stencil method on structured series in 2D and 3D with the trigonometric
/// solution, and the per-level max-norm ordering between them.
#[test]
fn criterion_3_convergence_rates() {
    let mut c = Criterion::new("3 (convergence rates)", 600.0);
    let problem_for = |dim| ProblemCase::analytic(SolutionId::U2, dim, PdeSpec::poisson());

    let mut run_series = |dim: usize, ns: &[usize], drop_tol: f64| {
        let meshes: Vec<MeshTopology> = ns
            .iter()
            .map(|&n| structured_mesh(dim, n).unwrap())
            .collect();
        let problem = problem_for(dim);
        let mut cfg = RunConfig::new(Method::Fem);
        cfg.solver = solver(KrylovKind::Gmres, PrecondKind::Ilu, 1e-8, drop_tol);
        let fem = convergence_study(&meshes, &problem, &cfg).unwrap();
        cfg.method = Method::AesFem2;
        let aes = convergence_study(&meshes, &problem, &cfg).unwrap();

        c.check(fem.rate_l2 >= 1.8 && fem.rate_l2 <= 2.2, || {
            format!("{dim}D FEM L2 rate {:.3} outside [1.8, 2.2]", fem.rate_l2)
        });
        c.check(aes.rate_l2 >= 1.8, || {
            format!("{dim}D AES-FEM 2 L2 rate {:.3} below 1.8", aes.rate_l2)
        });
        for (f, a) in fem.reports.iter().zip(&aes.reports) {
            c.check(a.linf_error < f.linf_error, || {
                format!(
                    "{dim}D at {} nodes: AES-FEM 2 Linf {:.4e} not below FEM Linf {:.4e}",
                    f.nodes, a.linf_error, f.linf_error
                )
            });
        }
    };
    run_series(2, &[16, 32, 64, 128], 1e-3);
    run_series(3, &[8, 16, 32], 1e-1);
    c.finish();
}

/// Criterion 4: element-quality independence on a ~65k-node mesh degraded
/// through six fractions. Linear-element conditioning and iteration counts
/// blow up; the stencil methods stay flat in conditioning, iterations, and
/// accuracy.
#[test]
fn criterion_4_element_quality_independence() {
    let mut c = Criterion::new("4 (element-quality independence)", 600.0);
    let n = 257;
    let base = jittered_unit_square(n, 0.2).unwrap();
    let fractions = [0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999];
    let cells = [
        (36, 36),
        (73, 109),
        (109, 182),
        (146, 73),
        (182, 146),
        (219, 219),
    ];
    let targets = pick_targets(&base, n, &cells, *fractions.last().unwrap());
    c.check(targets.len() == 6, || {
        format!("placed only {} of 6 targets", targets.len())
    });

    let problem = ProblemCase::analytic(SolutionId::U1, 2, PdeSpec::poisson());
    let cfg = SweepConfig {
        wls: WlsConfig::default(),
        fem_solver: solver(KrylovKind::Cg, PrecondKind::IncompleteCholesky, 1e-8, 1e-3),
        krylov_solver: solver(KrylovKind::Gmres, PrecondKind::Ilu, 1e-8, 1e-3),
        condest: true,
    };
    let out = quality_sweep(
        &base,
        &targets,
        &fractions,
        &[Method::Fem, Method::AesFem1, Method::AesFem2, Method::Gfd],
        &problem,
        &cfg,
    )
    .unwrap();
    c.check(out.halted.is_none(), || {
        format!("sweep halted: {:?}", out.halted)
    });
    c.check(out.points.len() == fractions.len(), || {
        "sweep is incomplete".into()
    });

    let series = |method: Method| -> Vec<&aesfem::harness::RunReport> {
        out.points
            .iter()
            .map(|p| p.reports.iter().find(|r| r.method == method).unwrap())
            .collect()
    };
    let fem = series(Method::Fem);
    let aes1 = series(Method::AesFem1);
    let aes2 = series(Method::AesFem2);
    let gfd = series(Method::Gfd);

    let cot_first = out.points.first().unwrap().quality.cot_min_angle();
    let cot_last = out.points.last().unwrap().quality.cot_min_angle();
    c.check(cot_last / cot_first >= 1e3, || {
        format!("cot(min angle) grew only {:.1}x", cot_last / cot_first)
    });

    let fem_cond: Vec<f64> = fem.iter().map(|r| r.condest.unwrap()).collect();
    c.check(fem_cond.last().unwrap() / fem_cond[0] >= 10.0, || {
        format!(
            "FEM condest grew only {:.2}x ({:.3e} -> {:.3e})",
            fem_cond.last().unwrap() / fem_cond[0],
            fem_cond[0],
            fem_cond.last().unwrap()
        )
    });
    for (label, reports) in [("AES-FEM", &aes2), ("GFD", &gfd)] {
        let conds: Vec<f64> = reports.iter().map(|r| r.condest.unwrap()).collect();
        let (lo, hi) = (
            conds.iter().cloned().fold(f64::INFINITY, f64::min),
            conds.iter().cloned().fold(0.0f64, f64::max),
        );
        c.check(hi / lo < 2.0, || {
            format!("{label} condest varied {:.2}x ({lo:.3e} -> {hi:.3e})", hi / lo)
        });
    }

    let aes_iters: Vec<usize> = aes2.iter().map(|r| r.iterations).collect();
    let (lo, hi) = (
        *aes_iters.iter().min().unwrap(),
        *aes_iters.iter().max().unwrap(),
    );
    c.check((hi as f64) <= 1.1 * lo as f64, || {
        format!("AES-FEM GMRES iterations varied {lo}..{hi}")
    });

    let fem_iters: Vec<usize> = fem.iter().map(|r| r.iterations).collect();
    c.check(
        fem_iters.windows(2).all(|w| w[1] > w[0]),
        || format!("FEM CG iterations not strictly increasing: {fem_iters:?}"),
    );
    for r in &fem {
        c.check(r.converged, || "FEM CG failed to converge".into());
    }

    for (label, reports) in [("AES-FEM 1", &aes1), ("AES-FEM 2", &aes2), ("GFD", &gfd)] {
        let errs: Vec<f64> = reports.iter().map(|r| r.l2_error).collect();
        let (lo, hi) = (
            errs.iter().cloned().fold(f64::INFINITY, f64::min),
            errs.iter().cloned().fold(0.0f64, f64::max),
        );
        c.check(hi / lo < 2.0, || {
            format!("{label} L2 errors varied {:.2}x across the sweep", hi / lo)
        });
    }
    c.finish();
}

/// Criterion 5: relative accuracy ordering on an unstructured-quality mesh of
/// the scale behind the published error table: the stencil-interpolated
/// variant beats collocation beats linear elements, and the hat-interpolated
/// variant stays within 2x of linear elements.
#[test]
fn criterion_5_relative_accuracy_ordering() {
    let mut c = Criterion::new("5 (relative accuracy ordering)", 600.0);
    let mesh = jittered_unit_square(257, 0.2).unwrap();
    let problem = ProblemCase::analytic(SolutionId::U1, 2, PdeSpec::poisson());
    let l2_of = |method: Method| {
        let cfg = RunConfig {
            method,
            wls: WlsConfig::default(),
            solver: solver(KrylovKind::Gmres, PrecondKind::Ilu, 1e-10, 1e-3),
            condest: false,
        };
        let r = run_case(&mesh, &problem, &cfg, 0.0).unwrap();
        assert!(r.converged, "{method:?} did not converge");
        r.l2_error
    };
    let fem = l2_of(Method::Fem);
    let aes1 = l2_of(Method::AesFem1);
    let aes2 = l2_of(Method::AesFem2);
    let gfd = l2_of(Method::Gfd);
    println!("  L2: FEM {fem:.4e}  AES-FEM 1 {aes1:.4e}  AES-FEM 2 {aes2:.4e}  GFD {gfd:.4e}");

    c.check(aes2 < gfd, || {
        format!("AES-FEM 2 {aes2:.4e} not below GFD {gfd:.4e}")
    });
    c.check(gfd < fem, || format!("GFD {gfd:.4e} not below FEM {fem:.4e}"));
    c.check(aes1 < 2.0 * fem, || {
        format!("AES-FEM 1 {aes1:.4e} more than 2x FEM {fem:.4e}")
    });
    c.finish();
}

/// Criterion 6: the two load variants assemble bit-identical stiffness
/// matrices, and on a mesh where every stencil is a 1-ring the stored pattern
/// matches linear elements exactly.
#[test]
fn criterion_6_stiffness_identity_and_sparsity() {
    let mut c = Criterion::new("6 (stiffness identity & sparsity)", 60.0);
    let mesh = structured_mesh(2, 16).unwrap();
    let problem = ProblemCase::analytic(SolutionId::U1, 2, PdeSpec::poisson());
    let wls = WlsConfig::default();
    let a1 = assemble_aes_fem(&mesh, &problem.pde, &problem, LoadMode::AesFem1, &wls).unwrap();
    let a2 = assemble_aes_fem(&mesh, &problem.pde, &problem, LoadMode::AesFem2, &wls).unwrap();

    c.check(a1.matrix.nnz() == a2.matrix.nnz(), || {
        "stored patterns differ between load variants".into()
    });
    let mut bit_identical = true;
    for i in 0..a1.matrix.n() {
        let (c1, v1) = a1.matrix.row(i);
        let (c2, v2) = a2.matrix.row(i);
        if c1 != c2 || v1.iter().zip(v2).any(|(a, b)| a.to_bits() != b.to_bits()) {
            bit_identical = false;
            break;
        }
    }
    c.check(bit_identical, || {
        "stiffness matrices are not bit-identical between load variants".into()
    });

    let fem = assemble_linear_fem(&mesh, &problem.pde, &problem).unwrap();
    c.check(a1.matrix.nnz() == fem.matrix.nnz(), || {
        format!(
            "nnz differs: AES {} vs FEM {}",
            a1.matrix.nnz(),
            fem.matrix.nnz()
        )
    });
    c.finish();
}

fn dense_solve(matrix: &SparseRowMatrix, rhs: &[f64]) -> Vec<f64> {
    let n = matrix.n();
    let dense = nalgebra::DMatrix::from_fn(n, n, |i, j| matrix.get(i, j));
    let b = nalgebra::DVector::from_column_slice(rhs);
    dense
        .lu()
        .solve(&b)
        .expect("dense solve failed")
        .iter()
        .cloned()
        .collect()
}

fn dense_condition_1norm(matrix: &SparseRowMatrix) -> f64 {
    let n = matrix.n();
    let dense = nalgebra::DMatrix::from_fn(n, n, |i, j| matrix.get(i, j));
    let norm = |m: &nalgebra::DMatrix<f64>| {
        m.column_iter()
            .map(|col| col.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let inv = dense.clone().try_inverse().expect("singular test matrix");
    norm(&dense) * norm(&inv)
}

/// Criterion 7: Krylov solutions match dense direct solves to 1e-8 relative
/// on 50+ systems drawn from actual assemblies, and the condition estimator
/// lower-bounds the exact 1-norm condition number on all of them.
#[test]
fn criterion_7_solver_and_condest_oracles() {
    let mut c = Criterion::new("7 (solver/oracle equivalence)", 120.0);
    let mut systems: Vec<(String, LinearSystem, bool)> = Vec::new();
    let wls = WlsConfig::default();

    let mut push_all = |mesh: &MeshTopology, dim: usize| {
        for pde in [
            PdeSpec::poisson(),
            PdeSpec::convection_diffusion([1.0, 1.0, if dim == 3 { 1.0 } else { 0.0 }]),
        ] {
            let problem = ProblemCase::analytic(SolutionId::U1, dim, pde);
            for method in [Method::Fem, Method::AesFem1, Method::AesFem2, Method::Gfd] {
                let sys = match method {
                    Method::Fem => assemble_linear_fem(mesh, &pde, &problem).unwrap(),
                    Method::AesFem1 => {
                        assemble_aes_fem(mesh, &pde, &problem, LoadMode::AesFem1, &wls).unwrap()
                    }
                    Method::AesFem2 => {
                        assemble_aes_fem(mesh, &pde, &problem, LoadMode::AesFem2, &wls).unwrap()
                    }
                    Method::Gfd => assemble_gfd(mesh, &pde, &problem, &wls).unwrap(),
                };
                let spd = method == Method::Fem && pde.kind == aesfem::discretization::PdeKind::Poisson;
                systems.push((format!("{dim}D {method:?} {}", pde.label()), sys, spd));
            }
        }
    };
    for n in [6, 9, 12, 16] {
        push_all(&structured_mesh(2, n).unwrap(), 2);
    }
    for n in [4, 5, 6] {
        push_all(&structured_mesh(3, n).unwrap(), 3);
    }
    c.check(systems.len() >= 50, || {
        format!("only {} systems collected", systems.len())
    });

    for (label, sys, spd) in &systems {
        c.check(sys.n_free() <= 200, || {
            format!("{label}: {} unknowns exceed 200", sys.n_free())
        });
        let x_dense = dense_solve(&sys.matrix, &sys.rhs);
        let scale = x_dense.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-30);
        let krylov = if *spd {
            solver(KrylovKind::Cg, PrecondKind::IncompleteCholesky, 1e-12, 0.0)
        } else {
            solver(KrylovKind::Gmres, PrecondKind::Ilu, 1e-12, 0.0)
        };
        let cfg = aesfem::linalg::SolverConfig {
            tol: krylov.tol,
            max_iter: 2000,
            restart: None,
        };
        let x_it = match krylov.krylov {
            KrylovKind::Cg => {
                let m = aesfem::linalg::incomplete_cholesky(&sys.matrix, 0.0).unwrap();
                aesfem::linalg::cg(&sys.matrix, &sys.rhs, &m, &cfg).unwrap().0
            }
            KrylovKind::Gmres => {
                let m = aesfem::linalg::ilu(&sys.matrix, 0.0).unwrap();
                aesfem::linalg::gmres(&sys.matrix, &sys.rhs, &m, &cfg).0
            }
        };
        let diff = x_it
            .iter()
            .zip(&x_dense)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        c.check(diff / scale <= 1e-8, || {
            format!("{label}: Krylov vs dense relative diff {:.3e}", diff / scale)
        });

        let est = condest_1norm(&sys.matrix);
        let exact = dense_condition_1norm(&sys.matrix);
        c.check(est <= exact * (1.0 + 1e-8), || {
            format!("{label}: condest {est:.6e} exceeds exact {exact:.6e}")
        });
        // Column-norm ratio bound in the 1-norm, the cheap conditioning
        // mechanism behind the quality sweeps.
        let mut col_sums = vec![0.0f64; sys.matrix.n()];
        for i in 0..sys.matrix.n() {
            let (cols, vals) = sys.matrix.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                col_sums[j] += v.abs();
            }
        }
        let ratio = col_sums.iter().cloned().fold(0.0f64, f64::max)
            / col_sums.iter().cloned().fold(f64::INFINITY, f64::min);
        c.check(est >= ratio * (1.0 - 1e-10), || {
            format!("{label}: condest {est:.3e} below column ratio {ratio:.3e}")
        });
    }
    c.finish();
}

/// Criterion 8: the extended-stencil assemblies cost more than the linear
/// element assembly, and the stencil-interpolated load costs at least as
/// much as the hat-interpolated one, on the largest convergence meshes.
#[test]
fn criterion_8_assembly_cost_ordering() {
    let mut c = Criterion::new("8 (assembly cost ordering)", 300.0);
    for (dim, n) in [(2usize, 128usize), (3, 32)] {
        let mesh = structured_mesh(dim, n).unwrap();
        let problem = ProblemCase::analytic(SolutionId::U1, dim, PdeSpec::poisson());
        let wls = WlsConfig::default();

        let time_min = |f: &dyn Fn()| {
            (0..3)
                .map(|_| {
                    let t = Instant::now();
                    f();
                    t.elapsed().as_secs_f64()
                })
                .fold(f64::INFINITY, f64::min)
        };
        let t_fem = time_min(&|| {
            assemble_linear_fem(&mesh, &problem.pde, &problem).unwrap();
        });
        let t_aes1 = time_min(&|| {
            assemble_aes_fem(&mesh, &problem.pde, &problem, LoadMode::AesFem1, &wls).unwrap();
        });
        let t_aes2 = time_min(&|| {
            assemble_aes_fem(&mesh, &problem.pde, &problem, LoadMode::AesFem2, &wls).unwrap();
        });
        println!(
            "  {dim}D assembly seconds: FEM {t_fem:.4}, AES-FEM 1 {t_aes1:.4}, AES-FEM 2 {t_aes2:.4}"
        );
        c.check(t_aes1 > t_fem, || {
            format!("{dim}D: AES-FEM 1 assembly {t_aes1:.4}s not above FEM {t_fem:.4}s")
        });
        c.check(t_aes2 > t_fem, || {
            format!("{dim}D: AES-FEM 2 assembly {t_aes2:.4}s not above FEM {t_fem:.4}s")
        });
        c.check(t_aes2 >= t_aes1, || {
            format!("{dim}D: AES-FEM 2 assembly {t_aes2:.4}s below AES-FEM 1 {t_aes1:.4}s")
        });
    }
    c.finish();
}
