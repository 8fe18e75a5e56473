//! CSV serialization of run reports.
//!
//! One row per method x mesh x problem. All columns except the four timing
//! columns are deterministic for identical inputs; a missing condition
//! estimate serializes as an empty cell, never as zero.

use super::runner::RunReport;

pub const CSV_COLUMNS: &str = "method,dim,pde,solution,nodes,elements,min_angle_deg,\
cot_min_angle,l2_error,linf_error,iterations,condest,t_init_s,t_assembly_s,t_precond_s,t_solve_s";

/// Extra columns appended by the convergence subcommand; filled on the last
/// refinement level only.
pub const CONVERGENCE_EXTRA_COLUMNS: &str = "rate_l2,rate_linf";

pub fn csv_header(with_rates: bool) -> String {
    if with_rates {
        format!("{CSV_COLUMNS},{CONVERGENCE_EXTRA_COLUMNS}")
    } else {
        CSV_COLUMNS.to_string()
    }
}

pub fn csv_row(report: &RunReport, rates: Option<(f64, f64)>) -> String {
    let condest = report
        .condest
        .map(|c| format!("{c:.6e}"))
        .unwrap_or_default();
    let mut row = format!(
        "{},{},{},{},{},{},{:.6},{:.6e},{:.12e},{:.12e},{},{},{:.6},{:.6},{:.6},{:.6}",
        report.method.label(),
        report.dim,
        report.pde_label,
        report.solution_label,
        report.nodes,
        report.elements,
        report.quality.min_angle_deg,
        report.quality.cot_min_angle(),
        report.l2_error,
        report.linf_error,
        report.iterations,
        condest,
        report.t_init_s,
        report.t_assembly_s,
        report.t_precond_s,
        report.t_solve_s,
    );
    if let Some((l2, linf)) = rates {
        row.push_str(&format!(",{l2:.6},{linf:.6}"));
    }
    row
}

#[cfg(test)]
mod tests {
    use super::super::runner::Method;
    use super::*;
    use crate::mesh::QualityReport;

    fn sample() -> RunReport {
        RunReport {
            method: Method::AesFem2,
            dim: 2,
            pde_label: "poisson".into(),
            solution_label: "u1".into(),
            nodes: 100,
            elements: 162,
            quality: QualityReport {
                min_angle_deg: 45.0,
                max_angle_deg: 90.0,
                max_aspect_ratio: 1.41,
            },
            l2_error: 1.5e-6,
            linf_error: 3.0e-6,
            iterations: 42,
            converged: true,
            stagnated: false,
            condest: None,
            t_init_s: 0.01,
            t_assembly_s: 0.2,
            t_precond_s: 0.05,
            t_solve_s: 0.1,
        }
    }

    #[test]
    fn header_and_row_have_matching_arity() {
        let header_cols = csv_header(false).split(',').count();
        let row_cols = csv_row(&sample(), None).split(',').count();
        assert_eq!(header_cols, row_cols);
        assert_eq!(header_cols, 16);

        let header_cols = csv_header(true).split(',').count();
        let row_cols = csv_row(&sample(), Some((2.0, 1.9))).split(',').count();
        assert_eq!(header_cols, row_cols);
        assert_eq!(header_cols, 18);
    }

    #[test]
    fn missing_condest_is_empty_not_zero() {
        let row = csv_row(&sample(), None);
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[11], "");
        let mut with = sample();
        with.condest = Some(123.0);
        let cells: Vec<String> = csv_row(&with, None)
            .split(',')
            .map(String::from)
            .collect();
        assert_eq!(cells[11], "1.230000e2");
    }

    #[test]
    fn non_timing_cells_are_deterministic() {
        let a = csv_row(&sample(), None);
        let mut other = sample();
        other.t_solve_s = 99.0;
        let b = csv_row(&other, None);
        let take = |s: &str| {
            s.split(',')
                .take(12)
                .map(String::from)
                .collect::<Vec<_>>()
        };
        assert_eq!(take(&a), take(&b));
    }
}
