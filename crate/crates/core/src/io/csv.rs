use std::fmt::Write;

use crate::mesher::Mesh;
use crate::norms::ErrorReport;
use crate::pipeline::{ConvergenceStudy, Solution};

use super::fmt_f64;

/// `node,x,y,u1[,u2]`, one row per node.
pub fn solution_csv(mesh: &Mesh, solution: &Solution) -> String {
    let mut s = String::from("node,x,y,u1");
    if solution.n_components == 2 {
        s.push_str(",u2");
    }
    s.push('\n');
    for (n, p) in mesh.nodes().iter().enumerate() {
        write!(s, "{n},{},{}", fmt_f64(p.x), fmt_f64(p.y)).unwrap();
        let u = solution.at(n);
        for v in &u[..solution.n_components] {
            write!(s, ",{}", fmt_f64(*v)).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn error_report_csv(report: &ErrorReport) -> String {
    format!(
        "dofs,h_max,l2_relative,h1_relative\n{},{},{},{}\n",
        report.dof_count,
        fmt_f64(report.h_max),
        fmt_f64(report.l2_relative),
        fmt_f64(report.h1_relative)
    )
}

/// One row per refinement level; wall-clock time is also given relative to
/// the slowest level.
pub fn convergence_csv(study: &ConvergenceStudy) -> String {
    let slowest = study.rows.iter().map(|r| r.seconds).fold(0.0, f64::max);
    let mut s = String::from("level,elements,dofs,h_max,l2_relative,h1_relative,seconds,relative_time\n");
    for r in &study.rows {
        let rel = if slowest > 0.0 { r.seconds / slowest } else { 0.0 };
        writeln!(
            s,
            "{},{},{},{},{},{},{:.6},{:.6}",
            r.level,
            r.elements,
            r.report.dof_count,
            fmt_f64(r.report.h_max),
            fmt_f64(r.report.l2_relative),
            fmt_f64(r.report.h1_relative),
            r.seconds,
            rel
        )
        .unwrap();
    }
    s
}
