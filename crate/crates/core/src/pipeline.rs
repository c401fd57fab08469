//! End-to-end solve: element matrices, assembly, loads, boundary conditions
//! and the linear solve, plus the refinement study used for convergence
//! tables.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::assembly::{assemble, impose_essential, DofMap, GlobalSystem};
use crate::error::{Error, Result};
use crate::fem::{t3_body_force, t3_laplacian, t3_stiffness, t3_traction_force};
use crate::geometry::{ElementGeometry, Point2};
use crate::mesher::Mesh;
use crate::model::{material_matrix, resolve_constraints, ConstitutiveMatrix, ProblemConditions, ResolvedConstraints};
use crate::norms::{error_report, ErrorReport, ExactSolution, Method};
use crate::solver::{solve_with, SolverKind};
use crate::vem::{body_force_vector, elastic_stiffness, poisson_stiffness, traction_force_vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    /// Stability scaling for elastic VEM elements.
    pub gamma: f64,
    pub solver: SolverKind,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: Method::Vem,
            gamma: 1.0,
            solver: SolverKind::Direct,
        }
    }
}

impl SolveOptions {
    pub fn fem() -> Self {
        SolveOptions {
            method: Method::Fem,
            ..Default::default()
        }
    }
}

/// Nodal solution, interleaved by node.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub values: DVector<f64>,
    pub n_components: usize,
}

impl Solution {
    pub fn at(&self, node: usize) -> [f64; 2] {
        let nc = self.n_components;
        let mut out = [0.0; 2];
        for c in 0..nc {
            out[c] = self.values[node * nc + c];
        }
        out
    }
}

/// The assembled, unconstrained system together with the resolved boundary
/// data it was built from.
#[derive(Debug, Clone)]
pub struct AssembledProblem {
    pub system: GlobalSystem,
    pub dofs: DofMap,
    pub constraints: ResolvedConstraints,
    pub d: Option<ConstitutiveMatrix>,
}

fn element_stiffness(
    mesh: &Mesh,
    e: usize,
    d: Option<&ConstitutiveMatrix>,
    opts: &SolveOptions,
) -> Result<DMatrix<f64>> {
    let poly = &mesh.elements()[e];
    match opts.method {
        Method::Vem => {
            let elem = ElementGeometry::new(poly, mesh.nodes())?;
            match d {
                Some(d) => Ok(elastic_stiffness(&elem, d, opts.gamma)?.k),
                None => Ok(poisson_stiffness(&elem)?.k),
            }
        }
        Method::Fem => {
            let tri = triangle(mesh, e)?;
            match d {
                Some(d) => t3_stiffness(tri, d),
                None => t3_laplacian(tri),
            }
        }
    }
}

fn triangle(mesh: &Mesh, e: usize) -> Result<[Point2; 3]> {
    let pts = mesh.element_points(e);
    if pts.len() != 3 {
        return Err(Error::Unsupported(format!(
            "linear triangle elements need triangles; element has {} nodes",
            pts.len()
        )));
    }
    Ok([pts[0], pts[1], pts[2]])
}

/// Builds K and F including body forces, edge tractions and point loads.
pub fn assemble_problem(mesh: &Mesh, conditions: &ProblemConditions, opts: &SolveOptions) -> Result<AssembledProblem> {
    let d = conditions.material.as_ref().map(material_matrix).transpose()?;
    let nc = if d.is_some() { 2 } else { 1 };
    let dofs = DofMap::new(mesh.num_nodes(), nc);
    let constraints = resolve_constraints(mesh, conditions, &dofs)?;
    let body = &conditions.body_force;
    let mut system = assemble(
        mesh,
        &dofs,
        |e| element_stiffness(mesh, e, d.as_ref(), opts),
        |e| match opts.method {
            Method::Vem => {
                let elem = ElementGeometry::new(&mesh.elements()[e], mesh.nodes())?;
                body_force_vector(&elem, body, nc)
            }
            Method::Fem => t3_body_force(triangle(mesh, e)?, body, nc),
        },
    )?;

    let nodes = mesh.nodes();
    for load in &constraints.natural {
        let (a, b) = load.edge;
        let traction = |x: Point2| {
            let mut t = [0.0; 2];
            t[load.component] = load.value.eval(x);
            t
        };
        let fe = match opts.method {
            Method::Vem => traction_force_vector(nodes[a], nodes[b], traction),
            Method::Fem => t3_traction_force(nodes[a], nodes[b], traction),
        };
        let c = load.component;
        system.f[dofs.index(a, c)] += fe[c];
        system.f[dofs.index(b, c)] += fe[2 + c];
    }
    for &(dof, v) in &constraints.point_loads {
        system.f[dof] += v;
    }
    Ok(AssembledProblem {
        system,
        dofs,
        constraints,
        d,
    })
}

pub fn solve_problem(mesh: &Mesh, conditions: &ProblemConditions, opts: &SolveOptions) -> Result<Solution> {
    let assembled = assemble_problem(mesh, conditions, opts)?;
    let reduced = impose_essential(&assembled.system, &assembled.constraints.essential)?;
    let u = solve_with(&reduced.system, opts.solver)?;
    Ok(Solution {
        values: reduced.recover(&u),
        n_components: assembled.dofs.n_components(),
    })
}

/// Solves and, when an exact solution is available, measures the error.
pub fn solve_and_measure(
    mesh: &Mesh,
    conditions: &ProblemConditions,
    exact: Option<&ExactSolution>,
    opts: &SolveOptions,
) -> Result<(Solution, Option<ErrorReport>)> {
    let solution = solve_problem(mesh, conditions, opts)?;
    let report = match exact {
        Some(ex) => {
            let d = conditions.material.as_ref().map(material_matrix).transpose()?;
            Some(error_report(mesh, &solution.values, ex, d.as_ref(), opts.method)?)
        }
        None => None,
    };
    Ok((solution, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub elements: usize,
    pub report: ErrorReport,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of log(error) against log(h_max).
    pub l2_rate: f64,
    pub h1_rate: f64,
}

/// Least-squares slope of log(e) against log(h).
pub fn fitted_rate(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len().min(e.len());
    if n < 2 {
        return f64::NAN;
    }
    let xs: Vec<f64> = h[..n].iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e[..n].iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Solves the same problem on every mesh and fits convergence rates.
pub fn convergence_study(
    meshes: &[Mesh],
    conditions: &ProblemConditions,
    exact: &ExactSolution,
    opts: &SolveOptions,
) -> Result<ConvergenceStudy> {
    let mut rows = Vec::with_capacity(meshes.len());
    for (level, mesh) in meshes.iter().enumerate() {
        let start = Instant::now();
        let (_, report) = solve_and_measure(mesh, conditions, Some(exact), opts)?;
        rows.push(ConvergenceRow {
            level,
            elements: mesh.num_elements(),
            report: report.expect("exact solution supplied"),
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let h: Vec<f64> = rows.iter().map(|r| r.report.h_max).collect();
    let l2: Vec<f64> = rows.iter().map(|r| r.report.l2_relative).collect();
    let h1: Vec<f64> = rows.iter().map(|r| r.report.h1_relative).collect();
    Ok(ConvergenceStudy {
        l2_rate: fitted_rate(&h, &l2),
        h1_rate: fitted_rate(&h, &h1),
        rows,
    })
}
