//! Mesh families and file-producing runs shared by the command line and the
//! acceptance tests.

use std::path::Path;

use crate::benchmarks::BenchmarkCase;
use crate::error::Result;
use crate::io::{error_report_csv, render_mesh, solution_csv, write_atomic, MeshFile};
use crate::mesher::{build_triangular_mesh, generate_mesh, Mesh, Region, SeedKind, SeedRule};
use crate::norms::ErrorReport;
use crate::pipeline::{convergence_study, solve_and_measure, ConvergenceStudy, Solution, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeshKind {
    Constant,
    #[default]
    Alternating,
    Random,
    Sine,
    /// Structured two-triangle split of a rectangle.
    Triangles,
}

/// Recipe for a mesh of a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec {
    pub kind: MeshKind,
    pub nx: usize,
    /// Defaults to nx scaled by the region's aspect ratio.
    pub ny: Option<usize>,
    pub seed: u64,
    /// Largest random seed displacement, if any.
    pub noise: Option<f64>,
}

impl MeshSpec {
    pub fn new(kind: MeshKind, nx: usize) -> Self {
        MeshSpec {
            kind,
            nx,
            ny: None,
            seed: 0,
            noise: None,
        }
    }

    fn ny_for(&self, region: &Region) -> usize {
        self.ny.unwrap_or_else(|| {
            let (lo, hi) = crate::geometry::bounding_box(region.boundary());
            let aspect = (hi.y - lo.y) / (hi.x - lo.x);
            ((self.nx as f64 * aspect).round() as usize).max(1)
        })
    }

    pub fn build(&self, region: &Region) -> Result<Mesh> {
        let ny = self.ny_for(region);
        let kind = match self.kind {
            MeshKind::Triangles => return build_triangular_mesh(region, self.nx, ny),
            MeshKind::Constant => SeedKind::Constant,
            MeshKind::Alternating => SeedKind::ConstantAlternating,
            MeshKind::Random => SeedKind::RandomDouble { min: 0.0, max: 1.0 },
            MeshKind::Sine => SeedKind::Sine,
        };
        let mut rule = SeedRule::new(kind);
        rule.rng_seed = self.seed;
        if let Some(max) = self.noise {
            rule = rule.with_noise(0.0, max, self.seed);
        }
        generate_mesh(region, &rule, self.nx, ny)
    }

    /// The same recipe with every count multiplied by 2^level.
    pub fn refined(&self, level: usize) -> MeshSpec {
        MeshSpec {
            nx: self.nx << level,
            ny: self.ny.map(|n| n << level),
            ..*self
        }
    }

    pub fn family(&self, region: &Region, levels: usize) -> Result<Vec<Mesh>> {
        (0..levels).map(|l| self.refined(l).build(region)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub solution: Solution,
    pub report: Option<ErrorReport>,
}

/// Solves `case` on `mesh`; with `out_dir` set, writes `mesh.txt`,
/// `solution.csv` and, when the case has an exact solution, `errors.csv`.
pub fn run_case(case: &BenchmarkCase, mesh: &Mesh, opts: &SolveOptions, out_dir: Option<&Path>) -> Result<RunOutput> {
    let (solution, report) = solve_and_measure(mesh, &case.conditions, case.exact.as_ref(), opts)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        write_atomic(&dir.join("mesh.txt"), &render_mesh(&MeshFile::new(mesh.clone())))?;
        write_atomic(&dir.join("solution.csv"), &solution_csv(mesh, &solution))?;
        if let Some(r) = &report {
            write_atomic(&dir.join("errors.csv"), &error_report_csv(r))?;
        }
    }
    Ok(RunOutput { solution, report })
}

/// Refinement study of `case` on the family generated by `spec`.
pub fn run_convergence(case: &BenchmarkCase, spec: &MeshSpec, levels: usize, opts: &SolveOptions) -> Result<ConvergenceStudy> {
    let exact = case.exact.as_ref().ok_or_else(|| {
        crate::error::Error::InvalidInput(format!("case '{}' has no exact solution", case.name))
    })?;
    let meshes = spec.family(&case.region, levels)?;
    convergence_study(&meshes, &case.conditions, exact, opts)
}

/// VEM on the polygonal family of `spec` against linear triangles on the
/// structured family with the same counts.
pub fn compare_with_fem(
    case: &BenchmarkCase,
    spec: &MeshSpec,
    levels: usize,
    gamma: f64,
) -> Result<(ConvergenceStudy, ConvergenceStudy)> {
    let vem_opts = SolveOptions {
        gamma,
        ..SolveOptions::default()
    };
    let vem = run_convergence(case, spec, levels, &vem_opts)?;
    let tri = MeshSpec {
        kind: MeshKind::Triangles,
        ..*spec
    };
    let fem = run_convergence(case, &tri, levels, &SolveOptions::fem())?;
    Ok((vem, fem))
}

/// Log-log interpolation of an error curve (dofs ascending) at `dofs`.
pub fn error_at_dofs(curve: &[(usize, f64)], dofs: usize) -> f64 {
    let x = (dofs as f64).ln();
    let pts: Vec<(f64, f64)> = curve.iter().map(|&(d, e)| ((d as f64).ln(), e.ln())).collect();
    let seg = pts
        .windows(2)
        .find(|w| x <= w[1].0)
        .unwrap_or_else(|| &pts[pts.len().saturating_sub(2)..]);
    if seg.len() < 2 {
        return curve.first().map(|c| c.1).unwrap_or(f64::NAN);
    }
    let t = (x - seg[0].0) / (seg[1].0 - seg[0].0);
    (seg[0].1 + t * (seg[1].1 - seg[0].1)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{patch_test_case, poisson_manufactured};
    use crate::model::{Material, PlaneState};

    #[test]
    fn default_ny_follows_aspect() {
        let r = Region::rectangle(0.0, -2.0, 8.0, 2.0).unwrap();
        let m = MeshSpec::new(MeshKind::Triangles, 8).build(&r).unwrap();
        assert_eq!(m.num_elements(), 2 * 8 * 4);
        assert_eq!(MeshSpec::new(MeshKind::Random, 3).refined(2).nx, 12);
    }

    #[test]
    fn run_case_writes_files_deterministically() {
        let case = patch_test_case(Material::new(1.0, 0.3, PlaneState::PlaneStrain).unwrap());
        let mut spec = MeshSpec::new(MeshKind::Random, 4);
        spec.seed = 11;
        let mesh = spec.build(&case.region).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let out = run_case(&case, &mesh, &SolveOptions::default(), Some(a.path())).unwrap();
        run_case(&case, &mesh, &SolveOptions::default(), Some(b.path())).unwrap();
        let r = out.report.unwrap();
        assert!(r.l2_relative < 1e-10 && r.h1_relative < 1e-10);
        for f in ["mesh.txt", "solution.csv", "errors.csv"] {
            let x = std::fs::read(a.path().join(f)).unwrap();
            assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f}");
        }
    }

    #[test]
    fn small_poisson_study() {
        let case = poisson_manufactured();
        let st = run_convergence(&case, &MeshSpec::new(MeshKind::Alternating, 4), 3, &SolveOptions::default()).unwrap();
        assert_eq!(st.rows.len(), 3);
        assert!(st.rows.windows(2).all(|w| w[1].report.h_max < w[0].report.h_max));
        assert!(st.rows.windows(2).all(|w| w[1].report.l2_relative < w[0].report.l2_relative));
    }

    #[test]
    fn interpolation_at_dofs() {
        let curve = [(100, 0.4), (400, 0.1), (1600, 0.025)];
        assert!((error_at_dofs(&curve, 200) - 0.2).abs() < 1e-12);
        assert!((error_at_dofs(&curve, 400) - 0.1).abs() < 1e-12);
        // beyond the ends: extrapolate along the nearest segment
        assert!((error_at_dofs(&curve, 3200) - 0.0125).abs() < 1e-12);
    }
}
