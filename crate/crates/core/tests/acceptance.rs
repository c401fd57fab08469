//! Acceptance criteria. Each criterion prints one PASS/FAIL line with the
//! measured values; the test fails if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use polyvem::benchmarks::{beam_case, patch_field, patch_test_case, poisson_manufactured, BeamParameters};
use polyvem::fem::{t3_laplacian, t3_stiffness};
use polyvem::geometry::{ElementGeometry, Point2};
use polyvem::io::{parse_mesh, render_mesh, MeshFile};
use polyvem::mesher::{generate_mesh, GridCounting, Region, SeedRule};
use polyvem::model::{material_matrix, Material, PlaneState};
use polyvem::pipeline::{solve_problem, SolveOptions};
use polyvem::run::{compare_with_fem, error_at_dofs, run_case, run_convergence, MeshKind, MeshSpec};
use polyvem::vem::{edge_averages, elastic_projection, elastic_stiffness, poisson_stiffness};
use rand::Rng;

use common::{linear_samples, max_abs, random_convex_polygon, random_element, random_material, rng};

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(id: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            out.passed = false;
            out.detail.push_str(&format!("; runtime {:.2?} exceeds {:.0?}", elapsed, limit));
        }
    }
    println!(
        "{} [{id}] {name}: {} ({:.2?})",
        if out.passed { "PASS" } else { "FAIL" },
        out.detail,
        elapsed
    );
    out.passed
}

const PATCH_TOL: f64 = 1e-9;
const KERNEL_REL: f64 = 1e-10;
const SYMMETRY_REL: f64 = 1e-12;
const VEM_FEM_REL: f64 = 1e-10;
const PROJECTOR_TOL: f64 = 1e-12;
const L2_RATE: (f64, f64) = (1.8, 2.2);
const H1_RATE: (f64, f64) = (0.8, 1.2);
const REFERENCE_L2: f64 = 2.6695e-3;
const REFERENCE_H1: f64 = 6.7834e-2;
const REFERENCE_FACTOR: f64 = 3.0;
const BEAM_FACTOR: f64 = 2.0;
const CLOSURE_TOL: f64 = 1e-12;

fn patch_test() -> Outcome {
    let case = patch_test_case(Material::new(1.0, 0.3, PlaneState::PlaneStrain).unwrap());
    let mut rule = SeedRule::random(2024);
    rule.counting = GridCounting::Points;
    let mesh = generate_mesh(&case.region, &rule, 5, 5).unwrap();
    let sol = solve_problem(&mesh, &case.conditions, &SolveOptions::default()).unwrap();
    let boundary = mesh.boundary_nodes();
    let mut worst: f64 = 0.0;
    let mut interior = 0;
    for (n, p) in mesh.nodes().iter().enumerate() {
        if boundary.binary_search(&n).is_ok() {
            continue;
        }
        interior += 1;
        let e = patch_field(*p);
        let u = sol.at(n);
        let err = ((u[0] - e[0]).powi(2) + (u[1] - e[1]).powi(2)).sqrt() / (e[0].powi(2) + e[1].powi(2)).sqrt();
        worst = worst.max(err);
    }
    Outcome {
        passed: interior > 0 && worst < PATCH_TOL,
        detail: format!(
            "{} cells, {interior} interior nodes, max relative nodal error {worst:.2e} (< {PATCH_TOL:e})",
            mesh.num_elements()
        ),
    }
}

fn count_small_eigenvalues(k: &DMatrix<f64>) -> usize {
    let eig = SymmetricEigen::new(k.clone()).eigenvalues;
    let lmax = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    eig.iter().filter(|v| v.abs() < KERNEL_REL * lmax).count()
}

fn symmetry_error(k: &DMatrix<f64>) -> f64 {
    max_abs(&(k - k.transpose())) / max_abs(k)
}

fn element_kernel() -> Outcome {
    let mut r = rng(7);
    let mut bad = Vec::new();
    let mut worst_sym: f64 = 0.0;
    for i in 0..1000 {
        let elem = random_element(&mut r, 3, 12);
        let d = material_matrix(&random_material(&mut r)).unwrap();
        let ke = elastic_stiffness(&elem, &d, 1.0).unwrap().k;
        let kp = poisson_stiffness(&elem).unwrap().k;
        let (ne, np) = (count_small_eigenvalues(&ke), count_small_eigenvalues(&kp));
        worst_sym = worst_sym.max(symmetry_error(&ke)).max(symmetry_error(&kp));
        if ne != 3 || np != 1 {
            bad.push((i, elem.num_nodes(), ne, np));
        }
    }
    Outcome {
        passed: bad.is_empty() && worst_sym <= SYMMETRY_REL,
        detail: format!(
            "1000 polygons, kernel-dimension mismatches {} {:?}, max symmetry error {worst_sym:.1e}",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>()
        ),
    }
}

fn vem_equals_fem_on_triangles() -> Outcome {
    let mut r = rng(11);
    let (mut worst_e, mut worst_p): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let pts = random_convex_polygon(&mut r, 3);
        let tri = [pts[0], pts[1], pts[2]];
        let elem = ElementGeometry::from_points(pts).unwrap();
        let d = material_matrix(&random_material(&mut r)).unwrap();
        let kv = elastic_stiffness(&elem, &d, r.random_range(0.1..10.0)).unwrap().k;
        let kf = t3_stiffness(tri, &d).unwrap();
        worst_e = worst_e.max(max_abs(&(&kv - &kf)) / max_abs(&kf));
        let pv = poisson_stiffness(&elem).unwrap().k;
        let pf = t3_laplacian(tri).unwrap();
        worst_p = worst_p.max(max_abs(&(&pv - &pf)) / max_abs(&pf));
    }
    Outcome {
        passed: worst_e <= VEM_FEM_REL && worst_p <= VEM_FEM_REL,
        detail: format!("100 triangles, max relative difference elastic {worst_e:.1e}, Poisson {worst_p:.1e}"),
    }
}

fn projector_identity() -> Outcome {
    let mut r = rng(7);
    let (mut idem, mut repro): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let elem = random_element(&mut r, 3, 12);
        let p = elastic_projection(&elem).p_p;
        idem = idem.max(max_abs(&(&p * &p - &p)) / max_abs(&p).max(1.0));
        let a = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let b = [
            [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)],
            [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)],
        ];
        let s = linear_samples(&elem.points, a, b);
        repro = repro.max((&p * &s - &s).amax() / s.amax());
    }
    Outcome {
        passed: idem <= PROJECTOR_TOL && repro <= PROJECTOR_TOL,
        detail: format!("max |P²−P| {idem:.1e}, max linear reproduction error {repro:.1e}"),
    }
}

fn poisson_convergence() -> Outcome {
    let case = poisson_manufactured();
    let st = run_convergence(&case, &MeshSpec::new(MeshKind::Alternating, 4), 4, &SolveOptions::default()).unwrap();
    let reference = MeshSpec::new(MeshKind::Alternating, 20).build(&case.region).unwrap();
    let r = run_case(&case, &reference, &SolveOptions::default(), None).unwrap().report.unwrap();
    let within = |v: f64, target: f64| v <= target * REFERENCE_FACTOR && v >= target / REFERENCE_FACTOR;
    let rates_ok = (L2_RATE.0..=L2_RATE.1).contains(&st.l2_rate) && (H1_RATE.0..=H1_RATE.1).contains(&st.h1_rate);
    Outcome {
        passed: rates_ok && within(r.l2_relative, REFERENCE_L2) && within(r.h1_relative, REFERENCE_H1),
        detail: format!(
            "rates L2 {:.3} H1 {:.3}; {} cells / {} dofs: L2 {:.4e} (x{:.2} of {REFERENCE_L2:e}), H1 {:.4e} (x{:.2} of {REFERENCE_H1:e})",
            st.l2_rate,
            st.h1_rate,
            reference.num_elements(),
            r.dof_count,
            r.l2_relative,
            r.l2_relative / REFERENCE_L2,
            r.h1_relative,
            r.h1_relative / REFERENCE_H1
        ),
    }
}

fn cantilever_beam() -> Outcome {
    let case = beam_case(BeamParameters::default()).unwrap();
    let (vem, fem) = compare_with_fem(&case, &MeshSpec::new(MeshKind::Alternating, 4), 4, 1.0).unwrap();
    let decreasing = |rows: &[polyvem::pipeline::ConvergenceRow]| {
        rows.windows(2).all(|w| w[1].report.h1_relative < w[0].report.h1_relative)
    };
    let curve = |rows: &[polyvem::pipeline::ConvergenceRow]| -> Vec<(usize, f64)> {
        rows.iter().map(|r| (r.report.dof_count, r.report.h1_relative)).collect()
    };
    let (cv, cf) = (curve(&vem.rows), curve(&fem.rows));
    let inside = |c: &[(usize, f64)], d: usize| d >= c[0].0 && d <= c[c.len() - 1].0;
    let mut ratios = Vec::new();
    for &(d, e) in &cv {
        if inside(&cf, d) {
            ratios.push(e / error_at_dofs(&cf, d));
        }
    }
    for &(d, e) in &cf {
        if inside(&cv, d) {
            ratios.push(error_at_dofs(&cv, d) / e);
        }
    }
    let agree = !ratios.is_empty() && ratios.iter().all(|r| *r <= BEAM_FACTOR && *r >= 1.0 / BEAM_FACTOR);
    let times = |rows: &[polyvem::pipeline::ConvergenceRow]| {
        rows.iter().map(|r| format!("{:.3}", r.seconds)).collect::<Vec<_>>().join("/")
    };
    Outcome {
        passed: decreasing(&vem.rows) && decreasing(&fem.rows) && agree,
        detail: format!(
            "H1 vem {:?}, fem {:?}; matched-dof ratios {:?}; seconds vem {} fem {}",
            cv.iter().map(|c| format!("{}:{:.3e}", c.0, c.1)).collect::<Vec<_>>(),
            cf.iter().map(|c| format!("{}:{:.3e}", c.0, c.1)).collect::<Vec<_>>(),
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>(),
            times(&vem.rows),
            times(&fem.rows)
        ),
    }
}

fn closure_identities() -> Outcome {
    let regions = [
        Region::rectangle(0.0, 0.0, 1.0, 1.0).unwrap(),
        Region::rectangle(0.0, -2.0, 8.0, 2.0).unwrap(),
        Region::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 0.5),
            Point2::new(2.5, 2.0),
            Point2::new(0.5, 2.5),
        ])
        .unwrap(),
    ];
    let kinds = [
        MeshKind::Constant,
        MeshKind::Alternating,
        MeshKind::Random,
        MeshKind::Sine,
        MeshKind::Triangles,
    ];
    let (mut meshes, mut elements) = (0, 0);
    let mut build_errors = Vec::new();
    let (mut worst_q, mut worst_n): (f64, f64) = (0.0, 0.0);
    for region in &regions {
        for kind in kinds {
            for (nx, seed, noise) in [(3, 1, None), (7, 2, Some(0.01)), (12, 3, None)] {
                let spec = MeshSpec {
                    seed,
                    noise,
                    ..MeshSpec::new(kind, nx)
                };
                let mesh = match spec.build(region) {
                    Ok(m) => m,
                    // structured triangles exist only for rectangles
                    Err(polyvem::Error::Unsupported(_)) if kind == MeshKind::Triangles => continue,
                    Err(e) => {
                        build_errors.push(e.to_string());
                        continue;
                    }
                };
                meshes += 1;
                for e in 0..mesh.num_elements() {
                    elements += 1;
                    let elem = ElementGeometry::from_points(mesh.element_points(e)).unwrap();
                    let q = edge_averages(&elem).q;
                    let qscale = max_abs(&q);
                    for i in 0..2 {
                        worst_q = worst_q.max(q.column(i).sum().abs() / qscale);
                    }
                    let perimeter: f64 = elem.edge_lengths.iter().sum();
                    for i in 0..2 {
                        let s: f64 = elem.edge_lengths.iter().zip(&elem.edge_normals).map(|(l, n)| l * n[i]).sum();
                        worst_n = worst_n.max(s.abs() / perimeter);
                    }
                }
            }
        }
    }
    Outcome {
        passed: build_errors.is_empty() && worst_q <= CLOSURE_TOL && worst_n <= CLOSURE_TOL,
        detail: format!(
            "{meshes} meshes, {elements} elements: max |Σq|/max|q| {worst_q:.1e}, max |Σ|e|n|/perimeter {worst_n:.1e}, build errors {build_errors:?}"
        ),
    }
}

fn round_trip() -> Outcome {
    let mut r = rng(99);
    let mut failures = 0;
    let mut built = 0;
    while built < 100 {
        let w = r.random_range(0.1..100.0);
        let h = r.random_range(0.1..100.0);
        let (x0, y0) = (r.random_range(-50.0..50.0), r.random_range(-50.0..50.0));
        let region = Region::rectangle(x0, y0, x0 + w, y0 + h).unwrap();
        let rule = SeedRule::random(r.random());
        let n = r.random_range(2..12);
        let Ok(mesh) = generate_mesh(&region, &rule, n, n) else { continue };
        built += 1;
        let file = MeshFile::new(mesh);
        let back = parse_mesh(&render_mesh(&file)).unwrap();
        let same_nodes = back
            .mesh
            .nodes()
            .iter()
            .zip(file.mesh.nodes())
            .all(|(a, b)| a.x.to_bits() == b.x.to_bits() && a.y.to_bits() == b.y.to_bits());
        if !same_nodes || back.mesh.num_nodes() != file.mesh.num_nodes() || back.mesh.elements() != file.mesh.elements() {
            failures += 1;
        }
    }
    Outcome {
        passed: failures == 0,
        detail: format!("{built} random meshes, {failures} mismatches"),
    }
}

#[test]
fn acceptance_criteria() {
    let results = [
        check(1, "patch test", Some(Duration::from_secs(1)), patch_test),
        check(2, "element kernel", Some(Duration::from_secs(10)), element_kernel),
        check(3, "VEM equals FEM on triangles", Some(Duration::from_secs(1)), vem_equals_fem_on_triangles),
        check(4, "projector identity", None, projector_identity),
        check(5, "Poisson manufactured convergence", Some(Duration::from_secs(30)), poisson_convergence),
        check(6, "cantilever beam", Some(Duration::from_secs(60)), cantilever_beam),
        check(7, "closed-boundary identities", None, closure_identities),
        check(8, "mesh file round trip", None, round_trip),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
