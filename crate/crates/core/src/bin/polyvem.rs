use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use polyvem::benchmarks::{case_by_name, patch_field, BenchmarkCase};
use polyvem::io::{convergence_csv, parse_mesh, parse_polymesher, render_mesh, solution_csv, write_atomic, MeshFile};
use polyvem::mesher::Mesh;
use polyvem::model::{Material, PlaneState, ProblemConditions};
use polyvem::norms::{ErrorReport, Method};
use polyvem::pipeline::{solve_problem, ConvergenceStudy, SolveOptions};
use polyvem::run::{compare_with_fem, error_at_dofs, run_case, run_convergence, MeshKind, MeshSpec};
use polyvem::{Error, Result};

#[derive(Parser)]
#[command(name = "polyvem", version, about = "Virtual element solver for 2D elasticity and Poisson problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh for a built-in case's domain and write it.
    Mesh {
        #[arg(long, default_value = "beam")]
        case: String,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve a built-in case, a mesh file or a PolyMesher export.
    Solve(SolveArgs),
    /// Solve a built-in case and report the relative L2 and H1 errors.
    Norms(SolveArgs),
    /// Refinement study with fitted convergence rates.
    Convergence {
        #[arg(long, default_value = "poisson")]
        case: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Vem)]
        method: MethodArg,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// VEM on polygons against linear triangles over a refinement family.
    CompareFem {
        #[arg(long, default_value = "beam")]
        case: String,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Linear-field patch test on a random Voronoi mesh of the unit square.
    PatchTest {
        #[arg(long, default_value_t = 5)]
        nx: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Stability scaling of the VEM stiffness.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Seed for random seed layouts and noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = PlaneArg::Strain)]
    plane: PlaneArg,
    /// Directory for output files; nothing is written when omitted.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct MeshArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Alternating)]
    kind: KindArg,
    #[arg(long, default_value_t = 8)]
    nx: usize,
    /// Defaults to nx scaled by the domain's aspect ratio.
    #[arg(long)]
    ny: Option<usize>,
    /// Largest random displacement added to each seed.
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Args, Clone)]
struct SolveArgs {
    /// Built-in case: beam, poisson or patch.
    #[arg(long)]
    case: Option<String>,
    /// Mesh file in the canonical format. Used with --case, only the mesh is
    /// taken; otherwise its boundary blocks define the problem.
    #[arg(long, conflicts_with = "polymesher")]
    mesh_file: Option<PathBuf>,
    /// PolyMesher export with supports and loads.
    #[arg(long)]
    polymesher: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Vem)]
    method: MethodArg,
    /// Young's modulus for file input.
    #[arg(long, default_value_t = 1.0)]
    young: f64,
    /// Poisson's ratio for file input.
    #[arg(long, default_value_t = 0.3)]
    nu: f64,
    #[command(flatten)]
    mesh: MeshArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Vem,
    Fem,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlaneArg {
    Strain,
    Stress,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Constant,
    Alternating,
    Random,
    Sine,
    Triangles,
}

impl CommonArgs {
    fn plane(&self) -> PlaneState {
        match self.plane {
            PlaneArg::Strain => PlaneState::PlaneStrain,
            PlaneArg::Stress => PlaneState::PlaneStress,
        }
    }

    fn options(&self, method: MethodArg) -> SolveOptions {
        SolveOptions {
            method: match method {
                MethodArg::Vem => Method::Vem,
                MethodArg::Fem => Method::Fem,
            },
            gamma: self.gamma,
            ..SolveOptions::default()
        }
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        if let Some(dir) = &self.out_dir {
            std::fs::create_dir_all(dir)?;
            write_atomic(&dir.join(name), contents)?;
        }
        Ok(())
    }
}

impl MeshArgs {
    fn spec(&self, seed: u64, method: MethodArg) -> MeshSpec {
        let kind = match (method, self.kind) {
            (MethodArg::Fem, _) | (_, KindArg::Triangles) => MeshKind::Triangles,
            (_, KindArg::Constant) => MeshKind::Constant,
            (_, KindArg::Alternating) => MeshKind::Alternating,
            (_, KindArg::Random) => MeshKind::Random,
            (_, KindArg::Sine) => MeshKind::Sine,
        };
        MeshSpec {
            kind,
            nx: self.nx,
            ny: self.ny,
            seed,
            noise: self.noise,
        }
    }
}

fn print_report(label: &str, r: &ErrorReport) {
    println!(
        "{label}: dofs {} h_max {:.6e} L2 {:.6e} H1 {:.6e}",
        r.dof_count, r.h_max, r.l2_relative, r.h1_relative
    );
}

fn print_study(label: &str, st: &ConvergenceStudy) {
    for r in &st.rows {
        print_report(&format!("{label} level {}", r.level), &r.report);
    }
    println!("{label} rates: L2 {:.3} H1 {:.3}", st.l2_rate, st.h1_rate);
}

fn load_case(name: &str, common: &CommonArgs) -> Result<BenchmarkCase> {
    case_by_name(name, common.plane())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn solve_command(args: &SolveArgs, need_exact: bool) -> Result<()> {
    let opts = args.common.options(args.method);
    let file_mesh = match (&args.mesh_file, &args.polymesher) {
        (Some(p), _) => Some(parse_mesh(&read(p)?)?),
        _ => None,
    };
    if let Some(name) = &args.case {
        let case = load_case(name, &args.common)?;
        let mesh = match &file_mesh {
            Some(f) => f.mesh.clone(),
            None => args.mesh.spec(args.common.seed, args.method).build(&case.region)?,
        };
        let out = run_case(&case, &mesh, &opts, args.common.out_dir.as_deref())?;
        match out.report {
            Some(r) => print_report(&case.name, &r),
            None if need_exact => {
                return Err(Error::InvalidInput(format!("case '{}' has no exact solution", case.name)))
            }
            None => println!("{}: solved {} dofs", case.name, out.solution.values.len()),
        }
        return Ok(());
    }
    if need_exact {
        return Err(Error::InvalidInput("norms need a built-in case (--case)".into()));
    }
    let material = Material::new(args.young, args.nu, args.common.plane())?;
    let (mesh, conditions): (Mesh, ProblemConditions) = if let Some(f) = file_mesh {
        let mut c = ProblemConditions::new(Some(material));
        f.apply_to(&mut c);
        (f.mesh, c)
    } else if let Some(p) = &args.polymesher {
        let data = parse_polymesher(&read(p)?)?;
        let c = data.conditions(material);
        (data.mesh, c)
    } else {
        return Err(Error::InvalidInput(
            "give --case, --mesh-file or --polymesher".into(),
        ));
    };
    let solution = solve_problem(&mesh, &conditions, &opts)?;
    args.common.write("mesh.txt", &render_mesh(&MeshFile::new(mesh.clone())))?;
    args.common.write("solution.csv", &solution_csv(&mesh, &solution))?;
    println!(
        "solved {} dofs on {} elements",
        solution.values.len(),
        mesh.num_elements()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Mesh { case, mesh, common } => {
            let case = load_case(&case, &common)?;
            let m = mesh.spec(common.seed, MethodArg::Vem).build(&case.region)?;
            common.write("mesh.txt", &render_mesh(&MeshFile::new(m.clone())))?;
            println!(
                "{} elements, {} nodes, h_max {:.6e}",
                m.num_elements(),
                m.num_nodes(),
                m.h_max()
            );
            Ok(())
        }
        Command::Solve(args) => solve_command(&args, false),
        Command::Norms(args) => solve_command(&args, true),
        Command::Convergence {
            case,
            method,
            levels,
            mesh,
            common,
        } => {
            let case = load_case(&case, &common)?;
            let st = run_convergence(&case, &mesh.spec(common.seed, method), levels, &common.options(method))?;
            print_study(&case.name, &st);
            common.write("convergence.csv", &convergence_csv(&st))
        }
        Command::CompareFem {
            case,
            levels,
            mesh,
            common,
        } => {
            let case = load_case(&case, &common)?;
            let (vem, fem) = compare_with_fem(&case, &mesh.spec(common.seed, MethodArg::Vem), levels, common.gamma)?;
            print_study("vem", &vem);
            print_study("fem", &fem);
            let curve: Vec<(usize, f64)> = fem.rows.iter().map(|r| (r.report.dof_count, r.report.h1_relative)).collect();
            for r in &vem.rows {
                let f = error_at_dofs(&curve, r.report.dof_count);
                println!(
                    "dofs {}: H1 vem {:.6e} fem (interpolated) {:.6e} ratio {:.3}",
                    r.report.dof_count,
                    r.report.h1_relative,
                    f,
                    r.report.h1_relative / f
                );
            }
            common.write("convergence_vem.csv", &convergence_csv(&vem))?;
            common.write("convergence_fem.csv", &convergence_csv(&fem))
        }
        Command::PatchTest { nx, tol, common } => {
            let case = load_case("patch", &common)?;
            let mesh = MeshSpec {
                seed: common.seed,
                ..MeshSpec::new(MeshKind::Random, nx)
            }
            .build(&case.region)?;
            let out = run_case(&case, &mesh, &common.options(MethodArg::Vem), common.out_dir.as_deref())?;
            let mut worst: f64 = 0.0;
            for (n, p) in mesh.nodes().iter().enumerate() {
                let exact = patch_field(*p);
                let u = out.solution.at(n);
                let rel = ((u[0] - exact[0]).powi(2) + (u[1] - exact[1]).powi(2)).sqrt()
                    / (exact[0].powi(2) + exact[1].powi(2)).sqrt();
                worst = worst.max(rel);
            }
            let r = out.report.expect("patch case has an exact solution");
            print_report("patch", &r);
            println!("max nodal relative error {worst:.3e}");
            if worst < tol && r.l2_relative < tol && r.h1_relative < tol {
                println!("patch test passed");
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("patch test failed: nodal error {worst:e} exceeds {tol:e}")))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::FAILURE
        }
    }
}
