//! Relative L² norm and H¹ (energy) seminorm of the discretization error.
//!
//! VEM solutions are measured through their element projections: the
//! displacement is the linear field Π_P u^h and the strain the constant
//! ε̂(u^h). FEM solutions use the linear triangle interpolant.

use std::sync::Arc;

use nalgebra::{DVector, Matrix2, Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::Tri3ShapeFunctions;
use crate::geometry::{fan_triangulate_points, ElementGeometry, Point2};
use crate::mesher::Mesh;
use crate::model::ConstitutiveMatrix;
use crate::quadrature::TriangleRule;
use crate::vem::{elastic_projection, linear_field, poisson_projection, project_strain};

/// Default quadrature degree on the fan triangles.
pub const DEFAULT_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Vem,
    Fem,
}

type VectorField = Arc<dyn Fn(Point2) -> [f64; 2] + Send + Sync>;
type StrainField = Arc<dyn Fn(Point2) -> [f64; 3] + Send + Sync>;

/// Reference solution. For elasticity `strain` returns the Voigt strain
/// [e11, e22, e12] (tensorial shear); for a scalar problem `u` returns
/// [u, 0] and `strain` returns the gradient [u_x, u_y, 0].
#[derive(Clone)]
pub struct ExactSolution {
    pub n_components: usize,
    pub u: VectorField,
    pub strain: StrainField,
}

impl ExactSolution {
    pub fn elastic(
        u: impl Fn(Point2) -> [f64; 2] + Send + Sync + 'static,
        strain: impl Fn(Point2) -> [f64; 3] + Send + Sync + 'static,
    ) -> Self {
        ExactSolution {
            n_components: 2,
            u: Arc::new(u),
            strain: Arc::new(strain),
        }
    }

    pub fn scalar(
        u: impl Fn(Point2) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(Point2) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        ExactSolution {
            n_components: 1,
            u: Arc::new(move |p| [u(p), 0.0]),
            strain: Arc::new(move |p| {
                let g = gradient(p);
                [g[0], g[1], 0.0]
            }),
        }
    }
}

impl std::fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ExactSolution {{ n_components: {} }}", self.n_components)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub l2_relative: f64,
    pub h1_relative: f64,
    pub dof_count: usize,
    pub h_max: f64,
}

/// Discrete field of one element: value and (constant) strain at a point.
enum ElementField {
    Linear(crate::vem::LinearField, [f64; 3]),
    Triangle(Tri3ShapeFunctions, [f64; 6], [f64; 3]),
}

impl ElementField {
    fn value(&self, p: Point2, nc: usize) -> [f64; 2] {
        match self {
            ElementField::Linear(f, _) => f.eval(p),
            ElementField::Triangle(sf, vals, _) => {
                let n = sf.values(p);
                let mut out = [0.0; 2];
                for a in 0..3 {
                    for c in 0..nc {
                        out[c] += n[a] * vals[a * nc + c];
                    }
                }
                out
            }
        }
    }

    fn strain(&self) -> [f64; 3] {
        match self {
            ElementField::Linear(_, s) | ElementField::Triangle(_, _, s) => *s,
        }
    }
}

fn element_field(mesh: &Mesh, e: usize, solution: &DVector<f64>, nc: usize, method: Method) -> Result<ElementField> {
    let poly = &mesh.elements()[e];
    let local = DVector::from_iterator(
        poly.len() * nc,
        poly.nodes().iter().flat_map(|&n| (0..nc).map(move |c| solution[n * nc + c])),
    );
    match method {
        Method::Vem => {
            let elem = ElementGeometry::new(poly, mesh.nodes())?;
            let proj = if nc == 2 { elastic_projection(&elem) } else { poisson_projection(&elem) };
            let field = linear_field(&elem, &proj, &local)?;
            let s = project_strain(&proj, &local)?;
            let strain = if nc == 2 { [s[0], s[1], s[2]] } else { [s[0], s[1], 0.0] };
            Ok(ElementField::Linear(field, strain))
        }
        Method::Fem => {
            if poly.len() != 3 {
                return Err(Error::Unsupported(format!(
                    "linear triangle norms need triangles; element has {} nodes",
                    poly.len()
                )));
            }
            let pts = poly.coords(mesh.nodes());
            let sf = Tri3ShapeFunctions::new([pts[0], pts[1], pts[2]])?;
            let mut vals = [0.0; 6];
            vals[..3 * nc].copy_from_slice(local.as_slice());
            let strain = if nc == 2 {
                let b = sf.strain_matrix();
                let d = nalgebra::SVector::<f64, 6>::from_column_slice(&vals);
                let s = b * d;
                [s[0], s[1], s[2]]
            } else {
                let g = sf.gradients();
                [
                    g.iter().zip(&vals).map(|(g, v)| g[0] * v).sum(),
                    g.iter().zip(&vals).map(|(g, v)| g[1] * v).sum(),
                    0.0,
                ]
            };
            Ok(ElementField::Triangle(sf, vals, strain))
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    num: f64,
    den: f64,
}

impl std::ops::AddAssign for Sums {
    fn add_assign(&mut self, o: Sums) {
        self.num += o.num;
        self.den += o.den;
    }
}

impl std::ops::Mul<f64> for Sums {
    type Output = Sums;
    fn mul(self, s: f64) -> Sums {
        Sums {
            num: self.num * s,
            den: self.den * s,
        }
    }
}

fn check_inputs(mesh: &Mesh, solution: &DVector<f64>, exact: &ExactSolution) -> Result<usize> {
    let nc = exact.n_components;
    if !(nc == 1 || nc == 2) {
        return Err(Error::InvalidInput(format!("unsupported component count {nc}")));
    }
    let expected = mesh.num_nodes() * nc;
    if solution.len() != expected {
        return Err(Error::DimensionError {
            expected,
            got: solution.len(),
        });
    }
    Ok(nc)
}

/// Sums per-element integrals in element order.
fn integrate_over_mesh<F>(mesh: &Mesh, f: F) -> Result<Sums>
where
    F: Fn(usize) -> Result<Sums> + Sync,
{
    let parts: Vec<Result<Sums>> = (0..mesh.num_elements()).into_par_iter().map(&f).collect();
    let mut total = Sums::default();
    for (e, part) in parts.into_iter().enumerate() {
        total += part.map_err(|err| err.in_element(e))?;
    }
    Ok(total)
}

fn relative(s: Sums, what: &str) -> Result<f64> {
    if !(s.den > 0.0) {
        return Err(Error::NormUndefined(format!(
            "{what} norm of the exact solution is zero"
        )));
    }
    Ok((s.num / s.den).sqrt())
}

pub fn l2_error(mesh: &Mesh, solution: &DVector<f64>, exact: &ExactSolution, method: Method) -> Result<f64> {
    l2_error_with_degree(mesh, solution, exact, method, DEFAULT_DEGREE)
}

pub fn l2_error_with_degree(
    mesh: &Mesh,
    solution: &DVector<f64>,
    exact: &ExactSolution,
    method: Method,
    degree: usize,
) -> Result<f64> {
    let nc = check_inputs(mesh, solution, exact)?;
    let rule = TriangleRule::with_degree(degree);
    let sums = integrate_over_mesh(mesh, |e| {
        let field = element_field(mesh, e, solution, nc, method)?;
        let mut s = Sums::default();
        for tri in fan_triangulate_points(&mesh.element_points(e))? {
            s += rule.integrate(&tri, |p, _| {
                let u = (exact.u)(p);
                let uh = field.value(p, nc);
                let (mut num, mut den) = (0.0, 0.0);
                for c in 0..nc {
                    num += (u[c] - uh[c]).powi(2);
                    den += u[c] * u[c];
                }
                Sums { num, den }
            });
        }
        Ok(s)
    })?;
    relative(sums, "L2")
}

/// Relative energy seminorm. `d` weights the Voigt strain error for
/// elasticity and is required there; scalar problems use the identity.
pub fn h1_error(
    mesh: &Mesh,
    solution: &DVector<f64>,
    exact: &ExactSolution,
    d: Option<&ConstitutiveMatrix>,
    method: Method,
) -> Result<f64> {
    h1_error_with_degree(mesh, solution, exact, d, method, DEFAULT_DEGREE)
}

pub fn h1_error_with_degree(
    mesh: &Mesh,
    solution: &DVector<f64>,
    exact: &ExactSolution,
    d: Option<&ConstitutiveMatrix>,
    method: Method,
    degree: usize,
) -> Result<f64> {
    let nc = check_inputs(mesh, solution, exact)?;
    let weight: Matrix3<f64> = if nc == 2 {
        d.ok_or_else(|| Error::InvalidInput("elastic energy norm needs a material matrix".into()))?
            .0
    } else {
        let mut m = Matrix3::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&Matrix2::identity());
        m
    };
    let rule = TriangleRule::with_degree(degree);
    let sums = integrate_over_mesh(mesh, |e| {
        let field = element_field(mesh, e, solution, nc, method)?;
        let sh = Vector3::from(field.strain());
        let mut s = Sums::default();
        for tri in fan_triangulate_points(&mesh.element_points(e))? {
            s += rule.integrate(&tri, |p, _| {
                let se = Vector3::from((exact.strain)(p));
                let diff = se - sh;
                Sums {
                    num: diff.dot(&(weight * diff)),
                    den: se.dot(&(weight * se)),
                }
            });
        }
        Ok(s)
    })?;
    relative(sums, "H1")
}

/// Both error measures plus mesh size data.
pub fn error_report(
    mesh: &Mesh,
    solution: &DVector<f64>,
    exact: &ExactSolution,
    d: Option<&ConstitutiveMatrix>,
    method: Method,
) -> Result<ErrorReport> {
    Ok(ErrorReport {
        l2_relative: l2_error(mesh, solution, exact, method)?,
        h1_relative: h1_error(mesh, solution, exact, d, method)?,
        dof_count: solution.len(),
        h_max: mesh.h_max(),
    })
}
