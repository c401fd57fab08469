//! Materials, body forces and boundary-condition descriptions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix3;

use crate::assembly::DofMap;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesher::Mesh;

/// Default geometric matching tolerance, relative to the mesh bounding-box
/// diagonal.
pub const MATCH_TOL: f64 = 1e-9;

pub type ScalarField = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneState {
    PlaneStrain,
    PlaneStress,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub young_modulus: f64,
    pub poisson_ratio: f64,
    pub plane_state: PlaneState,
}

impl Material {
    pub fn new(young_modulus: f64, poisson_ratio: f64, plane_state: PlaneState) -> Result<Self> {
        if !(young_modulus > 0.0 && young_modulus.is_finite()) {
            return Err(Error::InvalidMaterial(format!(
                "Young's modulus must be positive, got {young_modulus}"
            )));
        }
        if !(poisson_ratio > -1.0 && poisson_ratio < 0.5) {
            return Err(Error::InvalidMaterial(format!(
                "Poisson's ratio must lie in (-1, 0.5), got {poisson_ratio}"
            )));
        }
        Ok(Material {
            young_modulus,
            poisson_ratio,
            plane_state,
        })
    }
}

/// Isotropic constitutive matrix in Voigt order [e11, e22, e12].
///
/// The strain vector carries the *tensorial* shear e12, so the third diagonal
/// entry is 4G rather than G; the energy density e^T D e is then correct.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstitutiveMatrix(pub Matrix3<f64>);

impl ConstitutiveMatrix {
    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

pub fn material_matrix(material: &Material) -> Result<ConstitutiveMatrix> {
    let e = material.young_modulus;
    let nu = material.poisson_ratio;
    let d = match material.plane_state {
        PlaneState::PlaneStrain => {
            if 0.5 - nu <= 1e-12 {
                return Err(Error::ConstitutiveSingularity(format!(
                    "plane strain with nu = {nu} is incompressible"
                )));
            }
            let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
            Matrix3::new(
                1.0 - nu,
                nu,
                0.0,
                nu,
                1.0 - nu,
                0.0,
                0.0,
                0.0,
                2.0 * (1.0 - 2.0 * nu),
            ) * c
        }
        PlaneState::PlaneStress => {
            let c = e / (1.0 - nu * nu);
            Matrix3::new(1.0, nu, 0.0, nu, 1.0, 0.0, 0.0, 0.0, 2.0 * (1.0 - nu)) * c
        }
    };
    Ok(ConstitutiveMatrix(d))
}

/// Body force per unit area. `None` means identically zero. Scalar problems
/// read only the first component.
#[derive(Clone, Default)]
pub enum BodyForce {
    #[default]
    None,
    Field { fx: ScalarField, fy: ScalarField },
}

impl BodyForce {
    pub fn new(
        fx: impl Fn(Point2) -> f64 + Send + Sync + 'static,
        fy: impl Fn(Point2) -> f64 + Send + Sync + 'static,
    ) -> Self {
        BodyForce::Field {
            fx: Arc::new(fx),
            fy: Arc::new(fy),
        }
    }

    /// Source term for a scalar (Poisson) problem.
    pub fn scalar(f: impl Fn(Point2) -> f64 + Send + Sync + 'static) -> Self {
        BodyForce::new(f, |_| 0.0)
    }

    pub fn is_none(&self) -> bool {
        matches!(self, BodyForce::None)
    }

    pub fn eval(&self, p: Point2) -> [f64; 2] {
        match self {
            BodyForce::None => [0.0, 0.0],
            BodyForce::Field { fx, fy } => [fx(p), fy(p)],
        }
    }
}

impl fmt::Debug for BodyForce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyForce::None => write!(f, "BodyForce::None"),
            BodyForce::Field { .. } => write!(f, "BodyForce::Field"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Point(Point2),
    Segment(Point2, Point2),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    Horizontal,
    Vertical,
    Both,
}

impl Direction {
    /// Components touched by this direction for a field with `n_components`.
    /// Scalar fields have a single component regardless of direction.
    pub fn components(self, n_components: usize) -> &'static [usize] {
        if n_components == 1 {
            return &[0];
        }
        match self {
            Direction::Horizontal => &[0],
            Direction::Vertical => &[1],
            Direction::Both => &[0, 1],
        }
    }
}

#[derive(Clone)]
pub enum ConstraintValue {
    Constant(f64),
    Function(ScalarField),
}

impl ConstraintValue {
    pub fn function(f: impl Fn(Point2) -> f64 + Send + Sync + 'static) -> Self {
        ConstraintValue::Function(Arc::new(f))
    }

    pub fn eval(&self, p: Point2) -> f64 {
        match self {
            ConstraintValue::Constant(c) => *c,
            ConstraintValue::Function(f) => f(p),
        }
    }
}

impl fmt::Debug for ConstraintValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintValue::Constant(c) => write!(f, "Constant({c})"),
            ConstraintValue::Function(_) => write!(f, "Function"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Essential,
    Natural,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub target: Target,
    pub direction: Direction,
    pub value: ConstraintValue,
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn essential(
        name: impl Into<String>,
        target: Target,
        direction: Direction,
        value: ConstraintValue,
    ) -> Self {
        Constraint {
            name: name.into(),
            target,
            direction,
            value,
            kind: ConstraintKind::Essential,
        }
    }

    pub fn natural(
        name: impl Into<String>,
        target: Target,
        direction: Direction,
        value: ConstraintValue,
    ) -> Self {
        Constraint {
            name: name.into(),
            target,
            direction,
            value,
            kind: ConstraintKind::Natural,
        }
    }
}

/// A traction acting on one boundary edge in one component.
#[derive(Debug, Clone)]
pub struct EdgeLoad {
    pub edge: (usize, usize),
    pub component: usize,
    pub value: ConstraintValue,
}

/// Everything a solver needs from the boundary conditions, expressed in
/// degrees of freedom and mesh edges.
#[derive(Debug, Clone, Default)]
pub struct ResolvedConstraints {
    /// Sorted by dof, no duplicates.
    pub essential: Vec<(usize, f64)>,
    /// Sorted by (edge, component).
    pub natural: Vec<EdgeLoad>,
    /// Concentrated forces added straight into the load vector; sorted by dof.
    pub point_loads: Vec<(usize, f64)>,
}

impl ResolvedConstraints {
    pub fn natural_edges(&self) -> Vec<((usize, usize), usize)> {
        self.natural.iter().map(|l| (l.edge, l.component)).collect()
    }
}

/// Problem data: material, body force and the constraint list.
#[derive(Debug, Clone)]
pub struct ProblemConditions {
    pub material: Option<Material>,
    pub body_force: BodyForce,
    pub constraints: Vec<Constraint>,
    /// Index-based prescriptions, e.g. from a mesh file: (node, direction, value).
    pub nodal_essential: Vec<(usize, Direction, f64)>,
    /// Index-based constant tractions on boundary edges: (a, b, tx, ty).
    pub edge_tractions: Vec<(usize, usize, f64, f64)>,
    /// Index-based concentrated loads: (node, fx, fy).
    pub point_loads: Vec<(usize, f64, f64)>,
}

impl ProblemConditions {
    pub fn new(material: Option<Material>) -> Self {
        ProblemConditions {
            material,
            body_force: BodyForce::None,
            constraints: Vec::new(),
            nodal_essential: Vec::new(),
            edge_tractions: Vec::new(),
            point_loads: Vec::new(),
        }
    }
}

fn distance_to_segment(p: Point2, a: Point2, b: Point2) -> (f64, f64) {
    let ab = b - a;
    let t = (p - a).dot(ab) / ab.dot(ab);
    let tc = t.clamp(0.0, 1.0);
    ((a + ab * tc).distance(p), t)
}

fn insert_essential(
    map: &mut BTreeMap<usize, f64>,
    dof: usize,
    value: f64,
) -> Result<()> {
    if let Some(&old) = map.get(&dof) {
        let scale = old.abs().max(value.abs()).max(1.0);
        if (old - value).abs() > 1e-12 * scale {
            return Err(Error::ConstraintConflict {
                dof,
                first: old,
                second: value,
            });
        }
        return Ok(());
    }
    map.insert(dof, value);
    Ok(())
}

/// Matches geometric constraints to mesh nodes and boundary edges.
pub fn resolve_constraints(
    mesh: &Mesh,
    conditions: &ProblemConditions,
    dofs: &DofMap,
) -> Result<ResolvedConstraints> {
    resolve_constraints_with_tol(mesh, conditions, dofs, MATCH_TOL)
}

pub fn resolve_constraints_with_tol(
    mesh: &Mesh,
    conditions: &ProblemConditions,
    dofs: &DofMap,
    rel_tol: f64,
) -> Result<ResolvedConstraints> {
    let nodes = mesh.nodes();
    let tol = rel_tol * mesh.bbox_diagonal();
    let nc = dofs.n_components();
    let boundary_nodes = mesh.boundary_nodes();
    let mut essential = BTreeMap::new();
    let mut loads: BTreeMap<usize, f64> = BTreeMap::new();
    let mut natural = Vec::new();

    for c in &conditions.constraints {
        let unmatched = || Error::UnmatchedConstraint {
            name: c.name.clone(),
            geometry: format!("{:?}", c.target),
        };
        match (c.kind, c.target) {
            (kind, Target::Point(p)) => {
                let (node, dist) = nodes
                    .iter()
                    .enumerate()
                    .map(|(i, q)| (i, q.distance(p)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .ok_or_else(unmatched)?;
                if dist > tol {
                    return Err(unmatched());
                }
                for &comp in c.direction.components(nc) {
                    let v = c.value.eval(nodes[node]);
                    match kind {
                        ConstraintKind::Essential => {
                            insert_essential(&mut essential, dofs.index(node, comp), v)?
                        }
                        ConstraintKind::Natural => {
                            *loads.entry(dofs.index(node, comp)).or_insert(0.0) += v
                        }
                    }
                }
            }
            (ConstraintKind::Essential, Target::Segment(a, b)) => {
                let mut matched = false;
                for &n in &boundary_nodes {
                    let (d, _) = distance_to_segment(nodes[n], a, b);
                    if d <= tol {
                        matched = true;
                        for &comp in c.direction.components(nc) {
                            insert_essential(&mut essential, dofs.index(n, comp), c.value.eval(nodes[n]))?;
                        }
                    }
                }
                if !matched {
                    return Err(unmatched());
                }
            }
            (ConstraintKind::Natural, Target::Segment(a, b)) => {
                let mut matched = false;
                for &(p, q) in mesh.boundary_segments() {
                    let on = distance_to_segment(nodes[p], a, b).0 <= tol
                        && distance_to_segment(nodes[q], a, b).0 <= tol;
                    if on {
                        matched = true;
                        for &comp in c.direction.components(nc) {
                            natural.push(EdgeLoad {
                                edge: (p, q),
                                component: comp,
                                value: c.value.clone(),
                            });
                        }
                    }
                }
                if !matched {
                    return Err(unmatched());
                }
            }
        }
    }

    for &(node, dir, value) in &conditions.nodal_essential {
        if node >= mesh.num_nodes() {
            return Err(Error::InvalidInput(format!("essential node {node} out of range")));
        }
        for &comp in dir.components(nc) {
            insert_essential(&mut essential, dofs.index(node, comp), value)?;
        }
    }
    let boundary: std::collections::HashSet<(usize, usize)> =
        mesh.boundary_segments().iter().copied().collect();
    for &(a, b, tx, ty) in &conditions.edge_tractions {
        let edge = if boundary.contains(&(a, b)) {
            (a, b)
        } else if boundary.contains(&(b, a)) {
            (b, a)
        } else {
            return Err(Error::UnmatchedConstraint {
                name: "segment".into(),
                geometry: format!("edge ({a}, {b}) is not a boundary edge"),
            });
        };
        for (comp, v) in [tx, ty].into_iter().enumerate().take(nc) {
            natural.push(EdgeLoad {
                edge,
                component: comp,
                value: ConstraintValue::Constant(v),
            });
        }
    }
    for &(node, fx, fy) in &conditions.point_loads {
        if node >= mesh.num_nodes() {
            return Err(Error::InvalidInput(format!("load node {node} out of range")));
        }
        for (comp, v) in [fx, fy].into_iter().enumerate().take(nc) {
            *loads.entry(dofs.index(node, comp)).or_insert(0.0) += v;
        }
    }

    natural.sort_by_key(|l| (l.edge, l.component));
    Ok(ResolvedConstraints {
        essential: essential.into_iter().collect(),
        natural,
        point_loads: loads.into_iter().collect(),
    })
}
