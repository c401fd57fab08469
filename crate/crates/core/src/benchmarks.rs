//! Built-in problems with known solutions.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesher::Region;
use crate::model::{BodyForce, Constraint, ConstraintValue, Direction, Material, PlaneState, ProblemConditions, Target};
use crate::norms::ExactSolution;

#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub name: String,
    pub region: Region,
    pub conditions: ProblemConditions,
    pub exact: Option<ExactSolution>,
}

/// Cantilever of unit thickness occupying [0, L] × [−D/2, D/2], clamped at
/// x = 0 and carrying a parabolic shear resultant P at x = L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParameters {
    pub load: f64,
    pub young_modulus: f64,
    pub poisson_ratio: f64,
    pub length: f64,
    pub depth: f64,
    pub plane_state: PlaneState,
}

impl Default for BeamParameters {
    fn default() -> Self {
        BeamParameters {
            load: -1000.0,
            young_modulus: 1e7,
            poisson_ratio: 0.3,
            length: 8.0,
            depth: 4.0,
            plane_state: PlaneState::PlaneStrain,
        }
    }
}

impl BeamParameters {
    /// Effective (Ē, ν̄): plane strain replaces E by E/(1−ν²) and ν by ν/(1−ν).
    fn effective(&self) -> (f64, f64) {
        let (e, nu) = (self.young_modulus, self.poisson_ratio);
        match self.plane_state {
            PlaneState::PlaneStrain => (e / (1.0 - nu * nu), nu / (1.0 - nu)),
            PlaneState::PlaneStress => (e, nu),
        }
    }

    pub fn inertia(&self) -> f64 {
        self.depth.powi(3) / 12.0
    }

    pub fn material(&self) -> Result<Material> {
        Material::new(self.young_modulus, self.poisson_ratio, self.plane_state)
    }

    /// Shear stress σ_xy; σ_yy vanishes and σ_xx = −P(L−x)y/I.
    pub fn shear_stress(&self, p: Point2) -> f64 {
        self.load / (2.0 * self.inertia()) * (self.depth * self.depth / 4.0 - p.y * p.y)
    }
}

pub fn beam_exact(p: Point2, params: &BeamParameters) -> [f64; 2] {
    let (eb, nb) = params.effective();
    let (l, d) = (params.length, params.depth);
    let k = params.load / (6.0 * eb * params.inertia());
    let (x, y) = (p.x, p.y);
    [
        -k * y * ((6.0 * l - 3.0 * x) * x + (2.0 + nb) * y * y - 1.5 * d * d * (1.0 + nb)),
        k * (3.0 * nb * y * y * (l - x) + (3.0 * l - x) * x * x),
    ]
}

/// Voigt strain [e11, e22, e12] (tensorial shear) of [`beam_exact`].
pub fn beam_strain(p: Point2, params: &BeamParameters) -> [f64; 3] {
    let (eb, nb) = params.effective();
    let (l, d) = (params.length, params.depth);
    let k = params.load / (6.0 * eb * params.inertia());
    let (x, y) = (p.x, p.y);
    [
        -6.0 * k * y * (l - x),
        6.0 * k * nb * y * (l - x),
        3.0 * k * (1.0 + nb) * (d * d / 4.0 - y * y),
    ]
}

pub fn beam_case(params: BeamParameters) -> Result<BenchmarkCase> {
    let (l, h) = (params.length, params.depth / 2.0);
    let region = Region::rectangle(0.0, -h, l, h)?;
    let mut conditions = ProblemConditions::new(Some(params.material()?));
    let clamp = Target::Segment(Point2::new(0.0, -h), Point2::new(0.0, h));
    conditions.constraints.push(Constraint::essential(
        "clamp-x",
        clamp,
        Direction::Horizontal,
        ConstraintValue::function(move |p| beam_exact(p, &params)[0]),
    ));
    conditions.constraints.push(Constraint::essential(
        "clamp-y",
        clamp,
        Direction::Vertical,
        ConstraintValue::function(move |p| beam_exact(p, &params)[1]),
    ));
    conditions.constraints.push(Constraint::natural(
        "end-load",
        Target::Segment(Point2::new(l, -h), Point2::new(l, h)),
        Direction::Vertical,
        ConstraintValue::function(move |p| params.shear_stress(p)),
    ));
    Ok(BenchmarkCase {
        name: "beam".into(),
        region,
        conditions,
        exact: Some(ExactSolution::elastic(
            move |p| beam_exact(p, &params),
            move |p| beam_strain(p, &params),
        )),
    })
}

pub fn poisson_exact(p: Point2) -> f64 {
    16.0 * p.x * p.y * (1.0 - p.x) * (1.0 - p.y)
}

pub fn poisson_source(p: Point2) -> f64 {
    32.0 * p.y * (1.0 - p.y) + 32.0 * p.x * (1.0 - p.x)
}

fn boundary_segments(region: &Region) -> Vec<Target> {
    let b = region.boundary();
    (0..b.len()).map(|i| Target::Segment(b[i], b[(i + 1) % b.len()])).collect()
}

/// −Δu = f on the unit square with u = 0 on the boundary.
pub fn poisson_manufactured() -> BenchmarkCase {
    let region = Region::rectangle(0.0, 0.0, 1.0, 1.0).expect("unit square");
    let mut conditions = ProblemConditions::new(None);
    conditions.body_force = BodyForce::scalar(poisson_source);
    for (i, t) in boundary_segments(&region).into_iter().enumerate() {
        conditions.constraints.push(Constraint::essential(
            format!("side-{i}"),
            t,
            Direction::Both,
            ConstraintValue::Constant(0.0),
        ));
    }
    BenchmarkCase {
        name: "poisson".into(),
        region,
        conditions,
        exact: Some(ExactSolution::scalar(poisson_exact, |p| {
            [
                16.0 * p.y * (1.0 - p.y) * (1.0 - 2.0 * p.x),
                16.0 * p.x * (1.0 - p.x) * (1.0 - 2.0 * p.y),
            ]
        })),
    }
}

/// Linear displacement used by the patch test.
pub fn patch_field(p: Point2) -> [f64; 2] {
    [0.1 + 0.2 * p.x + 0.3 * p.y, -0.05 + 0.15 * p.x + 0.25 * p.y]
}

/// Unit square with the linear field [`patch_field`] prescribed on the
/// whole boundary and no body force.
pub fn patch_test_case(material: Material) -> BenchmarkCase {
    let region = Region::rectangle(0.0, 0.0, 1.0, 1.0).expect("unit square");
    let mut conditions = ProblemConditions::new(Some(material));
    for (i, t) in boundary_segments(&region).into_iter().enumerate() {
        conditions.constraints.push(Constraint::essential(
            format!("side-{i}-x"),
            t,
            Direction::Horizontal,
            ConstraintValue::function(|p| patch_field(p)[0]),
        ));
        conditions.constraints.push(Constraint::essential(
            format!("side-{i}-y"),
            t,
            Direction::Vertical,
            ConstraintValue::function(|p| patch_field(p)[1]),
        ));
    }
    BenchmarkCase {
        name: "patch".into(),
        region,
        conditions,
        exact: Some(ExactSolution::elastic(patch_field, |_| [0.2, 0.25, 0.5 * (0.3 + 0.15)])),
    }
}

/// Named case lookup for the command line: `beam`, `poisson` or `patch`.
pub fn case_by_name(name: &str, plane_state: PlaneState) -> Result<BenchmarkCase> {
    match name {
        "beam" => beam_case(BeamParameters {
            plane_state,
            ..Default::default()
        }),
        "poisson" => Ok(poisson_manufactured()),
        "patch" => Ok(patch_test_case(Material::new(1.0, 0.3, plane_state)?)),
        other => Err(Error::InvalidInput(format!(
            "unknown case '{other}' (expected beam, poisson or patch)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beam_exact_reference_points() {
        let p = BeamParameters::default();
        assert_eq!(beam_exact(Point2::new(0.0, 0.0), &p), [0.0, 0.0]);
        let tip = beam_exact(Point2::new(p.length, 0.0), &p);
        let eb = p.young_modulus / (1.0 - p.poisson_ratio.powi(2));
        let expect = p.load * p.length.powi(3) / (3.0 * eb * p.inertia());
        assert!(tip[0].abs() < 1e-20);
        assert!((tip[1] - expect).abs() < 1e-15 * expect.abs());
    }

    #[test]
    fn beam_strain_matches_finite_differences() {
        let p = BeamParameters::default();
        let h = 1e-5;
        for &(x, y) in &[(1.0, 0.5), (4.0, -1.7), (7.5, 1.9)] {
            let u = |dx: f64, dy: f64| beam_exact(Point2::new(x + dx, y + dy), &p);
            let dudx = [(u(h, 0.0)[0] - u(-h, 0.0)[0]) / (2.0 * h), (u(h, 0.0)[1] - u(-h, 0.0)[1]) / (2.0 * h)];
            let dudy = [(u(0.0, h)[0] - u(0.0, -h)[0]) / (2.0 * h), (u(0.0, h)[1] - u(0.0, -h)[1]) / (2.0 * h)];
            let s = beam_strain(Point2::new(x, y), &p);
            let fd = [dudx[0], dudy[1], 0.5 * (dudy[0] + dudx[1])];
            for c in 0..3 {
                assert!((s[c] - fd[c]).abs() < 1e-9 * 1e-3, "component {c}: {} vs {}", s[c], fd[c]);
            }
        }
    }

    #[test]
    fn beam_end_shear_resultant_is_the_load() {
        let p = BeamParameters::default();
        // Simpson's rule is exact for the parabola
        let h = p.depth / 2.0;
        let f = |y: f64| p.shear_stress(Point2::new(p.length, y));
        let total = p.depth / 6.0 * (f(-h) + 4.0 * f(0.0) + f(h));
        assert!((total - p.load).abs() < 1e-9);
    }

    #[test]
    fn beam_stress_from_strain() {
        // plane strain Hooke's law applied to the exact strain returns σ_xy
        let p = BeamParameters::default();
        let d = crate::model::material_matrix(&p.material().unwrap()).unwrap();
        let pt = Point2::new(3.0, 0.7);
        let s = nalgebra::Vector3::from(beam_strain(pt, &p));
        let sigma = d.0 * s;
        // tensorial shear column carries the factor 2, so σ12 = D33 e12 / 2
        assert!((0.5 * sigma[2] - p.shear_stress(pt)).abs() < 1e-9);
        let sxx = -p.load * (p.length - pt.x) * pt.y / p.inertia();
        assert!((sigma[0] - sxx).abs() < 1e-8);
        assert!(sigma[1].abs() < 1e-8);
    }

    #[test]
    fn poisson_values() {
        assert_eq!(poisson_exact(Point2::new(0.5, 0.5)), 1.0);
        assert_eq!(poisson_source(Point2::new(0.5, 0.5)), 16.0);
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(poisson_exact(Point2::new(t, 0.0)), 0.0);
            assert_eq!(poisson_exact(Point2::new(1.0, t)), 0.0);
        }
        let case = poisson_manufactured();
        assert!(case.conditions.material.is_none());
        assert_eq!(case.conditions.constraints.len(), 4);
    }

    #[test]
    fn case_lookup() {
        assert!(case_by_name("beam", PlaneState::PlaneStrain).is_ok());
        assert!(case_by_name("patch", PlaneState::PlaneStress).is_ok());
        assert!(case_by_name("nope", PlaneState::PlaneStrain).is_err());
    }
}
