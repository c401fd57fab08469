//! Element-level virtual element algebra for the lowest-order space.
//!
//! Everything here is computed from boundary data only: the node average x̄,
//! the edge lengths and the outward normals. Nodal vectors are interleaved
//! `[u1_0, u2_0, u1_1, u2_1, ...]` for elasticity and `[u_0, u_1, ...]` for
//! the scalar problem. Strains use Voigt order `[e11, e22, e12]` with the
//! tensorial shear e12 (see [`crate::model::ConstitutiveMatrix`]).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{fan_triangulate_points, ElementGeometry, Point2};
use crate::model::{BodyForce, ConstitutiveMatrix};
use crate::quadrature::{integrate_segment, TriangleRule};

/// Boundary integrals of the (virtual) basis functions.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAverages {
    /// Row a holds (q_1a, q_2a) = 1/(2|E|) ∮ φ_a n ds.
    pub q: DMatrix<f64>,
    /// Node average of every basis function, 1/N.
    pub phi_bar: f64,
}

/// Trapezoidal evaluation of q_ia, exact for piecewise-linear boundary traces:
/// q_ia = (|e_{a-1}| n_{a-1} + |e_a| n_a)_i / (4|E|).
pub fn edge_averages(elem: &ElementGeometry) -> EdgeAverages {
    let n = elem.num_nodes();
    let mut q = DMatrix::zeros(n, 2);
    let s = 1.0 / (4.0 * elem.area);
    for a in 0..n {
        let prev = (a + n - 1) % n;
        for i in 0..2 {
            q[(a, i)] = s
                * (elem.edge_lengths[prev] * elem.edge_normals[prev][i]
                    + elem.edge_lengths[a] * elem.edge_normals[a][i]);
        }
    }
    EdgeAverages {
        q,
        phi_bar: 1.0 / n as f64,
    }
}

/// Discrete projection matrices for one element.
///
/// For elasticity every H/W block is 2N×3 and the P blocks are 2N×2N; for the
/// scalar problem H_R, W_R are N×1, H_C, W_C are N×2 and P is N×N.
#[derive(Debug, Clone, PartialEq)]
pub struct VemProjection {
    pub n_components: usize,
    pub h_r: DMatrix<f64>,
    pub w_r: DMatrix<f64>,
    pub h_c: DMatrix<f64>,
    pub w_c: DMatrix<f64>,
    pub p_r: DMatrix<f64>,
    pub p_c: DMatrix<f64>,
    pub p_p: DMatrix<f64>,
}

pub fn elastic_projection(elem: &ElementGeometry) -> VemProjection {
    let n = elem.num_nodes();
    let avg = edge_averages(elem);
    let c = elem.node_average;
    let mut h_r = DMatrix::zeros(2 * n, 3);
    let mut w_r = DMatrix::zeros(2 * n, 3);
    let mut h_c = DMatrix::zeros(2 * n, 3);
    let mut w_c = DMatrix::zeros(2 * n, 3);
    for a in 0..n {
        let dx = elem.points[a].x - c.x;
        let dy = elem.points[a].y - c.y;
        let (q1, q2) = (avg.q[(a, 0)], avg.q[(a, 1)]);
        let (r0, r1) = (2 * a, 2 * a + 1);

        h_r[(r0, 0)] = 1.0;
        h_r[(r0, 2)] = dy;
        h_r[(r1, 1)] = 1.0;
        h_r[(r1, 2)] = -dx;

        w_r[(r0, 0)] = avg.phi_bar;
        w_r[(r0, 2)] = q2;
        w_r[(r1, 1)] = avg.phi_bar;
        w_r[(r1, 2)] = -q1;

        h_c[(r0, 0)] = dx;
        h_c[(r0, 2)] = dy;
        h_c[(r1, 1)] = dy;
        h_c[(r1, 2)] = dx;

        w_c[(r0, 0)] = 2.0 * q1;
        w_c[(r0, 2)] = q2;
        w_c[(r1, 1)] = 2.0 * q2;
        w_c[(r1, 2)] = q1;
    }
    finish_projection(2, h_r, w_r, h_c, w_c)
}

pub fn poisson_projection(elem: &ElementGeometry) -> VemProjection {
    let n = elem.num_nodes();
    let avg = edge_averages(elem);
    let c = elem.node_average;
    let h_r = DMatrix::from_element(n, 1, 1.0);
    let w_r = DMatrix::from_element(n, 1, avg.phi_bar);
    let mut h_c = DMatrix::zeros(n, 2);
    let mut w_c = DMatrix::zeros(n, 2);
    for a in 0..n {
        h_c[(a, 0)] = elem.points[a].x - c.x;
        h_c[(a, 1)] = elem.points[a].y - c.y;
        w_c[(a, 0)] = 2.0 * avg.q[(a, 0)];
        w_c[(a, 1)] = 2.0 * avg.q[(a, 1)];
    }
    finish_projection(1, h_r, w_r, h_c, w_c)
}

fn finish_projection(
    n_components: usize,
    h_r: DMatrix<f64>,
    w_r: DMatrix<f64>,
    h_c: DMatrix<f64>,
    w_c: DMatrix<f64>,
) -> VemProjection {
    let p_r = &h_r * w_r.transpose();
    let p_c = &h_c * w_c.transpose();
    let p_p = &p_r + &p_c;
    VemProjection {
        n_components,
        h_r,
        w_r,
        h_c,
        w_c,
        p_r,
        p_c,
        p_p,
    }
}

/// Element stiffness with its consistency and stability parts kept apart.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementStiffness {
    pub k: DMatrix<f64>,
    pub consistency: DMatrix<f64>,
    pub stability: DMatrix<f64>,
    /// Scaling of the stability matrix S_E = alpha I.
    pub alpha: f64,
}

fn assemble_parts(
    area: f64,
    proj: &VemProjection,
    middle: &DMatrix<f64>,
    alpha: f64,
) -> ElementStiffness {
    let consistency = (&proj.w_c * middle * proj.w_c.transpose()) * area;
    let dim = proj.p_p.nrows();
    let i_minus_p = DMatrix::<f64>::identity(dim, dim) - &proj.p_p;
    let stability = (i_minus_p.transpose() * &i_minus_p) * alpha;
    let mut k = &consistency + &stability;
    // exact symmetry; products above are symmetric up to rounding
    symmetrize(&mut k);
    ElementStiffness {
        k,
        consistency,
        stability,
        alpha,
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// K_E = |E| W_C D W_Cᵀ + (I − P_P)ᵀ α_E (I − P_P), with
/// α_E = γ |E| tr(D) / tr(H_Cᵀ H_C).
pub fn elastic_stiffness(
    elem: &ElementGeometry,
    d: &ConstitutiveMatrix,
    gamma: f64,
) -> Result<ElementStiffness> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidInput(format!("gamma must be positive, got {gamma}")));
    }
    let proj = elastic_projection(elem);
    let hc_trace = proj.h_c.norm_squared();
    if !(hc_trace > 0.0) {
        return Err(Error::DegenerateElement(
            "all nodes coincide with the node average".into(),
        ));
    }
    let alpha = gamma * elem.area * d.trace() / hc_trace;
    let dm = DMatrix::from_column_slice(3, 3, d.0.as_slice());
    Ok(assemble_parts(elem.area, &proj, &dm, alpha))
}

/// Scalar Laplacian: K_E = |E| W_C W_Cᵀ + (I − P_P)ᵀ (I − P_P).
pub fn poisson_stiffness(elem: &ElementGeometry) -> Result<ElementStiffness> {
    let proj = poisson_projection(elem);
    if !(proj.h_c.norm_squared() > 0.0) {
        return Err(Error::DegenerateElement(
            "all nodes coincide with the node average".into(),
        ));
    }
    Ok(assemble_parts(elem.area, &proj, &DMatrix::identity(2, 2), 1.0))
}

/// Cell average of the body force by order-2 quadrature on the centroid fan.
pub fn body_force_average(elem: &ElementGeometry, body_force: &BodyForce) -> Result<[f64; 2]> {
    if body_force.is_none() {
        return Ok([0.0, 0.0]);
    }
    let rule = TriangleRule::with_degree(2);
    let mut total = [0.0, 0.0];
    for tri in fan_triangulate_points(&elem.points)? {
        let v: Vec2 = rule.integrate(&tri, |p, _| Vec2(body_force.eval(p)));
        total[0] += v.0[0];
        total[1] += v.0[1];
    }
    Ok([total[0] / elem.area, total[1] / elem.area])
}

/// f_b = |E| N̄ᵀ b̂: every node receives |E| b̂ / N per component.
pub fn body_force_vector(
    elem: &ElementGeometry,
    body_force: &BodyForce,
    n_components: usize,
) -> Result<DVector<f64>> {
    let n = elem.num_nodes();
    let mut f = DVector::zeros(n * n_components);
    if body_force.is_none() {
        return Ok(f);
    }
    let b = body_force_average(elem, body_force)?;
    let share = elem.area / n as f64;
    for a in 0..n {
        for c in 0..n_components {
            f[a * n_components + c] = share * b[c];
        }
    }
    Ok(f)
}

/// f_e = |e| N̄_Γᵀ f̂ on a boundary edge: each endpoint receives |e| f̂ / 2,
/// where f̂ is the edge average of the traction (two-point Gauss).
/// Layout: [p.x, p.y, q.x, q.y].
pub fn traction_force_vector(p: Point2, q: Point2, traction: impl Fn(Point2) -> [f64; 2]) -> [f64; 4] {
    let integral = integrate_segment(p, q, |x, _| traction(x));
    // |e| f̂ / 2 = (∫ f ds) / 2
    let half = [0.5 * integral[0], 0.5 * integral[1]];
    [half[0], half[1], half[0], half[1]]
}

/// Constant projected strain W_Cᵀ d (elasticity, Voigt) or gradient (scalar).
pub fn project_strain(proj: &VemProjection, nodal_values: &DVector<f64>) -> Result<DVector<f64>> {
    if nodal_values.len() != proj.w_c.nrows() {
        return Err(Error::DimensionError {
            expected: proj.w_c.nrows(),
            got: nodal_values.len(),
        });
    }
    Ok(proj.w_c.transpose() * nodal_values)
}

/// The linear field Π_P u^h = ε̂(x − x̄) + ω̂(x − x̄) + ū of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearField {
    pub center: Point2,
    pub mean: [f64; 2],
    /// [e11, e22, e12] for elasticity, [g1, g2, 0] for the scalar problem.
    pub strain: [f64; 3],
    /// Skew part ω̂_12 (zero for the scalar problem).
    pub rotation: f64,
    pub n_components: usize,
}

impl LinearField {
    pub fn eval(&self, p: Point2) -> [f64; 2] {
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        let [e11, e22, e12] = self.strain;
        if self.n_components == 1 {
            return [self.mean[0] + e11 * dx + e22 * dy, 0.0];
        }
        [
            self.mean[0] + e11 * dx + (e12 + self.rotation) * dy,
            self.mean[1] + (e12 - self.rotation) * dx + e22 * dy,
        ]
    }
}

pub fn linear_field(
    elem: &ElementGeometry,
    proj: &VemProjection,
    nodal_values: &DVector<f64>,
) -> Result<LinearField> {
    let nc = proj.n_components;
    let strain_v = project_strain(proj, nodal_values)?;
    let rigid = proj.w_r.transpose() * nodal_values;
    let (mean, strain, rotation) = if nc == 2 {
        (
            [rigid[0], rigid[1]],
            [strain_v[0], strain_v[1], strain_v[2]],
            rigid[2],
        )
    } else {
        ([rigid[0], 0.0], [strain_v[0], strain_v[1], 0.0], 0.0)
    };
    Ok(LinearField {
        center: elem.node_average,
        mean,
        strain,
        rotation,
        n_components: nc,
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct Vec2([f64; 2]);

impl std::ops::AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.0[0] += o.0[0];
        self.0[1] += o.0[1];
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2([self.0[0] * s, self.0[1] * s])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{material_matrix, Material, PlaneState};
    use approx::assert_relative_eq;

    fn geom(pts: &[(f64, f64)]) -> ElementGeometry {
        ElementGeometry::from_points(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    fn unit_square() -> ElementGeometry {
        geom(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    }

    fn pentagon() -> ElementGeometry {
        geom(&[(0.1, 0.0), (2.0, 0.3), (2.2, 1.4), (1.0, 2.1), (-0.3, 1.2)])
    }

    fn samples(elem: &ElementGeometry, f: impl Fn(Point2) -> [f64; 2]) -> DVector<f64> {
        let mut d = DVector::zeros(2 * elem.num_nodes());
        for (a, p) in elem.points.iter().enumerate() {
            let v = f(*p);
            d[2 * a] = v[0];
            d[2 * a + 1] = v[1];
        }
        d
    }

    #[test]
    fn q_rows_unit_square() {
        let avg = edge_averages(&unit_square());
        assert_relative_eq!(avg.q[(0, 0)], -0.25, epsilon = 1e-15);
        assert_relative_eq!(avg.q[(0, 1)], -0.25, epsilon = 1e-15);
        assert_eq!(avg.phi_bar * 4.0, 1.0);
    }

    #[test]
    fn q_columns_sum_to_zero() {
        for e in [unit_square(), pentagon()] {
            let avg = edge_averages(&e);
            for i in 0..2 {
                assert!(avg.q.column(i).sum().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn equilateral_q_rows_have_equal_norm() {
        let s = 3f64.sqrt() / 2.0;
        let avg = edge_averages(&geom(&[(0.0, 0.0), (1.0, 0.0), (0.5, s)]));
        let norms: Vec<f64> = (0..3).map(|a| avg.q.row(a).norm()).collect();
        assert_relative_eq!(norms[0], norms[1], max_relative = 1e-14);
        assert_relative_eq!(norms[0], norms[2], max_relative = 1e-14);
    }

    #[test]
    fn projections_reproduce_modes() {
        let e = pentagon();
        let proj = elastic_projection(&e);
        let c = e.node_average;
        let t = samples(&e, |_| [1.0, 0.0]);
        assert!((&proj.p_p * &t - &t).amax() < 1e-13);
        let rot = samples(&e, |p| [p.y - c.y, -(p.x - c.x)]);
        assert!((&proj.p_c * &rot).amax() < 1e-13);
        assert!((&proj.p_r * &rot - &rot).amax() < 1e-13);
        // symmetric linear field: w_cᵀ d recovers B
        let (b11, b22, b12) = (0.3, -0.7, 0.45);
        let lin = samples(&e, |p| {
            let (dx, dy) = (p.x - c.x, p.y - c.y);
            [b11 * dx + b12 * dy, b12 * dx + b22 * dy]
        });
        let eps = project_strain(&proj, &lin).unwrap();
        assert_relative_eq!(eps[0], b11, epsilon = 1e-13);
        assert_relative_eq!(eps[1], b22, epsilon = 1e-13);
        assert_relative_eq!(eps[2], b12, epsilon = 1e-13);
    }

    #[test]
    fn unit_stretch_strain() {
        let e = unit_square();
        let proj = elastic_projection(&e);
        let c = e.node_average;
        let d = samples(&e, |p| [p.x - c.x, 0.0]);
        let eps = project_strain(&proj, &d).unwrap();
        assert!((eps - DVector::from_vec(vec![1.0, 0.0, 0.0])).amax() < 1e-15);
        let bad = DVector::zeros(3);
        assert!(matches!(
            project_strain(&proj, &bad),
            Err(Error::DimensionError { expected: 8, got: 3 })
        ));
    }

    #[test]
    fn unit_square_alpha() {
        let e = unit_square();
        let d = material_matrix(&Material::new(1.0, 0.3, PlaneState::PlaneStrain).unwrap()).unwrap();
        let proj = elastic_projection(&e);
        // Σ_a 2(dx² + dy²) over the four corners
        assert_relative_eq!(proj.h_c.norm_squared(), 4.0, epsilon = 1e-15);
        let k = elastic_stiffness(&e, &d, 1.0).unwrap();
        assert_relative_eq!(k.alpha, d.trace() / 4.0, max_relative = 1e-15);
    }

    #[test]
    fn rigid_modes_carry_no_energy() {
        let e = pentagon();
        let d = material_matrix(&Material::new(2.0, 0.25, PlaneState::PlaneStress).unwrap()).unwrap();
        let k = elastic_stiffness(&e, &d, 1.0).unwrap();
        let c = e.node_average;
        for f in [
            samples(&e, |_| [1.0, 0.0]),
            samples(&e, |_| [0.0, 1.0]),
            samples(&e, |p| [-(p.y - c.y), p.x - c.x]),
        ] {
            assert!((&k.k * f).amax() < 1e-12);
        }
        assert!(elastic_stiffness(&e, &d, 0.0).is_err());
    }

    #[test]
    fn poisson_unit_square_consistency_diagonal() {
        let k = poisson_stiffness(&unit_square()).unwrap();
        for a in 0..4 {
            assert_relative_eq!(k.consistency[(a, a)], 0.5, epsilon = 1e-15);
        }
        let ones = DVector::from_element(4, 1.0);
        assert!((&k.k * ones).amax() < 1e-14);
    }

    #[test]
    fn body_force_lumping() {
        let e = unit_square();
        let f = body_force_vector(&e, &BodyForce::new(|_| 0.0, |_| -1.0), 2).unwrap();
        for a in 0..4 {
            assert_relative_eq!(f[2 * a], 0.0);
            assert_relative_eq!(f[2 * a + 1], -0.25, epsilon = 1e-15);
        }
        let z = body_force_vector(&e, &BodyForce::None, 2).unwrap();
        assert_eq!(z.amax(), 0.0);
    }

    #[test]
    fn manufactured_source_is_positive_at_the_center() {
        let e = geom(&[(0.45, 0.45), (0.55, 0.45), (0.55, 0.55), (0.45, 0.55)]);
        let src = BodyForce::scalar(|p| 32.0 * p.y * (1.0 - p.y) + 32.0 * p.x * (1.0 - p.x));
        let b = body_force_average(&e, &src).unwrap();
        assert!(b[0] > 0.0);
        let f = body_force_vector(&e, &src, 1).unwrap();
        assert!(f.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn traction_vectors() {
        let f = traction_force_vector(Point2::new(8.0, 0.0), Point2::new(8.0, 1.0), |_| {
            [0.0, -1000.0 / 4.0]
        });
        assert_relative_eq!(f[1], -125.0, epsilon = 1e-12);
        assert_relative_eq!(f[3], -125.0, epsilon = 1e-12);
        let z = traction_force_vector(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), |_| [0.0, 0.0]);
        assert_eq!(z, [0.0; 4]);
        // linear in arclength: ∫_0^2 3s ds = 6, half to each node
        let f = traction_force_vector(Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), |p| [3.0 * p.x, 0.0]);
        assert_relative_eq!(f[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(f[2], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn poisson_gradient_near_critical_point() {
        let u = |p: Point2| 16.0 * p.x * p.y * (1.0 - p.x) * (1.0 - p.y);
        let h = 1e-3;
        let e = geom(&[(0.5 - h, 0.5 - h), (0.5 + h, 0.5 - h), (0.5 + h, 0.5 + h), (0.5 - h, 0.5 + h)]);
        let proj = poisson_projection(&e);
        let d = DVector::from_iterator(4, e.points.iter().map(|&p| u(p)));
        let g = project_strain(&proj, &d).unwrap();
        assert!(g.amax() < 10.0 * h);
    }

    #[test]
    fn linear_field_reproduces_linear_samples() {
        let e = pentagon();
        let proj = elastic_projection(&e);
        let f = |p: Point2| [0.1 + 0.2 * p.x + 0.3 * p.y, -0.05 + 0.15 * p.x + 0.25 * p.y];
        let lf = linear_field(&e, &proj, &samples(&e, f)).unwrap();
        for p in [Point2::new(0.7, 0.9), Point2::new(1.5, 0.2)] {
            let (a, b) = (lf.eval(p), f(p));
            assert_relative_eq!(a[0], b[0], epsilon = 1e-13);
            assert_relative_eq!(a[1], b[1], epsilon = 1e-13);
        }
    }
}
