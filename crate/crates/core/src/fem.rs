//! Three-node constant-strain triangle, used as the finite element reference
//! for the polygonal solver.

use nalgebra::{DMatrix, DVector, Matrix2, SMatrix, Vector2};

use crate::error::{Error, Result};
use crate::geometry::{orient2d, Point2};
use crate::model::{BodyForce, ConstitutiveMatrix};
use crate::quadrature::{integrate_segment, TriangleRule};

/// Linear shape functions of a physical triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tri3ShapeFunctions {
    vertices: [Point2; 3],
    /// ∂N_a/∂x, ∂N_a/∂y (constant over the element).
    gradients: [[f64; 2]; 3],
    area: f64,
}

impl Tri3ShapeFunctions {
    pub fn new(vertices: [Point2; 3]) -> Result<Self> {
        let [a, b, c] = vertices;
        let two_area = orient2d(a, b, c);
        let scale = (b - a).norm().max((c - a).norm());
        if !(two_area > 1e-14 * scale * scale) {
            return Err(Error::DegenerateElement(format!(
                "triangle area {} is not positive",
                0.5 * two_area
            )));
        }
        // reference map x = a + J ξ with N = [1 - ξ - η, ξ, η]
        let j = Matrix2::new(b.x - a.x, c.x - a.x, b.y - a.y, c.y - a.y);
        let jinv = j.try_inverse().ok_or_else(|| {
            Error::DegenerateElement("singular triangle Jacobian".into())
        })?;
        let ref_grads = [
            Vector2::new(-1.0, -1.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(0.0, 1.0),
        ];
        let mut gradients = [[0.0; 2]; 3];
        for (g, r) in gradients.iter_mut().zip(ref_grads) {
            let v = jinv.transpose() * r;
            *g = [v[0], v[1]];
        }
        Ok(Tri3ShapeFunctions {
            vertices,
            gradients,
            area: 0.5 * two_area,
        })
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn gradients(&self) -> [[f64; 2]; 3] {
        self.gradients
    }

    /// Shape function values at a physical point.
    pub fn values(&self, p: Point2) -> [f64; 3] {
        let [a, b, c] = self.vertices;
        let inv = 1.0 / (2.0 * self.area);
        [
            orient2d(p, b, c) * inv,
            orient2d(a, p, c) * inv,
            orient2d(a, b, p) * inv,
        ]
    }

    /// Strain-displacement matrix for the tensorial Voigt strain
    /// [e11, e22, e12], acting on [u1_0, u2_0, u1_1, ...].
    pub fn strain_matrix(&self) -> SMatrix<f64, 3, 6> {
        let mut b = SMatrix::<f64, 3, 6>::zeros();
        for (a, g) in self.gradients.iter().enumerate() {
            b[(0, 2 * a)] = g[0];
            b[(1, 2 * a + 1)] = g[1];
            b[(2, 2 * a)] = 0.5 * g[1];
            b[(2, 2 * a + 1)] = 0.5 * g[0];
        }
        b
    }
}

/// K = A Bᵀ D B.
pub fn t3_stiffness(vertices: [Point2; 3], d: &ConstitutiveMatrix) -> Result<DMatrix<f64>> {
    let sf = Tri3ShapeFunctions::new(vertices)?;
    let b = sf.strain_matrix();
    let k = b.transpose() * d.0 * b * sf.area;
    Ok(DMatrix::from_iterator(6, 6, k.iter().copied()))
}

/// Linear-element Laplacian stiffness A ∇Nᵀ ∇N.
pub fn t3_laplacian(vertices: [Point2; 3]) -> Result<DMatrix<f64>> {
    let sf = Tri3ShapeFunctions::new(vertices)?;
    let g = sf.gradients();
    Ok(DMatrix::from_fn(3, 3, |i, j| {
        sf.area * (g[i][0] * g[j][0] + g[i][1] * g[j][1])
    }))
}

/// ∫ Nᵀ b dA with the three-point degree-2 rule; `n_components` is 2 for
/// elasticity and 1 for a scalar source.
pub fn t3_body_force(
    vertices: [Point2; 3],
    body_force: &BodyForce,
    n_components: usize,
) -> Result<DVector<f64>> {
    let mut f = DVector::zeros(3 * n_components);
    if body_force.is_none() {
        return Ok(f);
    }
    Tri3ShapeFunctions::new(vertices)?;
    let rule = TriangleRule::with_degree(2);
    let v: DVecAcc = rule.integrate(&vertices, |p, l| {
        let b = body_force.eval(p);
        let mut out = vec![0.0; 3 * n_components];
        for a in 0..3 {
            for c in 0..n_components {
                out[a * n_components + c] = l[a] * b[c];
            }
        }
        DVecAcc(out)
    });
    for (i, x) in v.0.into_iter().enumerate() {
        f[i] = x;
    }
    Ok(f)
}

/// ∫ N_Γᵀ f ds along p -> q with linear edge shape functions (two-point
/// Gauss). Layout: [p.x, p.y, q.x, q.y].
pub fn t3_traction_force(p: Point2, q: Point2, traction: impl Fn(Point2) -> [f64; 2]) -> [f64; 4] {
    let first = integrate_segment(p, q, |x, s| {
        let t = traction(x);
        [(1.0 - s) * t[0], (1.0 - s) * t[1]]
    });
    let second = integrate_segment(p, q, |x, s| {
        let t = traction(x);
        [s * t[0], s * t[1]]
    });
    [first[0], first[1], second[0], second[1]]
}

#[derive(Debug, Clone, Default)]
struct DVecAcc(Vec<f64>);

impl std::ops::AddAssign for DVecAcc {
    fn add_assign(&mut self, o: DVecAcc) {
        if self.0.is_empty() {
            self.0 = o.0;
        } else {
            for (a, b) in self.0.iter_mut().zip(o.0) {
                *a += b;
            }
        }
    }
}

impl std::ops::Mul<f64> for DVecAcc {
    type Output = DVecAcc;
    fn mul(mut self, s: f64) -> DVecAcc {
        self.0.iter_mut().for_each(|x| *x *= s);
        self
    }
}
