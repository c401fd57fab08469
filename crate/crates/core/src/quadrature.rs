//! Symmetric Gauss rules on triangles and Gauss-Legendre rules on segments.

use crate::geometry::{shoelace, Point2};

/// A rule on the reference triangle given in barycentric coordinates;
/// weights sum to one (they multiply the physical triangle area).
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<([f64; 3], f64)>,
}

fn orbit3(a: f64, w: f64, out: &mut Vec<([f64; 3], f64)>) {
    let b = 1.0 - 2.0 * a;
    out.push(([a, a, b], w));
    out.push(([a, b, a], w));
    out.push(([b, a, a], w));
}

fn orbit6(a: f64, b: f64, w: f64, out: &mut Vec<([f64; 3], f64)>) {
    let c = 1.0 - a - b;
    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        out.push((p, w));
    }
}

impl TriangleRule {
    /// Exact for polynomials up to the requested total degree. Supported
    /// degrees: 1, 2, 4, 6 (others round up).
    pub fn with_degree(degree: usize) -> TriangleRule {
        let mut points = Vec::new();
        match degree {
            0 | 1 => points.push(([1.0 / 3.0; 3], 1.0)),
            2 => orbit3(1.0 / 6.0, 1.0 / 3.0, &mut points),
            3 | 4 => {
                orbit3(0.445948490915965, 0.223381589678011, &mut points);
                orbit3(0.091576213509771, 0.109951743655322, &mut points);
            }
            _ => {
                orbit3(0.249286745170910, 0.116786275726379, &mut points);
                orbit3(0.063089014491502, 0.050844906370207, &mut points);
                orbit6(0.053145049844817, 0.310352451033784, 0.082851075618374, &mut points);
            }
        }
        TriangleRule { points }
    }

    /// Integrates `f` over the triangle (a, b, c), orientation-independent.
    pub fn integrate<T, F>(&self, tri: &[Point2; 3], mut f: F) -> T
    where
        T: Default + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
        F: FnMut(Point2, [f64; 3]) -> T,
    {
        let area = shoelace(tri).abs();
        let mut acc = T::default();
        for (l, w) in &self.points {
            let p = Point2::new(
                l[0] * tri[0].x + l[1] * tri[1].x + l[2] * tri[2].x,
                l[0] * tri[0].y + l[1] * tri[1].y + l[2] * tri[2].y,
            );
            acc += f(p, *l) * (w * area);
        }
        acc
    }
}

/// Two-point Gauss-Legendre rule on [0, 1]: (parameter, weight).
pub fn gauss2_unit() -> [(f64, f64); 2] {
    let d = 0.5 / 3f64.sqrt();
    [(0.5 - d, 0.5), (0.5 + d, 0.5)]
}

/// Integrates `f` along the segment p -> q with two-point Gauss; `f`
/// receives the point and the parameter s in [0, 1].
pub fn integrate_segment<F>(p: Point2, q: Point2, mut f: F) -> [f64; 2]
where
    F: FnMut(Point2, f64) -> [f64; 2],
{
    let len = p.distance(q);
    let mut acc = [0.0; 2];
    for (s, w) in gauss2_unit() {
        let x = p + (q - p) * s;
        let v = f(x, s);
        acc[0] += v[0] * w * len;
        acc[1] += v[1] * w * len;
    }
    acc
}
