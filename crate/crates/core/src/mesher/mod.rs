//! Domain description, seed generation and polygonal mesh construction.

mod mesh;
mod seeds;
mod voronoi;

pub use mesh::{Mesh, DUPLICATE_NODE_TOL};
pub use seeds::{generate_seeds, GridCounting, Noise, SeedKind, SeedRule};
pub use voronoi::{build_triangular_mesh, build_voronoi_mesh, generate_mesh};

use crate::error::{Error, Result};
use crate::geometry::{bbox_diagonal, bounding_box, is_convex_ccw, is_simple, shoelace, Point2};

/// A simple polygonal domain stored counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    boundary: Vec<Point2>,
}

impl Region {
    /// Accepts either orientation; clockwise input is reversed.
    pub fn new(mut boundary: Vec<Point2>) -> Result<Self> {
        if boundary.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "region needs at least 3 vertices, got {}",
                boundary.len()
            )));
        }
        if boundary.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("region has non-finite coordinates".into()));
        }
        let diag = bbox_diagonal(&boundary);
        let area = shoelace(&boundary);
        if !(area.abs() > 1e-14 * diag * diag) {
            return Err(Error::InvalidInput("region has zero area".into()));
        }
        if !is_simple(&boundary) {
            return Err(Error::InvalidInput("region boundary is self-intersecting".into()));
        }
        if area < 0.0 {
            boundary.reverse();
        }
        Ok(Region { boundary })
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Region::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    pub fn boundary(&self) -> &[Point2] {
        &self.boundary
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.boundary)
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.boundary.len();
        (0..n).map(|i| self.boundary[i].distance(self.boundary[(i + 1) % n])).sum()
    }

    pub fn diagonal(&self) -> f64 {
        bbox_diagonal(&self.boundary)
    }

    pub fn is_convex(&self) -> bool {
        is_convex_ccw(&self.boundary, 1e-12)
    }

    /// Axis-aligned bounds when the region is an axis-aligned rectangle.
    pub fn as_rectangle(&self) -> Option<(Point2, Point2)> {
        if self.boundary.len() != 4 {
            return None;
        }
        let (lo, hi) = bounding_box(&self.boundary);
        let tol = 1e-12 * self.diagonal();
        let on_corner = |p: &Point2| {
            ((p.x - lo.x).abs() <= tol || (p.x - hi.x).abs() <= tol)
                && ((p.y - lo.y).abs() <= tol || (p.y - hi.y).abs() <= tol)
        };
        // four distinct box corners in a simple loop form the rectangle
        if self.boundary.iter().all(on_corner) {
            Some((lo, hi))
        } else {
            None
        }
    }

    /// Point-in-polygon test; points within 1e-10 of the diagonal from the
    /// boundary count as inside.
    pub fn contains(&self, p: Point2) -> bool {
        let tol = 1e-10 * self.diagonal();
        let n = self.boundary.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.boundary[i];
            let b = self.boundary[(i + 1) % n];
            if distance_to_segment(p, a, b) <= tol {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

pub(crate) fn distance_to_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}
