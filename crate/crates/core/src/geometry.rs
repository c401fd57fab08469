//! Planar primitives and the per-polygon quantities consumed by the element
//! routines: signed area, node average, edge lengths and outward normals.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Relative tolerance (against the squared bounding-box diagonal) below which
/// a polygon is considered to have no area.
pub const DEGENERACY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Twice the signed area of the triangle (a, b, c); positive when CCW.
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Axis-aligned bounding box as (min, max).
pub fn bounding_box(points: &[Point2]) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

pub fn bbox_diagonal(points: &[Point2]) -> f64 {
    let (lo, hi) = bounding_box(points);
    hi.distance(lo)
}

/// A polygonal element: an ordered, counterclockwise list of node indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polygon {
    nodes: Vec<usize>,
}

impl Polygon {
    /// Requires at least three distinct indices. Orientation is not checked
    /// here since it depends on the node table.
    pub fn new(nodes: Vec<usize>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::DegenerateElement(format!(
                "polygon needs at least 3 vertices, got {}",
                nodes.len()
            )));
        }
        let mut sorted = nodes.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DegenerateElement(format!(
                "repeated vertex index in {nodes:?}"
            )));
        }
        Ok(Polygon { nodes })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn reversed(&self) -> Polygon {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Polygon { nodes }
    }

    /// Edges as (start, end) node index pairs; edge k joins node k to node k+1.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.nodes.len();
        (0..n).map(move |k| (self.nodes[k], self.nodes[(k + 1) % n]))
    }

    pub fn coords(&self, nodes: &[Point2]) -> Vec<Point2> {
        self.nodes.iter().map(|&i| nodes[i]).collect()
    }
}

/// Shoelace area of a closed vertex loop, without degeneracy checks.
pub fn shoelace(points: &[Point2]) -> f64 {
    let n = points.len();
    let mut twice = 0.0;
    for k in 0..n {
        twice += points[k].cross(points[(k + 1) % n]);
    }
    0.5 * twice
}

/// Signed area of the polygon: positive for CCW, negative for CW.
pub fn signed_area(polygon: &Polygon, nodes: &[Point2]) -> Result<f64> {
    signed_area_of(&polygon.coords(nodes))
}

pub fn signed_area_of(points: &[Point2]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::DegenerateElement(format!(
            "polygon needs at least 3 vertices, got {}",
            points.len()
        )));
    }
    let area = shoelace(points);
    let scale = bbox_diagonal(points);
    if !area.is_finite() || area.abs() < DEGENERACY_TOL * scale * scale || scale == 0.0 {
        return Err(Error::DegenerateElement(format!(
            "polygon area {area:e} is zero at scale {scale:e}"
        )));
    }
    Ok(area)
}

/// Arithmetic mean of the polygon's vertices (not the area centroid).
pub fn node_average(polygon: &Polygon, nodes: &[Point2]) -> Point2 {
    mean_point(&polygon.coords(nodes))
}

pub fn mean_point(points: &[Point2]) -> Point2 {
    let n = points.len() as f64;
    let s = points.iter().fold(Point2::default(), |acc, &p| acc + p);
    s * (1.0 / n)
}

/// Area centroid of a simple polygon with nonzero area.
pub fn area_centroid(points: &[Point2]) -> Point2 {
    let n = points.len();
    let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
    // shift for conditioning
    let o = points[0];
    for k in 0..n {
        let p = points[k] - o;
        let q = points[(k + 1) % n] - o;
        let c = p.cross(q);
        a2 += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    o + Point2::new(cx / (3.0 * a2), cy / (3.0 * a2))
}

/// Unit normal of the directed edge p -> q, rotated clockwise from the edge
/// direction; outward for a CCW polygon.
pub fn edge_normal(p: Point2, q: Point2) -> Result<[f64; 2]> {
    let d = q - p;
    let len = d.norm();
    if !(len > 0.0) {
        return Err(Error::DegenerateElement(format!(
            "zero-length edge at ({}, {})",
            p.x, p.y
        )));
    }
    Ok([d.y / len, -d.x / len])
}

pub fn edge_normals(polygon: &Polygon, nodes: &[Point2]) -> Result<Vec<[f64; 2]>> {
    polygon
        .edges()
        .map(|(a, b)| edge_normal(nodes[a], nodes[b]))
        .collect()
}

/// Splits a polygon into triangles fanned from its area centroid. A triangle
/// is returned unchanged.
pub fn fan_triangulate(polygon: &Polygon, nodes: &[Point2]) -> Result<Vec<[Point2; 3]>> {
    fan_triangulate_points(&polygon.coords(nodes))
}

pub fn fan_triangulate_points(points: &[Point2]) -> Result<Vec<[Point2; 3]>> {
    if points.len() == 3 {
        return Ok(vec![[points[0], points[1], points[2]]]);
    }
    let area = signed_area_of(points).map_err(|e| Error::TriangulationFailure(e.to_string()))?;
    let c = area_centroid(points);
    let n = points.len();
    let mut tris = Vec::with_capacity(n);
    for k in 0..n {
        let p = points[k];
        let q = points[(k + 1) % n];
        let a = 0.5 * orient2d(c, p, q) * area.signum();
        if !(a > 0.0) {
            return Err(Error::TriangulationFailure(format!(
                "polygon is not star-shaped about its centroid (edge {k})"
            )));
        }
        tris.push([c, p, q]);
    }
    Ok(tris)
}

/// Largest distance between any two vertices.
pub fn diameter(points: &[Point2]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max(points[i].distance(points[j]));
        }
    }
    d
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2, tol: f64) -> bool {
    let d1 = orient2d(c, d, a);
    let d2 = orient2d(c, d, b);
    let d3 = orient2d(a, b, c);
    let d4 = orient2d(a, b, d);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
    {
        return true;
    }
    let on_segment = |p: Point2, q: Point2, r: Point2, o: f64| {
        o.abs() <= tol
            && r.x >= p.x.min(q.x) - 1e-15
            && r.x <= p.x.max(q.x) + 1e-15
            && r.y >= p.y.min(q.y) - 1e-15
            && r.y <= p.y.max(q.y) + 1e-15
    };
    on_segment(c, d, a, d1) || on_segment(c, d, b, d2) || on_segment(a, b, c, d3) || on_segment(a, b, d, d4)
}

/// True when no two non-adjacent edges of the closed loop touch and no
/// vertex is repeated.
pub fn is_simple(points: &[Point2]) -> bool {
    let n = points.len();
    if n < 3 {
        return false;
    }
    let scale = bbox_diagonal(points);
    let tol = 1e-13 * scale * scale;
    for i in 0..n {
        for j in i + 1..n {
            if points[i].distance(points[j]) <= 1e-13 * scale {
                return false;
            }
        }
    }
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        for j in i + 1..n {
            // skip adjacent edges
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (points[j], points[(j + 1) % n]);
            if segments_intersect(a, b, c, d, tol) {
                return false;
            }
        }
    }
    true
}

/// True when every turn is a left turn (or straight) within `tol` relative to
/// the squared bounding-box diagonal.
pub fn is_convex_ccw(points: &[Point2], tol: f64) -> bool {
    let n = points.len();
    let scale = bbox_diagonal(points);
    (0..n).all(|k| {
        let a = points[k];
        let b = points[(k + 1) % n];
        let c = points[(k + 2) % n];
        orient2d(a, b, c) >= -tol * scale * scale
    })
}

/// Per-polygon quantities used by the element routines.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub points: Vec<Point2>,
    pub area: f64,
    pub node_average: Point2,
    /// Edge k joins node k to node (k + 1) mod N.
    pub edge_lengths: Vec<f64>,
    pub edge_normals: Vec<[f64; 2]>,
}

impl ElementGeometry {
    /// Builds the geometry of a CCW polygon given by its vertex coordinates.
    pub fn from_points(points: Vec<Point2>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::DegenerateElement(format!("non-finite vertex {p:?}")));
        }
        let area = signed_area_of(&points)?;
        if area < 0.0 {
            return Err(Error::DegenerateElement(
                "element is clockwise; expected counterclockwise".into(),
            ));
        }
        let n = points.len();
        let mut edge_lengths = Vec::with_capacity(n);
        let mut edge_normals = Vec::with_capacity(n);
        for k in 0..n {
            let (p, q) = (points[k], points[(k + 1) % n]);
            edge_normals.push(edge_normal(p, q)?);
            edge_lengths.push(p.distance(q));
        }
        let node_average = mean_point(&points);
        Ok(ElementGeometry {
            points,
            area,
            node_average,
            edge_lengths,
            edge_normals,
        })
    }

    pub fn new(polygon: &Polygon, nodes: &[Point2]) -> Result<Self> {
        Self::from_points(polygon.coords(nodes))
    }

    pub fn num_nodes(&self) -> usize {
        self.points.len()
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.points)
    }
}
