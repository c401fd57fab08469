use std::collections::HashMap;

use spade::{DelaunayTriangulation, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::{bbox_diagonal, is_simple, orient2d, shoelace, Point2, Polygon};

use super::seeds::{generate_seeds, SeedKind, SeedRule};
use super::{Mesh, Region, DUPLICATE_NODE_TOL};

/// Snaps points closer than `tol` onto a single index.
struct PointMerger {
    tol: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<Point2>,
}

impl PointMerger {
    fn new(tol: f64) -> Self {
        PointMerger {
            tol,
            cells: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn key(&self, p: Point2) -> (i64, i64) {
        ((p.x / self.tol).floor() as i64, (p.y / self.tol).floor() as i64)
    }

    /// Index of an existing point within `tol`, or of the newly added one.
    fn insert(&mut self, p: Point2) -> (usize, bool) {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.cells.get(&(kx + dx, ky + dy)) {
                    if let Some(&i) = ids.iter().find(|&&i| self.points[i].distance(p) <= self.tol) {
                        return (i, false);
                    }
                }
            }
        }
        let id = self.points.len();
        self.points.push(p);
        self.cells.entry((kx, ky)).or_default().push(id);
        (id, true)
    }
}

/// Keeps the part of `poly` with (x - m)·dir <= 0.
fn clip_half_plane(poly: &[Point2], m: Point2, dir: Point2, eps: f64) -> Vec<Point2> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let s = poly[i];
        let e = poly[(i + 1) % n];
        let ds = (s - m).dot(dir);
        let de = (e - m).dot(dir);
        let (s_in, e_in) = (ds <= eps, de <= eps);
        if s_in && e_in {
            out.push(e);
        } else if s_in && !e_in {
            if ds < -eps {
                out.push(s + (e - s) * (ds / (ds - de)));
            }
        } else if !s_in && e_in {
            if de < -eps {
                out.push(s + (e - s) * (ds / (ds - de)));
            }
            out.push(e);
        }
    }
    out
}

fn dedup_cyclic(points: &mut Vec<Point2>, tol: f64) {
    points.dedup_by(|a, b| a.distance(*b) <= tol);
    while points.len() > 1 && points[0].distance(*points.last().unwrap()) <= tol {
        points.pop();
    }
}

/// Bounded Voronoi partition of `region` generated by `seeds`.
///
/// Seeds closer than the node-merge tolerance are treated as one. The
/// region should be convex; for a non-convex region cells that come out
/// non-simple or non-conforming are reported as `MeshingFailure`.
pub fn build_voronoi_mesh(region: &Region, seeds: &[Point2]) -> Result<Mesh> {
    if seeds.is_empty() {
        return Err(Error::EmptySeedSet);
    }
    let diag = region.diagonal();
    let merge_tol = DUPLICATE_NODE_TOL * diag;

    let mut unique = PointMerger::new(merge_tol);
    let mut seed_ids = Vec::new();
    for (i, &s) in seeds.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::InvalidInput(format!("seed {i} has non-finite coordinates")));
        }
        if unique.insert(s).1 {
            seed_ids.push(i);
        }
    }
    let pts = unique.points;
    if pts.len() < 3 {
        return Err(Error::TriangulationFailure(format!(
            "need at least 3 distinct seeds, got {}",
            pts.len()
        )));
    }
    let sdiag = bbox_diagonal(&pts);
    let (a, b) = (pts[0], pts[1..].iter().copied().max_by(|p, q| pts[0].distance(*p).total_cmp(&pts[0].distance(*q))).unwrap());
    if pts.iter().all(|&c| orient2d(a, b, c).abs() <= 1e-12 * sdiag * sdiag) {
        return Err(Error::TriangulationFailure("seeds are collinear".into()));
    }

    let mut dt: DelaunayTriangulation<spade::Point2<f64>> = DelaunayTriangulation::new();
    let mut handle_to_seed = HashMap::new();
    for (k, p) in pts.iter().enumerate() {
        let h = dt
            .insert(spade::Point2::new(p.x, p.y))
            .map_err(|e| Error::TriangulationFailure(format!("{e:?}")))?;
        handle_to_seed.entry(h.index()).or_insert(k);
    }
    let mut neighbours = vec![Vec::new(); pts.len()];
    for edge in dt.undirected_edges() {
        let [v0, v1] = edge.vertices();
        let (i, j) = (handle_to_seed[&v0.fix().index()], handle_to_seed[&v1.fix().index()]);
        neighbours[i].push(j);
        neighbours[j].push(i);
    }

    let eps = 1e-12 * diag;
    let mut cells: Vec<Vec<Point2>> = Vec::with_capacity(pts.len());
    for (i, &s) in pts.iter().enumerate() {
        let mut cell = region.boundary().to_vec();
        neighbours[i].sort_unstable();
        for &j in &neighbours[i] {
            let t = pts[j];
            let dir = t - s;
            let m = (s + t) * 0.5;
            cell = clip_half_plane(&cell, m, dir * (1.0 / dir.norm()), eps);
            if cell.is_empty() {
                break;
            }
        }
        dedup_cyclic(&mut cell, merge_tol);
        cells.push(cell);
    }

    let mut nodes = PointMerger::new(merge_tol);
    let mut elements = Vec::with_capacity(cells.len());
    for (i, cell) in cells.iter().enumerate() {
        let seed = seed_ids[i];
        if cell.len() < 3 || shoelace(cell).abs() <= 1e-14 * diag * diag {
            // seed whose cell collapses (e.g. exactly on a concave corner)
            continue;
        }
        if !is_simple(cell) {
            return Err(Error::MeshingFailure {
                seed,
                reason: "clipped cell is not a simple polygon".into(),
            });
        }
        let mut ids: Vec<usize> = cell.iter().map(|&p| nodes.insert(p).0).collect();
        ids.dedup();
        while ids.len() > 1 && ids[0] == *ids.last().unwrap() {
            ids.pop();
        }
        if ids.len() < 3 {
            continue;
        }
        let poly = Polygon::new(ids).map_err(|e| Error::MeshingFailure {
            seed,
            reason: e.to_string(),
        })?;
        elements.push((seed, poly));
    }
    let node_points = nodes.points;
    for (seed, poly) in &elements {
        let coords = poly.coords(&node_points);
        if !is_simple(&coords) {
            return Err(Error::MeshingFailure {
                seed: *seed,
                reason: "cell is not simple after merging vertices".into(),
            });
        }
    }
    let seeds_of: Vec<usize> = elements.iter().map(|(s, _)| *s).collect();
    let mesh = Mesh::new(node_points, elements.into_iter().map(|(_, p)| p).collect()).map_err(|e| {
        let seed = match &e {
            Error::Element { element, .. } => seeds_of.get(*element).copied().unwrap_or(0),
            _ => 0,
        };
        Error::MeshingFailure {
            seed,
            reason: e.to_string(),
        }
    })?;

    // a hanging vertex leaves interior edges unmatched, which shows up as
    // extra boundary length
    let boundary_len: f64 = mesh
        .boundary_segments()
        .iter()
        .map(|&(a, b)| mesh.nodes()[a].distance(mesh.nodes()[b]))
        .sum();
    let area_err = (mesh.total_area() - region.area()).abs();
    if (boundary_len - region.perimeter()).abs() > 1e-8 * region.perimeter() || area_err > 1e-8 * region.area() {
        return Err(Error::MeshingFailure {
            seed: 0,
            reason: format!(
                "mesh is not conforming: boundary length {boundary_len} vs perimeter {}",
                region.perimeter()
            ),
        });
    }
    Ok(mesh)
}

/// Seeds from `rule` followed by the bounded Voronoi mesh. The RNG seed is
/// recorded on the mesh when the rule is random.
pub fn generate_mesh(region: &Region, rule: &SeedRule, nx: usize, ny: usize) -> Result<Mesh> {
    let seeds = generate_seeds(region, rule, nx, ny)?;
    let mut mesh = build_voronoi_mesh(region, &seeds)?;
    if rule.noise.is_some() || matches!(rule.kind, SeedKind::RandomDouble { .. }) {
        mesh.seed = Some(rule.rng_seed);
    }
    Ok(mesh)
}

/// Structured mesh of an axis-aligned rectangle: nx × ny cells, each cut
/// into two triangles along its rising diagonal.
pub fn build_triangular_mesh(region: &Region, nx: usize, ny: usize) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput("nx and ny must be at least 1".into()));
    }
    let (lo, hi) = region
        .as_rectangle()
        .ok_or_else(|| Error::Unsupported("triangular meshes need an axis-aligned rectangle".into()))?;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push(Point2::new(
                lo.x + (hi.x - lo.x) * i as f64 / nx as f64,
                lo.y + (hi.y - lo.y) * j as f64 / ny as f64,
            ));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            elements.push(Polygon::new(vec![a, b, c])?);
            elements.push(Polygon::new(vec![a, c, d])?);
        }
    }
    Mesh::new(nodes, elements)
}
