use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::geometry::{bbox_diagonal, is_simple, shoelace, Point2, Polygon};

/// Relative tolerance (against the bounding-box diagonal) under which two
/// nodes are treated as the same point.
pub const DUPLICATE_NODE_TOL: f64 = 1e-10;

/// A conforming polygonal partition of a planar domain.
///
/// Elements are stored counterclockwise. `boundary_segments` lists every
/// edge that belongs to exactly one element, oriented as in that element,
/// so the segments chain into closed loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point2>,
    elements: Vec<Polygon>,
    boundary_segments: Vec<(usize, usize)>,
    /// RNG seed used to generate the mesh, if any.
    pub seed: Option<u64>,
}

impl Mesh {
    /// Validates connectivity and normalizes every element to CCW order.
    pub fn new(nodes: Vec<Point2>, elements: Vec<Polygon>) -> Result<Self> {
        if let Some(i) = nodes.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("node {i} has non-finite coordinates")));
        }
        check_duplicate_nodes(&nodes)?;
        let mut oriented = Vec::with_capacity(elements.len());
        for (e, poly) in elements.into_iter().enumerate() {
            if let Some(&bad) = poly.nodes().iter().find(|&&i| i >= nodes.len()) {
                return Err(Error::InvalidInput(format!(
                    "element {e} references node {bad} but only {} nodes exist",
                    nodes.len()
                )));
            }
            let pts = poly.coords(&nodes);
            let area = crate::geometry::signed_area_of(&pts).map_err(|err| err.in_element(e))?;
            if !is_simple(&pts) {
                return Err(Error::DegenerateElement(format!("element {e} is not simple")));
            }
            oriented.push(if area < 0.0 { poly.reversed() } else { poly });
        }
        let boundary_segments = boundary_edges(&oriented)?;
        Ok(Mesh {
            nodes,
            elements: oriented,
            boundary_segments,
            seed: None,
        })
    }

    pub fn nodes(&self) -> &[Point2] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Polygon] {
        &self.elements
    }

    pub fn boundary_segments(&self) -> &[(usize, usize)] {
        &self.boundary_segments
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_points(&self, e: usize) -> Vec<Point2> {
        self.elements[e].coords(&self.nodes)
    }

    /// Sorted indices of nodes that touch a boundary segment.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .boundary_segments
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .collect();
        set.into_iter().collect()
    }

    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal(&self.nodes)
    }

    pub fn total_area(&self) -> f64 {
        self.elements
            .iter()
            .map(|p| shoelace(&p.coords(&self.nodes)))
            .sum()
    }

    /// Largest element diameter.
    pub fn h_max(&self) -> f64 {
        (0..self.elements.len())
            .map(|e| crate::geometry::diameter(&self.element_points(e)))
            .fold(0.0, f64::max)
    }
}

fn check_duplicate_nodes(nodes: &[Point2]) -> Result<()> {
    if nodes.len() < 2 {
        return Ok(());
    }
    let tol = DUPLICATE_NODE_TOL * bbox_diagonal(nodes);
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| nodes[a].x.total_cmp(&nodes[b].x));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if nodes[j].x - nodes[i].x > tol {
                break;
            }
            if nodes[i].distance(nodes[j]) <= tol {
                return Err(Error::InvalidInput(format!(
                    "nodes {} and {} coincide",
                    i.min(j),
                    i.max(j)
                )));
            }
        }
    }
    Ok(())
}

fn boundary_edges(elements: &[Polygon]) -> Result<Vec<(usize, usize)>> {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, poly) in elements.iter().enumerate() {
        for edge in poly.edges() {
            if let Some(other) = directed.insert(edge, e) {
                return Err(Error::InvalidInput(format!(
                    "edge {edge:?} has the same orientation in elements {other} and {e}"
                )));
            }
        }
    }
    let mut out = Vec::new();
    for poly in elements {
        for (a, b) in poly.edges() {
            if !directed.contains_key(&(b, a)) {
                out.push((a, b));
            }
        }
    }
    Ok(out)
}
