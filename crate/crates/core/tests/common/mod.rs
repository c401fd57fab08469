#![allow(dead_code)]

use nalgebra::DMatrix;
use polyvem::geometry::{ElementGeometry, Point2};
use polyvem::model::{Material, PlaneState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Convex polygon with `n` vertices on a randomly placed, scaled and rotated
/// ellipse; angular gaps are kept away from zero so no edge is tiny.
pub fn random_convex_polygon(rng: &mut impl Rng, n: usize) -> Vec<Point2> {
    loop {
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let min_gap = (0..n)
            .map(|i| {
                let next = if i + 1 < n { angles[i + 1] } else { angles[0] + std::f64::consts::TAU };
                next - angles[i]
            })
            .fold(f64::INFINITY, f64::min);
        if min_gap < 0.25 / n as f64 {
            continue;
        }
        let (a, b) = (rng.random_range(0.5..3.0), rng.random_range(0.5..3.0));
        let rot: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (cx, cy) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        return angles
            .iter()
            .map(|t| {
                let (x, y) = (a * t.cos(), b * t.sin());
                Point2::new(cx + x * rot.cos() - y * rot.sin(), cy + x * rot.sin() + y * rot.cos())
            })
            .collect();
    }
}

pub fn random_element(rng: &mut impl Rng, min_n: usize, max_n: usize) -> ElementGeometry {
    let n = rng.random_range(min_n..=max_n);
    ElementGeometry::from_points(random_convex_polygon(rng, n)).unwrap()
}

pub fn random_material(rng: &mut impl Rng) -> Material {
    let state = if rng.random::<bool>() {
        PlaneState::PlaneStrain
    } else {
        PlaneState::PlaneStress
    };
    Material::new(rng.random_range(0.1..1e3), rng.random_range(0.0..0.45), state).unwrap()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Nodal values of u = a + B x sampled at the polygon vertices, interleaved.
pub fn linear_samples(points: &[Point2], a: [f64; 2], b: [[f64; 2]; 2]) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_iterator(
        2 * points.len(),
        points.iter().flat_map(|p| {
            [
                a[0] + b[0][0] * p.x + b[0][1] * p.y,
                a[1] + b[1][0] * p.x + b[1][1] * p.y,
            ]
        }),
    )
}
