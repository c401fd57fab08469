use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{bounding_box, Point2};

use super::Region;

/// How `nx`, `ny` are read when laying out a seed grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridCounting {
    /// `nx` divisions along x: nx + 1 points per row.
    #[default]
    Divisions,
    /// `nx` points per row (nx >= 2 for a grid spanning the box).
    Points,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeedKind {
    /// Uniform grid over the bounding box.
    Constant,
    /// Independent uniform samples. `min`, `max` bound the sample range as
    /// fractions of the bounding box along each axis (0 and 1 span it).
    RandomDouble { min: f64, max: f64 },
    /// Uniform grid with every other row shifted by half a column spacing.
    ConstantAlternating,
    /// Uniform grid with y displaced by half a row spacing times
    /// sin(2π x / width).
    Sine,
}

/// Random displacement added to every seed: per axis, a magnitude drawn from
/// [min, max] with a random sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedRule {
    pub kind: SeedKind,
    pub noise: Option<Noise>,
    pub rng_seed: u64,
    pub counting: GridCounting,
}

impl SeedRule {
    pub fn new(kind: SeedKind) -> Self {
        SeedRule {
            kind,
            noise: None,
            rng_seed: 0,
            counting: GridCounting::Divisions,
        }
    }

    pub fn constant() -> Self {
        Self::new(SeedKind::Constant)
    }

    pub fn random(rng_seed: u64) -> Self {
        SeedRule {
            rng_seed,
            ..Self::new(SeedKind::RandomDouble { min: 0.0, max: 1.0 })
        }
    }

    pub fn with_noise(mut self, min: f64, max: f64, rng_seed: u64) -> Self {
        self.noise = Some(Noise { min, max });
        self.rng_seed = rng_seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if let SeedKind::RandomDouble { min, max } = self.kind {
            if !(min <= max) {
                return Err(Error::InvalidInput(format!("random range min {min} > max {max}")));
            }
        }
        if let Some(n) = self.noise {
            if !(n.min >= 0.0 && n.max >= n.min) {
                return Err(Error::InvalidInput(format!(
                    "noise magnitudes must satisfy 0 <= min <= max, got [{}, {}]",
                    n.min, n.max
                )));
            }
        }
        Ok(())
    }
}

/// Lays out seed points over the region's bounding box according to `rule`
/// and keeps the ones inside the region (boundary included).
pub fn generate_seeds(region: &Region, rule: &SeedRule, nx: usize, ny: usize) -> Result<Vec<Point2>> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput("nx and ny must be at least 1".into()));
    }
    rule.validate()?;
    let (lo, hi) = bounding_box(region.boundary());
    let (w, h) = (hi.x - lo.x, hi.y - lo.y);
    let (cols, rows) = match rule.counting {
        GridCounting::Divisions => (nx + 1, ny + 1),
        GridCounting::Points => (nx, ny),
    };
    let spacing = |count: usize, len: f64| if count > 1 { len / (count - 1) as f64 } else { 0.0 };
    let (dx, dy) = (spacing(cols, w), spacing(rows, h));
    let mut rng = ChaCha8Rng::seed_from_u64(rule.rng_seed);

    let mut pts = Vec::with_capacity(cols * rows);
    for j in 0..rows {
        for i in 0..cols {
            let gx = lo.x + i as f64 * dx;
            let gy = lo.y + j as f64 * dy;
            let p = match rule.kind {
                SeedKind::Constant => Point2::new(gx, gy),
                SeedKind::RandomDouble { min, max } => {
                    let u: f64 = rng.random_range(0.0..=1.0);
                    let v: f64 = rng.random_range(0.0..=1.0);
                    Point2::new(lo.x + w * (min + (max - min) * u), lo.y + h * (min + (max - min) * v))
                }
                SeedKind::ConstantAlternating => {
                    let shift = if j % 2 == 1 { 0.5 * dx } else { 0.0 };
                    Point2::new(gx + shift, gy)
                }
                SeedKind::Sine => {
                    let phase = if w > 0.0 { 2.0 * std::f64::consts::PI * (gx - lo.x) / w } else { 0.0 };
                    Point2::new(gx, gy + 0.5 * dy * phase.sin())
                }
            };
            pts.push(p);
        }
    }
    if let Some(noise) = rule.noise {
        for p in pts.iter_mut() {
            let mut jitter = || {
                let mag: f64 = if noise.max > noise.min {
                    rng.random_range(noise.min..=noise.max)
                } else {
                    noise.min
                };
                if rng.random::<bool>() {
                    mag
                } else {
                    -mag
                }
            };
            p.x += jitter();
            p.y += jitter();
        }
    }
    pts.retain(|p| region.contains(*p));
    if pts.is_empty() {
        return Err(Error::EmptySeedSet);
    }
    Ok(pts)
}
