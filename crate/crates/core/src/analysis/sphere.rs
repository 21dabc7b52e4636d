use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// A finite sample of the unit sphere.
#[derive(Debug, Clone)]
pub struct SpherePointSet {
    points: Vec<Vec3>,
    pub source: String,
}

impl SpherePointSet {
    /// Fails when a point is off the sphere by more than 1e-9.
    pub fn new(points: Vec<Vec3>, source: impl Into<String>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| (p.norm() - 1.0).abs() > 1e-9) {
            return Err(Error::domain(format!("point {p:?} is not on the unit sphere")));
        }
        Ok(SpherePointSet {
            points,
            source: source.into(),
        })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Great-circle distance between unit vectors.
pub fn great_circle(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Uniform bucket grid over [-1, 1]^3 for exact nearest-neighbour queries.
struct BucketGrid<'a> {
    points: &'a [Vec3],
    cell: f64,
    dim: i64,
    buckets: HashMap<(i64, i64, i64), Vec<u32>>,
}

impl<'a> BucketGrid<'a> {
    fn new(points: &'a [Vec3]) -> Self {
        // about four points per occupied cell on a surface of area 4 pi
        let cell = (16.0 * std::f64::consts::PI / points.len().max(1) as f64).sqrt().clamp(1e-4, 2.0);
        let dim = (2.0 / cell).ceil() as i64 + 1;
        let mut buckets: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        for (idx, p) in points.iter().enumerate() {
            buckets.entry(Self::key_of(cell, p)).or_default().push(idx as u32);
        }
        BucketGrid {
            points,
            cell,
            dim,
            buckets,
        }
    }

    fn key_of(cell: f64, p: &Vec3) -> (i64, i64, i64) {
        let f = |x: f64| ((x + 1.0) / cell).floor() as i64;
        (f(p.x), f(p.y), f(p.z))
    }

    /// Nearest point to q by chordal distance, returned as that distance.
    fn nearest(&self, q: &Vec3) -> f64 {
        let (cx, cy, cz) = Self::key_of(self.cell, q);
        let mut best = f64::INFINITY;
        let mut r: i64 = 0;
        loop {
            for dx in -r..=r {
                for dy in -r..=r {
                    for dz in -r..=r {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                            continue;
                        }
                        if let Some(b) = self.buckets.get(&(cx + dx, cy + dy, cz + dz)) {
                            for &j in b {
                                let d = (self.points[j as usize] - q).norm();
                                if d < best {
                                    best = d;
                                }
                            }
                        }
                    }
                }
            }
            // every point within r * cell of q lies in the rings searched so far
            if best <= r as f64 * self.cell || r > self.dim {
                return best;
            }
            r += 1;
        }
    }
}

fn directed(from: &[Vec3], to: &BucketGrid) -> f64 {
    from.iter()
        .map(|p| {
            let chord = to.nearest(p).min(2.0);
            2.0 * (0.5 * chord).asin()
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance under the great-circle metric, exact for the samples.
pub fn hausdorff_sphere(a: &SpherePointSet, b: &SpherePointSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("Hausdorff distance of an empty point set"));
    }
    let ga = BucketGrid::new(a.points());
    let gb = BucketGrid::new(b.points());
    Ok(directed(a.points(), &gb).max(directed(b.points(), &ga)))
}
