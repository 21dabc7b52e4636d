use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Box-counting estimate over three dyadic scales.
#[derive(Debug, Clone)]
pub struct BoxCountEstimate {
    pub dimension: f64,
    pub std_error: f64,
    /// (box size, occupied boxes), coarse to fine.
    pub scales: Vec<(f64, usize)>,
    /// True when the coarsest boxes hold at least 10 points and the finest at least 2 on average.
    pub well_sampled: bool,
}

fn occupied(points: &[Vec3], origin: &Vec3, eps: f64) -> usize {
    let mut set = HashSet::with_capacity(points.len() / 2);
    for p in points {
        let q = (p - origin) / eps;
        set.insert((q.x.floor() as i64, q.y.floor() as i64, q.z.floor() as i64));
    }
    set.len()
}

/// Least-squares slope of y against x with its standard error.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - icept - slope * a).powi(2)).sum();
    let dof = (x.len() as f64 - 2.0).max(1.0);
    let se = (ssr / dof / sxx).sqrt();
    (slope, icept, se)
}

/// Box-counting dimension of a point cloud.
pub fn box_counting_dimension(points: &[Vec3]) -> Result<BoxCountEstimate> {
    if points.len() < 8 {
        return Err(Error::domain("box counting needs at least 8 points"));
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let extent = (hi - lo).max();
    if !(extent > 0.0) {
        return Err(Error::domain("box counting of a single point"));
    }
    let n = points.len() as f64;
    let avg = |eps: f64| n / occupied(points, &lo, eps) as f64;
    let mut eps = extent;
    let mut choice = None;
    for _ in 0..40 {
        if avg(eps) < 10.0 {
            break;
        }
        if avg(eps / 4.0) >= 2.0 {
            choice = Some(eps);
        }
        eps *= 0.5;
    }
    let (coarse, well_sampled) = match choice {
        Some(e) => (e, true),
        None => (extent / 4.0, false),
    };
    let scales: Vec<(f64, usize)> = (0..3)
        .map(|j| {
            let e = coarse / f64::powi(2.0, j);
            (e, occupied(points, &lo, e))
        })
        .collect();
    let x: Vec<f64> = scales.iter().map(|s| (1.0 / s.0).ln()).collect();
    let y: Vec<f64> = scales.iter().map(|s| (s.1 as f64).ln()).collect();
    let (dimension, _, std_error) = linear_fit(&x, &y);
    Ok(BoxCountEstimate {
        dimension,
        std_error,
        scales,
        well_sampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn round_circle_has_dimension_one() {
        let n = 100_000;
        let pts: Vec<Vec3> = (0..n)
            .map(|j| {
                let t = TAU * j as f64 / n as f64;
                Vec3::new(t.cos(), t.sin(), 0.3)
            })
            .collect();
        let est = box_counting_dimension(&pts).unwrap();
        assert!(est.well_sampled);
        assert!((est.dimension - 1.0).abs() <= 0.1, "{est:?}");
    }

    #[test]
    fn filled_patch_is_near_two() {
        let m = 400;
        let pts: Vec<Vec3> = (0..m * m)
            .map(|j| Vec3::new((j % m) as f64 / m as f64, (j / m) as f64 / m as f64, 0.0))
            .collect();
        let est = box_counting_dimension(&pts).unwrap();
        assert!((est.dimension - 2.0).abs() <= 0.15, "{est:?}");
    }

    #[test]
    fn fit_recovers_a_line() {
        let (s, i, se) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((s - 2.0).abs() < 1e-15 && (i - 1.0).abs() < 1e-15 && se < 1e-12);
    }
}
