use crate::analysis::boxcount::linear_fit;
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Values of a map along one ray phi = const, on a uniform rho grid.
#[derive(Debug, Clone)]
pub struct RadialColumn {
    pub rho: Vec<f64>,
    pub values: Vec<Vec3>,
}

#[derive(Debug, Clone)]
pub struct HolderEstimate {
    pub exponent: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub std_error: f64,
    /// (gap, modulus of continuity at that gap)
    pub samples: Vec<(f64, f64)>,
}

pub const HOLDER_WINDOW: (f64, f64) = (0.95, 1.0);
pub const HOLDER_GAPS: usize = 20;

/// Radial Hölder exponent near rho = 1: the slope of log omega(delta) against
/// log delta, where omega(delta) is the largest |f(rho + delta) - f(rho)| over
/// pairs in the window and over all columns.
pub fn holder_estimate(columns: &[RadialColumn]) -> Result<HolderEstimate> {
    let first = columns.first().ok_or_else(|| Error::domain("no columns for the Hölder fit"))?;
    let (w0, w1) = HOLDER_WINDOW;
    let idx: Vec<usize> = (0..first.rho.len())
        .filter(|&j| first.rho[j] >= w0 - 1e-12 && first.rho[j] <= w1 + 1e-12)
        .collect();
    if idx.len() < 16 {
        return Err(Error::domain(format!(
            "only {} samples in the Hölder window; need 16",
            idx.len()
        )));
    }
    let (j0, j1) = (idx[0], *idx.last().unwrap());
    let h = (first.rho[j1] - first.rho[j0]) / (j1 - j0) as f64;
    let max_gap = ((j1 - j0) / 4).max(1);
    let mut gaps: Vec<usize> = (0..HOLDER_GAPS)
        .map(|g| {
            let t = g as f64 / (HOLDER_GAPS - 1) as f64;
            (max_gap as f64).powf(t).round() as usize
        })
        .collect();
    gaps.dedup();
    let mut samples = Vec::with_capacity(gaps.len());
    for &gap in &gaps {
        let mut omega = 0.0_f64;
        for col in columns {
            for j in j0..=(j1 - gap) {
                omega = omega.max((col.values[j + gap] - col.values[j]).norm());
            }
        }
        samples.push((gap as f64 * h, omega));
    }
    let x: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.1.max(1e-300).ln()).collect();
    let (exponent, icept, std_error) = linear_fit(&x, &y);
    let residual = (x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - icept - exponent * a).powi(2))
        .sum::<f64>()
        / x.len() as f64)
        .sqrt();
    Ok(HolderEstimate {
        exponent,
        residual,
        std_error,
        samples,
    })
}
