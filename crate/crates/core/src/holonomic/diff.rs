use crate::error::{Error, Result};
use crate::geom::{LinMap23, Vec3};
use crate::holonomic::grid::{FieldGrid, GridSpec, MIN_SAMPLES_PER_PERIOD};
use crate::metrics::{SymForm2, WAVE_A};

/// Finite-difference scheme used for a [`DiffField`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdMethod {
    /// Fourth order central in the interior, second order at the rho ends and at
    /// the edges of a phi window; periodic sectors are fourth order throughout in phi.
    Central4,
}

/// Discrete differential of a [`FieldGrid`], stored on the same sector.
#[derive(Debug, Clone)]
pub struct DiffField {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<LinMap23>,
    pub method: FdMethod,
}

impl DiffField {
    pub fn at(&self, row: usize, col: usize) -> &LinMap23 {
        &self.data[row * self.cols + col]
    }

    /// Differential at any integer column of `grid`'s layout; columns outside a
    /// stored sector are rotated like the nodes.
    pub fn at_col(&self, grid: &FieldGrid, row: usize, col: i64) -> LinMap23 {
        let (c, q) = grid.resolve_col(col);
        let d = self.data[row * self.cols + c];
        if q == 0 {
            d
        } else {
            grid.sector_rotation(q) * d
        }
    }
}

/// Samples per shortest period along (rho, phi) on `spec` for the given
/// corrugation frequencies.
pub fn samples_per_period_for(spec: &GridSpec, freq_rho: u64, freq_phi: u64) -> (f64, f64) {
    let rho = if freq_rho == 0 {
        f64::INFINITY
    } else {
        1.0 / (freq_rho as f64 * spec.h_rho())
    };
    let phi = if freq_phi == 0 {
        f64::INFINITY
    } else {
        spec.phi_count as f64 / (std::f64::consts::TAU * WAVE_A * freq_phi as f64)
    };
    (rho, phi)
}

/// Samples per shortest period along (rho, phi) for the frequencies present in `f`.
pub fn samples_per_period(f: &FieldGrid) -> (f64, f64) {
    samples_per_period_for(&f.spec, f.freq_rho, f.freq_phi)
}

/// Fails with a resolution error naming `layer` unless `spec` resolves the
/// frequencies with [`MIN_SAMPLES_PER_PERIOD`] samples.
pub fn check_resolution_for(spec: &GridSpec, layer: (usize, usize), freq_rho: u64, freq_phi: u64) -> Result<()> {
    let (sr, sp) = samples_per_period_for(spec, freq_rho, freq_phi);
    let need = MIN_SAMPLES_PER_PERIOD * (1.0 - 1e-9);
    if sr < need || sp < need {
        let (k, i) = layer;
        return Err(Error::Resolution {
            k,
            i,
            detail: format!(
                "{sr:.2} samples per period along rho and {sp:.2} along phi; need {MIN_SAMPLES_PER_PERIOD}"
            ),
        });
    }
    Ok(())
}

pub fn check_resolution(f: &FieldGrid) -> Result<()> {
    check_resolution_for(&f.spec, f.layer, f.freq_rho, f.freq_phi)
}

/// d/drho and d/dphi by finite differences.
pub fn differentiate(f: &FieldGrid) -> Result<DiffField> {
    check_resolution(f)?;
    Ok(finite_differences(f))
}

/// The finite-difference stencils of [`differentiate`] without the resolution check.
pub(crate) fn finite_differences(f: &FieldGrid) -> DiffField {
    let rows = f.rows();
    let m = f.cols();
    let hr = f.spec.h_rho();
    let hp = f.spec.h_phi();
    let periodic = f.spec.is_periodic();
    let mut data = Vec::with_capacity(rows * m);
    let row = |r: usize, c: usize| f.nodes[r * m + c];
    for r in 0..rows {
        for c in 0..m {
            let d_rho: Vec3 = if r >= 2 && r + 2 < rows {
                (row(r - 2, c) - row(r + 2, c) + (row(r + 1, c) - row(r - 1, c)) * 8.0) / (12.0 * hr)
            } else if r >= 1 && r + 1 < rows {
                (row(r + 1, c) - row(r - 1, c)) / (2.0 * hr)
            } else if r == 0 {
                (row(1, c) * 4.0 - row(0, c) * 3.0 - row(2, c)) / (2.0 * hr)
            } else {
                (row(r, c) * 3.0 - row(r - 1, c) * 4.0 + row(r - 2, c)) / (2.0 * hr)
            };
            let ci = c as i64;
            let d_phi = if (2..m.saturating_sub(2)).contains(&c) {
                (row(r, c - 2) - row(r, c + 2) + (row(r, c + 1) - row(r, c - 1)) * 8.0) / (12.0 * hp)
            } else if periodic {
                (f.at(r, ci - 2) - f.at(r, ci + 2) + (f.at(r, ci + 1) - f.at(r, ci - 1)) * 8.0) / (12.0 * hp)
            } else if c >= 1 && c + 1 < m {
                (row(r, c + 1) - row(r, c - 1)) / (2.0 * hp)
            } else if c == 0 {
                (row(r, 1) * 4.0 - row(r, 0) * 3.0 - row(r, 2)) / (2.0 * hp)
            } else {
                (row(r, c) * 3.0 - row(r, c - 1) * 4.0 + row(r, c - 2)) / (2.0 * hp)
            };
            data.push(LinMap23::from_columns(&[d_rho, d_phi]));
        }
    }
    DiffField {
        rows,
        cols: m,
        data,
        method: FdMethod::Central4,
    }
}

/// Discrete pullback metric at every node.
pub fn pullback_field(df: &DiffField) -> Vec<SymForm2> {
    df.data.iter().map(SymForm2::pullback).collect()
}
