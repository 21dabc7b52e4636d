use crate::analysis::boxcount::{box_counting_dimension, BoxCountEstimate};
use crate::analysis::holder::{holder_estimate, HolderEstimate, RadialColumn, HOLDER_WINDOW};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::holonomic::{Layer, PhiLayout};

/// The image of the circle rho = 1 under a layer, with its box-counting estimate.
#[derive(Debug, Clone)]
pub struct LimitSetSample {
    pub points: Vec<Vec3>,
    pub estimate: BoxCountEstimate,
}

/// Samples the outermost row of `layer` (the whole ring for a sector layout,
/// the window otherwise) and estimates its box-counting dimension.
pub fn limit_set_sample(layer: &Layer) -> Result<LimitSetSample> {
    let g = &layer.grid;
    let row = g.physical_rows().last().ok_or_else(|| Error::domain("layer has no rows"))?;
    let points: Vec<Vec3> = match g.spec.layout {
        PhiLayout::Sector { .. } => (0..g.spec.phi_count as i64).map(|c| g.at(row, c)).collect(),
        PhiLayout::Window { .. } => g.physical_cols().map(|c| g.at(row, c as i64)).collect(),
    };
    let estimate = box_counting_dimension(&points)?;
    Ok(LimitSetSample { points, estimate })
}

/// Radial Hölder estimate of a layer over the annulus columns, using at most
/// `max_columns` evenly spaced columns.
pub fn layer_holder_estimate(layer: &Layer, max_columns: usize) -> Result<HolderEstimate> {
    let g = &layer.grid;
    let rows: Vec<usize> = g
        .physical_rows()
        .filter(|&r| g.spec.rho(r) >= HOLDER_WINDOW.0 - 1e-12)
        .collect();
    let cols = g.physical_cols();
    let step = cols.len().div_ceil(max_columns.max(1)).max(1);
    let columns: Vec<RadialColumn> = cols
        .step_by(step)
        .map(|c| RadialColumn {
            rho: rows.iter().map(|&r| g.spec.rho(r)).collect(),
            values: rows.iter().map(|&r| g.at(r, c as i64)).collect(),
        })
        .collect();
    holder_estimate(&columns)
}
