use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use crate::geom::{lambda_min, Vec3};
use crate::holonomic::grid::{FieldGrid, PhiLayout};
use crate::holonomic::step::{Layer, StepReport};
use crate::metrics::initial_differential;

/// X_{k,i} below this keeps the corrugated surface a graph over its tangent plane.
pub const SIGMA: f64 = 3.488629;

/// Pairs closer than this many rows and columns in parameter space are exempt.
pub const STENCIL_RADIUS: i64 = 2;

/// lambda_C(df0) over the annulus [rho0, 1].
pub fn lambda_c0(rho0: f64) -> f64 {
    let n = 64;
    (0..=n)
        .map(|j| lambda_min(&initial_differential(rho0 + (1.0 - rho0) * j as f64 / n as f64, 0.0)))
        .fold(f64::INFINITY, f64::min)
}

/// Result of [`self_intersection_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionScan {
    pub nodes: usize,
    /// Decimation stride in rows and columns.
    pub stride: usize,
    /// Hash cell size, half the shortest mesh edge.
    pub cell: f64,
    /// Off-stencil pairs closer than `cell`.
    pub collisions: usize,
    /// Closest off-stencil pair found within the searched cells, with its
    /// (row, col) sample indices.
    pub closest: Option<(f64, (usize, usize), (usize, usize))>,
}

/// Stored rows and columns of the mesh layout, and whether the columns wrap.
fn mesh_indices(grid: &FieldGrid, stride: usize) -> (Vec<usize>, Vec<i64>, bool) {
    let stride = stride.max(1);
    let rows: Vec<usize> = grid.physical_rows().step_by(stride).collect();
    let (cols, periodic): (Vec<i64>, bool) = match grid.spec.layout {
        PhiLayout::Sector { .. } => {
            let n = grid.spec.phi_count as i64;
            // keep the wraparound uniform
            let s = (1..=stride as i64).rev().find(|s| n % s == 0).unwrap_or(1);
            ((0..n).step_by(s as usize).collect(), true)
        }
        PhiLayout::Window { .. } => (grid.physical_cols().step_by(stride).map(|c| c as i64).collect(), false),
    };
    (rows, cols, periodic)
}

/// Nodes of the annulus in a mesh layout: rows, columns, whether the columns
/// wrap around, and the row-major nodes. Sectors are unfolded to the ring.
pub fn mesh_nodes(grid: &FieldGrid, stride: usize) -> (usize, usize, bool, Vec<Vec3>) {
    let (rows, cols, periodic) = mesh_indices(grid, stride);
    let mut out = Vec::with_capacity(rows.len() * cols.len());
    for &r in &rows {
        for &c in &cols {
            out.push(grid.at(r, c));
        }
    }
    (rows.len(), cols.len(), periodic, out)
}

/// The radii of the mesh rows and angles of the mesh columns of [`mesh_nodes`].
pub fn mesh_coords(grid: &FieldGrid, stride: usize) -> (Vec<f64>, Vec<f64>) {
    let (rows, cols, _) = mesh_indices(grid, stride);
    (
        rows.iter().map(|&r| grid.spec.rho(r)).collect(),
        cols.iter().map(|&c| grid.spec.phi(c)).collect(),
    )
}

/// Stride keeping the annulus nodes of `grid` at or below `max_nodes`.
pub fn stride_for(grid: &FieldGrid, max_nodes: usize) -> usize {
    let cols = match grid.spec.layout {
        PhiLayout::Sector { .. } => grid.spec.phi_count as usize,
        PhiLayout::Window { .. } => grid.physical_cols().len(),
    };
    let n = grid.spec.n_rho * cols;
    ((n as f64 / max_nodes.max(1) as f64).sqrt().ceil() as usize).max(1)
}

/// Spatial-hash search for pairs of mesh nodes closer than half the shortest
/// mesh edge that are not within the 5 x 5 parameter stencil of each other.
pub fn self_intersection_scan(grid: &FieldGrid, max_nodes: usize) -> CollisionScan {
    let stride = stride_for(grid, max_nodes);
    let (nr, nc, periodic, pts) = mesh_nodes(grid, stride);
    let idx = |r: usize, c: usize| r * nc + c;
    let mut min_edge = f64::INFINITY;
    for r in 0..nr {
        for c in 0..nc {
            if r + 1 < nr {
                min_edge = min_edge.min((pts[idx(r + 1, c)] - pts[idx(r, c)]).norm());
            }
            if c + 1 < nc || periodic {
                min_edge = min_edge.min((pts[idx(r, (c + 1) % nc)] - pts[idx(r, c)]).norm());
            }
        }
    }
    let cell = 0.5 * min_edge;
    let key = |p: &Vec3| {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    };
    let mut buckets: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::with_capacity(pts.len());
    for (j, p) in pts.iter().enumerate() {
        buckets.entry(key(p)).or_default().push(j as u32);
    }
    let exempt = |a: usize, b: usize| {
        let (ra, ca) = ((a / nc) as i64, (a % nc) as i64);
        let (rb, cb) = ((b / nc) as i64, (b % nc) as i64);
        let mut dc = (ca - cb).abs();
        if periodic {
            dc = dc.min(nc as i64 - dc);
        }
        (ra - rb).abs() <= STENCIL_RADIUS && dc <= STENCIL_RADIUS
    };
    let mut collisions = 0;
    let mut closest: Option<(f64, (usize, usize), (usize, usize))> = None;
    for (j, p) in pts.iter().enumerate() {
        let (x, y, z) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(list) = buckets.get(&(x + dx, y + dy, z + dz)) else {
                        continue;
                    };
                    for &o in list {
                        let o = o as usize;
                        if o <= j || exempt(j, o) {
                            continue;
                        }
                        let d = (pts[o] - p).norm();
                        if d < cell {
                            collisions += 1;
                        }
                        if closest.is_none_or(|c| d < c.0) {
                            closest = Some((d, (j / nc, j % nc), (o / nc, o % nc)));
                        }
                    }
                }
            }
        }
    }
    CollisionScan {
        nodes: pts.len(),
        stride,
        cell,
        collisions,
        closest,
    }
}

/// Embeddedness flags of a layer and the steps that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub alpha_max: f64,
    pub x_max: f64,
    pub lambda_min: f64,
    pub lambda_c0: f64,
    pub alpha_ok: bool,
    pub x_ok: bool,
    pub lambda_ok: bool,
    pub scan: CollisionScan,
}

impl Diagnostics {
    pub fn all_pass(&self) -> bool {
        self.alpha_ok && self.x_ok && self.lambda_ok && self.scan.collisions == 0
    }
}

/// Checks alpha < pi/2, X < sigma, lambda >= lambda_C(df0)/2 over `reports` and
/// the layer, and scans the layer for self-intersections.
pub fn embedding_diagnostics(layer: &Layer, reports: &[StepReport], max_scan_nodes: usize) -> Diagnostics {
    let lc0 = lambda_c0(layer.grid.spec.rho0);
    let alpha_max = reports.iter().map(|r| r.alpha_max).fold(0.0, f64::max);
    let x_max = reports.iter().map(|r| r.x_max).fold(0.0, f64::max);
    let lambda_min = reports
        .iter()
        .map(|r| r.lambda_min)
        .fold(layer.lambda_min(), f64::min);
    Diagnostics {
        alpha_max,
        x_max,
        lambda_min,
        lambda_c0: lc0,
        alpha_ok: alpha_max < FRAC_PI_2,
        x_ok: x_max < SIGMA,
        lambda_ok: lambda_min >= 0.5 * lc0,
        scan: self_intersection_scan(&layer.grid, max_scan_nodes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrugation::Corrugation;
    use crate::holonomic::grid::GridSpec;
    use crate::holonomic::step::cp_step;
    use crate::metrics::{metric_ladder, SymForm2};

    #[test]
    fn f0_is_embedded_with_its_own_margin() {
        let l = Layer::initial(GridSpec::sector(0.3, 41, 0, 7, 20)).unwrap();
        let d = embedding_diagnostics(&l, &[], 1 << 20);
        assert_eq!(d.scan.collisions, 0);
        assert!(d.all_pass());
        assert!((d.lambda_min - d.lambda_c0).abs() < 1e-12);
        assert!((d.lambda_c0 - 0.6).abs() < 1e-12);
    }

    #[test]
    fn mesh_coords_follow_the_nodes() {
        let g = crate::holonomic::grid::initial_embedding_grid(GridSpec::sector(0.5, 11, 2, 7, 4)).unwrap();
        let (nr, nc, periodic, pts) = mesh_nodes(&g, 2);
        let (rhos, phis) = mesh_coords(&g, 2);
        assert!(periodic);
        assert_eq!((rhos.len(), phis.len()), (nr, nc));
        for (j, p) in pts.iter().enumerate() {
            let q = crate::metrics::initial_embedding(rhos[j / nc], phis[j % nc]);
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn a_folded_sheet_collides() {
        // the second half of the columns retraces the first, 1e-9 above it
        let spec = GridSpec {
            rho0: 0.5,
            n_rho: 21,
            ghost: 0,
            phi_count: 1000,
            cols: 40,
            layout: PhiLayout::Window { col0: 0, ghost: 0 },
        };
        let nodes = (0..spec.total_rows() * spec.cols)
            .map(|j| {
                let (r, c) = (j / spec.cols, j % spec.cols);
                let z = if c < 20 { 0.0 } else { 1e-9 };
                Vec3::new(r as f64 * 0.01, (c % 20) as f64 * 0.01, z)
            })
            .collect();
        let g = FieldGrid::from_nodes(spec, nodes, (0, 0));
        let s = self_intersection_scan(&g, 1 << 20);
        assert_eq!(s.collisions, 21 * 20, "{s:?}");
    }

    #[test]
    fn x_at_argmax_matches_its_definition() {
        let spec = GridSpec::sector(0.3, 601, 4, 70, 1);
        let l = Layer::initial(spec).unwrap();
        let (_, rep) = cp_step(&l, 1, 1, 16).unwrap();
        let (r, c) = rep.x_argmax;
        // the argmax refers to the output grid, trimmed by two rows
        let (r_in, c_in) = (r + 2, c);
        let df = l.df.at(r_in, c_in);
        let rho = spec.rho(r_in);
        let eta = (metric_ladder(1, rho) - SymForm2::pullback(df)).cone_coord(1);
        let corr = Corrugation::new(df, 1, eta).unwrap();
        assert!((rep.x_max - eta / (corr.du * corr.du)).abs() < 1e-12);
        let d = embedding_diagnostics(&l, &[rep], 1 << 16);
        assert_eq!(d.x_max, rep.x_max);
    }
}
