use std::f64::consts::TAU;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::geom::{rot_z, Vec3};
use crate::metrics::initial_embedding;
use crate::schedule::Schedule;

/// Minimum samples per shortest wavefront period along each axis.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 12.0;

/// How the stored columns cover the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiLayout {
    /// One sector of a map commuting with the rotation by 2 pi / symmetry;
    /// `phi_count = symmetry * cols` and the other sectors are rotated copies.
    Sector { symmetry: u64 },
    /// A window of columns starting at global column `col0`. The first and last
    /// `ghost` columns only serve the finite differences of later stages.
    Window { col0: i64, ghost: usize },
}

/// Layout of a polar grid on the annulus rho0 <= rho <= 1.
///
/// `ghost` extra rows on each side extend the rho range beyond the annulus so
/// that finite differences on the annulus itself stay centred; each stage of the
/// process consumes some of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub rho0: f64,
    /// Rows on [rho0, 1], both ends included.
    pub n_rho: usize,
    pub ghost: usize,
    /// Uniform angular samples of the full circle.
    pub phi_count: u64,
    /// Stored columns.
    pub cols: usize,
    pub layout: PhiLayout,
}

impl GridSpec {
    /// A periodic sector layout.
    pub fn sector(rho0: f64, n_rho: usize, ghost: usize, symmetry: u64, cols: usize) -> Self {
        GridSpec {
            rho0,
            n_rho,
            ghost,
            phi_count: symmetry * cols as u64,
            cols,
            layout: PhiLayout::Sector { symmetry },
        }
    }

    pub fn h_rho(&self) -> f64 {
        (1.0 - self.rho0) / (self.n_rho - 1) as f64
    }

    pub fn h_phi(&self) -> f64 {
        TAU / self.phi_count as f64
    }

    pub fn total_rows(&self) -> usize {
        self.n_rho + 2 * self.ghost
    }

    pub fn rho(&self, row: usize) -> f64 {
        self.rho0 + (row as f64 - self.ghost as f64) * self.h_rho()
    }

    /// Global column index of a stored column.
    pub fn global_col(&self, col: i64) -> i64 {
        match self.layout {
            PhiLayout::Sector { .. } => col,
            PhiLayout::Window { col0, .. } => col0 + col,
        }
    }

    pub fn phi(&self, col: i64) -> f64 {
        self.global_col(col) as f64 * self.h_phi()
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.layout, PhiLayout::Sector { .. })
    }

    pub fn ghost_cols(&self) -> usize {
        match self.layout {
            PhiLayout::Sector { .. } => 0,
            PhiLayout::Window { ghost, .. } => ghost,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0 && self.rho0 < 1.0) {
            return Err(Error::Config(format!("rho0 must lie in (0, 1), got {}", self.rho0)));
        }
        if self.n_rho < 5 {
            return Err(Error::Config("a grid needs at least 5 rows".into()));
        }
        if self.cols == 0 || self.phi_count == 0 {
            return Err(Error::Config("a grid needs at least one column".into()));
        }
        if self.rho(0) <= 0.0 {
            return Err(Error::Config(format!(
                "{} ghost rows reach past the origin from rho0 = {}",
                self.ghost, self.rho0
            )));
        }
        match self.layout {
            PhiLayout::Sector { symmetry } => {
                if symmetry == 0 || symmetry * self.cols as u64 != self.phi_count {
                    return Err(Error::Config(format!(
                        "sector of {} columns with symmetry {symmetry} does not tile {} columns",
                        self.cols, self.phi_count
                    )));
                }
            }
            PhiLayout::Window { ghost, .. } => {
                if self.cols < 2 * ghost + 5 {
                    return Err(Error::Config(format!(
                        "a window of {} columns cannot hold {ghost} ghost columns per side",
                        self.cols
                    )));
                }
                if self.cols as u64 > self.phi_count {
                    return Err(Error::Config("window wider than the circle".into()));
                }
            }
        }
        Ok(())
    }

    /// Checks that the grid is compatible with a schedule: phi_count must be a
    /// multiple of 7 L, and a stored sector must be a fundamental domain of a
    /// symmetry that every layer has.
    pub fn validate_for(&self, schedule: &Schedule) -> Result<()> {
        self.validate()?;
        let period = 7 * schedule.l();
        if self.phi_count % period != 0 {
            return Err(Error::Config(format!(
                "phi_count {} is not a multiple of 7 L = {period}",
                self.phi_count
            )));
        }
        if let PhiLayout::Sector { symmetry } = self.layout {
            if period % symmetry != 0 {
                return Err(Error::Config(format!(
                    "sector symmetry {symmetry} does not divide 7 L = {period}"
                )));
            }
        }
        Ok(())
    }

    /// Rows on [rho0, 1] and ghost rows needed for every stage of `schedule`.
    fn rows_for(rho0: f64, schedule: &Schedule, spp_rho: f64) -> (usize, usize) {
        let n_max = schedule.rows().iter().flatten().copied().max().unwrap_or(1) as f64;
        let n_rho = (spp_rho * n_max * (1.0 - rho0)).ceil() as usize + 1;
        (n_rho.max(5), 2 + 2 * 3 * schedule.depth())
    }

    /// Smallest phi_count that is a multiple of `unit` and resolves the
    /// angular frequencies of `schedule` with `spp_phi` samples per period.
    fn phi_count_for(schedule: &Schedule, spp_phi: f64, unit: u64) -> u64 {
        let n_ang = schedule.rows().iter().map(|r| r[1].max(r[2])).max().unwrap_or(1) as f64;
        let needed = (spp_phi * 7.0 * n_ang).ceil() as u64;
        needed.div_ceil(unit).max(1) * unit
    }

    /// Smallest sector grid resolving all stages of `schedule` with `spp_rho`,
    /// `spp_phi` samples per shortest period, storing a sector of symmetry 7 L
    /// and with enough ghost rows for every stage.
    pub fn for_schedule(rho0: f64, schedule: &Schedule, spp_rho: f64, spp_phi: f64) -> Result<Self> {
        let (n_rho, ghost) = Self::rows_for(rho0, schedule, spp_rho);
        let sym = 7 * schedule.l();
        let phi_count = Self::phi_count_for(schedule, spp_phi, sym);
        let spec = GridSpec::sector(rho0, n_rho, ghost, sym, (phi_count / sym) as usize);
        spec.validate_for(schedule)?;
        Ok(spec)
    }

    /// A window of `width` columns centred on angle `phi_c`, with ghost columns
    /// for every stage of `schedule`.
    pub fn window_for_schedule(
        rho0: f64,
        schedule: &Schedule,
        spp_rho: f64,
        spp_phi: f64,
        width: usize,
        phi_c: f64,
    ) -> Result<Self> {
        let (n_rho, ghost) = Self::rows_for(rho0, schedule, spp_rho);
        let phi_count = Self::phi_count_for(schedule, spp_phi, 7 * schedule.l());
        let centre = (phi_c / TAU * phi_count as f64).round() as i64;
        let cols = width + 2 * ghost;
        let spec = GridSpec {
            rho0,
            n_rho,
            ghost,
            phi_count,
            cols,
            layout: PhiLayout::Window {
                col0: centre - (cols / 2) as i64,
                ghost,
            },
        };
        spec.validate_for(schedule)?;
        Ok(spec)
    }
}

/// Samples of a map on a [`GridSpec`]; only the stored columns are kept.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub spec: GridSpec,
    /// Row-major: nodes[row * cols + col].
    pub nodes: Vec<Vec3>,
    /// Stage label (k, i); (0, 0) is f0.
    pub layer: (usize, usize),
    /// Largest corrugation numbers applied so far along rho and phi.
    pub freq_rho: u64,
    pub freq_phi: u64,
    rotations: [Matrix3<f64>; 5],
}

fn sector_rotations(spec: &GridSpec) -> [Matrix3<f64>; 5] {
    let d = match spec.layout {
        PhiLayout::Sector { symmetry } => TAU / symmetry as f64,
        PhiLayout::Window { .. } => 0.0,
    };
    [-2.0, -1.0, 0.0, 1.0, 2.0].map(|q| rot_z(q * d))
}

impl FieldGrid {
    pub fn from_nodes(spec: GridSpec, nodes: Vec<Vec3>, layer: (usize, usize)) -> Self {
        assert_eq!(nodes.len(), spec.total_rows() * spec.cols);
        FieldGrid {
            spec,
            nodes,
            layer,
            freq_rho: 0,
            freq_phi: 0,
            rotations: sector_rotations(&spec),
        }
    }

    pub fn rows(&self) -> usize {
        self.spec.total_rows()
    }

    pub fn cols(&self) -> usize {
        self.spec.cols
    }

    /// Stored column and sector offset of an integer column. In a window the
    /// offset is always zero and the column must be stored.
    pub fn resolve_col(&self, col: i64) -> (usize, i64) {
        let m = self.spec.cols as i64;
        match self.spec.layout {
            PhiLayout::Sector { .. } => (col.rem_euclid(m) as usize, col.div_euclid(m)),
            PhiLayout::Window { .. } => {
                assert!((0..m).contains(&col), "column {col} outside a window of {m}");
                (col as usize, 0)
            }
        }
    }

    /// Rotation carrying sector 0 onto sector `q`.
    pub fn sector_rotation(&self, q: i64) -> Matrix3<f64> {
        match self.spec.layout {
            PhiLayout::Sector { symmetry } if q.abs() > 2 => rot_z(q as f64 * TAU / symmetry as f64),
            _ => self.rotations[(q + 2) as usize],
        }
    }

    /// Node at (row, col) for any integer column. In a sector layout the
    /// rotational symmetry supplies columns outside the stored range; a window
    /// only answers for its own columns.
    pub fn at(&self, row: usize, col: i64) -> Vec3 {
        let (c, q) = self.resolve_col(col);
        let p = self.nodes[row * self.spec.cols + c];
        if q == 0 {
            p
        } else {
            self.sector_rotation(q) * p
        }
    }

    /// Indices of the rows lying on the annulus rho0 <= rho <= 1.
    pub fn physical_rows(&self) -> std::ops::Range<usize> {
        self.spec.ghost..self.spec.ghost + self.spec.n_rho
    }

    /// Stored columns that are not ghost columns.
    pub fn physical_cols(&self) -> std::ops::Range<usize> {
        let g = self.spec.ghost_cols();
        g..self.spec.cols - g
    }

    pub fn is_finite(&self) -> bool {
        self.nodes.iter().all(|p| p.iter().all(|x| x.is_finite()))
    }

    /// Drops `k` rows on each side, keeping the physical rows.
    pub fn shrink(&self, k: usize) -> FieldGrid {
        let m = self.spec.cols;
        let mut spec = self.spec;
        spec.ghost -= k;
        let nodes = self.nodes[k * m..(self.rows() - k) * m].to_vec();
        FieldGrid {
            spec,
            nodes,
            layer: self.layer,
            freq_rho: self.freq_rho,
            freq_phi: self.freq_phi,
            rotations: self.rotations,
        }
    }

    /// The whole ring of a sector layout as (rows, phi_count) nodes, by rotating
    /// the stored sector; a window is returned as stored.
    pub fn unfold(&self) -> (usize, Vec<Vec3>) {
        match self.spec.layout {
            PhiLayout::Window { .. } => (self.cols(), self.nodes.clone()),
            PhiLayout::Sector { .. } => {
                let n = self.spec.phi_count as usize;
                let mut out = Vec::with_capacity(self.rows() * n);
                for r in 0..self.rows() {
                    for c in 0..n as i64 {
                        out.push(self.at(r, c));
                    }
                }
                (n, out)
            }
        }
    }
}

/// f0 sampled on a grid.
pub fn initial_embedding_grid(spec: GridSpec) -> Result<FieldGrid> {
    spec.validate()?;
    let mut nodes = Vec::with_capacity(spec.total_rows() * spec.cols);
    for row in 0..spec.total_rows() {
        let rho = spec.rho(row);
        for col in 0..spec.cols {
            nodes.push(initial_embedding(rho, spec.phi(col as i64)));
        }
    }
    Ok(FieldGrid::from_nodes(spec, nodes, (0, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> GridSpec {
        GridSpec::sector(0.5, 11, 2, 7, 6)
    }

    #[test]
    fn boundary_node_of_f0() {
        let g = initial_embedding_grid(spec()).unwrap();
        let last = g.physical_rows().end - 1;
        assert!((g.spec.rho(last) - 1.0).abs() < 1e-15);
        let p = g.at(last, 0);
        assert!((p - Vec3::new(2.0, 0.0, std::f64::consts::SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn rotated_columns_match_closed_form() {
        let g = initial_embedding_grid(spec()).unwrap();
        let r = rot_z(g.spec.h_phi());
        for row in 0..g.rows() {
            for col in -9..20 {
                let direct = initial_embedding(g.spec.rho(row), g.spec.phi(col));
                assert!((g.at(row, col) - direct).norm() < 1e-12);
                assert!((r * g.at(row, col) - g.at(row, col + 1)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn column_and_its_wraparound_are_the_same_node() {
        let g = initial_embedding_grid(spec()).unwrap();
        let n = g.spec.phi_count as i64;
        for row in 0..g.rows() {
            for col in 0..n {
                assert!((g.at(row, col) - g.at(row, col + n)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn paraboloid_identity() {
        let g = initial_embedding_grid(spec()).unwrap();
        for p in &g.nodes {
            let expected = std::f64::consts::FRAC_1_SQRT_2 * (p.x * p.x + p.y * p.y) / 2.0;
            assert!((p.z - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn phi_count_must_respect_the_schedule() {
        let s = Schedule::new(vec![[3, 10, 20]]).unwrap();
        let bad = GridSpec::sector(0.5, 11, 2, 7, 3);
        assert!(matches!(bad.validate_for(&s), Err(Error::Config(_))));
        let good = GridSpec::for_schedule(0.5, &s, 12.0, 12.0).unwrap();
        assert_eq!(good.phi_count % 70, 0);
        assert!(good.phi_count as f64 >= 12.0 * 7.0 * 20.0);
        assert!(initial_embedding_grid(bad).is_ok());
    }

    #[test]
    fn window_columns_follow_the_global_index() {
        let s = Schedule::new(vec![[2, 10, 20]]).unwrap();
        let w = GridSpec::window_for_schedule(0.9, &s, 12.0, 12.0, 16, 1.0).unwrap();
        assert_eq!(w.cols, 16 + 2 * w.ghost_cols());
        let g = initial_embedding_grid(w).unwrap();
        assert_eq!(g.physical_cols().len(), 16);
        let mid = w.phi((w.cols / 2) as i64);
        assert!((mid - 1.0).abs() <= w.h_phi());
        for c in 0..w.cols {
            let p = initial_embedding(w.rho(3), w.phi(c as i64));
            assert_eq!(g.at(3, c as i64), p);
        }
    }

    #[test]
    fn ghost_rows_must_stay_off_the_origin() {
        let mut s = spec();
        s.ghost = 100;
        assert!(s.validate().is_err());
    }

    #[test]
    fn unfolded_ring_has_every_column() {
        let g = initial_embedding_grid(spec()).unwrap();
        let (n, all) = g.unfold();
        assert_eq!(n, 42);
        let r = 4;
        for c in 0..n {
            let p = initial_embedding(g.spec.rho(r), g.spec.phi(c as i64));
            assert!((all[r * n + c] - p).norm() < 1e-12);
        }
    }
}
