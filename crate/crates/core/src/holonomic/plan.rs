use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::holonomic::grid::{GridSpec, PhiLayout};
use crate::holonomic::interp::INTERP_REACH;
use crate::holonomic::step::STEP_TRIM;
use crate::schedule::Schedule;

/// Fewest rows a level may have on [rho0, 1].
pub const MIN_ROWS: usize = 9;

/// Which part of the circle a run covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// The whole annulus, stored as one sector of symmetry 7 L.
    Ring,
    /// The angular window [phi_c - width/2, phi_c + width/2].
    Window { phi_c: f64, width: f64 },
}

/// Sampling density along each axis, in samples per shortest period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub spp_rho: f64,
    pub spp_phi: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            spp_rho: 12.0,
            spp_phi: 12.0,
        }
    }
}

/// Resolution of one level: rows on [rho0, 1] and phi_count.
fn resolution(rho0: f64, nr: u64, na: u64, unit: u64, s: Sampling, domain: Domain) -> (usize, u64) {
    let n_rho = ((s.spp_rho * nr as f64 * (1.0 - rho0)).ceil() as usize + 1).max(MIN_ROWS);
    let mut need = (s.spp_phi * 7.0 * na as f64).ceil() as u64;
    if let Domain::Window { width, .. } = domain {
        // at least a handful of columns across the window
        need = need.max((4.0 * TAU / width).ceil() as u64);
    }
    (n_rho, need.div_ceil(unit).max(1) * unit)
}

/// Input grid of every stage of `schedule`, in stage order. Each level resolves
/// the largest corrugation numbers used up to and including its stage, and
/// carries enough ghost rows and columns for the steps and refinements after it.
pub fn plan_levels(rho0: f64, schedule: &Schedule, sampling: Sampling, domain: Domain) -> Result<Vec<GridSpec>> {
    if !(rho0 > 0.0 && rho0 < 1.0) {
        return Err(Error::Config(format!("rho0 must lie in (0, 1), got {rho0}")));
    }
    let unit = 7 * schedule.l();
    let stages: Vec<(usize, usize)> = schedule.stages().collect();
    if stages.is_empty() {
        return Ok(Vec::new());
    }
    let mut res = Vec::with_capacity(stages.len());
    let (mut nr, mut na) = (0, 0);
    for &(k, i) in &stages {
        let n = schedule.n(k, i);
        nr = nr.max(n);
        if i != 1 {
            na = na.max(n);
        }
        res.push(resolution(rho0, nr, na, unit, sampling, domain));
    }

    let s_count = stages.len();
    let mut ghost = vec![0usize; s_count];
    let mut ghost_c = vec![0usize; s_count];
    let mut half = vec![0i64; s_count];
    let mut centre = vec![0i64; s_count];
    let h_rho = |s: usize| (1.0 - rho0) / (res[s].0 - 1) as f64;
    let h_phi = |s: usize| TAU / res[s].1 as f64;
    for s in 0..s_count {
        if let Domain::Window { phi_c, width } = domain {
            centre[s] = (phi_c / h_phi(s)).round() as i64;
            half[s] = ((0.5 * width / h_phi(s)).ceil() as i64).max(2);
        }
    }
    for s in (0..s_count).rev() {
        if s + 1 == s_count {
            ghost[s] = STEP_TRIM;
            ghost_c[s] = STEP_TRIM;
            continue;
        }
        if res[s] == res[s + 1] {
            ghost[s] = ghost[s + 1] + STEP_TRIM;
            ghost_c[s] = ghost_c[s + 1] + STEP_TRIM;
            continue;
        }
        let (h, hn) = (h_rho(s), h_rho(s + 1));
        let reach = ghost[s + 1] as f64 * hn / h + INTERP_REACH as f64;
        ghost[s] = STEP_TRIM + (reach - 1e-9).ceil() as usize;
        if let Domain::Window { .. } = domain {
            let (h, hn) = (h_phi(s), h_phi(s + 1));
            let lo_next = (centre[s + 1] - half[s + 1] - ghost_c[s + 1] as i64) as f64 * hn;
            let hi_next = (centre[s + 1] + half[s + 1] + ghost_c[s + 1] as i64) as f64 * hn;
            let lo = (centre[s] - half[s]) as f64 * h;
            let hi = (centre[s] + half[s]) as f64 * h;
            let need_lo = (lo - lo_next) / h + INTERP_REACH as f64;
            let need_hi = (hi_next - hi) / h + INTERP_REACH as f64;
            ghost_c[s] = STEP_TRIM + (need_lo.max(need_hi).max(0.0) - 1e-9).ceil() as usize;
        }
    }

    let mut out = Vec::with_capacity(s_count);
    for s in 0..s_count {
        let (n_rho, phi_count) = res[s];
        let spec = match domain {
            Domain::Ring => GridSpec::sector(rho0, n_rho, ghost[s], unit, (phi_count / unit) as usize),
            Domain::Window { .. } => {
                let cols = (2 * half[s] + 1) as usize + 2 * ghost_c[s];
                GridSpec {
                    rho0,
                    n_rho,
                    ghost: ghost[s],
                    phi_count,
                    cols,
                    layout: PhiLayout::Window {
                        col0: centre[s] - half[s] - ghost_c[s] as i64,
                        ghost: ghost_c[s],
                    },
                }
            }
        };
        spec.validate_for(schedule)?;
        out.push(spec);
    }
    Ok(out)
}

/// Ghost rows added per later stage by [`plan_level`].
pub const ROW_MARGIN_PER_STAGE: usize = STEP_TRIM + INTERP_REACH;
/// Ghost columns added per later stage by [`plan_level`]; two more than the
/// rows because the window centre is rounded on every level.
pub const COL_MARGIN_PER_STAGE: usize = ROW_MARGIN_PER_STAGE + 2;

/// One input level for a stage whose successors are not known yet: resolves
/// the running maxima `nr` (rho) and `na` (phi), with phi_count a multiple of
/// `unit`, and carries ghosts for `remaining` later stages whichever finer
/// levels they use.
pub fn plan_level(
    rho0: f64,
    unit: u64,
    nr: u64,
    na: u64,
    sampling: Sampling,
    domain: Domain,
    remaining: usize,
) -> Result<GridSpec> {
    if !(rho0 > 0.0 && rho0 < 1.0) {
        return Err(Error::Config(format!("rho0 must lie in (0, 1), got {rho0}")));
    }
    let (n_rho, phi_count) = resolution(rho0, nr, na, unit, sampling, domain);
    let ghost = STEP_TRIM + ROW_MARGIN_PER_STAGE * remaining;
    let spec = match domain {
        Domain::Ring => GridSpec::sector(rho0, n_rho, ghost, unit, (phi_count / unit) as usize),
        Domain::Window { phi_c, width } => {
            let h = TAU / phi_count as f64;
            let centre = (phi_c / h).round() as i64;
            let half = ((0.5 * width / h).ceil() as i64).max(2);
            let gc = STEP_TRIM + COL_MARGIN_PER_STAGE * remaining;
            GridSpec {
                rho0,
                n_rho,
                ghost,
                phi_count,
                cols: (2 * half + 1) as usize + 2 * gc,
                layout: PhiLayout::Window {
                    col0: centre - half - gc as i64,
                    ghost: gc,
                },
            }
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// Number of stored nodes of the largest level.
pub fn peak_nodes(levels: &[GridSpec]) -> usize {
    levels.iter().map(|s| s.total_rows() * s.cols).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_follow_the_running_maximum() {
        let s = Schedule::new(vec![[4, 20, 40], [80, 40, 160]]).unwrap();
        let lv = plan_levels(0.9, &s, Sampling::default(), Domain::Ring).unwrap();
        assert_eq!(lv.len(), 6);
        for w in lv.windows(2) {
            assert!(w[1].n_rho >= w[0].n_rho && w[1].phi_count >= w[0].phi_count);
        }
        // stage (2,2) reuses the grid of (2,1)
        assert_eq!(lv[4].n_rho, lv[3].n_rho);
        assert_eq!(lv[4].ghost + STEP_TRIM, lv[3].ghost);
        assert_eq!(lv[5].ghost, STEP_TRIM);
        assert!(lv[5].phi_count as f64 >= 12.0 * 7.0 * 160.0);
    }

    #[test]
    fn window_levels_nest() {
        let s = Schedule::new(vec![[2, 20, 200]]).unwrap();
        let lv = plan_levels(0.95, &s, Sampling::default(), Domain::Window { phi_c: 1.0, width: 0.01 }).unwrap();
        for w in lv.windows(2) {
            let (a, b) = (w[0], w[1]);
            // b's first and last stored nodes must have a full stencil inside a's output
            let lo = (b.phi(0) - a.phi(0)) / a.h_phi();
            let hi = (a.phi(a.cols as i64 - 1) - b.phi(b.cols as i64 - 1)) / a.h_phi();
            assert!(lo >= (STEP_TRIM + 2) as f64 - 1e-9 && hi >= (STEP_TRIM + 3) as f64 - 1e-9, "{lo} {hi}");
            let lo = (b.rho(0) - a.rho(0)) / a.h_rho();
            assert!(lo >= (STEP_TRIM + 2) as f64 - 1e-9, "{lo}");
        }
    }

    #[test]
    fn single_levels_refine_onto_any_finer_successor() {
        use crate::holonomic::{cp_step, refine, Layer};
        let s = Sampling::default();
        for dom in [Domain::Ring, Domain::Window { phi_c: 0.7, width: 0.003 }] {
            for &(n0, n1) in &[(20u64, 20u64), (20, 33), (20, 400), (10, 90)] {
                let a = plan_level(0.9, 70, n0, n0, s, dom, 1).unwrap();
                let (l, _) = cp_step(&Layer::initial(a).unwrap(), 1, 2, n0).unwrap();
                let b = plan_level(0.9, 70, n0.max(n1), n0.max(n1), s, dom, 0).unwrap();
                refine(&l, b).unwrap();
            }
        }
    }

    #[test]
    fn bad_inner_radius_is_a_config_error() {
        let s = Schedule::new(vec![[2, 20, 200]]).unwrap();
        assert!(matches!(
            plan_levels(1.5, &s, Sampling::default(), Domain::Ring),
            Err(Error::Config(_))
        ));
    }
}
