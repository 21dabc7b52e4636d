use crate::corrugation::Corrugation;
use crate::error::{Error, Result};
use crate::geom::{lambda_min, op_norm, LinMap23};
use crate::holonomic::diff::{check_resolution_for, differentiate, finite_differences, DiffField, FdMethod};
use crate::holonomic::grid::initial_embedding_grid;
use crate::holonomic::grid::{FieldGrid, GridSpec, PhiLayout};
use crate::metrics::{ell, initial_differential, metric_ladder, wavefront, SymForm2};
use crate::specfun::centered;

/// Rows dropped on each side by one step, so that the finite differences
/// feeding the next step stay centred on the rows that remain.
pub const STEP_TRIM: usize = 2;

/// A layer f_{k,i} together with its discrete differential.
#[derive(Debug, Clone)]
pub struct Layer {
    pub grid: FieldGrid,
    pub df: DiffField,
}

impl Layer {
    /// A layer whose differential is taken by finite differences.
    pub fn new(grid: FieldGrid) -> Result<Self> {
        let df = differentiate(&grid)?;
        Ok(Layer { grid, df })
    }

    /// f0 on `spec` with its exact differential.
    pub fn initial(spec: GridSpec) -> Result<Self> {
        let grid = initial_embedding_grid(spec)?;
        let data = (0..grid.rows())
            .flat_map(|r| (0..spec.cols).map(move |c| (r, c)))
            .map(|(r, c)| initial_differential(spec.rho(r), spec.phi(c as i64)))
            .collect();
        let df = DiffField {
            rows: grid.rows(),
            cols: spec.cols,
            data,
            method: FdMethod::Central4,
        };
        Ok(Layer { grid, df })
    }

    pub fn stage(&self) -> (usize, usize) {
        self.grid.layer
    }

    /// Infimum over the annulus of the immersion margin.
    pub fn lambda_min(&self) -> f64 {
        let cols = self.grid.physical_cols();
        self.grid
            .physical_rows()
            .flat_map(|r| cols.clone().map(move |c| (r, c)))
            .map(|(r, c)| lambda_min(self.df.at(r, c)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Measurements of one corrugation step, taken over the annulus rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub k: usize,
    pub i: usize,
    pub n: u64,
    /// sup |mu_{k,i} - F*|, with mu = f* + eta l_i^2.
    pub err: f64,
    /// min of eta before the step.
    pub eta_min: f64,
    pub alpha_max: f64,
    /// max of eta / |df(u)|^2.
    pub x_max: f64,
    /// min immersion margin of dF.
    pub lambda_min: f64,
    /// sup |F - f|.
    pub disp: f64,
    /// sup |dF - L| in operator norm, L the target differential.
    pub target_dev: f64,
    /// Location of the largest X, for diagnostics.
    pub x_argmax: (usize, usize),
}

/// Per-node data kept from the step for the report and for comparisons.
#[derive(Debug, Clone, Copy)]
struct NodeStep {
    alpha: f64,
    x: f64,
    mu: SymForm2,
    target: LinMap23,
}

/// Options for a step.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepOptions {
    /// Replace eta by zero everywhere (the degenerate corrugation).
    pub zero_eta: bool,
}

/// Output of [`cp_step_with`]: the new layer, its report and the target differentials.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub layer: Layer,
    pub report: StepReport,
    /// L_{k,i} at every node of the new grid (row-major like the grid).
    pub targets: Vec<LinMap23>,
}

/// Stage (k, i) of the corrugation process with corrugation number `n`:
/// F = f + (r/N) [(C(X) - J0(alpha) X) t + S(X) n], X = N varpi_i.
pub fn cp_step(prev: &Layer, k: usize, i: usize, n: u64) -> Result<(Layer, StepReport)> {
    let out = cp_step_with(prev, k, i, n, StepOptions::default())?;
    Ok((out.layer, out.report))
}

pub fn cp_step_with(prev: &Layer, k: usize, i: usize, n: u64, opts: StepOptions) -> Result<StepOutput> {
    if k == 0 || !(1..=3).contains(&i) || n == 0 {
        return Err(Error::Config(format!("invalid stage ({k},{i}) with N = {n}")));
    }
    let f = &prev.grid;
    let spec = f.spec;
    let freq_rho = f.freq_rho.max(n);
    let freq_phi = if i == 1 { f.freq_phi } else { f.freq_phi.max(n) };
    check_resolution_for(&spec, (k, i), freq_rho, freq_phi)?;

    let m_old = spec.cols;
    let drop = STEP_TRIM.min(spec.ghost);
    let drop_c = STEP_TRIM.min(spec.ghost_cols());
    let rows = f.rows() - 2 * drop;
    let m = m_old - 2 * drop_c;
    let physical = f.physical_rows();
    let physical_c = f.physical_cols();
    let kept = |r: usize, c: usize| (drop..drop + rows).contains(&r) && (drop_c..drop_c + m).contains(&c);
    let nf = n as f64;
    let ell_i = ell(i);

    // the displacement F - f on the whole input grid, so that its differences
    // are centred on every kept node
    let mut disp = Vec::with_capacity(f.nodes.len());
    let mut info = Vec::with_capacity(rows * m);
    let mut eta_min = f64::INFINITY;
    for r in 0..f.rows() {
        let rho = spec.rho(r);
        let g = metric_ladder(k, rho);
        let on_annulus = physical.contains(&r);
        for c in 0..m_old {
            let phi = spec.phi(c as i64);
            let df = prev.df.at(r, c);
            let pb = SymForm2::pullback(df);
            let raw = if opts.zero_eta { 0.0 } else { (g - pb).cone_coord(i) };
            if on_annulus && physical_c.contains(&c) {
                eta_min = eta_min.min(raw);
                if raw < 0.0 {
                    return Err(Error::ConeViolation { k, i, rho, phi, eta: raw });
                }
            }
            let eta = raw.max(0.0);
            let corr = Corrugation::new(df, i, eta).ok_or_else(|| Error::ImmersionLoss {
                k,
                i,
                rho,
                phi,
                lambda: lambda_min(df),
            })?;
            let x = nf * wavefront(i, rho, phi);
            let (cc, s, _) = centered(corr.alpha, x);
            let t = corr.frame.column(0);
            let nn = corr.frame.column(2);
            disp.push((t * cc + nn * s) * (corr.r / nf));
            if kept(r, c) {
                info.push(NodeStep {
                    alpha: corr.alpha,
                    x: eta / (corr.du * corr.du),
                    mu: pb + ell_i.square() * eta,
                    target: corr.target(df, i, corr.theta(x)),
                });
            }
        }
    }
    let disp_grid = FieldGrid::from_nodes(spec, disp, (k, i));
    let ddisp = finite_differences(&disp_grid);

    let mut nodes = Vec::with_capacity(rows * m);
    let mut data = Vec::with_capacity(rows * m);
    for r in drop..drop + rows {
        for c in drop_c..drop_c + m {
            let j = r * m_old + c;
            nodes.push(f.nodes[j] + disp_grid.nodes[j]);
            data.push(prev.df.data[j] + ddisp.data[j]);
        }
    }

    let mut new_spec = spec;
    new_spec.ghost -= drop;
    new_spec.cols = m;
    if let PhiLayout::Window { col0, ghost } = spec.layout {
        new_spec.layout = PhiLayout::Window {
            col0: col0 + drop_c as i64,
            ghost: ghost - drop_c,
        };
    }
    let mut grid = FieldGrid::from_nodes(new_spec, nodes, (k, i));
    grid.freq_rho = freq_rho;
    grid.freq_phi = freq_phi;
    if !grid.is_finite() {
        return Err(Error::Consistency(format!("non-finite node after stage ({k},{i})")));
    }
    let layer = Layer {
        grid,
        df: DiffField {
            rows,
            cols: m,
            data,
            method: prev.df.method,
        },
    };

    let mut report = StepReport {
        k,
        i,
        n,
        err: 0.0,
        eta_min,
        alpha_max: 0.0,
        x_max: 0.0,
        lambda_min: f64::INFINITY,
        disp: 0.0,
        target_dev: 0.0,
        x_argmax: (0, 0),
    };
    for r in layer.grid.physical_rows() {
        for c in layer.grid.physical_cols() {
            let j = r * m + c;
            let s = &info[j];
            let d_new = layer.df.at(r, c);
            report.err = report.err.max((s.mu - SymForm2::pullback(d_new)).norm());
            report.alpha_max = report.alpha_max.max(s.alpha);
            if s.x > report.x_max {
                report.x_max = s.x;
                report.x_argmax = (r, c);
            }
            report.lambda_min = report.lambda_min.min(lambda_min(d_new));
            report.disp = report.disp.max(disp_grid.nodes[(r + drop) * m_old + c + drop_c].norm());
            report.target_dev = report.target_dev.max(op_norm(&(d_new - s.target)));
        }
    }
    Ok(StepOutput {
        layer,
        report,
        targets: info.into_iter().map(|s| s.target).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rotationally symmetric annulus good for the first stage: one column per sector.
    fn radial_layer(n_rho: usize, ghost: usize) -> Layer {
        let spec = GridSpec::sector(0.3, n_rho, ghost, 70, 1);
        Layer::new(initial_embedding_grid(spec).unwrap()).unwrap()
    }

    #[test]
    fn zero_eta_leaves_the_map_unchanged() {
        let l0 = radial_layer(201, 4);
        let out = cp_step_with(&l0, 1, 1, 16, StepOptions { zero_eta: true }).unwrap();
        assert_eq!(out.report.alpha_max, 0.0);
        assert!(out.report.disp < 1e-15);
        let m = l0.grid.cols();
        for (j, p) in out.layer.grid.nodes.iter().enumerate() {
            assert!((p - l0.grid.nodes[j + STEP_TRIM * m]).norm() < 1e-15);
        }
    }

    #[test]
    fn ghost_rows_shrink_by_the_trim() {
        let l0 = radial_layer(101, 4);
        let (l1, rep) = cp_step(&l0, 1, 1, 8).unwrap();
        assert_eq!(l1.grid.spec.ghost, 2);
        assert_eq!(l1.grid.layer, (1, 1));
        assert_eq!((rep.k, rep.i, rep.n), (1, 1, 8));
        assert!(rep.err >= 0.0 && rep.alpha_max < std::f64::consts::PI);
    }

    #[test]
    fn first_stage_error_halves_with_n() {
        let l0 = radial_layer(6001, 4);
        let e: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| cp_step(&l0, 1, 1, n).unwrap().1.err)
            .collect();
        for w in e.windows(2) {
            let q = w[1] / w[0];
            assert!((0.3..=0.7).contains(&q), "{e:?}");
        }
    }

    #[test]
    fn displacement_is_order_one_over_n() {
        let l0 = radial_layer(4001, 4);
        let d1 = cp_step(&l0, 1, 1, 20).unwrap().1.disp;
        let d2 = cp_step(&l0, 1, 1, 40).unwrap().1.disp;
        assert!(((d1 * 20.0) / (d2 * 40.0) - 1.0).abs() < 0.05, "{d1} {d2}");
    }

    #[test]
    fn x_matches_its_definition_at_the_argmax() {
        let l0 = radial_layer(801, 4);
        let out = cp_step_with(&l0, 1, 1, 12, StepOptions::default()).unwrap();
        let (r, c) = out.report.x_argmax;
        let df = l0.df.at(r + STEP_TRIM, c);
        assert_eq!(l0.grid.spec.ghost_cols(), 0);
        let rho = l0.grid.spec.rho(r + STEP_TRIM);
        let eta = (metric_ladder(1, rho) - SymForm2::pullback(df)).cone_coord(1);
        let u = crate::corrugation::u_vector(df, 1);
        let x = eta / (df * u).norm_squared();
        assert!((x - out.report.x_max).abs() < 1e-12 * x);
    }

    #[test]
    fn window_agrees_with_the_full_sector() {
        let sched = crate::schedule::Schedule::new(vec![[2, 10, 20]]).unwrap();
        let sector = GridSpec::for_schedule(0.8, &sched, 16.0, 16.0).unwrap();
        let window = GridSpec {
            cols: 40,
            layout: PhiLayout::Window { col0: 37, ghost: sector.ghost },
            ..sector
        };
        let mut a = Layer::new(initial_embedding_grid(sector).unwrap()).unwrap();
        let mut b = Layer::new(initial_embedding_grid(window).unwrap()).unwrap();
        for (k, i) in sched.stages() {
            a = cp_step(&a, k, i, sched.n(k, i)).unwrap().0;
            b = cp_step(&b, k, i, sched.n(k, i)).unwrap().0;
            for r in b.grid.physical_rows() {
                for c in b.grid.physical_cols() {
                    let g = b.grid.spec.global_col(c as i64);
                    let d = (b.grid.at(r, c as i64) - a.grid.at(r, g)).norm();
                    assert!(d < 1e-12, "stage ({k},{i}) node ({r},{c}): {d:e}");
                }
            }
        }
    }

    #[test]
    fn cone_violation_is_reported() {
        // a grid whose pullback already exceeds g_1 along l_1
        let spec = GridSpec::sector(0.3, 101, 2, 70, 1);
        let mut g = initial_embedding_grid(spec).unwrap();
        for p in &mut g.nodes {
            *p *= 3.0;
        }
        let l = Layer::new(g).unwrap();
        assert!(matches!(cp_step(&l, 1, 1, 8), Err(Error::ConeViolation { k: 1, i: 1, .. })));
    }
}
