use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::geom::{op_norm, LinMap23};
use crate::holonomic::choose::{choose_n, default_tau, ChooseParams, Condition, ConditionCheck, Measures, StageBounds};
use crate::holonomic::diagnostics::lambda_c0;
use crate::holonomic::grid::{GridSpec, PhiLayout};
use crate::holonomic::interp::refine;
use crate::holonomic::plan::{plan_level, Domain, Sampling};
use crate::holonomic::step::{cp_step_with, Layer, StepOptions, StepOutput, StepReport};
use crate::metrics::{h_min, ladder_increment, metric_ladder, SymForm2};
use crate::schedule::Schedule;

/// How corrugation numbers are picked.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleMode {
    /// Use the schedule as given.
    Explicit,
    /// Doubling search from the schedule's numbers.
    Adaptive { conditions: Vec<Condition>, cap: u64 },
}

/// Everything a holonomic run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub rho0: f64,
    pub depth: usize,
    pub schedule: Schedule,
    pub mode: ScheduleMode,
    /// tau_1; later budgets are tau_k = tau_1 e^{1-k}.
    pub tau1: f64,
    pub lambda: f64,
    pub sampling: Sampling,
    pub domain: Domain,
    /// Nodes per stage kept for formal comparisons.
    pub sample_cap: usize,
    /// Largest grid a step may allocate, in stored nodes.
    pub max_nodes: usize,
}

/// About 2 GB of layer data.
pub const DEFAULT_MAX_NODES: usize = 12_000_000;

/// Conditions enforced by default in adaptive runs. (LC1) and (LC4) are
/// measured and reported but not enforced.
pub const DESK_CONDITIONS: [Condition; 3] = [Condition::Lc2, Condition::Lc3, Condition::Cone];

impl RunSpec {
    pub fn new(rho0: f64, depth: usize, schedule: Schedule) -> Self {
        RunSpec {
            rho0,
            depth,
            schedule,
            mode: ScheduleMode::Explicit,
            tau1: default_tau(1),
            lambda: crate::holonomic::choose::DEFAULT_LAMBDA,
            sampling: Sampling::default(),
            domain: Domain::Ring,
            sample_cap: 20_000,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }

    pub fn tau(&self, k: usize) -> f64 {
        self.tau1 * (1.0 - k as f64).exp()
    }

    /// T = sum of all tau_k.
    pub fn tau_total(&self) -> f64 {
        self.tau1 / (1.0 - (-1.0f64).exp())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0 && self.rho0 < 1.0) {
            return Err(Error::Config(format!("rho0 must lie in (0, 1), got {}", self.rho0)));
        }
        if self.depth > self.schedule.depth() {
            return Err(Error::Config(format!(
                "depth {} exceeds the {} schedule rows",
                self.depth,
                self.schedule.depth()
            )));
        }
        if !(self.tau1 > 0.0) || !(self.lambda > 1.0) {
            return Err(Error::Config("tau1 must be positive and lambda above 1".into()));
        }
        let budget = 0.5 * lambda_c0(self.rho0);
        if self.tau_total() > budget {
            return Err(Error::Config(format!(
                "budget T = {:.4} exceeds lambda_C(df0)/2 = {budget:.4}; lower tau1",
                self.tau_total()
            )));
        }
        if let Domain::Window { width, .. } = self.domain {
            if !(width > 0.0 && width < std::f64::consts::TAU) {
                return Err(Error::Config(format!("window width {width} outside (0, 2 pi)")));
            }
        }
        Ok(())
    }
}

/// A node kept for comparisons with the formal process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub rho: f64,
    pub phi: f64,
    pub df: LinMap23,
    /// Target differential L_{k,i} at the node.
    pub target: LinMap23,
}

/// One accepted stage.
#[derive(Debug, Clone)]
pub struct StageRecord {
    pub report: StepReport,
    /// Every condition measured on the accepted step.
    pub checks: Vec<ConditionCheck>,
    pub trials: Vec<(u64, Option<Condition>)>,
    /// Input grid of the accepted step.
    pub level: GridSpec,
    pub samples: Vec<SamplePoint>,
}

/// Runtime checks of the properties (P1)-(P3) at the end of one k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyCheck {
    pub k: usize,
    /// sup |g_k - f_k*| and sup |g_{k+1} - g_k|.
    pub p1: (f64, f64),
    /// sup |f_k - f_{k-1}| and tau_k.
    pub p2: (f64, f64),
    /// sup |df_k - df_{k-1}| and tau_k + A sup |g_k - f_{k-1}*|^{1/2}.
    pub p3: (f64, f64),
    /// The constant A, measured at k = 1.
    pub a: f64,
}

impl PropertyCheck {
    pub fn p1_ok(&self) -> bool {
        self.p1.0 <= self.p1.1
    }
    pub fn p2_ok(&self) -> bool {
        self.p2.0 <= self.p2.1
    }
    pub fn p3_ok(&self) -> bool {
        self.p3.0 <= self.p3.1 * (1.0 + 1e-12)
    }
}

/// What a run leaves behind.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub rho0: f64,
    pub depth: usize,
    pub domain: Domain,
    /// The corrugation numbers actually used, truncated to `depth` rows.
    pub schedule: Option<Schedule>,
    pub stages: Vec<StageRecord>,
    pub properties: Vec<PropertyCheck>,
    /// f_0, f_1, ..., f_depth on their final grids.
    pub layers: Vec<Layer>,
    pub lambda_c0: f64,
}

impl RunArtifacts {
    pub fn reports(&self) -> Vec<StepReport> {
        self.stages.iter().map(|s| s.report).collect()
    }

    pub fn last_layer(&self) -> &Layer {
        self.layers.last().expect("a run keeps at least f0")
    }
}

/// Progress notifications, emitted as soon as the data exists.
#[derive(Debug)]
pub enum RunEvent<'a> {
    Stage { record: &'a StageRecord, layer: &'a Layer },
    Completed { k: usize, layer: &'a Layer, check: Option<&'a PropertyCheck> },
}

/// Grid of f0 for a run of depth 0.
const F0_MESH_N: u64 = 8;

fn next_stage(k: usize, i: usize, depth: usize) -> Option<(usize, usize)> {
    match (k, i) {
        (k, 3) if k < depth => Some((k + 1, 1)),
        (_, 3) => None,
        (k, i) => Some((k, i + 1)),
    }
}

/// The physical region of `spec` without ghosts.
fn physical_spec(spec: &GridSpec) -> GridSpec {
    let mut s = *spec;
    s.ghost = 0;
    if let PhiLayout::Window { col0, ghost } = spec.layout {
        s.cols = spec.cols - 2 * ghost;
        s.layout = PhiLayout::Window {
            col0: col0 + ghost as i64,
            ghost: 0,
        };
    }
    s
}

fn annulus_nodes(layer: &Layer) -> impl Iterator<Item = (usize, usize)> + '_ {
    let cols = layer.grid.physical_cols();
    layer
        .grid
        .physical_rows()
        .flat_map(move |r| cols.clone().map(move |c| (r, c)))
}

fn next_eta_min(layer: &Layer, k: usize, i: usize) -> f64 {
    let spec = layer.grid.spec;
    annulus_nodes(layer)
        .map(|(r, c)| (metric_ladder(k, spec.rho(r)) - SymForm2::pullback(layer.df.at(r, c))).cone_coord(i))
        .fold(f64::INFINITY, f64::min)
}

fn rho_samples(rho0: f64) -> impl Iterator<Item = f64> {
    (0..=256).map(move |j| rho0 + (1.0 - rho0) * j as f64 / 256.0)
}

fn samples_of(out: &StepOutput, cap: usize) -> Vec<SamplePoint> {
    let l = &out.layer;
    let (rows, cols) = (l.grid.physical_rows(), l.grid.physical_cols());
    let n = rows.len() * cols.len();
    let stride = ((n as f64 / cap.max(1) as f64).sqrt().ceil() as usize).max(1);
    let m = l.grid.cols();
    let mut v = Vec::new();
    for r in rows.step_by(stride) {
        for c in cols.clone().step_by(stride) {
            v.push(SamplePoint {
                rho: l.grid.spec.rho(r),
                phi: l.grid.spec.phi(c as i64),
                df: *l.df.at(r, c),
                target: out.targets[r * m + c],
            });
        }
    }
    v
}

/// (P1)-(P3) for f_k = `now` against f_{k-1} = `before`.
fn property_check(
    k: usize,
    before: &Layer,
    now: &Layer,
    tau: f64,
    a_frozen: Option<f64>,
) -> Result<PropertyCheck> {
    let target = physical_spec(&now.grid.spec);
    let prev = if k == 1 {
        Layer::initial(target)?
    } else {
        refine(before, target)?
    };
    let (mut p1, mut p2, mut dd, mut base) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut inc = 0.0f64;
    let m = now.grid.cols();
    for (r, c) in annulus_nodes(now) {
        let rho = now.grid.spec.rho(r);
        let (rp, cp) = (r - now.grid.spec.ghost, c - now.grid.spec.ghost_cols());
        let jp = rp * target.cols + cp;
        let g = metric_ladder(k, rho);
        p1 = p1.max((g - SymForm2::pullback(now.df.at(r, c))).norm());
        inc = inc.max(ladder_increment(k + 1, rho).norm());
        p2 = p2.max((now.grid.nodes[r * m + c] - prev.grid.nodes[jp]).norm());
        dd = dd.max(op_norm(&(now.df.at(r, c) - prev.df.data[jp])));
        base = base.max((g - SymForm2::pullback(&prev.df.data[jp])).norm());
    }
    let a = a_frozen.unwrap_or_else(|| if base > 0.0 { dd / base.sqrt() } else { 0.0 });
    Ok(PropertyCheck {
        k,
        p1: (p1, inc),
        p2: (p2, tau),
        p3: (dd, tau + a * base.sqrt()),
        a,
    })
}

/// Runs the corrugation process to `spec.depth`, choosing or reading the
/// corrugation numbers, and reports every stage to `observer`.
pub fn run(spec: &RunSpec, observer: &mut dyn FnMut(RunEvent<'_>) -> Result<()>) -> Result<RunArtifacts> {
    spec.validate()?;
    let unit = 7 * spec.schedule.l();
    let stages: Vec<(usize, usize)> = spec.schedule.stages().take(3 * spec.depth).collect();
    let mut artifacts = RunArtifacts {
        rho0: spec.rho0,
        depth: spec.depth,
        domain: spec.domain,
        schedule: None,
        stages: Vec::new(),
        properties: Vec::new(),
        layers: Vec::new(),
        lambda_c0: lambda_c0(spec.rho0),
    };
    if stages.is_empty() {
        let level = plan_level(spec.rho0, unit, F0_MESH_N, F0_MESH_N, spec.sampling, spec.domain, 0)?;
        let f0 = Layer::initial(level)?;
        observer(RunEvent::Completed {
            k: 0,
            layer: &f0,
            check: None,
        })?;
        artifacts.layers.push(f0);
        return Ok(artifacts);
    }

    let mut rows: Vec<[u64; 3]> = spec.schedule.rows()[..spec.depth].to_vec();
    let (mut nr, mut na) = (0u64, 0u64);
    let mut current: Option<Layer> = None;
    let mut a_frozen = None;
    let mut d_k1_hmin = f64::INFINITY;
    let s_count = stages.len();
    for (s, &(k, i)) in stages.iter().enumerate() {
        let remaining = s_count - 1 - s;
        let next = next_stage(k, i, spec.depth);
        if i == 1 {
            d_k1_hmin = match &current {
                None => rho_samples(spec.rho0)
                    .map(|rho| h_min(&ladder_increment(1, rho)))
                    .fold(f64::INFINITY, f64::min),
                Some(l) => annulus_nodes(l)
                    .map(|(r, c)| {
                        h_min(&(metric_ladder(k, l.grid.spec.rho(r)) - SymForm2::pullback(l.df.at(r, c))))
                    })
                    .fold(f64::INFINITY, f64::min),
            };
        }
        let bounds = StageBounds::new(k, rho_samples(spec.rho0), d_k1_hmin);
        let params = ChooseParams {
            tau: spec.tau(k),
            lambda: spec.lambda,
            conditions: match &spec.mode {
                ScheduleMode::Explicit => Vec::new(),
                ScheduleMode::Adaptive { conditions, .. } => conditions.clone(),
            },
            cap: match &spec.mode {
                ScheduleMode::Explicit => u64::MAX,
                ScheduleMode::Adaptive { cap, .. } => *cap,
            },
        };
        let mut trial = |n: u64| -> Result<((StepOutput, GridSpec), Measures)> {
            let (tr, ta) = (nr.max(n), if i == 1 { na } else { na.max(n) });
            let level = plan_level(spec.rho0, unit, tr, ta.max(1), spec.sampling, spec.domain, remaining)?;
            let nodes = level.total_rows() * level.cols;
            if nodes > spec.max_nodes {
                return Err(Error::BudgetExceeded {
                    k,
                    i,
                    cap: n,
                    condition: format!("grid size ({nodes} nodes over the {} node limit)", spec.max_nodes),
                });
            }
            let input: Cow<Layer> = match &current {
                None => Cow::Owned(Layer::initial(level)?),
                Some(l) if l.grid.spec.n_rho == level.n_rho && l.grid.spec.phi_count == level.phi_count => {
                    Cow::Borrowed(l)
                }
                Some(l) => Cow::Owned(refine(l, level)?),
            };
            let out = cp_step_with(&input, k, i, n, StepOptions::default())?;
            let m = Measures {
                err: out.report.err,
                disp: out.report.disp,
                target_dev: out.report.target_dev,
                next_eta_min: next.map(|(k2, i2)| next_eta_min(&out.layer, k2, i2)),
            };
            Ok(((out, input.grid.spec), m))
        };
        let start = rows[k - 1][i - 1];
        let choice = choose_n((k, i), start, &bounds, &params, &mut trial)?;
        let (out, level) = choice.value;
        rows[k - 1][i - 1] = choice.n;
        nr = nr.max(choice.n);
        if i != 1 {
            na = na.max(choice.n);
        }
        let record = StageRecord {
            report: out.report,
            checks: choice.checks,
            trials: choice.trials,
            level,
            samples: samples_of(&out, spec.sample_cap),
        };
        let layer = out.layer;
        observer(RunEvent::Stage {
            record: &record,
            layer: &layer,
        })?;
        artifacts.stages.push(record);
        if i == 3 {
            if k == 1 {
                // f0 on the first input grid
                artifacts.layers.push(Layer::initial(artifacts.stages[0].level)?);
            }
            let before = artifacts.layers.last().expect("f0 is stored");
            let check = property_check(k, before, &layer, spec.tau(k), a_frozen)?;
            a_frozen.get_or_insert(check.a);
            observer(RunEvent::Completed {
                k,
                layer: &layer,
                check: Some(&check),
            })?;
            artifacts.properties.push(check);
            artifacts.layers.push(layer.clone());
        }
        current = Some(layer);
    }
    artifacts.schedule = Some(Schedule::new(rows)?);
    Ok(artifacts)
}

/// [`run`] without an observer.
pub fn run_quiet(spec: &RunSpec) -> Result<RunArtifacts> {
    run(spec, &mut |_| Ok(()))
}
