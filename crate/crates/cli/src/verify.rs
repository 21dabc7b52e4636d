//! The acceptance suite and the verification report.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use corrugate::analysis::{
    box_counting_dimension, compare_formal_holonomic, holder_estimate, ComparisonRow, RadialColumn,
};
use corrugate::formal::{fcp_step, mu_phi, self_similarity_report, scaling_law_check, FormalPoint, PatternEvaluator};
use corrugate::geom::Vec3;
use corrugate::holonomic::{
    cp_step, embedding_diagnostics, l_matrix_deviation, run_quiet, Diagnostics, Domain, GridSpec, Layer,
    PropertyCheck, RunSpec, Sampling, ScheduleMode, DESK_CONDITIONS, SIGMA,
};
use corrugate::metrics::{ell, isometric_default, metric_ladder, SymForm2, WAVE_A};
use corrugate::schedule::Schedule;
use corrugate::specfun::{bessel_j0, bessel_j0_inv, KAPPA0};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::outdir::{check_manifest, OutDir, FAILED, MANIFEST};
use crate::tables::{self, num};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub measured: String,
    pub threshold: String,
    pub seconds: f64,
    pub limit_seconds: f64,
}

impl Criterion {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {} (need {}; {:.2} s, limit {} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.threshold,
            self.seconds,
            self.limit_seconds
        )
    }
}

/// The budget table of a run: (tau_k, check) per completed k.
#[derive(Debug, Clone)]
pub struct DeskRun {
    pub budget: Vec<(f64, PropertyCheck)>,
    pub diagnostics: Diagnostics,
    pub schedule: Option<Schedule>,
}

type Outcome = (bool, String, String);

// --- tolerances ---
pub const ERR_RATIO: (f64, f64) = (0.3, 0.7);
pub const FORMAL_TOL: f64 = 1e-12;
pub const ETA_TOL: f64 = 1e-12;
pub const J0_ZERO_TOL: f64 = 1e-12;
pub const J0_ROUND_TRIP_TOL: f64 = 1e-10;
pub const J0_HOLDER_CONST: f64 = 4.0;
pub const SIGMA_TOL: f64 = 1e-4;
pub const PERIODICITY_TOL: f64 = 1e-10;
pub const SCALING_TOL: f64 = 1e-10;
pub const DIMENSION_TOL: f64 = 0.1;
pub const HOLDER_TOL: f64 = 0.05;
/// Absolute slack of the sublemma sweep, for rounding at alpha = 0 where both sides vanish.
pub const SUBLEMMA_SLACK: f64 = 1e-14;
/// Slack of the trend comparison: the two runs share their grids and first
/// stages, so equal stages agree to rounding.
pub const TREND_SLACK: f64 = 1e-9;

/// The schedule with L = 10 and M = 10 used by the pattern criteria.
pub fn pattern_schedule() -> Schedule {
    Schedule::new(vec![[10, 20, 30], [40, 50, 60]]).expect("valid schedule")
}

fn within(x: f64, r: (f64, f64)) -> bool {
    r.0 <= x && x <= r.1
}

/// sup |mu - F*| of a first-direction step over the rows with rho <= rho_max.
pub fn restricted_err(prev: &Layer, next: &Layer, k: usize, i: usize, rho_max: f64) -> f64 {
    let dr = prev.grid.spec.ghost - next.grid.spec.ghost;
    let dc = prev.grid.spec.ghost_cols() - next.grid.spec.ghost_cols();
    let mut worst = 0.0f64;
    for r in next.grid.physical_rows() {
        let rho = next.grid.spec.rho(r);
        if rho > rho_max + 1e-12 {
            continue;
        }
        for c in next.grid.physical_cols() {
            let before = SymForm2::pullback(prev.df.at(r + dr, c + dc));
            let eta = (metric_ladder(k, rho) - before).cone_coord(i);
            let mu = before + ell(i).square() * eta;
            worst = worst.max((mu - SymForm2::pullback(next.df.at(r, c))).norm());
        }
    }
    worst
}

fn c1_pullback_law() -> Result<Outcome> {
    let l0 = Layer::initial(GridSpec::sector(0.3, 6001, 4, 70, 1))?;
    let mut errs = Vec::new();
    for n in [64u64, 128, 256] {
        let (next, _) = cp_step(&l0, 1, 1, n)?;
        errs.push(restricted_err(&l0, &next, 1, 1, 0.8));
    }
    let q: Vec<f64> = errs.windows(2).map(|w| w[1] / w[0]).collect();
    Ok((
        q.iter().all(|&x| within(x, ERR_RATIO)),
        format!("err {:.3e}, {:.3e}, {:.3e}; ratios {:.3}, {:.3}", errs[0], errs[1], errs[2], q[0], q[1]),
        format!("ratios in [{}, {}]", ERR_RATIO.0, ERR_RATIO.1),
    ))
}

fn c2_formal_exactness(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let s = Schedule::new(vec![[2, 20, 200], [2_000, 20_000, 200_000], [2_000_000, 20_000_000, 200_000_000]])?;
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let stage = rng.gen_range(0..9usize);
        let rho = 1.0 - rng.gen::<f64>();
        let phi = TAU * rng.gen::<f64>();
        let mut pt = FormalPoint::initial(rho, phi);
        for st in s.stages().take(stage + 1) {
            pt = fcp_step(&pt, s.n(st.0, st.1))?;
        }
        let (k, i) = pt.stage;
        let mu = mu_phi(k, i, rho);
        worst = worst.max((SymForm2::pullback(&pt.map) - mu).norm() / mu.norm().max(1.0));
    }
    Ok((
        worst <= FORMAL_TOL,
        format!("sup |pullback - mu| / max(1, |mu|) = {worst:.3e} over 10000 samples"),
        format!("<= {FORMAL_TOL:e}"),
    ))
}

/// The closed forms of eta_{k,i} on the formal side.
pub fn closed_eta(k: usize, i: usize, rho: f64) -> f64 {
    let kf = k as f64;
    let p = 4.0 * rho.powi(2 * (k as i32 + 1));
    if i == 1 {
        p * (kf + 2.0 - (kf + 1.0) / (WAVE_A * WAVE_A))
    } else {
        p * (kf + 1.0) / (2.0 * WAVE_A * WAVE_A)
    }
}

fn c3_closed_eta() -> Result<Outcome> {
    let s = Schedule::new(vec![[2, 20, 200], [2_000, 20_000, 200_000], [2_000_000, 20_000_000, 200_000_000]])?;
    let mut worst = 0.0f64;
    for j in 0..200 {
        let rho = (j as f64 + 0.5) / 200.0;
        let mut pt = FormalPoint::initial(rho, 0.37 * j as f64);
        for (k, i) in s.stages() {
            let eta = (metric_ladder(k, rho) - SymForm2::pullback(&pt.map)).cone_coord(i);
            let c = closed_eta(k, i, rho);
            worst = worst.max((eta - c).abs() / c.abs().max(1.0));
            pt = fcp_step(&pt, s.n(k, i))?;
        }
    }
    Ok((
        worst <= ETA_TOL,
        format!("sup relative deviation {worst:.3e} over 200 radii, k <= 3"),
        format!("<= {ETA_TOL:e}"),
    ))
}

fn c4_cone_positivity() -> Result<Outcome> {
    let mut min = f64::INFINITY;
    for j in 0..1000 {
        let rho = (j as f64 + 0.5) / 1000.0;
        let h = isometric_default(rho)?.cone_coords();
        min = min.min(h.into_iter().fold(f64::INFINITY, f64::min));
    }
    Ok((min > 0.0, format!("min H_i(Delta) = {min:.3e} over 1000 radii"), "> 0".into()))
}

fn c5_bessel(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let zero = bessel_j0(KAPPA0)?.abs();
    let mut round = 0.0f64;
    for _ in 0..10_000 {
        let y = 1.0 - rng.gen::<f64>();
        round = round.max((bessel_j0(bessel_j0_inv(y)?)? - y).abs());
        let a = 0.01 + (KAPPA0 - 0.02) * rng.gen::<f64>();
        round = round.max((bessel_j0_inv(bessel_j0(a)?)? - a).abs());
    }
    let mut holder = 0.0f64;
    for _ in 0..10_000 {
        let (u, v) = (1.0 - rng.gen::<f64>(), 1.0 - rng.gen::<f64>());
        if u != v {
            holder = holder.max((bessel_j0_inv(u)? - bessel_j0_inv(v)?).abs() / (u - v).abs().sqrt());
        }
    }
    let sigma = (bessel_j0_inv((1.0 + SIGMA).powf(-0.5))? - FRAC_PI_2).abs();
    let mut sub = f64::NEG_INFINITY;
    for j in 0..1000 {
        let a = KAPPA0 * j as f64 / 1000.0;
        let j0 = bessel_j0(a)?;
        sub = sub.max(1.0 + j0 * j0 - 2.0 * j0 * a.cos() - 7.0 * (1.0 - j0 * j0));
    }
    let pass = zero <= J0_ZERO_TOL
        && round <= J0_ROUND_TRIP_TOL
        && holder <= J0_HOLDER_CONST
        && sigma <= SIGMA_TOL
        && sub <= SUBLEMMA_SLACK;
    Ok((
        pass,
        format!(
            "|J0(k0)| = {zero:.2e}, round trip {round:.2e}, Holder ratio {holder:.3}, sigma {sigma:.2e}, sublemma max {sub:.2e}"
        ),
        format!(
            "{J0_ZERO_TOL:e}, {J0_ROUND_TRIP_TOL:e}, {J0_HOLDER_CONST}, {SIGMA_TOL:e}, {SUBLEMMA_SLACK:e}"
        ),
    ))
}

fn c6_periodicity() -> Result<Outcome> {
    let s = pattern_schedule();
    let shift = TAU / (7 * s.l()) as f64;
    let mut worst = 0.0f64;
    for rho in [0.5, 0.7, 0.9] {
        let eval = PatternEvaluator::new(&s, s.depth(), rho)?;
        for j in 0..1000 {
            let phi = TAU * j as f64 / 1000.0;
            worst = worst.max((eval.nu(1, phi + shift) - eval.nu(1, phi)).norm());
        }
    }
    Ok((
        s.l() == 10 && worst <= PERIODICITY_TOL,
        format!("L = {}, sup |nu(phi + 2pi/70) - nu(phi)| = {worst:.3e}", s.l()),
        format!("<= {PERIODICITY_TOL:e}"),
    ))
}

fn c7_scaling() -> Result<Outcome> {
    let s = pattern_schedule();
    let big_m = s.m();
    let mut worst = 0.0f64;
    for n in [2u64, 3] {
        for m in [1, big_m - 1] {
            worst = worst.max(scaling_law_check(&s, n, m, s.depth(), 1000)?);
        }
    }
    Ok((
        worst <= SCALING_TOL,
        format!("M = {big_m}, sup deviation {worst:.3e}"),
        format!("<= {SCALING_TOL:e}"),
    ))
}

fn c8_self_similarity() -> Result<Outcome> {
    let s = pattern_schedule();
    let m = (7 * s.m()) / 10;
    let r = self_similarity_report(&s, 1, m, s.depth())?;
    Ok((
        r.within_bound(),
        format!(
            "rho = {}, {} copies, Hausdorff {:.4e} ({} samples per arc)",
            r.rho, r.copies, r.hausdorff, r.samples_per_arc
        ),
        format!("<= {:.4e}", r.bound),
    ))
}

fn c9_l_matrix() -> Result<Outcome> {
    let l = Layer::initial(GridSpec::sector(0.3, 6001, 8, 70, 1))?;
    let mut dev = Vec::new();
    for n in [32u64, 64, 128] {
        let (next, _) = cp_step(&l, 1, 1, n)?;
        dev.push(l_matrix_deviation(&l, &next, 1, 1, n)?);
    }
    let q: Vec<f64> = dev.windows(2).map(|w| w[1] / w[0]).collect();
    Ok((
        q.iter().all(|&x| within(x, ERR_RATIO)),
        format!("deviation {:.3e}, {:.3e}, {:.3e}; ratios {:.3}, {:.3}", dev[0], dev[1], dev[2], q[0], q[1]),
        format!("ratios in [{}, {}]", ERR_RATIO.0, ERR_RATIO.1),
    ))
}

/// The two runs of the trend criterion: tau1 and tau1 / 10.
pub fn trend_spec(tau1: f64) -> RunSpec {
    let mut spec = RunSpec::new(0.9999, 1, Schedule::new(vec![[12, 80, 800]]).expect("valid schedule"));
    spec.mode = ScheduleMode::Adaptive {
        conditions: DESK_CONDITIONS.to_vec(),
        cap: 1 << 20,
    };
    spec.tau1 = tau1;
    spec.sampling = Sampling {
        spp_rho: 24.0,
        spp_phi: 24.0,
    };
    spec.domain = Domain::Window {
        phi_c: 0.5,
        width: 1e-6,
    };
    spec
}

pub fn trend_rows(tau1: f64) -> Result<(Vec<ComparisonRow>, Schedule)> {
    let spec = trend_spec(tau1);
    let run = run_quiet(&spec)?;
    let schedule = run.schedule.clone().expect("depth one run has a schedule");
    Ok((compare_formal_holonomic(&run.stages, &schedule, (spec.rho0, 1.0))?, schedule))
}

fn c10_trend() -> Result<Outcome> {
    let tau1 = (-1.0f64).exp();
    let (a, sa) = trend_rows(tau1)?;
    let (b, sb) = trend_rows(tau1 / 10.0)?;
    let first = a[0].sup_diff <= tau1 / 3.0 + TREND_SLACK;
    let trend = a.iter().zip(&b).all(|(x, y)| y.sup_diff <= x.sup_diff + TREND_SLACK);
    let fmt = |r: &[ComparisonRow]| r.iter().map(|x| format!("{:.3e}", x.sup_diff)).collect::<Vec<_>>().join(", ");
    Ok((
        first && trend,
        format!(
            "N {:?} -> {:?}; sup_diff [{}] -> [{}]",
            sa.rows()[0],
            sb.rows()[0],
            fmt(&a),
            fmt(&b)
        ),
        format!("(1,1) <= tau1/3 = {:.4} and non-increasing, slack {TREND_SLACK:e}", tau1 / 3.0),
    ))
}

fn c11_desk(cfg: &RunConfig, desk: &mut Option<DeskRun>) -> Result<Outcome> {
    let spec = cfg.run_spec()?;
    let run = run_quiet(&spec)?;
    let d = embedding_diagnostics(run.last_layer(), &run.reports(), cfg.scan_nodes);
    let measured = format!(
        "depth {}, N {:?}: alpha_max {:.4}, X_max {:.4}, lambda_min {:.4} (lambda_C(df0)/2 = {:.4}), {} collisions in {} nodes",
        run.depth,
        run.schedule.as_ref().map(|s| s.rows().to_vec()).unwrap_or_default(),
        d.alpha_max,
        d.x_max,
        d.lambda_min,
        0.5 * d.lambda_c0,
        d.scan.collisions,
        d.scan.nodes
    );
    let pass = d.all_pass() && run.depth == 2;
    *desk = Some(DeskRun {
        budget: run.properties.iter().map(|p| (spec.tau(p.k), *p)).collect(),
        diagnostics: d,
        schedule: run.schedule.clone(),
    });
    Ok((
        pass,
        measured,
        format!("depth 2, alpha < pi/2, X < {SIGMA}, lambda >= lambda_C(df0)/2, no collisions"),
    ))
}

fn c12_calibration() -> Result<Outcome> {
    let circle: Vec<Vec3> = (0..20_000)
        .map(|j| {
            let t = TAU * j as f64 / 20_000.0;
            Vec3::new(t.cos(), t.sin(), 0.0)
        })
        .collect();
    let dim = box_counting_dimension(&circle)?.dimension;
    // sum_n 2^{-n/2} cos(2^n pi rho + phi) is 1/2-Hölder
    let n = 1usize << 20;
    let columns: Vec<RadialColumn> = [0.0, 0.7]
        .iter()
        .map(|&phi| {
            let rho: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
            let values = rho
                .iter()
                .map(|&r| {
                    let s: f64 = (0..40)
                        .map(|m| 2f64.powf(-0.5 * m as f64) * (2f64.powi(m) * std::f64::consts::PI * r + phi).cos())
                        .sum();
                    Vec3::new(s, 0.0, 0.0)
                })
                .collect();
            RadialColumn { rho, values }
        })
        .collect();
    let beta = holder_estimate(&columns)?.exponent;
    Ok((
        (dim - 1.0).abs() <= DIMENSION_TOL && (beta - 0.5).abs() <= HOLDER_TOL,
        format!("circle dimension {dim:.4}, synthetic Holder exponent {beta:.4}"),
        format!("1 +- {DIMENSION_TOL}, 0.5 +- {HOLDER_TOL}"),
    ))
}

const NAMES: [(&str, f64); 12] = [
    ("pullback O(1/N) law", 60.0),
    ("formal exactness", 10.0),
    ("closed-form eta", 1.0),
    ("cone positivity of the isometric default", 1.0),
    ("Bessel suite", 5.0),
    ("normal-pattern periodicity", 5.0),
    ("scaling law at rational radii", 10.0),
    ("self-similarity bound", 60.0),
    ("corrugation-matrix asymptotics", 120.0),
    ("formal vs holonomic proximity trend", 300.0),
    ("embeddedness of the depth-2 desk run", 600.0),
    ("calibration of the analysis tools", 60.0),
];

/// Runs criterion `id` (1..=12). Criterion 11 runs `cfg` and stores its budget table.
pub fn run_criterion(id: u8, cfg: &RunConfig, desk: &mut Option<DeskRun>) -> Criterion {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(id as u64));
    let t = Instant::now();
    let r = match id {
        1 => c1_pullback_law(),
        2 => c2_formal_exactness(&mut rng),
        3 => c3_closed_eta(),
        4 => c4_cone_positivity(),
        5 => c5_bessel(&mut rng),
        6 => c6_periodicity(),
        7 => c7_scaling(),
        8 => c8_self_similarity(),
        9 => c9_l_matrix(),
        10 => c10_trend(),
        11 => c11_desk(cfg, desk),
        12 => c12_calibration(),
        _ => Err(CliError::Config(format!("no criterion {id}"))),
    };
    let seconds = t.elapsed().as_secs_f64();
    let (name, limit) = NAMES.get((id as usize).wrapping_sub(1)).copied().unwrap_or(("unknown", 0.0));
    let (pass, measured, threshold) = r.unwrap_or_else(|e| (false, format!("error: {e}"), "no error".into()));
    Criterion {
        id,
        name,
        pass: pass && seconds < limit,
        measured,
        threshold,
        seconds,
        limit_seconds: limit,
    }
}

pub fn run_all(cfg: &RunConfig, mut progress: impl FnMut(&Criterion)) -> (Vec<Criterion>, Option<DeskRun>) {
    let mut desk = None;
    let out = (1..=12)
        .map(|id| {
            let c = run_criterion(id, cfg, &mut desk);
            progress(&c);
            c
        })
        .collect();
    (out, desk)
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub criteria: Vec<Criterion>,
    pub desk: Option<DeskRun>,
    pub artifacts: String,
    pub text: String,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }
}

/// The P1 budget table, one line per completed k.
pub fn budget_table(desk: &DeskRun) -> String {
    let mut s = String::from("  k  tau_k       P1 lhs      P1 rhs      ok    P2 lhs      P2 rhs      ok    P3 lhs      P3 rhs      ok\n");
    for (tau, p) in &desk.budget {
        s.push_str(&format!(
            "  {}  {:<10.4e}  {:<10.4e}  {:<10.4e}  {:<5} {:<10.4e}  {:<10.4e}  {:<5} {:<10.4e}  {:<10.4e}  {}\n",
            p.k,
            tau,
            p.p1.0,
            p.p1.1,
            p.p1_ok(),
            p.p2.0,
            p.p2.1,
            p.p2_ok(),
            p.p3.0,
            p.p3.1,
            p.p3_ok()
        ));
    }
    s
}

/// Checks the artifacts of `cfg.outdir` if there are any, runs the acceptance
/// suite and writes the report under `verify/`.
pub fn cmd_verify(cfg: &RunConfig, progress: impl FnMut(&Criterion)) -> Result<VerifyReport> {
    cfg.validate()?;
    let root = &cfg.outdir;
    let artifacts = if root.join(MANIFEST).exists() || root.join(FAILED).exists() {
        let files = check_manifest(root)?;
        format!("{} files in {} match the manifest", files.len(), root.display())
    } else {
        format!(
            "no build in {}; criterion 11 builds the desk run in memory (run `corrugate build` to write artifacts)",
            root.display()
        )
    };
    let out = OutDir::lock(root)?;
    let (criteria, desk) = run_all(cfg, progress);

    let mut text = String::from("verification report\n\n");
    text.push_str(&format!("artifacts: {artifacts}\n\ncriteria:\n"));
    for c in &criteria {
        text.push_str(&format!("  {}\n", c.line()));
    }
    let passed = criteria.iter().filter(|c| c.pass).count();
    text.push_str(&format!("\n{passed} of {} criteria pass\n", criteria.len()));
    if let Some(d) = &desk {
        text.push_str("\nbudget table of the desk run (P1: |f_k - f_{k-1}| <= tau_k):\n");
        text.push_str(&budget_table(d));
        let g = &d.diagnostics;
        text.push_str(&format!(
            "\ndiagnostics: alpha_max {} X_max {} lambda_min {} lambda_C(df0) {} scan {} nodes stride {} collisions {}\n",
            g.alpha_max, g.x_max, g.lambda_min, g.lambda_c0, g.scan.nodes, g.scan.stride, g.scan.collisions
        ));
    }
    text.push_str("\ncsv tables (header row, fixed column order):\n");
    text.push_str(&tables::describe());
    out.write("verify/report.txt", &text)?;

    let mut w = tables::writer(&out, tables::CRITERIA, tables::CRITERIA)?;
    for c in &criteria {
        w.write_record([
            c.id.to_string(),
            c.name.to_string(),
            c.pass.to_string(),
            c.measured.clone(),
            c.threshold.clone(),
            num(c.seconds),
            num(c.limit_seconds),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(out.path(tables::CRITERIA), e))?;
    let mut w = tables::writer(&out, tables::P1_BUDGET, tables::P1_BUDGET)?;
    if let Some(d) = &desk {
        for (tau, p) in &d.budget {
            let mut row = tables::property_row(p, *tau);
            row.pop();
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| CliError::io(out.path(tables::P1_BUDGET), e))?;
    Ok(VerifyReport {
        criteria,
        desk,
        artifacts,
        text,
    })
}
