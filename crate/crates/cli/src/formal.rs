use std::f64::consts::TAU;

use corrugate::formal::{initial_frame, scaling_law_check, self_similarity_report, PatternEvaluator};
use corrugate::geom::Vec3;
use corrugate::schedule::Schedule;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::outdir::OutDir;
use crate::tables::{self, num};

/// What `formal` computed, for printing.
#[derive(Debug, Clone, Default)]
pub struct FormalSummary {
    pub pattern_rows: usize,
    pub normal_rows: usize,
    /// (rho, hausdorff, bound, copies, sub-patterns).
    pub self_similarity: Option<(f64, f64, f64, u64, Option<u64>)>,
    /// (n, m, deviation).
    pub scaling: Vec<(u64, u64, f64)>,
    pub files: Vec<String>,
}

fn pattern_record(rho: f64, phi: f64, v: &Vec3, stage: (usize, usize)) -> [String; 7] {
    [
        num(rho),
        num(phi),
        num(v.x),
        num(v.y),
        num(v.z),
        stage.0.to_string(),
        stage.1.to_string(),
    ]
}

/// Radius m / M used for the self-similarity report: the one closest to 0.7.
pub fn self_similarity_m(schedule: &Schedule) -> Option<u64> {
    let big_m = schedule.m();
    (big_m >= 3).then(|| ((0.7 * big_m as f64).round() as u64).clamp(1, big_m - 2))
}

/// Dumps the normal patterns nu and normals n of the formal maps on the
/// circles of `cfg`, with the self-similarity and scaling reports.
///
/// `pattern_nu` holds F_0^T n_{k,i} on the arc [0, 2 pi / (7 L)] for every
/// stage; `pattern_normal` holds n_{k,i} on the whole circle.
pub fn cmd_formal(cfg: &RunConfig) -> Result<FormalSummary> {
    cfg.validate()?;
    let schedule = cfg.schedule()?;
    let out = OutDir::lock(&cfg.outdir)?;
    let kstar = schedule.depth();
    let mut sum = FormalSummary::default();
    let samples = cfg.formal_samples.max(1);
    let arc = if kstar == 0 { TAU } else { TAU / (7 * schedule.l()) as f64 };
    let stages: Vec<(usize, usize)> = if kstar == 0 { vec![(0, 0)] } else { schedule.stages().collect() };

    let mut nu = tables::writer(&out, tables::PATTERN_NU, tables::PATTERN_NU)?;
    let mut normal = tables::writer(&out, tables::PATTERN_NORMAL, tables::PATTERN_NORMAL)?;
    for &rho in &cfg.formal_rho {
        let eval = PatternEvaluator::new(&schedule, kstar, rho)?;
        for &(k, i) in &stages {
            for s in 0..samples {
                let phi = arc * s as f64 / samples as f64;
                let n = eval.frame(k, i, phi).column(2).into_owned();
                let v = initial_frame(rho, phi).transpose() * n;
                nu.write_record(pattern_record(rho, phi, &v, (k, i)))?;
                sum.pattern_rows += 1;
            }
            for s in 0..samples {
                let phi = TAU * s as f64 / samples as f64;
                let n = eval.frame(k, i, phi).column(2).into_owned();
                normal.write_record(pattern_record(rho, phi, &n, (k, i)))?;
                sum.normal_rows += 1;
            }
        }
    }
    for (w, t) in [(&mut nu, tables::PATTERN_NU), (&mut normal, tables::PATTERN_NORMAL)] {
        w.flush().map_err(|e| CliError::io(out.path(t), e))?;
        sum.files.push(t.to_string());
    }

    let mut ss = tables::writer(&out, tables::SELF_SIMILARITY, tables::SELF_SIMILARITY)?;
    if let Some(m) = self_similarity_m(&schedule).filter(|_| kstar >= 1) {
        let r = self_similarity_report(&schedule, 1, m, kstar)?;
        let ratio = schedule.n(1, 3) as f64 / schedule.n(1, 2) as f64;
        ss.write_record([
            r.j.to_string(),
            num(r.rho),
            r.copies.to_string(),
            r.sub_pattern_count.map(|c| c.to_string()).unwrap_or_default(),
            num(ratio),
            r.samples_per_arc.to_string(),
            num(r.hausdorff),
            num(r.bound),
            r.within_bound().to_string(),
        ])?;
        sum.self_similarity = Some((r.rho, r.hausdorff, r.bound, r.copies, r.sub_pattern_count));
    }
    ss.flush().map_err(|e| CliError::io(out.path(tables::SELF_SIMILARITY), e))?;
    sum.files.push(tables::SELF_SIMILARITY.to_string());

    let mut sc = tables::writer(&out, tables::SCALING, tables::SCALING)?;
    let big_m = schedule.m();
    if kstar >= 1 && big_m >= 2 {
        let mut ms = vec![1, big_m - 1];
        ms.dedup();
        for n in [2u64, 3] {
            for &m in &ms {
                let d = scaling_law_check(&schedule, n, m, kstar, 1000)?;
                sc.write_record([n.to_string(), m.to_string(), kstar.to_string(), num(d)])?;
                sum.scaling.push((n, m, d));
            }
        }
    }
    sc.flush().map_err(|e| CliError::io(out.path(tables::SCALING), e))?;
    sum.files.push(tables::SCALING.to_string());
    Ok(sum)
}
