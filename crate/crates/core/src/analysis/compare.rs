use crate::error::{Error, Result};
use crate::formal::{fcp_step, FormalPoint};
use crate::geom::op_norm;
use crate::holonomic::{SamplePoint, StageRecord};
use crate::schedule::Schedule;

/// sup over the samples of one stage lying in K of |Phi_{k,i} - df_{k,i}|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub k: usize,
    pub i: usize,
    pub sup_diff: f64,
    /// sup |Phi_{k,i} - L_{k,i}|, L the holonomic target differential.
    pub sup_target_diff: f64,
    /// The rho-interval K.
    pub k_interval: (f64, f64),
    pub samples: usize,
}

/// Samples of one holonomic stage.
#[derive(Debug, Clone, Copy)]
pub struct StageSamples<'a> {
    pub k: usize,
    pub i: usize,
    pub n: u64,
    pub samples: &'a [SamplePoint],
}

/// Compares the formal maps Phi_{k,i} of `schedule` with the stored samples of
/// a holonomic run, stage by stage, over the rho-interval K. Norms are operator norms.
pub fn compare_formal_holonomic(
    stages: &[StageRecord],
    schedule: &Schedule,
    k_interval: (f64, f64),
) -> Result<Vec<ComparisonRow>> {
    let stages: Vec<StageSamples> = stages
        .iter()
        .map(|st| StageSamples {
            k: st.report.k,
            i: st.report.i,
            n: st.report.n,
            samples: &st.samples,
        })
        .collect();
    compare_samples(&stages, schedule, k_interval)
}

/// [`compare_formal_holonomic`] on bare samples.
pub fn compare_samples(stages: &[StageSamples], schedule: &Schedule, k_interval: (f64, f64)) -> Result<Vec<ComparisonRow>> {
    let (lo, hi) = k_interval;
    if !(lo <= hi) {
        return Err(Error::Config(format!("empty interval K = [{lo}, {hi}]")));
    }
    let mut ns = Vec::with_capacity(stages.len());
    for (s, st) in stages.iter().enumerate() {
        let (k, i) = (st.k, st.i);
        let expected = (s / 3 + 1, s % 3 + 1);
        if (k, i) != expected {
            return Err(Error::Config(format!("stage {s} is ({k},{i}), expected {expected:?}")));
        }
        if k > schedule.depth() || schedule.n(k, i) != st.n {
            return Err(Error::Config(format!("schedule mismatch at ({k},{i}): the run used N = {}", st.n)));
        }
        ns.push(st.n);
    }
    let mut rows = Vec::with_capacity(stages.len());
    for (s, st) in stages.iter().enumerate() {
        let mut row = ComparisonRow {
            k: st.k,
            i: st.i,
            sup_diff: 0.0,
            sup_target_diff: 0.0,
            k_interval,
            samples: 0,
        };
        for p in st.samples.iter().filter(|p| p.rho >= lo && p.rho <= hi) {
            let mut pt = FormalPoint::initial(p.rho, p.phi);
            for &n in &ns[..=s] {
                pt = fcp_step(&pt, n)?;
            }
            row.sup_diff = row.sup_diff.max(op_norm(&(pt.map - p.df)));
            row.sup_target_diff = row.sup_target_diff.max(op_norm(&(pt.map - p.target)));
            row.samples += 1;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Telescoped bound on sup |Phi_{k,i} - df_{k,i}|: b_s = d_s + C_k b_{s-1}^{1/2},
/// with d_s the measured target deviations |df - L| and C_k the smallest
/// constant with |Phi_{k,i} - L_{k,i}| <= C_k |Phi_{k,i-1} - df_{k,i-1}|^{1/2}
/// over the stages of k. Returns (C_k per k, b_s per stage).
pub fn telescoped_bound(rows: &[ComparisonRow], target_devs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let depth = rows.iter().map(|r| r.k).max().unwrap_or(0);
    let mut c = vec![0.0f64; depth];
    for s in 1..rows.len() {
        let prev = rows[s - 1].sup_diff;
        if prev > 0.0 {
            let kk = rows[s].k - 1;
            c[kk] = c[kk].max(rows[s].sup_target_diff / prev.sqrt());
        }
    }
    let mut b = Vec::with_capacity(rows.len());
    let mut last = 0.0f64;
    for (s, r) in rows.iter().enumerate() {
        let here = if s == 0 {
            // Phi_{1,0} = df_0 exactly
            target_devs[s] + r.sup_target_diff
        } else {
            target_devs[s] + c[r.k - 1] * last.sqrt()
        };
        b.push(here);
        last = here;
    }
    (c, b)
}
