use corrugate::analysis::{compare_samples, telescoped_bound, ComparisonRow, StageSamples};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::outdir::{check_manifest, OutDir};
use crate::tables::{self, num};

#[derive(Debug, Clone)]
pub struct CompareSummary {
    pub rows: Vec<ComparisonRow>,
    pub bounds: Vec<f64>,
    pub constants: Vec<f64>,
}

/// Compares the stored samples of the build in `cfg.outdir` with the formal
/// process of the schedule the build used.
pub fn cmd_compare(cfg: &RunConfig) -> Result<CompareSummary> {
    check_manifest(&cfg.outdir)?;
    let out = OutDir::lock(&cfg.outdir)?;
    let schedule = tables::read_schedule(&out.path(tables::SCHEDULE))?;
    let stored = tables::read_samples(&out.path(tables::SAMPLES))?;
    let devs = tables::read_target_devs(&out.path(tables::STAGES))?;
    if devs.len() != stored.len() {
        return Err(CliError::Config(format!(
            "{} stages in {} but {} in {}",
            devs.len(),
            tables::STAGES,
            stored.len(),
            tables::SAMPLES
        )));
    }
    let stages: Vec<StageSamples> = stored
        .iter()
        .map(|((k, i, n), pts)| StageSamples {
            k: *k,
            i: *i,
            n: *n,
            samples: pts,
        })
        .collect();
    let rows = compare_samples(&stages, &schedule, cfg.k_interval())?;
    let (constants, bounds) = telescoped_bound(&rows, &devs);

    let mut w = tables::writer(&out, tables::COMPARE, tables::COMPARE)?;
    for ((r, b), st) in rows.iter().zip(&bounds).zip(&stages) {
        w.write_record([
            r.k.to_string(),
            r.i.to_string(),
            st.n.to_string(),
            num(r.sup_diff),
            num(r.sup_target_diff),
            num(*b),
            num(r.k_interval.0),
            num(r.k_interval.1),
            r.samples.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(out.path(tables::COMPARE), e))?;
    let mut w = tables::writer(&out, tables::COMPARE_CONSTANTS, tables::COMPARE_CONSTANTS)?;
    for (k, c) in constants.iter().enumerate() {
        w.write_record([(k + 1).to_string(), num(*c)])?;
    }
    w.flush().map_err(|e| CliError::io(out.path(tables::COMPARE_CONSTANTS), e))?;
    Ok(CompareSummary {
        rows,
        bounds,
        constants,
    })
}
