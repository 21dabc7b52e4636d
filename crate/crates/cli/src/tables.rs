//! CSV tables written by the subcommands. Every table starts with a header row
//! and keeps the column order listed in [`TABLES`].

use std::fs::File;
use std::path::Path;

use corrugate::geom::LinMap23;
use corrugate::holonomic::{PropertyCheck, SamplePoint, StageRecord, StepReport};
use corrugate::schedule::Schedule;

use crate::error::{CliError, Result};
use crate::outdir::OutDir;

pub const REPORTS: &str = "reports.csv";
pub const STAGES: &str = "stages.csv";
pub const CONDITIONS: &str = "conditions.csv";
pub const TRIALS: &str = "trials.csv";
pub const SCHEDULE: &str = "schedule.csv";
pub const PROPERTIES: &str = "properties.csv";
pub const SAMPLES: &str = "samples.csv";
pub const DIAGNOSTICS: &str = "diagnostics.csv";
pub const SNAPSHOT_INDEX: &str = "snapshots/index.csv";
pub const PATTERN_NU: &str = "formal/pattern_nu.csv";
pub const PATTERN_NORMAL: &str = "formal/pattern_normal.csv";
pub const SELF_SIMILARITY: &str = "formal/self_similarity.csv";
pub const SCALING: &str = "formal/scaling.csv";
pub const COMPARE: &str = "compare/compare.csv";
pub const COMPARE_CONSTANTS: &str = "compare/constants.csv";
pub const CRITERIA: &str = "verify/criteria.csv";
pub const P1_BUDGET: &str = "verify/p1_budget.csv";

const SAMPLE_COLS: [&str; 17] = [
    "k", "i", "N", "rho", "phi", "df00", "df01", "df10", "df11", "df20", "df21", "L00", "L01", "L10", "L11", "L20",
    "L21",
];

/// Every table with its header.
pub const TABLES: &[(&str, &[&str])] = &[
    (REPORTS, &["k", "i", "N", "err", "eta_min", "alpha_max", "X_max", "lambda_min"]),
    (
        STAGES,
        &["k", "i", "N", "disp", "target_dev", "x_argmax_row", "x_argmax_col", "n_rho", "phi_count", "cols"],
    ),
    (CONDITIONS, &["k", "i", "N", "condition", "value", "bound", "enforced", "ok"]),
    (TRIALS, &["k", "i", "N", "failed"]),
    (SCHEDULE, &["k", "N1", "N2", "N3"]),
    (
        PROPERTIES,
        &[
            "k", "tau_k", "p1_lhs", "p1_rhs", "p1_ok", "p2_lhs", "p2_rhs", "p2_ok", "p3_lhs", "p3_rhs", "p3_ok", "A",
        ],
    ),
    (SAMPLES, &SAMPLE_COLS),
    (
        DIAGNOSTICS,
        &[
            "alpha_max", "X_max", "lambda_min", "lambda_c0", "alpha_ok", "X_ok", "lambda_ok", "scan_nodes",
            "scan_stride", "collisions",
        ],
    ),
    (SNAPSHOT_INDEX, &["k", "i", "rows", "cols", "wraparound", "file"]),
    ("snapshots/stage_K_I.csv", &["row", "col", "rho", "phi", "x", "y", "z"]),
    (PATTERN_NU, &["rho", "phi", "nx", "ny", "nz", "stage_k", "stage_i"]),
    (PATTERN_NORMAL, &["rho", "phi", "nx", "ny", "nz", "stage_k", "stage_i"]),
    (
        SELF_SIMILARITY,
        &["j", "rho", "copies", "sub_patterns", "n13_over_n12", "samples_per_arc", "hausdorff", "bound", "ok"],
    ),
    (SCALING, &["n", "m", "kstar", "deviation"]),
    (COMPARE, &["k", "i", "N", "sup_diff", "sup_target_diff", "bound", "k_lo", "k_hi", "samples"]),
    (COMPARE_CONSTANTS, &["k", "C_k"]),
    (CRITERIA, &["id", "name", "pass", "measured", "threshold", "seconds", "limit_seconds"]),
    (
        P1_BUDGET,
        &["k", "tau_k", "p1_lhs", "p1_rhs", "p1_ok", "p2_lhs", "p2_rhs", "p2_ok", "p3_lhs", "p3_rhs", "p3_ok"],
    ),
];

pub fn header(name: &str) -> &'static [&'static str] {
    TABLES
        .iter()
        .find(|t| t.0 == name)
        .map(|t| t.1)
        .unwrap_or_else(|| panic!("no table {name}"))
}

/// A CSV writer on `rel` with its header already written.
pub fn writer(out: &OutDir, rel: &str, table: &str) -> Result<csv::Writer<File>> {
    let mut w = csv::Writer::from_writer(out.create(rel)?);
    w.write_record(header(table))?;
    Ok(w)
}

pub fn num(x: f64) -> String {
    x.to_string()
}

fn lin(m: &LinMap23) -> [String; 6] {
    [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)].map(|(r, c)| num(m[(r, c)]))
}

pub fn report_row(r: &StepReport) -> Vec<String> {
    vec![
        r.k.to_string(),
        r.i.to_string(),
        r.n.to_string(),
        num(r.err),
        num(r.eta_min),
        num(r.alpha_max),
        num(r.x_max),
        num(r.lambda_min),
    ]
}

pub fn stage_row(s: &StageRecord) -> Vec<String> {
    let r = &s.report;
    vec![
        r.k.to_string(),
        r.i.to_string(),
        r.n.to_string(),
        num(r.disp),
        num(r.target_dev),
        r.x_argmax.0.to_string(),
        r.x_argmax.1.to_string(),
        s.level.n_rho.to_string(),
        s.level.phi_count.to_string(),
        s.level.cols.to_string(),
    ]
}

pub fn property_row(p: &PropertyCheck, tau: f64) -> Vec<String> {
    vec![
        p.k.to_string(),
        num(tau),
        num(p.p1.0),
        num(p.p1.1),
        p.p1_ok().to_string(),
        num(p.p2.0),
        num(p.p2.1),
        p.p2_ok().to_string(),
        num(p.p3.0),
        num(p.p3.1),
        p.p3_ok().to_string(),
        num(p.a),
    ]
}

pub fn write_samples(w: &mut csv::Writer<File>, s: &StageRecord) -> Result<()> {
    let r = &s.report;
    for p in &s.samples {
        let mut row = vec![r.k.to_string(), r.i.to_string(), r.n.to_string(), num(p.rho), num(p.phi)];
        row.extend(lin(&p.df));
        row.extend(lin(&p.target));
        w.write_record(&row)?;
    }
    Ok(())
}

pub fn write_schedule(out: &OutDir, s: &Schedule) -> Result<()> {
    let mut w = writer(out, SCHEDULE, SCHEDULE)?;
    for (k, row) in s.rows().iter().enumerate() {
        w.write_record([(k + 1).to_string(), row[0].to_string(), row[1].to_string(), row[2].to_string()])?;
    }
    w.flush().map_err(|e| CliError::io(out.path(SCHEDULE), e))?;
    Ok(())
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Reader::from_reader(f))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, j: usize, path: &Path) -> Result<T> {
    rec.get(j)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| CliError::Config(format!("{}: bad field {j} in {:?}", path.display(), rec)))
}

pub fn read_schedule(path: &Path) -> Result<Schedule> {
    let mut rows = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec?;
        rows.push([field(&rec, 1, path)?, field(&rec, 2, path)?, field(&rec, 3, path)?]);
    }
    Ok(Schedule::new(rows)?)
}

/// Stored samples of one stage, keyed by (k, i, N).
pub type StoredStage = ((usize, usize, u64), Vec<SamplePoint>);

/// Samples grouped by stage.
pub fn read_samples(path: &Path) -> Result<Vec<StoredStage>> {
    let mut out: Vec<StoredStage> = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec?;
        let key = (field(&rec, 0, path)?, field(&rec, 1, path)?, field(&rec, 2, path)?);
        let mut v = [0.0f64; 14];
        for (j, x) in v.iter_mut().enumerate() {
            *x = field(&rec, 3 + j, path)?;
        }
        let m = |o: usize| LinMap23::new(v[o], v[o + 1], v[o + 2], v[o + 3], v[o + 4], v[o + 5]);
        let p = SamplePoint {
            rho: v[0],
            phi: v[1],
            df: m(2),
            target: m(8),
        };
        match out.last_mut() {
            Some((k, pts)) if *k == key => pts.push(p),
            _ => out.push((key, vec![p])),
        }
    }
    Ok(out)
}

/// target_dev per stage from the stages table.
pub fn read_target_devs(path: &Path) -> Result<Vec<f64>> {
    reader(path)?
        .records()
        .map(|rec| field(&rec?, 4, path))
        .collect()
}

/// Documentation of the tables for the report.
pub fn describe() -> String {
    let mut s = String::new();
    for (name, cols) in TABLES {
        s.push_str(&format!("  {name}: {}\n", cols.join(",")));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_report_header_is_fixed() {
        assert_eq!(header(REPORTS).join(","), "k,i,N,err,eta_min,alpha_max,X_max,lambda_min");
        assert_eq!(header(PATTERN_NU).join(","), "rho,phi,nx,ny,nz,stage_k,stage_i");
    }

    #[test]
    fn numbers_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn linear_maps_round_trip_through_the_columns() {
        let m = LinMap23::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let cols = lin(&m);
        let v: Vec<f64> = cols.iter().map(|c| c.parse().unwrap()).collect();
        assert_eq!(LinMap23::new(v[0], v[1], v[2], v[3], v[4], v[5]), m);
    }
}
