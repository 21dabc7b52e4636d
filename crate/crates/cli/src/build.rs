use std::io::{BufWriter, Write};

use corrugate::holonomic::{
    embedding_diagnostics, mesh_coords, mesh_nodes, run, stride_for, write_obj, Diagnostics, Layer, RunArtifacts,
    RunEvent,
};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::outdir::OutDir;
use crate::tables::{self, num};

/// What a finished build leaves behind.
#[derive(Debug)]
pub struct BuildSummary {
    pub artifacts: RunArtifacts,
    pub diagnostics: Diagnostics,
    /// Files under the output directory, relative to it.
    pub files: Vec<String>,
}

pub fn mesh_file(k: usize) -> String {
    format!("meshes/f_{k}.obj")
}

pub fn snapshot_file(k: usize, i: usize) -> String {
    format!("snapshots/stage_{k}_{i}.csv")
}

/// Runs the corrugation process of `cfg` and writes its artifacts. On failure
/// the partial artifacts stay and a FAILED marker says why.
pub fn cmd_build(cfg: &RunConfig) -> Result<BuildSummary> {
    cfg.validate()?;
    let out = OutDir::lock(&cfg.outdir)?;
    out.start()?;
    match build_into(&out, cfg) {
        Ok(s) => Ok(s),
        Err(e) => {
            out.mark_failed(&e)?;
            Err(e)
        }
    }
}

fn write_snapshot(out: &OutDir, rel: &str, layer: &Layer, max_nodes: usize) -> Result<(usize, usize, bool)> {
    let stride = stride_for(&layer.grid, max_nodes);
    let (nr, nc, periodic, pts) = mesh_nodes(&layer.grid, stride);
    let (rhos, phis) = mesh_coords(&layer.grid, stride);
    let mut w = tables::writer(out, rel, "snapshots/stage_K_I.csv")?;
    for (j, p) in pts.iter().enumerate() {
        let (r, c) = (j / nc, j % nc);
        w.write_record([
            r.to_string(),
            c.to_string(),
            num(rhos[r]),
            num(phis[c]),
            num(p.x),
            num(p.y),
            num(p.z),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(out.path(rel), e))?;
    Ok((nr, nc, periodic))
}

fn build_into(out: &OutDir, cfg: &RunConfig) -> Result<BuildSummary> {
    let mut files = vec!["config.txt".to_string()];
    out.write("config.txt", &cfg.to_text())?;
    let spec = cfg.run_spec()?;
    let flush = |w: &mut csv::Writer<std::fs::File>, rel: &str| w.flush().map_err(|e| CliError::io(out.path(rel), e));

    let mut reports = tables::writer(out, tables::REPORTS, tables::REPORTS)?;
    let mut stages = tables::writer(out, tables::STAGES, tables::STAGES)?;
    let mut conds = tables::writer(out, tables::CONDITIONS, tables::CONDITIONS)?;
    let mut trials = tables::writer(out, tables::TRIALS, tables::TRIALS)?;
    let mut samples = tables::writer(out, tables::SAMPLES, tables::SAMPLES)?;
    let mut index = tables::writer(out, tables::SNAPSHOT_INDEX, tables::SNAPSHOT_INDEX)?;
    let mut props = tables::writer(out, tables::PROPERTIES, tables::PROPERTIES)?;
    for t in [
        tables::REPORTS,
        tables::STAGES,
        tables::CONDITIONS,
        tables::TRIALS,
        tables::SAMPLES,
        tables::SNAPSHOT_INDEX,
        tables::PROPERTIES,
    ] {
        files.push(t.to_string());
    }

    let next_stage = std::cell::Cell::new((1usize, 1usize));
    let mut observer = |ev: RunEvent<'_>| -> corrugate::Result<()> {
        let r = (|| -> Result<()> {
            match ev {
                RunEvent::Stage { record, layer } => {
                    let rep = &record.report;
                    next_stage.set(if rep.i == 3 { (rep.k + 1, 1) } else { (rep.k, rep.i + 1) });
                    reports.write_record(tables::report_row(rep))?;
                    stages.write_record(tables::stage_row(record))?;
                    let enforced = match &spec.mode {
                        corrugate::holonomic::ScheduleMode::Adaptive { conditions, .. } => conditions.clone(),
                        corrugate::holonomic::ScheduleMode::Explicit => Vec::new(),
                    };
                    for c in &record.checks {
                        conds.write_record([
                            rep.k.to_string(),
                            rep.i.to_string(),
                            rep.n.to_string(),
                            c.condition.to_string(),
                            num(c.value),
                            num(c.bound),
                            enforced.contains(&c.condition).to_string(),
                            c.ok.to_string(),
                        ])?;
                    }
                    for (n, failed) in &record.trials {
                        trials.write_record([
                            rep.k.to_string(),
                            rep.i.to_string(),
                            n.to_string(),
                            failed.map(|c| c.to_string()).unwrap_or_default(),
                        ])?;
                    }
                    tables::write_samples(&mut samples, record)?;
                    let rel = snapshot_file(rep.k, rep.i);
                    let (nr, nc, periodic) = write_snapshot(out, &rel, layer, cfg.snapshot_nodes)?;
                    index.write_record([
                        rep.k.to_string(),
                        rep.i.to_string(),
                        nr.to_string(),
                        nc.to_string(),
                        periodic.to_string(),
                        rel.clone(),
                    ])?;
                    files.push(rel);
                    for (w, t) in [
                        (&mut reports, tables::REPORTS),
                        (&mut stages, tables::STAGES),
                        (&mut conds, tables::CONDITIONS),
                        (&mut trials, tables::TRIALS),
                        (&mut samples, tables::SAMPLES),
                        (&mut index, tables::SNAPSHOT_INDEX),
                    ] {
                        flush(w, t)?;
                    }
                }
                RunEvent::Completed { k, layer, check } => {
                    let rel = mesh_file(k);
                    let path = out.path(&rel);
                    let mut w = BufWriter::new(out.create(&rel)?);
                    write_obj(&mut w, &layer.grid, stride_for(&layer.grid, cfg.mesh_nodes))?;
                    w.flush().map_err(|e| CliError::io(&path, e))?;
                    files.push(rel);
                    if let Some(p) = check {
                        props.write_record(tables::property_row(p, spec.tau(k)))?;
                        flush(&mut props, tables::PROPERTIES)?;
                    }
                }
            }
            Ok(())
        })();
        r.map_err(|e| match e {
            CliError::Core(e) => e,
            other => corrugate::Error::Format(other.to_string()),
        })
    };
    let artifacts = run(&spec, &mut observer).map_err(|e| match e {
        corrugate::Error::Config(_) => CliError::Core(e),
        e => CliError::Stage {
            k: next_stage.get().0,
            i: next_stage.get().1,
            source: e,
        },
    })?;
    for (w, t) in [(&mut reports, tables::REPORTS), (&mut props, tables::PROPERTIES)] {
        flush(w, t)?;
    }

    if artifacts.depth >= 1 {
        // the stages only announce f_1, f_2, ...
        let rel = mesh_file(0);
        let path = out.path(&rel);
        let f0 = &artifacts.layers[0];
        let mut w = BufWriter::new(out.create(&rel)?);
        write_obj(&mut w, &f0.grid, stride_for(&f0.grid, cfg.mesh_nodes))?;
        w.flush().map_err(|e| CliError::io(&path, e))?;
        files.push(rel);
    }
    if let Some(s) = &artifacts.schedule {
        tables::write_schedule(out, s)?;
        files.push(tables::SCHEDULE.to_string());
    }
    let diagnostics = embedding_diagnostics(artifacts.last_layer(), &artifacts.reports(), cfg.scan_nodes);
    let mut w = tables::writer(out, tables::DIAGNOSTICS, tables::DIAGNOSTICS)?;
    let d = &diagnostics;
    w.write_record([
        num(d.alpha_max),
        num(d.x_max),
        num(d.lambda_min),
        num(d.lambda_c0),
        d.alpha_ok.to_string(),
        d.x_ok.to_string(),
        d.lambda_ok.to_string(),
        d.scan.nodes.to_string(),
        d.scan.stride.to_string(),
        d.scan.collisions.to_string(),
    ])?;
    flush(&mut w, tables::DIAGNOSTICS)?;
    files.push(tables::DIAGNOSTICS.to_string());
    out.seal(&files)?;
    Ok(BuildSummary {
        artifacts,
        diagnostics,
        files,
    })
}
