use std::fs::File;
use std::io::{BufWriter, Write};

use corrugate::geom::Vec3;
use corrugate::holonomic::write_mesh_obj;

use crate::error::{CliError, Result};
use crate::outdir::{check_manifest, OutDir};
use crate::tables;

/// Converts every stage snapshot of a sealed build into an OBJ mesh under
/// `export/`. Returns the written files.
pub fn cmd_export(outdir: &std::path::Path) -> Result<Vec<String>> {
    check_manifest(outdir)?;
    let out = OutDir::lock(outdir)?;
    let index_path = out.path(tables::SNAPSHOT_INDEX);
    let mut index = csv::Reader::from_reader(File::open(&index_path).map_err(|e| CliError::io(&index_path, e))?);
    let mut written = Vec::new();
    for rec in index.records() {
        let rec = rec?;
        let bad = || CliError::Config(format!("{}: bad row {:?}", index_path.display(), rec));
        let k: usize = rec.get(0).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let i: usize = rec.get(1).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let nr: usize = rec.get(2).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let nc: usize = rec.get(3).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let periodic: bool = rec.get(4).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let file = rec.get(5).ok_or_else(bad)?;
        let snap = out.path(file);
        let mut pts = Vec::with_capacity(nr * nc);
        let mut r = csv::Reader::from_reader(File::open(&snap).map_err(|e| CliError::io(&snap, e))?);
        for row in r.records() {
            let row = row?;
            let c = |j: usize| -> Result<f64> {
                row.get(j)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| CliError::Config(format!("{}: bad row {:?}", snap.display(), row)))
            };
            pts.push(Vec3::new(c(4)?, c(5)?, c(6)?));
        }
        let rel = format!("export/stage_{k}_{i}.obj");
        let path = out.path(&rel);
        let mut w = BufWriter::new(out.create(&rel)?);
        writeln!(w, "# stage {k} {i}").map_err(|e| CliError::io(&path, e))?;
        write_mesh_obj(&mut w, nr, nc, periodic, &pts)?;
        w.flush().map_err(|e| CliError::io(&path, e))?;
        written.push(rel);
    }
    Ok(written)
}
