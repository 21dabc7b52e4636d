use std::io::Write;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::holonomic::diagnostics::mesh_nodes;
use crate::holonomic::grid::FieldGrid;

/// Writes the annulus of `grid` as an OBJ mesh: "v" lines in row-major node
/// order, then each quad as two triangles with 1-based indices. A ring also
/// gets the faces closing it across phi = 0. `stride` decimates rows and columns.
pub fn write_obj<W: Write>(out: &mut W, grid: &FieldGrid, stride: usize) -> Result<()> {
    let (nr, nc, periodic, pts) = mesh_nodes(grid, stride);
    writeln!(out, "# stage {} {}", grid.layer.0, grid.layer.1)?;
    write_mesh_obj(out, nr, nc, periodic, &pts)
}

/// OBJ body of a row-major `nr` x `nc` mesh of nodes.
pub fn write_mesh_obj<W: Write>(out: &mut W, nr: usize, nc: usize, periodic: bool, pts: &[Vec3]) -> Result<()> {
    if pts.len() != nr * nc {
        return Err(Error::Format(format!("{} nodes for a {nr} x {nc} mesh", pts.len())));
    }
    writeln!(out, "# rows {nr} cols {nc} wraparound {periodic}")?;
    for p in pts {
        writeln!(out, "v {:.17e} {:.17e} {:.17e}", p.x, p.y, p.z)?;
    }
    let id = |r: usize, c: usize| r * nc + c + 1;
    let last_col = if periodic { nc } else { nc.saturating_sub(1) };
    for r in 0..nr.saturating_sub(1) {
        for c in 0..last_col {
            let c1 = (c + 1) % nc;
            let (a, b, d, e) = (id(r, c), id(r, c1), id(r + 1, c1), id(r + 1, c));
            writeln!(out, "f {a} {b} {d}")?;
            writeln!(out, "f {a} {d} {e}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomic::grid::{initial_embedding_grid, GridSpec, PhiLayout};

    fn counts(text: &str) -> (usize, usize, usize) {
        let v = text.lines().filter(|l| l.starts_with("v ")).count();
        let f: Vec<&str> = text.lines().filter(|l| l.starts_with("f ")).collect();
        let max = f
            .iter()
            .flat_map(|l| l.split_whitespace().skip(1).map(|x| x.parse::<usize>().unwrap()))
            .max()
            .unwrap();
        (v, f.len(), max)
    }

    #[test]
    fn ring_mesh_wraps_around() {
        let g = initial_embedding_grid(GridSpec::sector(0.5, 5, 2, 7, 3)).unwrap();
        let mut buf = Vec::new();
        write_obj(&mut buf, &g, 1).unwrap();
        let (v, f, max) = counts(std::str::from_utf8(&buf).unwrap());
        assert_eq!(v, 5 * 21);
        assert_eq!(f, 2 * 4 * 21);
        assert_eq!(max, v);
        let text = String::from_utf8(buf).unwrap();
        // the last column connects back to the first
        assert!(text.lines().any(|l| l == "f 21 1 22"));
    }

    #[test]
    fn window_mesh_is_open() {
        let spec = GridSpec {
            rho0: 0.5,
            n_rho: 5,
            ghost: 0,
            phi_count: 700,
            cols: 8,
            layout: PhiLayout::Window { col0: 3, ghost: 1 },
        };
        let g = initial_embedding_grid(spec).unwrap();
        let mut buf = Vec::new();
        write_obj(&mut buf, &g, 1).unwrap();
        let (v, f, _) = counts(std::str::from_utf8(&buf).unwrap());
        assert_eq!(v, 5 * 6);
        assert_eq!(f, 2 * 4 * 5);
    }
}
