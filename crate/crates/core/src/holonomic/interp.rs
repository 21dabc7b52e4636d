use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::geom::{LinMap23, Vec3};
use crate::holonomic::diff::DiffField;
use crate::holonomic::grid::{FieldGrid, GridSpec, PhiLayout};
use crate::holonomic::step::Layer;

/// Stencil reach of [`lagrange6`] beyond the base node, in source spacings.
pub const INTERP_REACH: usize = 3;

/// Weights of the degree-5 Lagrange interpolant through nodes at offsets
/// -2..=3, evaluated at offset t.
pub fn lagrange6(t: f64) -> [f64; 6] {
    let mut w = [0.0; 6];
    for (a, slot) in w.iter_mut().enumerate() {
        let xa = a as f64 - 2.0;
        let mut p = 1.0;
        for b in 0..6 {
            if b != a {
                let xb = b as f64 - 2.0;
                p *= (t - xb) / (xa - xb);
            }
        }
        *slot = p;
    }
    w
}

/// Base index and weights locating x (in source index units) inside `0..n`.
fn locate(x: f64, n: usize, what: &str) -> Result<(usize, [f64; 6])> {
    let j = x.floor();
    let t = x - j;
    if j < 2.0 || j + 3.0 > n as f64 - 1.0 + 1e-9 {
        return Err(Error::Consistency(format!(
            "{what} position {x:.3} has no interpolation stencil in 0..{n}"
        )));
    }
    Ok((j as usize - 2, lagrange6(t)))
}

/// Interpolates a layer onto a finer grid covering a sub-region of it. Nodes and
/// differentials are both interpolated, which keeps the differential free of
/// the finite-difference noise a re-differentiation would bring.
pub fn refine(layer: &Layer, target: GridSpec) -> Result<Layer> {
    target.validate()?;
    let src = &layer.grid;
    let ss = src.spec;
    match (ss.layout, target.layout) {
        (PhiLayout::Sector { symmetry: a }, PhiLayout::Sector { symmetry: b }) if a == b => {}
        (PhiLayout::Window { .. }, PhiLayout::Window { .. }) => {}
        _ => {
            return Err(Error::Config(
                "refinement needs matching layouts and sector symmetry".into(),
            ))
        }
    }
    let hr = ss.h_rho();
    let hp = ss.h_phi();
    let row_w = (0..target.total_rows())
        .map(|r| locate((target.rho(r) - ss.rho(0)) / hr, src.rows(), "rho"))
        .collect::<Result<Vec<_>>>()?;
    // per target column: six (stored column, rotation) pairs and weights
    let mut col_w: Vec<([(usize, Option<Matrix3<f64>>); 6], [f64; 6])> = Vec::with_capacity(target.cols);
    for c in 0..target.cols {
        let x = (target.phi(c as i64) - ss.phi(0)) / hp;
        let (base, w) = if ss.is_periodic() {
            let j = x.floor();
            (j as i64 - 2, lagrange6(x - j))
        } else {
            let (b, w) = locate(x, src.cols(), "phi")?;
            (b as i64, w)
        };
        let mut refs = [(0usize, None); 6];
        for (a, slot) in refs.iter_mut().enumerate() {
            let (sc, q) = src.resolve_col(base + a as i64);
            *slot = (sc, (q != 0).then(|| src.sector_rotation(q)));
        }
        col_w.push((refs, w));
    }
    let m = src.cols();
    let mut nodes = Vec::with_capacity(target.total_rows() * target.cols);
    let mut data = Vec::with_capacity(target.total_rows() * target.cols);
    for (r0, wr) in &row_w {
        for (refs, wc) in &col_w {
            let mut p = Vec3::zeros();
            let mut d = LinMap23::zeros();
            for (b, (sc, rot)) in refs.iter().enumerate() {
                let mut pc = Vec3::zeros();
                let mut dc = LinMap23::zeros();
                for (a, w) in wr.iter().enumerate() {
                    let j = (r0 + a) * m + sc;
                    pc += src.nodes[j] * *w;
                    dc += layer.df.data[j] * *w;
                }
                match rot {
                    Some(q) => {
                        p += q * pc * wc[b];
                        d += q * dc * wc[b];
                    }
                    None => {
                        p += pc * wc[b];
                        d += dc * wc[b];
                    }
                }
            }
            nodes.push(p);
            data.push(d);
        }
    }
    let mut grid = FieldGrid::from_nodes(target, nodes, src.layer);
    grid.freq_rho = src.freq_rho;
    grid.freq_phi = src.freq_phi;
    let df = DiffField {
        rows: target.total_rows(),
        cols: target.cols,
        data,
        method: layer.df.method,
    };
    Ok(Layer { grid, df })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{initial_differential, initial_embedding};

    #[test]
    fn weights_reproduce_quintics() {
        for &t in &[0.0, 0.25, 0.5, 0.9] {
            let w = lagrange6(t);
            for deg in 0..=5 {
                let exact = t.powi(deg);
                let got: f64 = (0..6).map(|a| w[a] * (a as f64 - 2.0).powi(deg)).sum();
                assert!((got - exact).abs() < 1e-12, "deg {deg} t {t}");
            }
        }
    }

    #[test]
    fn refining_f0_is_accurate_in_both_layouts() {
        let coarse = GridSpec::sector(0.5, 41, 8, 7, 12);
        let fine = GridSpec::sector(0.5, 97, 4, 7, 30);
        let l = Layer::initial(coarse).unwrap();
        let r = refine(&l, fine).unwrap();
        for row in 0..r.grid.rows() {
            for c in 0..fine.cols {
                let (rho, phi) = (fine.rho(row), fine.phi(c as i64));
                assert!((r.grid.nodes[row * fine.cols + c] - initial_embedding(rho, phi)).norm() < 1e-7);
                assert!((r.df.at(row, c) - initial_differential(rho, phi)).norm() < 1e-7);
            }
        }
        let wc = GridSpec {
            rho0: 0.5,
            n_rho: 41,
            ghost: 8,
            phi_count: 84,
            cols: 40,
            layout: PhiLayout::Window { col0: -5, ghost: 8 },
        };
        let wf = GridSpec {
            rho0: 0.5,
            n_rho: 81,
            ghost: 4,
            phi_count: 168,
            cols: 30,
            layout: PhiLayout::Window { col0: 4, ghost: 4 },
        };
        let r = refine(&Layer::initial(wc).unwrap(), wf).unwrap();
        for row in 0..r.grid.rows() {
            for c in 0..wf.cols {
                let (rho, phi) = (wf.rho(row), wf.phi(c as i64));
                assert!((r.grid.nodes[row * wf.cols + c] - initial_embedding(rho, phi)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn refining_outside_the_source_is_an_error() {
        let coarse = GridSpec::sector(0.5, 41, 0, 7, 12);
        let fine = GridSpec::sector(0.5, 81, 4, 7, 24);
        assert!(refine(&Layer::initial(coarse).unwrap(), fine).is_err());
    }
}
