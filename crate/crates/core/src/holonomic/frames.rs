use crate::corrugation::{corrugation_frame, Corrugation};
use crate::error::{Error, Result};
use crate::formal::lmat;
use crate::geom::Frame;
use crate::holonomic::step::Layer;
use crate::metrics::{metric_ladder, wavefront, SymForm2};

/// Holonomic L-matrix of stage (k, i) at one node: F_{k,i-1}^T F_{k,i-1/2},
/// where F_{k,i-1/2} has w along df_{k,i}(w_i) and the normal of f_{k,i}.
pub fn l_matrix(before: &Frame, after_df: &crate::geom::LinMap23, i: usize) -> Option<Frame> {
    corrugation_frame(after_df, i).map(|half| before.transpose() * half)
}

/// sup over the annulus of the Frobenius distance between the holonomic
/// L-matrix of stage (k, i) and the rotation by theta = alpha cos(2 pi N varpi_i).
/// `next` must be the output of the step with corrugation number `n` applied to `prev`.
pub fn l_matrix_deviation(prev: &Layer, next: &Layer, k: usize, i: usize, n: u64) -> Result<f64> {
    let (ps, ns) = (prev.grid.spec, next.grid.spec);
    let dr = ps.ghost - ns.ghost;
    let dc = ps.ghost_cols() - ns.ghost_cols();
    let mut worst = 0.0f64;
    for r in next.grid.physical_rows() {
        let rho = ns.rho(r);
        let g = metric_ladder(k, rho);
        for c in next.grid.physical_cols() {
            let phi = ns.phi(c as i64);
            let df = prev.df.at(r + dr, c + dc);
            let eta = (g - SymForm2::pullback(df)).cone_coord(i).max(0.0);
            let corr = Corrugation::new(df, i, eta).ok_or_else(|| {
                Error::Consistency(format!("degenerate differential at rho = {rho}, phi = {phi}"))
            })?;
            let theta = corr.theta(n as f64 * wavefront(i, rho, phi));
            let l = l_matrix(&corr.frame, next.df.at(r, c), i)
                .ok_or_else(|| Error::Consistency(format!("degenerate corrugated map at rho = {rho}")))?;
            worst = worst.max((l - lmat(theta)).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomic::grid::GridSpec;
    use crate::holonomic::step::cp_step;

    #[test]
    fn l_matrix_approaches_the_rotation() {
        let spec = GridSpec::sector(0.3, 6001, 8, 70, 1);
        let l = Layer::initial(spec).unwrap();
        let dev: Vec<f64> = [32u64, 64]
            .iter()
            .map(|&n| {
                let (next, _) = cp_step(&l, 1, 1, n).unwrap();
                l_matrix_deviation(&l, &next, 1, 1, n).unwrap()
            })
            .collect();
        let ratio = dev[1] / dev[0];
        assert!((0.3..=0.7).contains(&ratio), "{dev:?}");
    }
}
