//! Pointwise algebra of a single corrugation: the adapted frame, the vector u,
//! the amplitude and the corrugated differential target.

use std::f64::consts::TAU;

use crate::geom::{outer, Frame, LinMap23, Vec2, Vec3};
use crate::metrics::{ell, kernel, transverse};
use crate::specfun::j0_inv;

/// Frame (t, w, n) adapted to a differential and direction i:
/// w = df(w_i)/|df(w_i)|, n = normalised df(v_i) x df(w_i), t = w x n.
/// Returns None when df is degenerate along the relevant directions.
pub fn corrugation_frame(df: &LinMap23, i: usize) -> Option<Frame> {
    let dw = df * kernel(i);
    let dv = df * transverse(i);
    let wn = dw.norm();
    let cross = dv.cross(&dw);
    let cn = cross.norm();
    if !(wn > 0.0 && cn > 1e-300) {
        return None;
    }
    let w = dw / wn;
    let n = cross / cn;
    let t = w.cross(&n);
    Some(Frame::from_columns(&[t, w, n]))
}

/// The vector u with l_i(u) = 1 and <df u, df w_i> = 0.
pub fn u_vector(df: &LinMap23, i: usize) -> Vec2 {
    let w = kernel(i);
    let v = transverse(i);
    let dw = df * w;
    let dv = df * v;
    let s = -dv.dot(&dw) / dw.norm_squared();
    v + w * s
}

/// Everything the corrugation needs at one point.
#[derive(Debug, Clone, Copy)]
pub struct Corrugation {
    pub frame: Frame,
    pub u: Vec2,
    /// |df(u)|
    pub du: f64,
    /// sqrt(eta + |df(u)|^2)
    pub r: f64,
    pub alpha: f64,
}

impl Corrugation {
    /// Requires eta >= 0 and a non-degenerate df; returns None otherwise.
    pub fn new(df: &LinMap23, i: usize, eta: f64) -> Option<Self> {
        if !(eta >= 0.0) {
            return None;
        }
        let frame = corrugation_frame(df, i)?;
        let u = u_vector(df, i);
        let du = (df * u).norm();
        let r = (eta + du * du).sqrt();
        let y = if r > 0.0 { (du / r).min(1.0) } else { 1.0 };
        if y <= 0.0 {
            return None;
        }
        Some(Corrugation {
            frame,
            u,
            du,
            r,
            alpha: j0_inv(y),
        })
    }

    /// Phase angle theta = alpha cos(2 pi x) at x = N varpi_i.
    pub fn theta(&self, x: f64) -> f64 {
        self.alpha * (TAU * (x - x.floor())).cos()
    }

    /// z = r (cos theta t + sin theta n).
    pub fn z(&self, theta: f64) -> Vec3 {
        let (s, c) = theta.sin_cos();
        let t = self.frame.column(0);
        let n = self.frame.column(2);
        (t * c + n * s) * self.r
    }

    /// The corrugated differential df + (z - df(u)) (x) l_i.
    pub fn target(&self, df: &LinMap23, i: usize, theta: f64) -> LinMap23 {
        let z = self.z(theta);
        df + outer(&(z - df * self.u), &ell(i).0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{initial_differential, SymForm2};

    #[test]
    fn frame_is_orthonormal_and_right_handed() {
        let df = initial_differential(0.4, 0.9);
        for i in 1..=3 {
            let f = corrugation_frame(&df, i).unwrap();
            assert!((f.transpose() * f - Frame::identity()).norm() < 1e-14);
            assert!((f.determinant() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn u_is_orthogonal_to_the_kernel_image() {
        let df = initial_differential(0.7, 2.0);
        for i in 1..=3 {
            let u = u_vector(&df, i);
            assert!((ell(i).apply(&u) - 1.0).abs() < 1e-14);
            assert!((df * u).dot(&(df * kernel(i))).abs() < 1e-13);
        }
    }

    #[test]
    fn target_pullback_adds_eta_along_the_wavefront() {
        let df = initial_differential(0.5, 0.3);
        let eta = 0.37;
        for i in 1..=3 {
            let c = Corrugation::new(&df, i, eta).unwrap();
            for &x in &[0.0, 0.13, 0.5] {
                let l = c.target(&df, i, c.theta(x));
                let expected = SymForm2::pullback(&df) + ell(i).square() * eta;
                let got = SymForm2::pullback(&l);
                assert!((got - expected).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_eta_gives_zero_amplitude() {
        let df = initial_differential(0.5, 0.3);
        let c = Corrugation::new(&df, 2, 0.0).unwrap();
        assert_eq!(c.alpha, 0.0);
        assert!(Corrugation::new(&df, 2, -1e-9).is_none());
    }
}
