//! Small fixed-size linear algebra used throughout: vectors, 3x2 linear maps
//! and orthonormal frames.

use nalgebra::{Matrix3, Matrix3x2, Vector2, Vector3};

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;
/// A linear map from the (rho, phi) parameter plane into R^3, columns d/drho and d/dphi.
pub type LinMap23 = Matrix3x2<f64>;
/// An orthonormal frame stored column-wise as (t, w, n).
pub type Frame = Matrix3<f64>;

/// Rotation by `angle` about the z axis.
pub fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Eigenvalues (min, max) of the symmetric 2x2 matrix [[p, q], [q, r]].
pub fn sym2_eigen(p: f64, q: f64, r: f64) -> (f64, f64) {
    let m = 0.5 * (p + r);
    let d = (0.25 * (p - r) * (p - r) + q * q).sqrt();
    (m - d, m + d)
}

/// Operator norm (largest singular value) of a 3x2 map.
pub fn op_norm(l: &LinMap23) -> f64 {
    let a = l.column(0);
    let b = l.column(1);
    sym2_eigen(a.dot(&a), a.dot(&b), b.dot(&b)).1.max(0.0).sqrt()
}

/// Smallest singular value of a 3x2 map; it vanishes exactly when the map is not injective.
pub fn lambda_min(l: &LinMap23) -> f64 {
    // sigma_min * sigma_max = |a x b| avoids the cancellation in the small eigenvalue
    let top = op_norm(l);
    if top == 0.0 {
        return 0.0;
    }
    l.column(0).cross(&l.column(1)).norm() / top
}

/// The 3x2 map v -> z * c^T for a vector z and covector c = (c_rho, c_phi).
pub fn outer(z: &Vec3, c: &Vec2) -> LinMap23 {
    LinMap23::from_columns(&[z * c[0], z * c[1]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_preserves_axis_and_norm() {
        let r = rot_z(0.7);
        let v = Vec3::new(1.0, 2.0, 3.0);
        let w = r * v;
        assert!((w.norm() - v.norm()).abs() < 1e-14);
        assert_eq!(w.z, 3.0);
        assert!((rot_z(0.3) * rot_z(0.4) - r).norm() < 1e-15);
    }

    #[test]
    fn singular_values_of_diagonal_map() {
        let l = LinMap23::new(3.0, 0.0, 0.0, 0.5, 0.0, 0.0);
        assert!((op_norm(&l) - 3.0).abs() < 1e-15);
        assert!((lambda_min(&l) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singular_values_match_svd() {
        let l = LinMap23::new(1.0, 2.0, -0.5, 0.3, 2.0, 1.1);
        let svd = l.svd(false, false);
        let mut s = [svd.singular_values[0], svd.singular_values[1]];
        s.sort_by(f64::total_cmp);
        assert!((lambda_min(&l) - s[0]).abs() < 1e-13);
        assert!((op_norm(&l) - s[1]).abs() < 1e-13);
    }

    #[test]
    fn degenerate_map_has_zero_lambda() {
        let l = LinMap23::new(1.0, 2.0, 1.0, 2.0, 1.0, 2.0);
        assert!(lambda_min(&l) < 1e-15);
    }
}
