//! Symmetric bilinear forms on the parameter plane, the hyperbolic metric, the
//! initial embedding and the metric ladder interpolating between them.
//!
//! Forms are written E drho^2 + 2F drho dphi + G dphi^2 in polar coordinates
//! (rho, phi) on the unit disk.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geom::{sym2_eigen, LinMap23, Vec2, Vec3};

/// Slope of the wavefront maps: a = 7 / (2 pi).
pub const WAVE_A: f64 = 7.0 / (2.0 * PI);

/// A symmetric bilinear form [[e, f], [f, g]].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymForm2 {
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl SymForm2 {
    pub const ZERO: SymForm2 = SymForm2 { e: 0.0, f: 0.0, g: 0.0 };

    pub fn new(e: f64, f: f64, g: f64) -> Self {
        SymForm2 { e, f, g }
    }

    pub fn eval(&self, u: &Vec2, v: &Vec2) -> f64 {
        self.e * u[0] * v[0] + self.f * (u[0] * v[1] + u[1] * v[0]) + self.g * u[1] * v[1]
    }

    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    /// Eigenvalues (min, max).
    pub fn eigenvalues(&self) -> (f64, f64) {
        sym2_eigen(self.e, self.f, self.g)
    }

    /// Operator norm: the largest eigenvalue in absolute value.
    pub fn norm(&self) -> f64 {
        let (lo, hi) = self.eigenvalues();
        lo.abs().max(hi.abs())
    }

    pub fn is_positive_definite(&self) -> bool {
        self.e > 0.0 && self.det() > 0.0
    }

    /// Pullback f*<,> of the Euclidean inner product by a map with differential `df`.
    pub fn pullback(df: &LinMap23) -> Self {
        let a = df.column(0);
        let b = df.column(1);
        SymForm2::new(a.dot(&a), a.dot(&b), b.dot(&b))
    }

    /// The cone coordinates (H1, H2, H3): the unique weights with
    /// self = H1 l1^2 + H2 l2^2 + H3 l3^2.
    pub fn cone_coords(&self) -> [f64; 3] {
        let a = WAVE_A;
        let a2 = a * a;
        [
            self.e - self.g / a2,
            self.g / (2.0 * a2) - self.f / (2.0 * a),
            self.g / (2.0 * a2) + self.f / (2.0 * a),
        ]
    }

    /// The i-th cone coordinate, i in 1..=3.
    pub fn cone_coord(&self, i: usize) -> f64 {
        self.cone_coords()[dir_index(i) - 1]
    }

    pub fn from_cone_coords(h: [f64; 3]) -> Self {
        let mut acc = SymForm2::ZERO;
        for (i, hi) in h.iter().enumerate() {
            acc = acc + ell(i + 1).square() * *hi;
        }
        acc
    }
}

impl Add for SymForm2 {
    type Output = SymForm2;
    fn add(self, o: SymForm2) -> SymForm2 {
        SymForm2::new(self.e + o.e, self.f + o.f, self.g + o.g)
    }
}

impl Sub for SymForm2 {
    type Output = SymForm2;
    fn sub(self, o: SymForm2) -> SymForm2 {
        SymForm2::new(self.e - o.e, self.f - o.f, self.g - o.g)
    }
}

impl Neg for SymForm2 {
    type Output = SymForm2;
    fn neg(self) -> SymForm2 {
        SymForm2::new(-self.e, -self.f, -self.g)
    }
}

impl Mul<f64> for SymForm2 {
    type Output = SymForm2;
    fn mul(self, s: f64) -> SymForm2 {
        SymForm2::new(self.e * s, self.f * s, self.g * s)
    }
}

/// A covector c_rho drho + c_phi dphi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covector(pub Vec2);

impl Covector {
    pub fn apply(&self, v: &Vec2) -> f64 {
        self.0.dot(v)
    }

    /// The form l (x) l.
    pub fn square(&self) -> SymForm2 {
        let c = self.0;
        SymForm2::new(c[0] * c[0], c[0] * c[1], c[1] * c[1])
    }
}

/// Maps a direction index onto 1..=3 with the circular convention l0 = l3, l4 = l1.
pub fn dir_index(i: usize) -> usize {
    match i % 3 {
        0 => 3,
        r => r,
    }
}

/// Wavefront covector l_i = d(varpi_i).
pub fn ell(i: usize) -> Covector {
    let a = WAVE_A;
    Covector(match dir_index(i) {
        1 => Vec2::new(-1.0, 0.0),
        2 => Vec2::new(1.0, -a),
        _ => Vec2::new(1.0, a),
    })
}

/// Kernel vector w_i of l_i, oriented so that det(v_i, w_i) = 1.
pub fn kernel(i: usize) -> Vec2 {
    let a = WAVE_A;
    match dir_index(i) {
        1 => Vec2::new(0.0, -1.0),
        2 => Vec2::new(a, 1.0),
        _ => Vec2::new(-a, 1.0),
    }
}

/// Transverse vector v_i with l_i(v_i) = 1.
pub fn transverse(i: usize) -> Vec2 {
    match dir_index(i) {
        1 => Vec2::new(-1.0, 0.0),
        _ => Vec2::new(1.0, 0.0),
    }
}

/// Wavefront map varpi_i(rho, phi).
pub fn wavefront(i: usize, rho: f64, phi: f64) -> f64 {
    let a = WAVE_A;
    match dir_index(i) {
        1 => -rho,
        2 => rho - a * phi,
        _ => rho + a * phi,
    }
}

pub fn det2(u: &Vec2, v: &Vec2) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

/// The hyperbolic metric 4 (drho^2 + rho^2 dphi^2) / (1 - rho^2)^2.
pub fn hyperbolic_metric(rho: f64) -> Result<SymForm2> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::domain(format!("rho must be a finite non-negative number, got {rho}")));
    }
    if rho >= 1.0 {
        return Err(Error::Singular { rho });
    }
    let c = 4.0 / ((1.0 - rho * rho) * (1.0 - rho * rho));
    Ok(SymForm2::new(c, 0.0, c * rho * rho))
}

/// f0(rho, phi) = 2 (rho cos phi, rho sin phi, rho^2 / sqrt 2).
pub fn initial_embedding(rho: f64, phi: f64) -> Vec3 {
    let (s, c) = phi.sin_cos();
    Vector3::new(2.0 * rho * c, 2.0 * rho * s, 2.0 * FRAC_1_SQRT_2 * rho * rho)
}

/// Exact differential of f0, columns d/drho and d/dphi.
pub fn initial_differential(rho: f64, phi: f64) -> LinMap23 {
    let (s, c) = phi.sin_cos();
    let sq2 = std::f64::consts::SQRT_2;
    LinMap23::new(2.0 * c, -2.0 * rho * s, 2.0 * s, 2.0 * rho * c, 2.0 * sq2 * rho, 0.0)
}

/// Pullback of the Euclidean metric by f0: 4 (1 + 2 rho^2) drho^2 + 4 rho^2 dphi^2.
pub fn initial_pullback(rho: f64) -> SymForm2 {
    SymForm2::new(4.0 * (1.0 + 2.0 * rho * rho), 0.0, 4.0 * rho * rho)
}

/// The isometric default h - f0*.
pub fn isometric_default(rho: f64) -> Result<SymForm2> {
    Ok(hyperbolic_metric(rho)? - initial_pullback(rho))
}

/// Coefficients (dE, dG) of g_k - g_{k-1} for k >= 1.
fn increment_coeffs(k: usize, rho: f64) -> (f64, f64) {
    let p = rho.powi(2 * (k as i32 + 1));
    let kf = k as f64;
    (4.0 * (kf + 2.0) * p, 4.0 * (kf + 1.0) * p)
}

/// The k-th metric of the ladder, g_0 = f0* and g_k -> h as k -> infinity.
pub fn metric_ladder(k: usize, rho: f64) -> SymForm2 {
    let mut g = initial_pullback(rho);
    for n in 1..=k {
        let (de, dg) = increment_coeffs(n, rho);
        g.e += de;
        g.g += dg;
    }
    g
}

/// g_k - g_{k-1} for k >= 1, in closed form.
pub fn ladder_increment(k: usize, rho: f64) -> SymForm2 {
    assert!(k >= 1, "ladder increments start at k = 1");
    let (de, dg) = increment_coeffs(k, rho);
    SymForm2::new(de, 0.0, dg)
}

/// Operator norm of a linear functional on symmetric forms, estimated by sampling
/// unit-norm forms on a Fibonacci sphere of directions and refining the best one.
pub fn functional_norm(func: impl Fn(&SymForm2) -> f64) -> f64 {
    let eval = |d: [f64; 3]| {
        let b = SymForm2::new(d[0], d[1], d[2]);
        let n = b.norm();
        if n == 0.0 {
            0.0
        } else {
            func(&b).abs() / n
        }
    };
    let samples = 100_000;
    let golden = PI * (3.0 - 5.0_f64.sqrt());
    let mut best = (0.0, [1.0, 0.0, 0.0]);
    for j in 0..samples {
        let z = 1.0 - 2.0 * (j as f64 + 0.5) / samples as f64;
        let r = (1.0 - z * z).sqrt();
        let t = golden * j as f64;
        let d = [r * t.cos(), r * t.sin(), z];
        let v = eval(d);
        if v > best.0 {
            best = (v, d);
        }
    }
    // pattern search around the best sample
    let (mut val, mut d) = best;
    let mut step = 1e-2;
    while step > 1e-12 {
        let mut improved = false;
        for axis in 0..3 {
            for sgn in [-1.0, 1.0] {
                let mut trial = d;
                trial[axis] += sgn * step;
                let v = eval(trial);
                if v > val {
                    val = v;
                    d = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    val
}

/// h_max = max_i ||H_i||, the largest cone-coordinate functional norm.
pub fn h_max() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| {
        (1..=3)
            .map(|i| functional_norm(|b| b.cone_coord(i)))
            .fold(0.0, f64::max)
    })
}

/// C_H = 1 + h_max (||l2^2|| + ||l3^2||).
pub fn c_h() -> f64 {
    1.0 + h_max() * (ell(2).square().norm() + ell(3).square().norm())
}

/// H_min(B) = min_i H_i(B).
pub fn h_min(b: &SymForm2) -> f64 {
    let h = b.cone_coords();
    h[0].min(h[1]).min(h[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &SymForm2, b: &SymForm2, tol: f64) -> bool {
        (a.e - b.e).abs() <= tol && (a.f - b.f).abs() <= tol && (a.g - b.g).abs() <= tol
    }

    #[test]
    fn hyperbolic_metric_at_origin() {
        assert_eq!(hyperbolic_metric(0.0).unwrap(), SymForm2::new(4.0, 0.0, 0.0));
    }

    #[test]
    fn hyperbolic_metric_is_singular_on_the_circle() {
        assert!(matches!(hyperbolic_metric(1.0), Err(Error::Singular { .. })));
        assert!(hyperbolic_metric(f64::NAN).is_err());
    }

    #[test]
    fn initial_pullback_at_half() {
        assert!(close(&initial_pullback(0.5), &SymForm2::new(6.0, 0.0, 1.0), 1e-15));
    }

    #[test]
    fn frames_of_the_wavefronts() {
        for i in 1..=3 {
            let l = ell(i);
            assert_eq!(l.apply(&kernel(i)), 0.0);
            assert_eq!(l.apply(&transverse(i)), 1.0);
            assert!((det2(&transverse(i), &kernel(i)) - 1.0).abs() < 1e-15);
        }
        // consecutive kernels turn positively
        for i in 1..=3 {
            assert!(det2(&kernel(i), &kernel(i + 1)) > 0.0);
        }
    }

    #[test]
    fn circular_direction_convention() {
        assert_eq!(ell(0), ell(3));
        assert_eq!(kernel(4), kernel(1));
    }

    #[test]
    fn wavefront_differentials_match_covectors() {
        let (rho, phi, h) = (0.4, 1.3, 1e-6);
        for i in 1..=3 {
            let d_rho = (wavefront(i, rho + h, phi) - wavefront(i, rho - h, phi)) / (2.0 * h);
            let d_phi = (wavefront(i, rho, phi + h) - wavefront(i, rho, phi - h)) / (2.0 * h);
            assert!((d_rho - ell(i).0[0]).abs() < 1e-8);
            assert!((d_phi - ell(i).0[1]).abs() < 1e-8);
        }
    }

    #[test]
    fn initial_differential_pulls_back_to_closed_form() {
        for &rho in &[0.0, 0.2, 0.9] {
            let df = initial_differential(rho, 0.77);
            assert!(close(&SymForm2::pullback(&df), &initial_pullback(rho), 1e-14));
        }
    }

    #[test]
    fn isometric_default_is_in_the_cone() {
        for j in 1..1000 {
            let rho = j as f64 / 1000.0;
            let d = isometric_default(rho).unwrap();
            assert!(h_min(&d) > 0.0, "rho = {rho}");
        }
    }

    #[test]
    fn ladder_increments_have_closed_cone_coordinates() {
        let a2 = WAVE_A * WAVE_A;
        for k in 1..6 {
            for &rho in &[0.1, 0.5, 0.93] {
                let h = ladder_increment(k, rho).cone_coords();
                let p = 4.0 * rho.powi(2 * (k as i32 + 1));
                let kf = k as f64;
                assert!((h[1] - p * (kf + 1.0) / (2.0 * a2)).abs() < 1e-14);
                assert!((h[2] - h[1]).abs() < 1e-15);
                assert!((h[0] - p * (kf + 2.0 - (kf + 1.0) / a2)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ladder_converges_to_hyperbolic_metric() {
        let rho = 0.6;
        let h = hyperbolic_metric(rho).unwrap();
        let g = metric_ladder(400, rho);
        assert!(close(&g, &h, 1e-12));
    }

    #[test]
    fn h_max_matches_nuclear_norm() {
        // the dual of the operator norm on symmetric matrices is the nuclear norm
        // of the representing matrix of the functional
        let a = WAVE_A;
        let nuclear = [1.0 + 1.0 / (a * a), (1.0 + a * a).sqrt() / (2.0 * a * a)];
        let expected = nuclear[0].max(nuclear[1]);
        assert!((h_max() - expected).abs() < 1e-9, "{} vs {}", h_max(), expected);
        assert!((c_h() - (1.0 + expected * 2.0 * (1.0 + a * a))).abs() < 1e-8);
    }

    #[test]
    fn norm_is_max_absolute_eigenvalue() {
        let b = SymForm2::new(1.0, 0.0, -3.0);
        assert_eq!(b.norm(), 3.0);
    }

    proptest! {
        #[test]
        fn cone_coordinates_reconstruct_the_form(e in -5.0f64..5.0, f in -5.0f64..5.0, g in -5.0f64..5.0) {
            let b = SymForm2::new(e, f, g);
            let back = SymForm2::from_cone_coords(b.cone_coords());
            prop_assert!(close(&b, &back, 1e-12));
        }

        #[test]
        fn ladder_increments_are_in_the_cone(rho in 0.01f64..0.999, k in 1usize..30) {
            let inc = metric_ladder(k, rho) - metric_ladder(k - 1, rho);
            prop_assert!(close(&inc, &ladder_increment(k, rho), 1e-12));
            prop_assert!(h_min(&ladder_increment(k, rho)) > 0.0);
        }

        #[test]
        fn ladder_tail_sums_to_the_hyperbolic_gap(rho in 0.01f64..0.95, k in 0usize..40) {
            let gap = hyperbolic_metric(rho).unwrap() - metric_ladder(k, rho);
            let mut tail = SymForm2::ZERO;
            for n in (k + 1)..(k + 3000) {
                tail = tail + ladder_increment(n, rho);
            }
            prop_assert!(close(&gap, &tail, 1e-11));
        }
    }
}
