//! Bessel J0/J1, the inverse of J0 on its first monotone branch, and the
//! loop integrals C and S used by the corrugation step.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use crate::error::{Error, Result};

/// First positive zero of J0.
pub const KAPPA0: f64 = 2.404_825_557_695_773;

const SERIES_LIMIT: f64 = 4.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// Highest Bessel order kept in the Jacobi-Anger expansions. For alpha < KAPPA0
/// the order-26 term is below 1e-20.
const MAX_ORDER: usize = 26;

/// Bessel function of the first kind, order 0.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("J0 argument must be finite, got {x}")));
    }
    Ok(j0(x))
}

/// Bessel function of the first kind, order 1.
pub fn bessel_j1(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("J1 argument must be finite, got {x}")));
    }
    Ok(j1(x))
}

pub(crate) fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SERIES_LIMIT {
        1.0 - one_minus_j0_series(ax)
    } else if ax < ASYMPTOTIC_LIMIT {
        miller_j01(ax).0
    } else {
        hankel_asymptotic(ax, 0)
    }
}

pub(crate) fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT {
        let q = -0.25 * ax * ax;
        let mut term = 0.5 * ax;
        let mut sum = term;
        for k in 1..60 {
            term *= q / ((k * (k + 1)) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    } else if ax < ASYMPTOTIC_LIMIT {
        miller_j01(ax).1
    } else {
        hankel_asymptotic(ax, 1)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// 1 - J0(x) from the power series, without cancellation for small x.
fn one_minus_j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..80 {
        term *= q / ((k * k) as f64);
        sum -= term;
        if term.abs() <= 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// J0 and J1 by Miller's backward recurrence normalised with
/// J0 + 2 (J2 + J4 + ...) = 1.
fn miller_j01(x: f64) -> (f64, f64) {
    let start = 2 * ((x + 20.0 + 4.0 * x.sqrt()) as usize / 2 + 1);
    let mut next = 0.0_f64;
    let mut cur = 1e-30_f64;
    let mut even_sum = 0.0;
    let mut j0v = 0.0;
    let mut j1v = 0.0;
    for n in (1..=start).rev() {
        // cur = j_n, next = j_{n+1}
        let prev = 2.0 * n as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // cur is now j_{n-1}
        let m = n - 1;
        if m == 1 {
            j1v = cur;
        }
        if m == 0 {
            j0v = cur;
        } else if m % 2 == 0 {
            even_sum += cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            even_sum *= 1e-250;
            j1v *= 1e-250;
        }
    }
    let norm = j0v + 2.0 * even_sum;
    (j0v / norm, j1v / norm)
}

/// Hankel asymptotic expansion of J_nu for large x, nu in {0, 1}.
fn hankel_asymptotic(x: f64, nu: u32) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if a.abs() > last {
            break;
        }
        last = a.abs();
        // a_k / x^k; signs (-1)^{k/2} for even k, (-1)^{(k-1)/2} for odd k
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    let omega = x - nu as f64 * PI / 2.0 - FRAC_PI_4;
    let (s, c) = omega.sin_cos();
    (2.0 / (PI * x)).sqrt() * (p * c - q * s)
}

/// Inverse of J0 on [0, KAPPA0]: the unique alpha with J0(alpha) = y, for y in (0, 1].
pub fn bessel_j0_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::domain(format!("J0 inverse needs y in (0, 1], got {y}")));
    }
    Ok(j0_inv(y))
}

pub(crate) fn j0_inv(y: f64) -> f64 {
    if y >= 1.0 {
        return 0.0;
    }
    // Solve 1 - J0(a) = d, which stays well conditioned near a = 0.
    let d = 1.0 - y;
    let (mut lo, mut hi) = (0.0_f64, KAPPA0);
    let mut a = (2.0 * d.sqrt()).clamp(0.0, KAPPA0);
    if a <= 0.0 || a >= KAPPA0 {
        a = 0.5 * KAPPA0;
    }
    for _ in 0..100 {
        let g = one_minus_j0_series(a) - d;
        if g > 0.0 {
            hi = a;
        } else {
            lo = a;
        }
        let slope = j1(a);
        let mut next = if slope > 0.0 { a - g / slope } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - a).abs();
        a = next;
        if step <= 4.0 * f64::EPSILON * a.max(1e-300) || hi - lo < 1e-13 {
            break;
        }
    }
    a
}

/// J_n(alpha) for n = 0..=MAX_ORDER from the power series; alpha is small enough
/// here that the series has no harmful cancellation.
fn bessel_sequence(alpha: f64, out: &mut [f64; MAX_ORDER + 1]) -> usize {
    let h = 0.5 * alpha;
    let q = -h * h;
    let mut lead = 1.0; // (alpha/2)^n / n!
    let mut last = 0;
    for (n, slot) in out.iter_mut().enumerate() {
        if n > 0 {
            lead *= h / n as f64;
        }
        if lead.abs() < 1e-22 {
            *slot = 0.0;
            continue;
        }
        let mut term = lead;
        let mut sum = lead;
        for k in 1..40 {
            term *= q / ((k * (n + k)) as f64);
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        *slot = sum;
        last = n;
    }
    last
}

fn check_loop_args(alpha: f64, x: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha < KAPPA0) {
        return Err(Error::domain(format!(
            "loop amplitude must lie in [0, {KAPPA0}), got {alpha}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::domain(format!("loop abscissa must be finite, got {x}")));
    }
    Ok(())
}

/// C(x) = int_0^x cos(alpha cos 2 pi s) ds and S(x) = int_0^x sin(alpha cos 2 pi s) ds.
pub fn loop_integrals(alpha: f64, x: f64) -> Result<(f64, f64)> {
    check_loop_args(alpha, x)?;
    let (c, s, j0v) = centered(alpha, x);
    Ok((c + j0v * x, s))
}

/// The periodic parts (C(x) - J0(alpha) x, S(x)); both have period 1 in x.
pub fn loop_integrals_centered(alpha: f64, x: f64) -> Result<(f64, f64)> {
    check_loop_args(alpha, x)?;
    let (c, s, _) = centered(alpha, x);
    Ok((c, s))
}

/// Returns (C - J0 x, S, J0), evaluated at the fractional part of x.
pub(crate) fn centered(alpha: f64, x: f64) -> (f64, f64, f64) {
    let mut jn = [0.0; MAX_ORDER + 1];
    let top = bessel_sequence(alpha, &mut jn);
    let t = x - x.floor();
    let (s1, c1) = (TAU * t).sin_cos();
    // sin(m * 2 pi t) by the Chebyshev recurrence
    let mut sin_prev = 0.0;
    let mut sin_cur = s1;
    let mut c_sum = 0.0;
    let mut s_sum = 0.0;
    for m in 1..=top.max(1) {
        let coef = 2.0 * jn[m] / (TAU * m as f64);
        if m % 2 == 1 {
            // odd orders feed S with sign (-1)^{(m-1)/2}
            if (m / 2) % 2 == 0 {
                s_sum += coef * sin_cur;
            } else {
                s_sum -= coef * sin_cur;
            }
        } else if (m / 2) % 2 == 0 {
            c_sum += coef * sin_cur;
        } else {
            c_sum -= coef * sin_cur;
        }
        let sin_next = 2.0 * c1 * sin_cur - sin_prev;
        sin_prev = sin_cur;
        sin_cur = sin_next;
    }
    (c_sum, s_sum, jn[0])
}
