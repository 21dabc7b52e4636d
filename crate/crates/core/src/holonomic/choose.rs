use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::{c_h, h_max, h_min, ladder_increment};

/// Sufficient conditions a corrugation number can be chosen against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// err <= min(H_min(D_{k,1}) / (4 h_max), H_min(g_{k+1} - g_k) / (6 C_H h_max)).
    Lc1,
    /// sup |f_{k,i} - f_{k,i-1}| <= tau_k / 3.
    Lc2,
    /// sup |df_{k,i} - L_{k,i}| <= tau_k / 3.
    Lc3,
    /// err <= min(min |g_{k+1} - g_k|, min |g_k - g_{k-1}|) / (6 lambda C_H).
    Lc4,
    /// The next stage's eta is non-negative on the annulus.
    Cone,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::Lc1,
        Condition::Lc2,
        Condition::Lc3,
        Condition::Lc4,
        Condition::Cone,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Lc1 => "LC1",
            Condition::Lc2 => "LC2",
            Condition::Lc3 => "LC3",
            Condition::Lc4 => "LC4",
            Condition::Cone => "CONE",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Condition::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown condition '{s}'")))
    }
}

/// Parameters of the search.
#[derive(Debug, Clone, PartialEq)]
pub struct ChooseParams {
    pub tau: f64,
    pub lambda: f64,
    /// Conditions the chosen N must satisfy; the others are only measured.
    pub conditions: Vec<Condition>,
    /// Largest N tried.
    pub cap: u64,
}

pub const DEFAULT_LAMBDA: f64 = 100.0;

/// tau_k = e^{-k}.
pub fn default_tau(k: usize) -> f64 {
    (-(k as f64)).exp()
}

/// Quantities of one trial step that the conditions look at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measures {
    pub err: f64,
    pub disp: f64,
    pub target_dev: f64,
    /// min eta of the following stage on the new map, if there is one.
    pub next_eta_min: Option<f64>,
}

/// Stage-dependent bounds of (LC1) and (LC4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageBounds {
    pub lc1: f64,
    /// Without the 1 / lambda factor.
    pub lc4_unscaled: f64,
}

impl StageBounds {
    /// Bounds at stage k over the radii `rhos`, given H_min(D_{k,1}) measured
    /// at the start of k.
    pub fn new(k: usize, rhos: impl IntoIterator<Item = f64>, d_k1_hmin: f64) -> Self {
        let (hm, ch) = (h_max(), c_h());
        let mut inc_hmin = f64::INFINITY;
        let mut inc_next = f64::INFINITY;
        let mut inc_this = f64::INFINITY;
        for rho in rhos {
            let next = ladder_increment(k + 1, rho);
            inc_hmin = inc_hmin.min(h_min(&next));
            inc_next = inc_next.min(next.norm());
            inc_this = inc_this.min(ladder_increment(k, rho).norm());
        }
        StageBounds {
            lc1: (d_k1_hmin / (4.0 * hm)).min(inc_hmin / (6.0 * ch * hm)),
            lc4_unscaled: inc_next.min(inc_this) / (6.0 * ch),
        }
    }
}

/// Outcome of one condition on one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub value: f64,
    pub bound: f64,
    pub ok: bool,
}

/// All five conditions on a trial, enforced or not.
pub fn check_conditions(m: &Measures, bounds: &StageBounds, params: &ChooseParams) -> Vec<ConditionCheck> {
    let third = params.tau / 3.0;
    let mut out = vec![
        (Condition::Lc1, m.err, bounds.lc1),
        (Condition::Lc2, m.disp, third),
        (Condition::Lc3, m.target_dev, third),
        (Condition::Lc4, m.err, bounds.lc4_unscaled / params.lambda),
    ];
    if let Some(eta) = m.next_eta_min {
        // stated as -eta <= 0
        out.push((Condition::Cone, -eta, 0.0));
    }
    out.into_iter()
        .map(|(condition, value, bound)| ConditionCheck {
            condition,
            value,
            bound,
            ok: value <= bound,
        })
        .collect()
}

/// Result of the doubling search.
#[derive(Debug, Clone)]
pub struct Choice<T> {
    pub n: u64,
    pub value: T,
    pub checks: Vec<ConditionCheck>,
    /// Every N tried, with the first enforced condition it failed.
    pub trials: Vec<(u64, Option<Condition>)>,
}

/// Smallest N among start, 2 start, 4 start, ... whose trial satisfies every
/// enforced condition. `trial` runs the step for a given N.
pub fn choose_n<T>(
    stage: (usize, usize),
    start: u64,
    bounds: &StageBounds,
    params: &ChooseParams,
    mut trial: impl FnMut(u64) -> Result<(T, Measures)>,
) -> Result<Choice<T>> {
    let (k, i) = stage;
    if start == 0 || start > params.cap {
        return Err(Error::Config(format!(
            "stage ({k},{i}): starting N = {start} outside 1..={}",
            params.cap
        )));
    }
    let mut n = start;
    let mut trials = Vec::new();
    loop {
        let (value, m) = trial(n)?;
        let checks = check_conditions(&m, bounds, params);
        let failed = params
            .conditions
            .iter()
            .copied()
            .find(|c| checks.iter().any(|x| x.condition == *c && !x.ok));
        trials.push((n, failed));
        match failed {
            None => {
                return Ok(Choice {
                    n,
                    value,
                    checks,
                    trials,
                })
            }
            Some(c) => {
                if n.saturating_mul(2) > params.cap {
                    let detail = checks
                        .iter()
                        .find(|x| x.condition == c)
                        .map(|x| format!("{c} (measured {:.3e}, bound {:.3e} at N = {n})", x.value, x.bound))
                        .unwrap_or_else(|| c.to_string());
                    return Err(Error::BudgetExceeded {
                        k,
                        i,
                        cap: params.cap,
                        condition: detail,
                    });
                }
                n *= 2;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(tau: f64, conditions: Vec<Condition>) -> ChooseParams {
        ChooseParams {
            tau,
            lambda: DEFAULT_LAMBDA,
            conditions,
            cap: 1 << 30,
        }
    }

    /// Errors that decay like c / N, as the corrugation step does.
    fn synthetic(c: f64) -> impl FnMut(u64) -> Result<((), Measures)> {
        move |n| {
            let x = c / n as f64;
            Ok((
                (),
                Measures {
                    err: x,
                    disp: 0.5 * x,
                    target_dev: 2.0 * x,
                    next_eta_min: Some(1.0 - x),
                },
            ))
        }
    }

    const BOUNDS: StageBounds = StageBounds {
        lc1: 1e-3,
        lc4_unscaled: 1.0,
    };

    #[test]
    fn defaults() {
        assert_eq!(DEFAULT_LAMBDA, 100.0);
        assert!((default_tau(1) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((default_tau(3) - (-3.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn smallest_doubling_is_chosen() {
        let p = params(0.3, vec![Condition::Lc3]);
        // target_dev = 20 / N <= 0.1 needs N >= 200: 8 -> 256
        let c = choose_n((1, 1), 8, &BOUNDS, &p, synthetic(10.0)).unwrap();
        assert_eq!(c.n, 256);
        assert_eq!(c.trials.len(), 6);
        assert!(c.trials[..5].iter().all(|t| t.1 == Some(Condition::Lc3)));
    }

    #[test]
    fn cap_reports_the_failing_condition() {
        let mut p = params(0.3, vec![Condition::Lc2, Condition::Lc1]);
        p.cap = 1000;
        match choose_n((2, 3), 8, &BOUNDS, &p, synthetic(10.0)) {
            Err(Error::BudgetExceeded { k: 2, i: 3, cap: 1000, condition }) => {
                assert!(condition.starts_with("LC1"), "{condition}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cone_is_checked_only_when_there_is_a_next_stage() {
        let m = Measures {
            err: 1.0,
            disp: 1.0,
            target_dev: 1.0,
            next_eta_min: None,
        };
        let p = params(0.3, vec![Condition::Cone]);
        assert!(check_conditions(&m, &BOUNDS, &p).iter().all(|c| c.condition != Condition::Cone));
        let m = Measures { next_eta_min: Some(-0.1), ..m };
        let cone = check_conditions(&m, &BOUNDS, &p)
            .into_iter()
            .find(|c| c.condition == Condition::Cone)
            .unwrap();
        assert!(!cone.ok);
    }

    #[test]
    fn names_round_trip() {
        for c in Condition::ALL {
            assert_eq!(c.name().parse::<Condition>().unwrap(), c);
        }
        assert!("LC9".parse::<Condition>().is_err());
    }

    #[test]
    fn lc1_bound_is_small_near_the_boundary() {
        let rhos: Vec<f64> = (0..=20).map(|j| 0.9 + 0.005 * j as f64).collect();
        let b = StageBounds::new(1, rhos, 5.0);
        // H_min(g_2 - g_1) at 0.9 is 4 * 3 * 0.9^6 / (2 a^2)
        let a = crate::metrics::WAVE_A;
        let inc = 12.0 * 0.9f64.powi(6) / (2.0 * a * a);
        assert!((b.lc1 - (5.0 / (4.0 * h_max())).min(inc / (6.0 * c_h() * h_max()))).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn relaxing_tau_never_increases_n(c in 0.01f64..100.0, tau in 1e-3f64..1.0, start in 1u64..64) {
            let set = vec![Condition::Lc2, Condition::Lc3, Condition::Cone];
            let tight = choose_n((1, 2), start, &BOUNDS, &params(tau, set.clone()), synthetic(c)).unwrap();
            let loose = choose_n((1, 2), start, &BOUNDS, &params(10.0 * tau, set), synthetic(c)).unwrap();
            prop_assert!(loose.n <= tight.n);
        }
    }
}
