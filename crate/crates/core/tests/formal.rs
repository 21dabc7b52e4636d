use std::f64::consts::TAU;

use corrugate::formal::{formal_trajectory, mu_phi, scaling_law_check, PatternEvaluator};
use corrugate::metrics::SymForm2;
use corrugate::schedule::Schedule;
use proptest::prelude::*;

fn schedule() -> Schedule {
    Schedule::new(vec![[10, 20, 30], [40, 50, 60]]).unwrap()
}

proptest! {
    #[test]
    fn every_formal_stage_is_mu_isometric(rho in 0.01f64..1.0, phi in 0.0f64..TAU) {
        let s = schedule();
        for (pt, (k, i)) in formal_trajectory(&s, rho, phi).unwrap().iter().zip(s.stages()) {
            let mu = mu_phi(k, i, rho);
            prop_assert!((SymForm2::pullback(&pt.map) - mu).norm() <= 1e-12 * mu.norm().max(1.0));
        }
    }

    #[test]
    fn pattern_has_period_two_pi_over_seven_l(rho in 0.05f64..1.0, phi in 0.0f64..TAU) {
        let s = schedule();
        let e = PatternEvaluator::new(&s, 2, rho).unwrap();
        let d = (e.nu(1, phi + TAU / 70.0) - e.nu(1, phi)).norm();
        prop_assert!(d <= 1e-10, "{}", d);
    }

    #[test]
    fn normals_are_unit(rho in 0.05f64..1.0, phi in 0.0f64..TAU) {
        let e = PatternEvaluator::new(&schedule(), 2, rho).unwrap();
        prop_assert!((e.normal(phi).norm() - 1.0).abs() < 1e-12);
        prop_assert!((e.normal(phi) - e.normal_rotated(phi)).norm() < 1e-12);
    }
}

#[test]
fn scaling_holds_at_rational_radii_only() {
    let s = schedule();
    assert!(scaling_law_check(&s, 2, 3, 2, 500).unwrap() <= 1e-10);
    assert!(scaling_law_check(&s, 2, 0, 2, 500).is_err());
}
