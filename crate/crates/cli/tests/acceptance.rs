//! The twelve acceptance criteria, one line each. Tolerances and time limits
//! are pinned here and cross-checked against the suite's constants.

use corrugate_cli::verify::{self, run_all};
use corrugate_cli::RunConfig;

#[test]
fn acceptance() {
    assert_eq!(verify::ERR_RATIO, (0.3, 0.7));
    assert_eq!(verify::FORMAL_TOL, 1e-12);
    assert_eq!(verify::ETA_TOL, 1e-12);
    assert_eq!(verify::J0_ZERO_TOL, 1e-12);
    assert_eq!(verify::J0_ROUND_TRIP_TOL, 1e-10);
    assert_eq!(verify::J0_HOLDER_CONST, 4.0);
    assert_eq!(verify::SIGMA_TOL, 1e-4);
    assert_eq!(verify::PERIODICITY_TOL, 1e-10);
    assert_eq!(verify::SCALING_TOL, 1e-10);
    assert_eq!(verify::DIMENSION_TOL, 0.1);
    assert_eq!(verify::HOLDER_TOL, 0.05);
    assert_eq!(corrugate::holonomic::SIGMA, 3.488629);

    let limits = [60.0, 10.0, 1.0, 1.0, 5.0, 5.0, 10.0, 60.0, 120.0, 300.0, 600.0, 60.0];
    let cfg = RunConfig::default();
    let (criteria, desk) = run_all(&cfg, |c| println!("{}", c.line()));
    assert_eq!(criteria.len(), 12);
    for (c, limit) in criteria.iter().zip(limits) {
        assert_eq!(c.limit_seconds, limit, "criterion {}", c.id);
    }
    if let Some(d) = &desk {
        print!("{}", verify::budget_table(d));
    }
    let failed: Vec<u8> = criteria.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    println!("{} of 12 criteria pass", 12 - failed.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
