use corrugate::analysis::{compare_formal_holonomic, telescoped_bound};
use corrugate::holonomic::{
    embedding_diagnostics, run, write_obj, Condition, Domain, RunEvent, RunSpec, ScheduleMode,
};
use corrugate::schedule::Schedule;

fn thin_spec(depth: usize, rows: Vec<[u64; 3]>) -> RunSpec {
    let mut spec = RunSpec::new(0.99, depth, Schedule::new(rows).unwrap());
    spec.domain = Domain::Window {
        phi_c: 0.5,
        width: 1e-4,
    };
    spec
}

#[test]
fn explicit_run_events_come_in_stage_order() {
    let spec = thin_spec(1, vec![[12, 80, 500]]);
    let mut seen = Vec::new();
    let art = run(&spec, &mut |ev| {
        match ev {
            RunEvent::Stage { record, .. } => seen.push((record.report.k, record.report.i)),
            RunEvent::Completed { k, .. } => seen.push((k, 0)),
        }
        Ok(())
    })
    .unwrap();
    assert_eq!(seen, vec![(1, 1), (1, 2), (1, 3), (1, 0)]);
    assert_eq!(art.layers.len(), 2);
    assert_eq!(art.schedule.unwrap().rows(), &[[12, 80, 500]]);
    let p = art.properties[0];
    assert!(p.p1_ok() && p.p2_ok(), "{p:?}");
}

#[test]
fn holonomic_stays_under_the_telescoped_bound() {
    let spec = thin_spec(1, vec![[12, 80, 800]]);
    let art = corrugate::holonomic::run_quiet(&spec).unwrap();
    let rows = compare_formal_holonomic(&art.stages, art.schedule.as_ref().unwrap(), (0.99, 1.0)).unwrap();
    let devs: Vec<f64> = art.stages.iter().map(|s| s.report.target_dev).collect();
    let (c, b) = telescoped_bound(&rows, &devs);
    assert_eq!(c.len(), 1);
    for (r, b) in rows.iter().zip(&b) {
        assert!(r.sup_diff <= b * (1.0 + 1e-12), "{r:?} > {b}");
    }
}

#[test]
fn adaptive_search_meets_its_conditions() {
    let mut spec = RunSpec::new(0.9999, 1, Schedule::new(vec![[12, 80, 800]]).unwrap());
    spec.domain = Domain::Window {
        phi_c: 0.5,
        width: 1e-6,
    };
    spec.mode = ScheduleMode::Adaptive {
        conditions: vec![Condition::Lc2, Condition::Cone],
        cap: 1 << 20,
    };
    let art = corrugate::holonomic::run_quiet(&spec).unwrap();
    for s in &art.stages {
        for c in s.checks.iter().filter(|c| matches!(c.condition, Condition::Lc2 | Condition::Cone)) {
            assert!(c.ok, "{:?} at ({},{})", c, s.report.k, s.report.i);
        }
    }
    let d = embedding_diagnostics(art.last_layer(), &art.reports(), 1 << 20);
    assert!(d.all_pass(), "{d:?}");
}

#[test]
fn exported_mesh_indices_are_in_range() {
    let spec = thin_spec(1, vec![[12, 80, 500]]);
    let art = corrugate::holonomic::run_quiet(&spec).unwrap();
    let mut buf = Vec::new();
    write_obj(&mut buf, &art.last_layer().grid, 1).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let nv = text.lines().filter(|l| l.starts_with("v ")).count();
    for l in text.lines().filter(|l| l.starts_with("f ")) {
        for idx in l.split_whitespace().skip(1) {
            let i: usize = idx.parse().unwrap();
            assert!((1..=nv).contains(&i), "{l}");
        }
    }
}

#[test]
fn budget_above_the_immersion_margin_is_rejected() {
    // T = tau1 / (1 - 1/e) must not exceed lambda_C(df0) / 2 = rho0
    let mut spec = thin_spec(1, vec![[12, 80, 500]]);
    spec.rho0 = 0.3;
    assert!(matches!(spec.validate(), Err(corrugate::Error::Config(_))));
    spec.tau1 = 0.18;
    spec.validate().unwrap();
}
