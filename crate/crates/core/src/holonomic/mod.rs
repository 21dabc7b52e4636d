//! Grid realisation of the corrugation process.

pub mod choose;
pub mod diagnostics;
pub mod diff;
pub mod export;
pub mod frames;
pub mod grid;
pub mod interp;
pub mod plan;
pub mod run;
pub mod step;

pub use diff::{
    check_resolution, check_resolution_for, differentiate, pullback_field, samples_per_period,
    samples_per_period_for, DiffField, FdMethod,
};
pub use grid::{initial_embedding_grid, FieldGrid, GridSpec, PhiLayout, MIN_SAMPLES_PER_PERIOD};
pub use interp::{lagrange6, refine, INTERP_REACH};
pub use plan::{
    peak_nodes, plan_level, plan_levels, Domain, Sampling, COL_MARGIN_PER_STAGE, MIN_ROWS, ROW_MARGIN_PER_STAGE,
};
pub use step::{cp_step, cp_step_with, Layer, StepOptions, StepOutput, StepReport, STEP_TRIM};
pub use choose::{
    check_conditions, choose_n, default_tau, ChooseParams, Choice, Condition, ConditionCheck, Measures, StageBounds,
    DEFAULT_LAMBDA,
};
pub use diagnostics::{
    embedding_diagnostics, lambda_c0, mesh_coords, mesh_nodes, self_intersection_scan, stride_for, CollisionScan, Diagnostics, SIGMA,
};
pub use run::{
    run, run_quiet, PropertyCheck, RunArtifacts, RunEvent, RunSpec, SamplePoint, ScheduleMode, StageRecord,
    DEFAULT_MAX_NODES, DESK_CONDITIONS,
};
pub use export::{write_mesh_obj, write_obj};
pub use frames::{l_matrix, l_matrix_deviation};
