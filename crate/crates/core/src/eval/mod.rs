//! Desk-scale evaluation: a geometric success oracle, Precision@k, and the
//! end-to-end experiment harness.

mod experiment;
mod oracle;
mod precision;

pub use experiment::{
    adversarial_scenes, mirror_backend, observe_scene, run_experiment, run_experiment_with, run_scene, write_experiment, BackendFactory, CandidateRecord,
    ExperimentConfig, ExperimentOutcome, ADVERSARIAL_FAR_SIDE_BIAS, SceneContext, SceneOutcome, SegmentationConfig, REPORT_FILE, TIMINGS_FILE,
    TRIALS_CSV,
};
pub use oracle::{grasp_success_oracle, judge_grasp, OracleConfig, OracleVerdict};
pub use precision::{
    precision_at_k, ExecutedGrasp, Method, MethodPrecision, PrecisionReport, PrecisionSlice, ScenePrecision,
    StageTimings, TrialResult, ORACLE_LABEL,
};
