//! Measurement: grounding metrics, grasp trials, dataset splits, and the
//! experiment runner that reduces a (sampling area × selection policy) grid
//! into a reproducible report.

mod experiment;
mod metrics;
mod split;
mod trial;

pub use experiment::{
    run_experiment, ExperimentConfig, ExperimentReport, GraspMetrics, GraspRow, TrialCase,
};
pub use metrics::{grounding_metrics, iou, GroundingMetrics, GroundingSample};
pub use split::{audit_splits, make_splits, SampleInfo, SplitMode, SplitSpec, Splits};
pub use trial::{
    grasp_trial, transfer_mask, SamplingArea, TrialConfig, TrialOutcome, TrialScene,
    MASK_TRANSFER_CAP,
};
