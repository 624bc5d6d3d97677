//! Region-constrained grasp planning: antipodal sampling, the analytic
//! success oracle, in-hand clipping, candidate scoring, and selection.

mod hand;
mod label;
mod pose;
mod sampler;
mod score;
#[cfg(test)]
mod testgeo;
pub mod wrench;

pub use hand::HandConfig;
pub use label::{build_grasp_set, force_closure_label, GraspSet};
pub use pose::{GraspCandidate, GraspLabel, GraspPose};
pub use sampler::{clip_in_hand, sample_antipodal, RegionMask, SampleOutcome, SamplerRules};
pub use score::{
    grasp_features, score_candidates, scorer_training_data, select_grasp, AnalyticScorer,
    LearnedScorer, Scorer, SelectionPolicy, GRASP_FEATURE_DIM,
};
