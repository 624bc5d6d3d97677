//! Per-point instruction grounding: mapping (point cloud, instruction text)
//! to the binary region of points the instruction refers to, through either
//! a deterministic symbolic path or a small trainable fusion network.

pub mod features;
pub mod mlp;
pub mod rule;
pub mod train;

pub use features::{
    featurize_language, featurize_language_with, featurize_points, D_LANG, D_POINT, K_GEOM,
    PROJECTION_SEED,
};
pub use mlp::{Adam, Mlp, HIDDEN1, HIDDEN2};
pub use rule::{rule_ground, RuleGrounder};
pub use train::{
    ground, hash_dataset, train_grounder, Grounder, GroundingExample, Hyper, TrainedGrounder,
    TrainingManifest, MODEL_VERSION,
};
