//! Part-aware grasp planning at desk scale.
//!
//! The crate factors grasp selection over a part-labeled point cloud into
//! two stages: grounding a language instruction to a point-wise region, then
//! sampling and scoring antipodal grasps constrained to that region. It also
//! ships the synthetic data pipeline (parametric shapes, rendered views,
//! instruction generation, analytic grasp labels) and the evaluation
//! harness used to compare grounding and planning variants.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod geom;
pub mod grasp;
pub mod grounding;
pub mod language;
pub mod lp;
pub mod nn;
pub mod ply;
pub mod shape;

pub use error::{Error, Result};
