//! Independent reference implementations ("oracles") used only by tests.
//!
//! Everything here is written from scratch against the mathematical
//! definitions, deliberately sharing no code with the production crates:
//! the force-closure margin is computed by bisection over a convex-hull
//! feasibility problem solved with Wolfe's min-norm-point algorithm (the
//! production path uses a simplex LP), the friction cones use a different
//! orthonormal-basis construction, and the set metrics count indices
//! explicitly. Agreement between the two paths is therefore evidence of
//! correctness rather than of shared bugs.

pub mod margin;
pub mod metrics;
pub mod mnp;

pub use margin::{antipodal_brute, closure_margin_dense, OracleContact};
pub use metrics::{grounding_metrics_brute, iou_brute, BruteSample};
pub use mnp::dist_to_hull;
