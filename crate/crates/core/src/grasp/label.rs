//! Analytic grasp success labeling and per-part grasp-set construction.
//!
//! The label is a deterministic oracle: a candidate succeeds when its
//! contacts pass the exact friction-cone antipodal test, the discretized
//! contact wrenches enclose the origin with margin, and the straight-line
//! approach path is collision-free. Per-part grasp sets are sampled with a
//! slightly widened admission cone so that marginal candidates enter the set
//! and the strict oracle produces a mix of success and failure labels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{LabeledCloud, SpatialIndex, Vec3};
use crate::grasp::hand::HandConfig;
use crate::grasp::pose::{GraspCandidate, GraspLabel};
use crate::grasp::sampler::{gripper_collides, try_build_candidate, RegionMask, EPS_REGION};
use crate::grasp::wrench::{antipodal_ok, closure_margin, Contact, CONE_EDGES, MARGIN_EPS};

/// How far the approach path is swept when checking execution collisions;
/// longer than any desk-scale object.
const APPROACH_SWEEP: f64 = 0.5;

/// Widening (radians) applied to the friction-cone half-angle when admitting
/// candidates into a labeled grasp set. Admission at exactly the physical
/// cone would keep successes only; the widened band lets borderline
/// candidates through so the strict oracle can fail them, yielding a
/// statistically balanced set.
pub(crate) const ADMIT_CONE_SLACK: f64 = 0.35;

/// A part needs at least this many surface points to support sampling.
const MIN_PART_POINTS: usize = 8;

/// Attempt budget per requested candidate when building a grasp set.
const ATTEMPTS_PER_CANDIDATE: usize = 40;

/// Labels a candidate by the analytic success oracle.
///
/// Success requires all three of:
/// 1. both contact normals inside the friction cone of the closing line,
/// 2. force-closure margin ≥ threshold on 8-edge discretized cones,
/// 3. no cloud point inside the gripper body or its swept approach path.
pub fn force_closure_label(
    candidate: &GraspCandidate,
    cloud: &LabeledCloud,
    normals: &[Vec3],
    hand: &HandConfig,
) -> Result<GraspLabel> {
    if normals.len() != cloud.len() {
        return Err(Error::LengthMismatch { lhs: normals.len(), rhs: cloud.len() });
    }
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let index = SpatialIndex::build(&cloud.points);
    Ok(label_with_index(candidate, cloud, normals, &index, hand))
}

/// Oracle core, reusing a prebuilt spatial index (hot path when labeling
/// whole grasp sets).
pub(super) fn label_with_index(
    candidate: &GraspCandidate,
    cloud: &LabeledCloud,
    normals: &[Vec3],
    index: &SpatialIndex,
    hand: &HandConfig,
) -> GraspLabel {
    let contact = |p: &crate::geom::Point3| -> Option<Contact> {
        let (i, _) = index.nearest_one(p)?;
        let n = normals[i].norm();
        if n < 1e-9 {
            return None;
        }
        Some(Contact { position: *p, normal: normals[i] / n })
    };
    let (Some(left), Some(right)) =
        (contact(&candidate.contact_left), contact(&candidate.contact_right))
    else {
        return GraspLabel::Failure;
    };

    if !antipodal_ok(&left, &right, hand.friction_mu) {
        return GraspLabel::Failure;
    }
    match closure_margin(&[left, right], hand.friction_mu, CONE_EDGES) {
        Some(margin) if margin >= MARGIN_EPS => {}
        _ => return GraspLabel::Failure,
    }
    if gripper_collides(cloud, index, &candidate.pose, hand, APPROACH_SWEEP) {
        return GraspLabel::Failure;
    }
    GraspLabel::Success
}

/// Labeled grasp candidates for one part surface, with the sampling
/// provenance needed to reproduce or audit the set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraspSet {
    pub part_label: u32,
    pub seed: u64,
    /// Sampling attempts consumed; candidates.len() may fall short of the
    /// requested size when the part admits fewer distinct grasps.
    pub trials_used: usize,
    pub candidates: Vec<GraspCandidate>,
}

impl GraspSet {
    pub fn positive_fraction(&self) -> f64 {
        if self.candidates.is_empty() {
            return 0.0;
        }
        let pos = self.candidates.iter().filter(|c| c.label == GraspLabel::Success).count();
        pos as f64 / self.candidates.len() as f64
    }
}

/// Samples `n` candidates on the surface of one part and labels each with
/// the strict oracle. Candidates are admitted through a widened friction
/// cone (body-collision-free, within aperture, centered near the part), so
/// the returned set carries both labels.
pub fn build_grasp_set(
    cloud: &LabeledCloud,
    normals: &[Vec3],
    part_label: u32,
    hand: &HandConfig,
    n: usize,
    seed: u64,
) -> Result<GraspSet> {
    hand.validate()?;
    if normals.len() != cloud.len() {
        return Err(Error::LengthMismatch { lhs: normals.len(), rhs: cloud.len() });
    }
    let region = RegionMask::from_label(cloud, part_label);
    let region_indices = region.indices();
    if region_indices.len() < MIN_PART_POINTS {
        return Err(Error::PartTooSmall { part: part_label, got: region_indices.len() });
    }

    let index = SpatialIndex::build(&cloud.points);
    let region_points: Vec<_> = region_indices.iter().map(|&i| cloud.points[i]).collect();
    let region_index = SpatialIndex::build(&region_points);

    let admit_angle = (hand.cone_half_angle() + ADMIT_CONE_SLACK).min(1.55);
    let admit_cos = admit_angle.cos();

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut candidates = Vec::with_capacity(n);
    let mut attempts = 0;
    let max_attempts = ATTEMPTS_PER_CANDIDATE * n;

    while attempts < max_attempts && candidates.len() < n {
        attempts += 1;
        let seed_idx = region_indices[rng.gen_range(0..region_indices.len())];
        let psi = rng.gen_range(0.0..std::f64::consts::TAU);
        let pick = rng.gen_range(0.0..1.0);

        let Some(mut candidate) =
            try_build_candidate(cloud, normals, &index, hand, admit_cos, seed_idx, psi, pick)
        else {
            continue;
        };
        match region_index.nearest_one(&candidate.pose.position) {
            Some((_, d2)) if d2.sqrt() <= EPS_REGION => {}
            _ => continue,
        }
        // The set owns its candidates: stamp the requested part even when
        // the grasp center sits marginally closer to a neighboring part.
        candidate.part_label = part_label;
        candidate.label = label_with_index(&candidate, cloud, normals, &index, hand);
        candidates.push(candidate);
    }

    if candidates.is_empty() {
        return Err(Error::NoCandidates { trials: attempts });
    }
    Ok(GraspSet { part_label, seed, trials_used: attempts, candidates })
}
