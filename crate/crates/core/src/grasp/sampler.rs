//! Region-constrained antipodal grasp sampling.
//!
//! One trial draws a seed point uniformly from the region, an approach
//! angle, and a partner slot; the antipodal partner is drawn uniformly from
//! the surface points inside the friction cone around the seed's inward
//! normal. A trial yields at most one candidate, after friction-cone,
//! collision, aperture, and region-proximity checks. The trial loop is
//! sequential so trial counts are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{LabeledCloud, Point3, SpatialIndex, Vec3};
use crate::grasp::hand::HandConfig;
use crate::grasp::pose::{GraspCandidate, GraspLabel, GraspPose};
use crate::grasp::wrench::{tangent_basis, Contact};

/// Minimum contact separation; closer pairs are the same surface patch.
pub(super) const MIN_GAP: f64 = 1e-3;

/// A kept candidate's center must lie within this distance of a region point.
pub(super) const EPS_REGION: f64 = 5e-3;

/// Subset of cloud points eligible as grasp-seed locations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionMask {
    bits: Vec<bool>,
}

impl RegionMask {
    pub fn new(bits: Vec<bool>) -> Self {
        RegionMask { bits }
    }

    /// All points carrying the given part label.
    pub fn from_label(cloud: &LabeledCloud, label: u32) -> Self {
        RegionMask { bits: cloud.labels.iter().map(|&l| l == label).collect() }
    }

    pub fn full(len: usize) -> Self {
        RegionMask { bits: vec![true; len] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// Number of selected points.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Indices of selected points, ascending.
    pub fn indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| if b { Some(i) } else { None })
            .collect()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }
}

/// Trial budget for the sampler.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerRules {
    /// Hard cap on seed/approach draws.
    pub max_trials: usize,
    /// Stop early once this many candidates are kept.
    pub target: usize,
}

impl Default for SamplerRules {
    fn default() -> Self {
        SamplerRules { max_trials: 150, target: 20 }
    }
}

/// Kept candidates plus the number of trials actually spent.
#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub candidates: Vec<GraspCandidate>,
    pub trials_used: usize,
}

/// Samples antipodal grasp candidates whose centers stay near the region.
///
/// Kept candidates pass, in order: a friction-cone partner search around the
/// seed's inward normal, the two-sided antipodal test, gap ≤ max aperture,
/// gripper-body collision against the full cloud, and center-to-region
/// proximity (≤ 5 mm to the nearest region point). Identical inputs and seed
/// reproduce the identical candidate list.
pub fn sample_antipodal(
    cloud: &LabeledCloud,
    normals: &[Vec3],
    region: &RegionMask,
    hand: &HandConfig,
    rules: &SamplerRules,
    seed: u64,
) -> Result<SampleOutcome> {
    hand.validate()?;
    if region.len() != cloud.len() {
        return Err(Error::LengthMismatch { lhs: region.len(), rhs: cloud.len() });
    }
    if normals.len() != cloud.len() {
        return Err(Error::LengthMismatch { lhs: normals.len(), rhs: cloud.len() });
    }
    let region_indices = region.indices();
    if region_indices.is_empty() {
        return Err(Error::EmptyRegion);
    }

    let index = SpatialIndex::build(&cloud.points);
    let region_points: Vec<Point3> = region_indices.iter().map(|&i| cloud.points[i]).collect();
    let region_index = SpatialIndex::build(&region_points);

    let cos_cone = (1.0 + hand.friction_mu * hand.friction_mu).sqrt().recip();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut candidates = Vec::new();
    let mut trials_used = 0;

    while trials_used < rules.max_trials && candidates.len() < rules.target {
        trials_used += 1;
        // Fixed three draws per trial keeps the stream aligned regardless of
        // where the trial fails.
        let seed_idx = region_indices[rng.gen_range(0..region_indices.len())];
        let psi = rng.gen_range(0.0..std::f64::consts::TAU);
        let pick = rng.gen_range(0.0..1.0);

        let Some(candidate) = try_build_candidate(
            cloud, normals, &index, hand, cos_cone, seed_idx, psi, pick,
        ) else {
            continue;
        };

        // Region proximity: the grasp center must sit on (or next to) the
        // requested region, not merely share a contact with it.
        match region_index.nearest_one(&candidate.pose.position) {
            Some((_, d2)) if d2.sqrt() <= EPS_REGION => {}
            _ => continue,
        }
        candidates.push(candidate);
    }

    if candidates.is_empty() {
        return Err(Error::NoCandidates { trials: trials_used });
    }
    Ok(SampleOutcome { candidates, trials_used })
}

/// Builds one candidate from a seed point and an approach angle, or `None`
/// when any geometric check fails. `cone_cos` bounds the partner search and
/// the antipodal test; callers may relax it below cos(atan μ) to admit
/// marginal pairs (used when building labeled training sets). `pick` in
/// [0, 1) selects the partner among all qualifying points; taking the
/// nearest qualifying point instead would systematically favor pairs at the
/// cone boundary on curved surfaces.
#[allow(clippy::too_many_arguments)]
pub(super) fn try_build_candidate(
    cloud: &LabeledCloud,
    normals: &[Vec3],
    index: &SpatialIndex,
    hand: &HandConfig,
    cone_cos: f64,
    seed_idx: usize,
    psi: f64,
    pick: f64,
) -> Option<GraspCandidate> {
    let p_seed = cloud.points[seed_idx];
    let n_norm = normals[seed_idx].norm();
    if n_norm < 1e-9 {
        return None;
    }
    let n_seed = normals[seed_idx] / n_norm;

    // Antipodal partner candidates: surface points, in the cone around
    // −n_seed, whose own normal also opposes the closing line. Requiring
    // both cones during the search skips same-surface neighbors that graze
    // the seed cone's boundary.
    let mut qualifying: Vec<(usize, Vec3)> = Vec::new();
    for &(j, _) in &index.within_radius(&p_seed, hand.max_aperture) {
        if j == seed_idx {
            continue;
        }
        // Same subtraction/norm arithmetic as the strict antipodal test, so
        // pairs that land exactly on the cone boundary get one verdict.
        let gap_vec = cloud.points[j] - p_seed;
        let gap = gap_vec.norm();
        if gap < MIN_GAP {
            continue;
        }
        let u = gap_vec / gap;
        if u.dot(&n_seed) > -cone_cos {
            continue;
        }
        let pn_norm = normals[j].norm();
        if pn_norm < 1e-9 || u.dot(&normals[j]) / pn_norm < cone_cos {
            continue;
        }
        qualifying.push((j, u));
    }
    if qualifying.is_empty() {
        return None;
    }
    let slot = ((pick.clamp(0.0, 1.0) * qualifying.len() as f64) as usize)
        .min(qualifying.len() - 1);
    let (j, closing) = qualifying[slot];

    let left = Contact { position: p_seed, normal: n_seed };
    let right = Contact { position: cloud.points[j], normal: normals[j] / normals[j].norm() };

    // Approach direction at angle psi in the plane orthogonal to the closing
    // line, flipped into the lower hemisphere so the hand comes from above
    // the table.
    let (e1, e2) = tangent_basis(&closing);
    let mut approach = e1 * psi.cos() + e2 * psi.sin();
    if approach.z > 0.0 {
        approach = -approach;
    }

    let center = Point3::from_vec((left.position.coords() + right.position.coords()) * 0.5);
    let pose = GraspPose::new(center, approach, closing).ok()?;

    if gripper_collides(cloud, index, &pose, hand, 0.0) {
        return None;
    }

    let part_label = cloud.labels[index.nearest_one(&center)?.0];
    let alignment = 0.5 * ((-closing.dot(&left.normal)) + closing.dot(&right.normal));
    let quality = alignment.clamp(0.0, 1.0);

    Some(GraspCandidate {
        pose,
        contact_left: left.position,
        contact_right: right.position,
        part_label,
        quality,
        label: GraspLabel::Unlabeled,
    })
}

/// True when any cloud point intrudes into the gripper body (finger or palm
/// boxes); `sweep` additionally extends every box backward along −approach to
/// model the straight-line approach path.
///
/// Gripper-frame boxes (x = approach, y = closing, z = axis), all spanning
/// |z| ≤ hand_height/2:
/// fingers  x ∈ [−d/2, d/2], |y| ∈ [ap/2, ap/2 + w]
/// palm     x ∈ [−d/2 − w, −d/2], |y| ≤ ap/2 + w
///
/// The closing box (|y| < ap/2 between the fingertips) is intentionally not a
/// collision volume: that is where the grasped material belongs.
pub(super) fn gripper_collides(
    cloud: &LabeledCloud,
    index: &SpatialIndex,
    pose: &GraspPose,
    hand: &HandConfig,
    sweep: f64,
) -> bool {
    let half_d = hand.finger_depth * 0.5;
    let half_ap = hand.max_aperture * 0.5;
    let half_h = hand.hand_height * 0.5;
    let w = hand.finger_width;

    let reach_x = half_d + w + sweep;
    let reach_y = half_ap + w;
    let bound = (reach_x * reach_x + reach_y * reach_y + half_h * half_h).sqrt();

    for &(i, _) in &index.within_radius(&pose.position, bound) {
        let q = pose.to_gripper_frame(&cloud.points[i]);
        if q.z.abs() > half_h {
            continue;
        }
        let ay = q.y.abs();
        let finger = q.x >= -half_d - sweep && q.x <= half_d && ay >= half_ap && ay <= half_ap + w;
        let palm = q.x >= -half_d - w - sweep && q.x <= -half_d && ay <= half_ap + w;
        if finger || palm {
            return true;
        }
    }
    false
}

/// Points inside the closing-region box (aperture × finger_depth ×
/// hand_height centered on the grasp), expressed in gripper coordinates.
/// Labels ride along; the result may be empty.
pub fn clip_in_hand(cloud: &LabeledCloud, g: &GraspPose, hand: &HandConfig) -> LabeledCloud {
    let half_d = hand.finger_depth * 0.5;
    let half_ap = hand.max_aperture * 0.5;
    let half_h = hand.hand_height * 0.5;

    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (p, &l) in cloud.points.iter().zip(cloud.labels.iter()) {
        let q = g.to_gripper_frame(p);
        if q.x.abs() <= half_d && q.y.abs() <= half_ap && q.z.abs() <= half_h {
            points.push(q);
            labels.push(l);
        }
    }
    LabeledCloud::new(points, labels).expect("paired points and labels")
}
