//! Candidate scoring and final grasp selection.
//!
//! Scoring is pluggable: the analytic scorer normalizes the force-closure
//! margin into [0,1]; the learned scorer is a small classifier over the
//! approach direction fused with in-hand point cloud statistics. Selection
//! picks the argmax (ties to the lowest index) or a seeded uniform draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{LabeledCloud, SpatialIndex, Vec3};
use crate::grasp::hand::HandConfig;
use crate::grasp::label::GraspSet;
use crate::grasp::pose::{GraspCandidate, GraspLabel};
use crate::grasp::sampler::clip_in_hand;
use crate::grasp::wrench::{closure_margin, Contact, CONE_EDGES};
use crate::nn::{train_binary, Mlp, TrainConfig, TrainReport};

/// Width of the fused grasp feature vector (approach ⊕ in-hand statistics).
pub const GRASP_FEATURE_DIM: usize = 12;

/// Assigns each candidate a score in [0,1]; higher is better.
pub trait Scorer {
    fn score_batch(
        &self,
        candidates: &[GraspCandidate],
        cloud: &LabeledCloud,
        normals: &[Vec3],
        hand: &HandConfig,
    ) -> Vec<f64>;
}

/// Scores all candidates with the given scorer, clamped to [0,1].
pub fn score_candidates(
    candidates: &[GraspCandidate],
    cloud: &LabeledCloud,
    normals: &[Vec3],
    hand: &HandConfig,
    scorer: &dyn Scorer,
) -> Result<Vec<f64>> {
    if candidates.is_empty() {
        return Err(Error::EmptyResults);
    }
    if normals.len() != cloud.len() {
        return Err(Error::LengthMismatch { lhs: normals.len(), rhs: cloud.len() });
    }
    Ok(scorer
        .score_batch(candidates, cloud, normals, hand)
        .into_iter()
        .map(|s| if s.is_finite() { s.clamp(0.0, 1.0) } else { 0.0 })
        .collect())
}

/// Force-closure margin scaled to [0,1].
///
/// Two 8-edge contacts give 16 wrench columns, so the margin is at most
/// 1/16 (perfectly symmetric grasp); scores are margin·16 clamped to [0,1],
/// and non-closing candidates score exactly 0.
#[derive(Clone, Copy, Debug, Default)]
pub struct AnalyticScorer;

impl Scorer for AnalyticScorer {
    fn score_batch(
        &self,
        candidates: &[GraspCandidate],
        cloud: &LabeledCloud,
        normals: &[Vec3],
        hand: &HandConfig,
    ) -> Vec<f64> {
        let index = SpatialIndex::build(&cloud.points);
        let max_margin = 1.0 / (2 * CONE_EDGES) as f64;
        candidates
            .iter()
            .map(|c| {
                let contact = |p: &crate::geom::Point3| -> Option<Contact> {
                    let (i, _) = index.nearest_one(p)?;
                    let n = normals[i].norm();
                    if n < 1e-9 {
                        return None;
                    }
                    Some(Contact { position: *p, normal: normals[i] / n })
                };
                let (Some(l), Some(r)) = (contact(&c.contact_left), contact(&c.contact_right))
                else {
                    return 0.0;
                };
                match closure_margin(&[l, r], hand.friction_mu, CONE_EDGES) {
                    Some(m) if m > 0.0 => (m / max_margin).clamp(0.0, 1.0),
                    _ => 0.0,
                }
            })
            .collect()
    }
}

/// Feature vector for the learned scorer: unit approach direction fused with
/// statistics of the in-hand cloud in gripper coordinates (point count,
/// centroid, spread, and closing-direction extent, each normalized by the
/// closing-box half-extents).
pub fn grasp_features(c: &GraspCandidate, cloud: &LabeledCloud, hand: &HandConfig) -> Vec<f64> {
    let a = c.pose.approach();
    let mut f = vec![a.x, a.y, a.z];

    let in_hand = clip_in_hand(cloud, &c.pose, hand);
    let n = in_hand.len();
    f.push((n as f64 / 512.0).min(1.0));

    let half = [hand.finger_depth * 0.5, hand.max_aperture * 0.5, hand.hand_height * 0.5];
    if n == 0 {
        f.extend_from_slice(&[0.0; 8]);
        return f;
    }
    let centroid = in_hand.centroid().expect("clipped cloud checked non-empty");
    let c_arr = [centroid.x, centroid.y, centroid.z];
    for (ci, hi) in c_arr.iter().zip(half.iter()) {
        f.push(ci / hi);
    }
    let mut var = [0.0f64; 3];
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for p in &in_hand.points {
        let d = [p.x - centroid.x, p.y - centroid.y, p.z - centroid.z];
        for (v, di) in var.iter_mut().zip(d.iter()) {
            *v += di * di;
        }
        y_min = y_min.min(p.y);
        y_max = y_max.max(p.y);
    }
    for (v, hi) in var.iter().zip(half.iter()) {
        f.push((v / n as f64).sqrt() / hi);
    }
    f.push(y_min / half[1]);
    f.push(y_max / half[1]);
    debug_assert_eq!(f.len(), GRASP_FEATURE_DIM);
    f
}

/// Flattens a labeled grasp set into (features, targets) training rows.
pub fn scorer_training_data(
    set: &GraspSet,
    cloud: &LabeledCloud,
    hand: &HandConfig,
    features: &mut Vec<Vec<f64>>,
    targets: &mut Vec<f64>,
) {
    for c in &set.candidates {
        features.push(grasp_features(c, cloud, hand));
        targets.push(if c.label == GraspLabel::Success { 1.0 } else { 0.0 });
    }
}

/// Small classifier over [`grasp_features`], trained with binary
/// cross-entropy (batch 64, 60 epochs, step size 5e-3).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LearnedScorer {
    pub mlp: Mlp,
}

impl LearnedScorer {
    pub fn train(
        features: &[Vec<f64>],
        targets: &[f64],
        seed: u64,
    ) -> Result<(Self, TrainReport)> {
        let mut mlp = Mlp::new(&[GRASP_FEATURE_DIM, 32, 16, 1], seed)?;
        let cfg = TrainConfig { epochs: 60, batch_size: 64, learning_rate: 5e-3, seed };
        let report = train_binary(&mut mlp, features, targets, &cfg)?;
        Ok((LearnedScorer { mlp }, report))
    }
}

impl Scorer for LearnedScorer {
    fn score_batch(
        &self,
        candidates: &[GraspCandidate],
        cloud: &LabeledCloud,
        _normals: &[Vec3],
        hand: &HandConfig,
    ) -> Vec<f64> {
        candidates.iter().map(|c| self.mlp.predict(&grasp_features(c, cloud, hand))).collect()
    }
}

/// How the executed grasp is picked from the scored candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionPolicy {
    HighestScore,
    Random,
}

/// Picks one candidate: the score argmax (ties break to the lowest index) or
/// a seeded uniform draw. Returns the index alongside the candidate.
pub fn select_grasp(
    candidates: &[GraspCandidate],
    scores: &[f64],
    policy: SelectionPolicy,
    seed: u64,
) -> Result<(usize, GraspCandidate)> {
    if candidates.is_empty() {
        return Err(Error::EmptyResults);
    }
    if candidates.len() != scores.len() {
        return Err(Error::LengthMismatch { lhs: candidates.len(), rhs: scores.len() });
    }
    let idx = match policy {
        SelectionPolicy::HighestScore => {
            let mut best = 0;
            for (i, s) in scores.iter().enumerate().skip(1) {
                if *s > scores[best] {
                    best = i;
                }
            }
            best
        }
        SelectionPolicy::Random => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.gen_range(0..candidates.len())
        }
    };
    Ok((idx, candidates[idx]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point3;
    use crate::grasp::pose::GraspPose;
    use crate::grasp::testgeo::box_cloud;

    fn candidate_between(left: Point3, right: Point3, approach: Vec3) -> GraspCandidate {
        let closing = right - left;
        let center = Point3::from_vec((left.coords() + right.coords()) * 0.5);
        GraspCandidate {
            pose: GraspPose::new(center, approach, closing).unwrap(),
            contact_left: left,
            contact_right: right,
            part_label: 0,
            quality: 1.0,
            label: GraspLabel::Unlabeled,
        }
    }

    #[test]
    fn analytic_scores_cube_grasp_at_one_and_same_face_at_zero() {
        let (cloud, normals) = box_cloud([0.0, 0.0, 0.015], [0.03, 0.03, 0.03], 0.003, 0);
        let hand = HandConfig::default();
        let good = candidate_between(
            Point3::new(-0.015, 0.0, 0.015),
            Point3::new(0.015, 0.0, 0.015),
            Vec3::new(0.0, 0.0, -1.0),
        );
        let bad = candidate_between(
            Point3::new(-0.01, 0.0, 0.03),
            Point3::new(0.01, 0.0, 0.03),
            Vec3::new(0.0, 1.0, 0.0),
        );
        let scores =
            score_candidates(&[good, bad], &cloud, &normals, &hand, &AnalyticScorer).unwrap();
        // Canonical symmetric grasp: margin 1/16 = the theoretical maximum.
        assert!((scores[0] - 1.0).abs() < 1e-9, "score {}", scores[0]);
        assert_eq!(scores[1], 0.0);
    }

    #[test]
    fn select_prefers_lowest_index_on_ties() {
        let (cloud, _) = box_cloud([0.0, 0.0, 0.015], [0.03, 0.03, 0.03], 0.006, 0);
        let c = candidate_between(
            Point3::new(-0.015, 0.0, 0.015),
            Point3::new(0.015, 0.0, 0.015),
            Vec3::new(0.0, 0.0, -1.0),
        );
        let cands = [c, c, c];
        let (idx, _) =
            select_grasp(&cands, &[0.1, 0.9, 0.9], SelectionPolicy::HighestScore, 0).unwrap();
        assert_eq!(idx, 1);

        // Argmax is invariant to positive scaling.
        let (idx2, _) =
            select_grasp(&cands, &[0.025, 0.225, 0.225], SelectionPolicy::HighestScore, 0)
                .unwrap();
        assert_eq!(idx2, 1);

        // Single candidate under both policies.
        let single = [c];
        for policy in [SelectionPolicy::HighestScore, SelectionPolicy::Random] {
            let (i, _) = select_grasp(&single, &[0.3], policy, 9).unwrap();
            assert_eq!(i, 0);
        }
        let _ = cloud;
    }

    #[test]
    fn random_selection_is_seeded() {
        let (_, _) = box_cloud([0.0, 0.0, 0.015], [0.03, 0.03, 0.03], 0.01, 0);
        let c = candidate_between(
            Point3::new(-0.015, 0.0, 0.015),
            Point3::new(0.015, 0.0, 0.015),
            Vec3::new(0.0, 0.0, -1.0),
        );
        let cands = vec![c; 10];
        let scores = vec![0.5; 10];
        let (a, _) = select_grasp(&cands, &scores, SelectionPolicy::Random, 123).unwrap();
        let (b, _) = select_grasp(&cands, &scores, SelectionPolicy::Random, 123).unwrap();
        assert_eq!(a, b);
        let picks: std::collections::BTreeSet<usize> = (0..20)
            .map(|s| select_grasp(&cands, &scores, SelectionPolicy::Random, s).unwrap().0)
            .collect();
        assert!(picks.len() > 1, "different seeds explore different picks");
    }

    #[test]
    fn empty_and_mismatched_inputs_error() {
        let (cloud, normals) = box_cloud([0.0, 0.0, 0.015], [0.03, 0.03, 0.03], 0.01, 0);
        assert!(matches!(
            score_candidates(&[], &cloud, &normals, &HandConfig::default(), &AnalyticScorer),
            Err(Error::EmptyResults)
        ));
        assert!(matches!(
            select_grasp(&[], &[], SelectionPolicy::HighestScore, 0),
            Err(Error::EmptyResults)
        ));
        let c = candidate_between(
            Point3::new(-0.015, 0.0, 0.015),
            Point3::new(0.015, 0.0, 0.015),
            Vec3::new(0.0, 0.0, -1.0),
        );
        assert!(matches!(
            select_grasp(&[c], &[0.1, 0.2], SelectionPolicy::HighestScore, 0),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn grasp_features_have_fixed_width_and_respond_to_content() {
        let (cloud, _) = box_cloud([0.0, 0.0, 0.02], [0.04, 0.008, 0.04], 0.002, 0);
        let hand = HandConfig::default();
        let on = candidate_between(
            Point3::new(0.0, -0.004, 0.02),
            Point3::new(0.0, 0.004, 0.02),
            Vec3::new(0.0, 0.0, -1.0),
        );
        let off = candidate_between(
            Point3::new(1.0, -0.004, 0.02),
            Point3::new(1.0, 0.004, 0.02),
            Vec3::new(0.0, 0.0, -1.0),
        );
        let f_on = grasp_features(&on, &cloud, &hand);
        let f_off = grasp_features(&off, &cloud, &hand);
        assert_eq!(f_on.len(), GRASP_FEATURE_DIM);
        assert_eq!(f_off.len(), GRASP_FEATURE_DIM);
        assert!(f_on[3] > 0.0, "grasp on the box captures points");
        assert_eq!(f_off[3], 0.0, "grasp a metre away captures none");
    }

    #[test]
    fn learned_scorer_separates_a_feature_rule() {
        // Synthetic training rows: label follows a simple linear rule over
        // two feature slots, everything else is noise.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(21);
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for _ in 0..600 {
            let row: Vec<f64> = (0..GRASP_FEATURE_DIM).map(|_| rng.gen_range(-1.0..1.0)).collect();
            targets.push(if row[0] + 0.5 * row[4] > 0.1 { 1.0 } else { 0.0 });
            features.push(row);
        }
        let (scorer, report) = LearnedScorer::train(&features[..480], &targets[..480], 3).unwrap();
        assert!(report.epoch_loss.last().unwrap() < &report.epoch_loss[0]);
        let correct = features[480..]
            .iter()
            .zip(&targets[480..])
            .filter(|(f, &t)| (scorer.mlp.predict(f) > 0.5) == (t > 0.5))
            .count();
        let acc = correct as f64 / 120.0;
        assert!(acc > 0.85, "held-out accuracy {acc}");
    }
}
