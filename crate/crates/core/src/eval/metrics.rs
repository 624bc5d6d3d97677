//! Grounding measurement: mask IoU and the three-level metric aggregation.
//!
//! Accuracy is micro-averaged over every point of every result. The IoU
//! averages form a hierarchy: instance-average pools all IoUs directly,
//! while the part and object averages first take the mean within each part
//! class (resp. object class) and then average those class means, so that
//! rare classes weigh as much as common ones.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grasp::RegionMask;

/// Intersection-over-union of two masks of equal length. Two empty masks
/// agree vacuously: IoU = 1.0.
pub fn iou(pred: &RegionMask, truth: &RegionMask) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch { lhs: pred.len(), rhs: truth.len() });
    }
    let mut inter = 0usize;
    let mut union = 0usize;
    for (p, t) in pred.as_slice().iter().zip(truth.as_slice()) {
        if *p && *t {
            inter += 1;
        }
        if *p || *t {
            union += 1;
        }
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// One grounding result: the predicted and ground-truth masks over the same
/// cloud, plus the class labels the aggregation groups by.
#[derive(Clone, Debug)]
pub struct GroundingSample {
    pub pred: RegionMask,
    pub truth: RegionMask,
    pub part_class: String,
    pub object_class: String,
}

/// Aggregated grounding quality; every field lies in [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundingMetrics {
    /// Per-point binary accuracy, micro-averaged across all results.
    pub accuracy: f64,
    /// Mean over part classes of the class-mean IoU.
    pub part_avg_iou: f64,
    /// Mean over object classes of the class-mean IoU.
    pub object_avg_iou: f64,
    /// Mean of all IoUs, ungrouped.
    pub instance_avg_iou: f64,
}

/// Computes the four grounding metrics over a non-empty result list.
/// Classes appear in the aggregation only when they carry at least one
/// sample, so zero-sample classes cannot drag a mean down.
pub fn grounding_metrics(results: &[GroundingSample]) -> Result<GroundingMetrics> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }

    let mut correct = 0usize;
    let mut total = 0usize;
    let mut ious = Vec::with_capacity(results.len());
    let mut by_part: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    let mut by_object: BTreeMap<&str, (f64, usize)> = BTreeMap::new();

    for sample in results {
        if sample.pred.len() != sample.truth.len() {
            return Err(Error::LengthMismatch {
                lhs: sample.pred.len(),
                rhs: sample.truth.len(),
            });
        }
        for (p, t) in sample.pred.as_slice().iter().zip(sample.truth.as_slice()) {
            total += 1;
            if p == t {
                correct += 1;
            }
        }
        let value = iou(&sample.pred, &sample.truth)?;
        ious.push(value);
        let part = by_part.entry(&sample.part_class).or_insert((0.0, 0));
        part.0 += value;
        part.1 += 1;
        let object = by_object.entry(&sample.object_class).or_insert((0.0, 0));
        object.0 += value;
        object.1 += 1;
    }

    let class_mean = |groups: &BTreeMap<&str, (f64, usize)>| -> f64 {
        let sum: f64 = groups.values().map(|(s, n)| s / *n as f64).sum();
        sum / groups.len() as f64
    };

    Ok(GroundingMetrics {
        accuracy: if total == 0 { 1.0 } else { correct as f64 / total as f64 },
        part_avg_iou: class_mean(&by_part),
        object_avg_iou: class_mean(&by_object),
        instance_avg_iou: ious.iter().sum::<f64>() / ious.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn mask(bits: &[u8]) -> RegionMask {
        RegionMask::new(bits.iter().map(|&b| b != 0).collect())
    }

    #[test]
    fn iou_hand_examples() {
        let a = mask(&[1, 1, 0, 0]);
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        let b = mask(&[0, 0, 1, 1]);
        assert_eq!(iou(&a, &b).unwrap(), 0.0);
        let c = mask(&[0, 1, 1, 0]);
        let got = iou(&a, &c).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-15);
        let empty = mask(&[0, 0, 0, 0]);
        assert_eq!(iou(&empty, &empty).unwrap(), 1.0);
        assert_eq!(iou(&mask(&[]), &mask(&[])).unwrap(), 1.0);
        assert!(matches!(
            iou(&a, &mask(&[1, 0])),
            Err(Error::LengthMismatch { lhs: 4, rhs: 2 })
        ));
    }

    #[test]
    fn iou_matches_the_brute_oracle_on_random_masks() {
        let mut rng = ChaCha12Rng::seed_from_u64(4021);
        for _ in 0..300 {
            let len = rng.gen_range(1..=4096);
            let density_a: f64 = rng.gen_range(0.0..1.0);
            let density_b: f64 = rng.gen_range(0.0..1.0);
            let a: Vec<bool> = (0..len).map(|_| rng.gen_bool(density_a)).collect();
            let b: Vec<bool> = (0..len).map(|_| rng.gen_bool(density_b)).collect();
            let fast = iou(&RegionMask::new(a.clone()), &RegionMask::new(b.clone())).unwrap();
            let brute = partgrasp_oracles::iou_brute(&a, &b);
            assert!(
                (fast - brute).abs() < 1e-15,
                "len={len} fast={fast} brute={brute}"
            );
        }
    }

    /// Builds a sample whose IoU is exactly num/den: the first `num` points
    /// are shared, the rest of the truth is unmatched.
    fn graded(num: usize, den: usize, part: &str, object: &str) -> GroundingSample {
        let mut pred = vec![false; den];
        let mut truth = vec![false; den];
        for i in 0..num {
            pred[i] = true;
            truth[i] = true;
        }
        for i in num..den {
            truth[i] = true;
        }
        GroundingSample {
            pred: RegionMask::new(pred),
            truth: RegionMask::new(truth),
            part_class: part.into(),
            object_class: object.into(),
        }
    }

    #[test]
    fn nested_means_follow_the_worked_example() {
        // Part A holds IoUs 0.2 and 0.4, part B holds 0.9:
        // part average = mean(mean(0.2, 0.4), 0.9) = mean(0.3, 0.9) = 0.6,
        // instance average = mean(0.2, 0.4, 0.9) = 0.5.
        let results = vec![
            graded(1, 5, "A", "o1"),
            graded(2, 5, "A", "o2"),
            graded(9, 10, "B", "o1"),
        ];
        let m = grounding_metrics(&results).unwrap();
        assert!((m.part_avg_iou - 0.6).abs() < 1e-12);
        assert!((m.instance_avg_iou - 0.5).abs() < 1e-12);
        // Object o1 averages (0.2 + 0.9)/2 = 0.55, o2 carries 0.4.
        assert!((m.object_avg_iou - 0.475).abs() < 1e-12);
        // Accuracy by hand: matched points {5-4=1.. } pred==truth where both
        // true or both false: sample1 has 1 agreeing positive + 0 negatives
        // agreeing (all 5 slots: 1 both-true, 4 pred=false truth=true) → 1;
        // sample2 → 2 of 5; sample3 → 9 of 10. Total 12 of 20.
        assert!((m.accuracy - 12.0 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_single_sample_scores_one_everywhere() {
        let results = vec![graded(7, 7, "handle", "mug")];
        let m = grounding_metrics(&results).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.part_avg_iou, 1.0);
        assert_eq!(m.object_avg_iou, 1.0);
        assert_eq!(m.instance_avg_iou, 1.0);
    }

    #[test]
    fn empty_results_are_rejected() {
        assert!(matches!(grounding_metrics(&[]), Err(Error::EmptyResults)));
    }

    #[test]
    fn aggregation_matches_the_independent_brute_path() {
        let mut rng = ChaCha12Rng::seed_from_u64(990);
        let parts = ["handle", "body", "leg", "blade"];
        let objects = ["mug", "table", "knife"];
        for _ in 0..200 {
            let n = rng.gen_range(1..=20);
            let mut samples = Vec::new();
            let mut brute: Vec<partgrasp_oracles::BruteSample> = Vec::new();
            for _ in 0..n {
                let len = rng.gen_range(1..=64);
                let pred: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.4)).collect();
                let truth: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.4)).collect();
                let part = parts[rng.gen_range(0..parts.len())];
                let object = objects[rng.gen_range(0..objects.len())];
                samples.push(GroundingSample {
                    pred: RegionMask::new(pred.clone()),
                    truth: RegionMask::new(truth.clone()),
                    part_class: part.into(),
                    object_class: object.into(),
                });
                brute.push((pred, truth, part.into(), object.into()));
            }
            let fast = grounding_metrics(&samples).unwrap();
            let (acc, part, object, instance) =
                partgrasp_oracles::grounding_metrics_brute(&brute);
            assert!((fast.accuracy - acc).abs() < 1e-12);
            assert!((fast.part_avg_iou - part).abs() < 1e-12);
            assert!((fast.object_avg_iou - object).abs() < 1e-12);
            assert!((fast.instance_avg_iou - instance).abs() < 1e-12);
        }
    }
}
