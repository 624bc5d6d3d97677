//! Brute-force set metrics, computed through explicit index sets.

use std::collections::BTreeSet;

/// Intersection-over-union of two boolean masks of equal length, by
/// materializing the index sets. Two empty sets agree perfectly: IoU = 1.
pub fn iou_brute(a: &[bool], b: &[bool]) -> f64 {
    assert_eq!(a.len(), b.len(), "masks must be the same length");
    let sa: BTreeSet<usize> =
        a.iter().enumerate().filter_map(|(i, &v)| v.then_some(i)).collect();
    let sb: BTreeSet<usize> =
        b.iter().enumerate().filter_map(|(i, &v)| v.then_some(i)).collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    let inter = sa.intersection(&sb).count();
    inter as f64 / union as f64
}

/// One grounding result for the brute aggregator: predicted mask, truth
/// mask, part class, object class.
pub type BruteSample = (Vec<bool>, Vec<bool>, String, String);

/// Brute-force three-level metric aggregation, recomputed with explicit
/// sorted class lists and nested loops (no maps shared with production
/// code). Returns (accuracy, part_avg_iou, object_avg_iou,
/// instance_avg_iou).
pub fn grounding_metrics_brute(results: &[BruteSample]) -> (f64, f64, f64, f64) {
    assert!(!results.is_empty(), "need at least one result");

    let mut correct = 0usize;
    let mut total = 0usize;
    let mut ious = Vec::with_capacity(results.len());
    for (pred, truth, _, _) in results {
        assert_eq!(pred.len(), truth.len(), "masks must be the same length");
        for (p, t) in pred.iter().zip(truth) {
            total += 1;
            if p == t {
                correct += 1;
            }
        }
        ious.push(iou_brute(pred, truth));
    }
    let accuracy = if total == 0 { 1.0 } else { correct as f64 / total as f64 };

    // Class-averaged means, via an explicit sorted list of distinct class
    // names and a fresh scan per class.
    let class_mean = |key: fn(&BruteSample) -> &String| -> f64 {
        let mut classes: Vec<&String> = results.iter().map(key).collect();
        classes.sort();
        classes.dedup();
        let mut acc = 0.0;
        for class in &classes {
            let mut sum = 0.0;
            let mut count = 0usize;
            for (i, sample) in results.iter().enumerate() {
                if key(sample) == *class {
                    sum += ious[i];
                    count += 1;
                }
            }
            acc += sum / count as f64;
        }
        acc / classes.len() as f64
    };

    let part_avg = class_mean(|s| &s.2);
    let object_avg = class_mean(|s| &s.3);
    let instance_avg = ious.iter().sum::<f64>() / ious.len() as f64;
    (accuracy, part_avg, object_avg, instance_avg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_worked_examples() {
        assert_eq!(iou_brute(&[], &[]), 1.0);
        assert_eq!(iou_brute(&[false, false], &[false, false]), 1.0);
        assert_eq!(iou_brute(&[true, true], &[true, true]), 1.0);
        assert_eq!(iou_brute(&[true, false], &[false, true]), 0.0);
        // |∩| = 1, |∪| = 3.
        let got = iou_brute(&[true, true, false], &[true, false, true]);
        assert!((got - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn nested_means_on_a_hand_worked_grid() {
        // Part A carries IoUs 0.2 and 0.4, part B carries 0.9; objects o1
        // and o2 interleave so the object means differ from the part means.
        let s = |iou_num: usize, iou_den: usize, part: &str, object: &str| -> BruteSample {
            let mut pred = vec![false; iou_den];
            let mut truth = vec![false; iou_den];
            for i in 0..iou_num {
                pred[i] = true;
                truth[i] = true;
            }
            for i in iou_num..iou_den {
                truth[i] = true;
            }
            (pred, truth, part.into(), object.into())
        };
        let results =
            vec![s(1, 5, "A", "o1"), s(2, 5, "A", "o2"), s(9, 10, "B", "o1")];
        let (_, part, object, instance) = grounding_metrics_brute(&results);
        assert!((part - 0.6).abs() < 1e-12);
        assert!((object - ((0.2 + 0.9) / 2.0 + 0.4) / 2.0).abs() < 1e-12);
        assert!((instance - 0.5).abs() < 1e-12);
    }
}
