use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::geom::{Point3, RigidPose, SpatialIndex};

/// Outcome of point-to-point ICP registration.
#[derive(Clone, Copy, Debug)]
pub struct IcpResult {
    /// Transform mapping source coordinates into target coordinates.
    pub pose: RigidPose,
    /// Root-mean-square correspondence distance at the final iterate.
    pub rmse: f64,
    /// Iterations actually run.
    pub iterations: usize,
}

/// Least-squares rigid transform mapping `source[i]` onto `target[i]`
/// (Kabsch). Requires at least three non-collinear correspondences.
pub fn best_fit_transform(source: &[Point3], target: &[Point3]) -> Result<RigidPose> {
    if source.len() != target.len() {
        return Err(Error::LengthMismatch { lhs: source.len(), rhs: target.len() });
    }
    if source.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: source.len() });
    }
    let s_mean = crate::geom::point::centroid(source).coords();
    let t_mean = crate::geom::point::centroid(target).coords();

    let mut h = Matrix3::zeros();
    for (s, t) in source.iter().zip(target.iter()) {
        h += (s.coords() - s_mean) * (t.coords() - t_mean).transpose();
    }

    let svd = nalgebra::SVD::new(h, true, true);
    let u = svd.u.ok_or(Error::DegenerateCorrespondences)?;
    let v_t = svd.v_t.ok_or(Error::DegenerateCorrespondences)?;

    // Collinear (or coincident) correspondences leave the rotation about the
    // line unconstrained: only one singular value is meaningfully nonzero.
    let sv = &svd.singular_values;
    let max_sv = sv.iter().cloned().fold(0.0f64, f64::max);
    let significant = sv.iter().filter(|&&s| s > max_sv * 1e-9 && s > 1e-15).count();
    if significant < 2 {
        return Err(Error::DegenerateCorrespondences);
    }

    let v = v_t.transpose();
    let mut rotation = v * u.transpose();
    if rotation.determinant() < 0.0 {
        // Reflection case: flip the column of V paired with the smallest
        // singular value.
        let mut min_idx = 0;
        for i in 1..3 {
            if sv[i] < sv[min_idx] {
                min_idx = i;
            }
        }
        let mut v_fixed = v;
        for r in 0..3 {
            v_fixed[(r, min_idx)] = -v_fixed[(r, min_idx)];
        }
        rotation = v_fixed * u.transpose();
    }

    let translation = t_mean - rotation * s_mean;
    Ok(RigidPose::from_parts(rotation, translation))
}

/// Iterative closest point: registers `source` onto `target` starting from
/// `init`. Each round corresponds every source point with its nearest target
/// point and re-solves the absolute best-fit transform; stops when the RMSE
/// improves by less than `tol` or after `max_iters` rounds.
pub fn icp_register(
    source: &[Point3],
    target: &[Point3],
    init: &RigidPose,
    max_iters: usize,
    tol: f64,
) -> Result<IcpResult> {
    if source.is_empty() || target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if source.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: source.len() });
    }
    let index = SpatialIndex::build(target);
    let mut pose = *init;
    let mut prev_rmse = f64::INFINITY;
    let mut iterations = 0;

    for iter in 1..=max_iters.max(1) {
        iterations = iter;
        let mut matched: Vec<Point3> = Vec::with_capacity(source.len());
        let mut sq_sum = 0.0;
        for s in source {
            let moved = pose.apply(s);
            let (idx, d2) = index
                .nearest_one(&moved)
                .expect("target verified non-empty");
            matched.push(target[idx]);
            sq_sum += d2;
        }
        let rmse = (sq_sum / source.len() as f64).sqrt();

        pose = best_fit_transform(source, &matched)?;

        let done = (prev_rmse - rmse).abs() < tol;
        prev_rmse = rmse;
        if done {
            break;
        }
    }

    // RMSE under the final pose (one extra correspondence pass).
    let mut sq_sum = 0.0;
    for s in source {
        let moved = pose.apply(s);
        let (_, d2) = index.nearest_one(&moved).expect("target verified non-empty");
        sq_sum += d2;
    }
    let rmse = (sq_sum / source.len() as f64).sqrt();

    Ok(IcpResult { pose, rmse, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;

    /// Points spread over a unit box surface, deterministic.
    fn box_points() -> Vec<Point3> {
        let mut pts = Vec::new();
        let n = 7;
        for i in 0..=n {
            for j in 0..=n {
                let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
                pts.push(Point3::new(a, b, 0.0));
                pts.push(Point3::new(a, b, 1.0));
                pts.push(Point3::new(a, 0.0, b));
                pts.push(Point3::new(0.0, a, b));
            }
        }
        pts
    }

    #[test]
    fn best_fit_recovers_exact_transform() {
        let src = box_points();
        let truth = RigidPose::yaw(0.4)
            .compose(&RigidPose::pitch(-0.2))
            .compose(&RigidPose::translation_of(Vec3::new(0.3, -0.1, 0.2)));
        let dst: Vec<Point3> = src.iter().map(|p| truth.apply(p)).collect();
        let got = best_fit_transform(&src, &dst).unwrap();
        assert!(got.max_abs_diff(&truth) < 1e-10);
    }

    #[test]
    fn best_fit_rejects_collinear() {
        let src: Vec<Point3> = (0..5).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let dst: Vec<Point3> = (0..5).map(|i| Point3::new(0.0, i as f64, 0.0)).collect();
        assert!(matches!(best_fit_transform(&src, &dst), Err(Error::DegenerateCorrespondences)));
    }

    #[test]
    fn icp_recovers_small_misalignment() {
        let target = box_points();
        let truth = RigidPose::yaw(0.15).compose(&RigidPose::translation_of(Vec3::new(0.05, -0.03, 0.02)));
        // Source is the target pulled back through the truth: registering it
        // should rediscover `truth`.
        let inv = truth.inverse();
        let source: Vec<Point3> = target.iter().map(|p| inv.apply(p)).collect();
        let result = icp_register(&source, &target, &RigidPose::identity(), 60, 1e-12).unwrap();
        assert!(result.rmse < 1e-6, "rmse {}", result.rmse);
        assert!(result.pose.max_abs_diff(&truth) < 1e-5);
    }

    #[test]
    fn icp_partial_overlap_converges() {
        let target = box_points();
        // A partial source: only points with z < 0.5, slightly rotated.
        let truth = RigidPose::yaw(0.1);
        let inv = truth.inverse();
        let source: Vec<Point3> = target
            .iter()
            .filter(|p| p.z < 0.5)
            .map(|p| inv.apply(p))
            .collect();
        let result = icp_register(&source, &target, &RigidPose::identity(), 60, 1e-12).unwrap();
        assert!(result.rmse < 1e-4, "rmse {}", result.rmse);
    }

    #[test]
    fn icp_empty_inputs_error() {
        let pts = box_points();
        assert!(matches!(
            icp_register(&[], &pts, &RigidPose::identity(), 10, 1e-9),
            Err(Error::EmptyCloud)
        ));
        assert!(matches!(
            icp_register(&pts, &[], &RigidPose::identity(), 10, 1e-9),
            Err(Error::EmptyCloud)
        ));
    }
}
