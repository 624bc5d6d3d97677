use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::geom::{LabeledCloud, Point3};

/// Voxel-grid downsampling: one output point per occupied voxel, placed at
/// the centroid of the voxel's points. The output label is the voxel's
/// majority label, ties broken toward the smaller label id. Output order is
/// ascending voxel key (x, then y, then z), so the result is deterministic
/// and independent of input order.
///
/// Idempotent for a fixed `voxel_size`: each output centroid lies inside its
/// own voxel, so a second pass returns the same cloud.
pub fn voxel_downsample(cloud: &LabeledCloud, voxel_size: f64) -> Result<LabeledCloud> {
    if !(voxel_size > 0.0) || !voxel_size.is_finite() {
        return Err(Error::InvalidConfig(format!("voxel size must be positive, got {voxel_size}")));
    }
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }

    let mut cells: BTreeMap<(i64, i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, p) in cloud.points.iter().enumerate() {
        let key = (
            (p.x / voxel_size).floor() as i64,
            (p.y / voxel_size).floor() as i64,
            (p.z / voxel_size).floor() as i64,
        );
        cells.entry(key).or_default().push(i);
    }

    let mut points = Vec::with_capacity(cells.len());
    let mut labels = Vec::with_capacity(cells.len());
    for members in cells.values_mut() {
        // Sum in lexicographic coordinate order so the centroid is
        // bit-identical regardless of input point order.
        members.sort_by(|&a, &b| {
            let (pa, pb) = (&cloud.points[a], &cloud.points[b]);
            pa.x.total_cmp(&pb.x)
                .then(pa.y.total_cmp(&pb.y))
                .then(pa.z.total_cmp(&pb.z))
        });
        let mut sum = [0.0f64; 3];
        let mut label_counts: BTreeMap<u32, usize> = BTreeMap::new();
        for &i in members.iter() {
            let p = &cloud.points[i];
            sum[0] += p.x;
            sum[1] += p.y;
            sum[2] += p.z;
            *label_counts.entry(cloud.labels[i]).or_insert(0) += 1;
        }
        let n = members.len() as f64;
        points.push(Point3::new(sum[0] / n, sum[1] / n, sum[2] / n));
        // BTreeMap iterates labels ascending, so `>` keeps the smaller label
        // on a tie.
        let mut best = (0u32, 0usize);
        for (&label, &count) in &label_counts {
            if count > best.1 {
                best = (label, count);
            }
        }
        labels.push(best.0);
    }

    Ok(LabeledCloud { points, labels, viewpoint: cloud.viewpoint })
}

/// Farthest-point sampling down (or up) to exactly `n` points.
///
/// Starts from a seeded random point, then repeatedly adds the point
/// farthest from the selected set (ties toward the smaller index). When the
/// cloud holds fewer than `n` points, all points are kept and the remainder
/// is drawn uniformly with replacement, so the output length is always `n`.
pub fn fps_downsample(cloud: &LabeledCloud, n: usize, seed: u64) -> Result<LabeledCloud> {
    Ok(cloud.select(&fps_indices(cloud, n, seed)?))
}

/// The index sequence [`fps_downsample`] selects, for callers that need to
/// subset companion per-point data (normals, features) alongside the points.
pub fn fps_indices(cloud: &LabeledCloud, n: usize, seed: u64) -> Result<Vec<usize>> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let m = cloud.len();
    let mut selected: Vec<usize> = Vec::with_capacity(n);

    if m <= n {
        selected.extend(0..m);
        while selected.len() < n {
            selected.push(rng.gen_range(0..m));
        }
    } else {
        let start = rng.gen_range(0..m);
        selected.push(start);
        // dist2[i] = squared distance from point i to the selected set.
        let mut dist2: Vec<f64> = cloud
            .points
            .iter()
            .map(|p| p.distance_squared(&cloud.points[start]))
            .collect();
        while selected.len() < n {
            let mut far = (f64::NEG_INFINITY, 0usize);
            for (i, &d) in dist2.iter().enumerate() {
                if d > far.0 {
                    far = (d, i);
                }
            }
            let next = far.1;
            selected.push(next);
            for (i, d) in dist2.iter_mut().enumerate() {
                let nd = cloud.points[i].distance_squared(&cloud.points[next]);
                if nd < *d {
                    *d = nd;
                }
            }
        }
    }

    Ok(selected)
}
