//! Synthetic test geometry shared by the grasp test suites: surfaces with
//! exact analytic normals, so sampler/labeler behavior is isolated from
//! normal estimation.

use crate::geom::{LabeledCloud, Point3, Vec3};

/// Axis-aligned box surface sampled every `step`, with exact outward normals
/// and a single label. Extents are full side lengths; the box is centered at
/// `center`.
pub(crate) fn box_cloud(
    center: [f64; 3],
    extents: [f64; 3],
    step: f64,
    label: u32,
) -> (LabeledCloud, Vec<Vec3>) {
    let half = [extents[0] * 0.5, extents[1] * 0.5, extents[2] * 0.5];
    let counts: Vec<usize> =
        half.iter().map(|h| ((2.0 * h / step).round() as usize).max(1)).collect();
    let mut points = Vec::new();
    let mut normals = Vec::new();
    // Walk the three axis pairs of faces, keeping each shared edge/corner
    // position once (first face wins) so every point has a single normal.
    let mut seen = std::collections::BTreeSet::new();
    for axis in 0..3 {
        let (u, v) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for side in [-1.0, 1.0] {
            for iu in 0..=counts[u] {
                for iv in 0..=counts[v] {
                    let mut c = [0.0; 3];
                    c[axis] = side * half[axis];
                    c[u] = -half[u] + 2.0 * half[u] * iu as f64 / counts[u] as f64;
                    c[v] = -half[v] + 2.0 * half[v] * iv as f64 / counts[v] as f64;
                    let p = Point3::new(center[0] + c[0], center[1] + c[1], center[2] + c[2]);
                    if !seen.insert((p.x.to_bits(), p.y.to_bits(), p.z.to_bits())) {
                        continue;
                    }
                    points.push(p);
                    let mut n = [0.0; 3];
                    n[axis] = side;
                    normals.push(Vec3::new(n[0], n[1], n[2]));
                }
            }
        }
    }
    let len = points.len();
    (LabeledCloud::new(points, vec![label; len]).unwrap(), normals)
}

/// Two box clouds merged into one scene, concatenating points, labels, and
/// normals in order.
pub(crate) fn merge(
    a: (LabeledCloud, Vec<Vec3>),
    b: (LabeledCloud, Vec<Vec3>),
) -> (LabeledCloud, Vec<Vec3>) {
    let (a_cloud, mut normals) = a;
    let (b_cloud, b_normals) = b;
    let mut points = a_cloud.points;
    points.extend_from_slice(&b_cloud.points);
    let mut labels = a_cloud.labels;
    labels.extend_from_slice(&b_cloud.labels);
    normals.extend_from_slice(&b_normals);
    (LabeledCloud::new(points, labels).unwrap(), normals)
}
