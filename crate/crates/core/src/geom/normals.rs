use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::geom::{Point3, SpatialIndex, Vec3};

/// Estimates a unit surface normal per point from the covariance of its `k`
/// nearest neighbors (the query point included). The normal is the
/// eigenvector of the smallest eigenvalue; its sign is arbitrary until
/// oriented by one of the helpers below.
pub fn estimate_normals(points: &[Point3], k: usize) -> Result<Vec<Vec3>> {
    if k < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: k });
    }
    if points.len() < k {
        return Err(Error::TooFewPoints { needed: k, got: points.len() });
    }
    let index = SpatialIndex::build(points);
    let mut normals = Vec::with_capacity(points.len());
    for p in points {
        let neighbors = index.k_nearest(p, k);
        let mut mean = Vec3::zeros();
        for &(i, _) in &neighbors {
            mean += points[i].coords();
        }
        mean /= neighbors.len() as f64;
        let mut cov = Matrix3::zeros();
        for &(i, _) in &neighbors {
            let d = points[i].coords() - mean;
            cov += d * d.transpose();
        }
        cov /= neighbors.len() as f64;
        normals.push(smallest_eigenvector(&cov));
    }
    Ok(normals)
}

/// Eigenvector of the smallest eigenvalue of a symmetric 3×3 matrix,
/// normalized. Falls back to +z for a zero matrix (all neighbors coincide).
fn smallest_eigenvector(cov: &Matrix3<f64>) -> Vec3 {
    let eig = nalgebra::SymmetricEigen::new(*cov);
    let mut min_idx = 0;
    for i in 1..3 {
        if eig.eigenvalues[i] < eig.eigenvalues[min_idx] {
            min_idx = i;
        }
    }
    let v: Vec3 = eig.eigenvectors.column(min_idx).into();
    let norm = v.norm();
    if norm < 1e-12 {
        return Vec3::new(0.0, 0.0, 1.0);
    }
    let v = v / norm;
    // Deterministic sign: largest-magnitude component positive.
    let mut dominant = 0;
    for i in 1..3 {
        if v[i].abs() > v[dominant].abs() {
            dominant = i;
        }
    }
    if v[dominant] < 0.0 {
        -v
    } else {
        v
    }
}

/// Flips each normal to point toward `target` (used with a camera position:
/// surfaces seen by a camera face it).
pub fn orient_normals_toward(points: &[Point3], normals: &mut [Vec3], target: &Point3) {
    for (p, n) in points.iter().zip(normals.iter_mut()) {
        if (target.coords() - p.coords()).dot(n) < 0.0 {
            *n = -*n;
        }
    }
}

/// Flips each normal to point away from `anchor` (used with an interior
/// point such as a part centroid for watertight shapes).
pub fn orient_normals_away_from(points: &[Point3], normals: &mut [Vec3], anchor: &Point3) {
    for (p, n) in points.iter().zip(normals.iter_mut()) {
        if (p.coords() - anchor.coords()).dot(n) < 0.0 {
            *n = -*n;
        }
    }
}

/// Globally consistent normal orientation for full-surface clouds: sign is
/// propagated along a minimum-spanning tree of the k-NN graph (edge weight
/// 1 − |nᵢ·nⱼ|), rooted at each component's highest point whose normal is
/// forced upward. Centroid-based flipping fails on hollow shells (a mug's
/// inner wall faces the axis, not away from the centroid); propagation
/// follows the surface around rims and keeps neighbors consistent.
pub fn orient_normals_consistently(points: &[Point3], normals: &mut [Vec3], k: usize) {
    let n = points.len();
    if n == 0 {
        return;
    }
    let index = SpatialIndex::build(points);
    // Local sample spacing: distance to the nearest distinct point. Edges
    // much longer than the spacing of both endpoints are gap-jumpers (e.g.
    // across a thin double wall, where normals are antiparallel and the
    // alignment weight alone cannot tell the two surfaces apart) — drop them.
    let spacing: Vec<f64> = points
        .iter()
        .map(|p| index.k_nearest(p, 2).last().map(|&(_, d2)| d2.sqrt()).unwrap_or(0.0))
        .collect();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            index
                .k_nearest(&points[i], k + 1)
                .into_iter()
                .filter_map(|(j, d2)| {
                    let cap = 1.7 * spacing[i].max(spacing[j]);
                    (j != i && d2.sqrt() <= cap).then_some(j)
                })
                .collect()
        })
        .collect();

    let mut visited = vec![false; n];
    // Process points from highest to lowest so each component roots at its
    // top point (+z is the natural "outward" there for objects on a table).
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        points[b]
            .z
            .total_cmp(&points[a].z)
            .then(points[a].x.total_cmp(&points[b].x))
            .then(a.cmp(&b))
    });

    // Prim-style growth with a max-|alignment| frontier.
    #[derive(PartialEq)]
    struct Edge {
        align: f64,
        from: usize,
        to: usize,
    }
    impl Eq for Edge {}
    impl Ord for Edge {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.align
                .total_cmp(&other.align)
                .then(other.to.cmp(&self.to))
                .then(other.from.cmp(&self.from))
        }
    }
    impl PartialOrd for Edge {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    for &root in &order {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        if normals[root].z < 0.0 {
            normals[root] = -normals[root];
        }
        let mut heap = std::collections::BinaryHeap::new();
        for &j in &neighbors[root] {
            if !visited[j] {
                heap.push(Edge { align: normals[root].dot(&normals[j]).abs(), from: root, to: j });
            }
        }
        while let Some(Edge { from, to, .. }) = heap.pop() {
            if visited[to] {
                continue;
            }
            visited[to] = true;
            if normals[from].dot(&normals[to]) < 0.0 {
                normals[to] = -normals[to];
            }
            for &j in &neighbors[to] {
                if !visited[j] {
                    heap.push(Edge { align: normals[to].dot(&normals[j]).abs(), from: to, to: j });
                }
            }
        }
    }
}
