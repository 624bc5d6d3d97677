use crate::geom::Point3;

/// A static k-d tree over a copied point set.
///
/// Built once, queried many times. Ties in distance break toward the smaller
/// original index so queries are fully deterministic.
#[derive(Clone, Debug)]
pub struct SpatialIndex {
    points: Vec<Point3>,
    /// Point indices arranged in k-d order: the median of every subrange is
    /// its root, split on axis `depth % 3`.
    nodes: Vec<u32>,
}

impl SpatialIndex {
    pub fn build(points: &[Point3]) -> SpatialIndex {
        let mut nodes: Vec<u32> = (0..points.len() as u32).collect();
        build_recursive(points, &mut nodes, 0);
        SpatialIndex { points: points.to_vec(), nodes }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> &Point3 {
        &self.points[index]
    }

    /// Index and squared distance of the nearest point to `query`.
    /// Returns `None` on an empty index.
    pub fn nearest_one(&self, query: &Point3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (f64::INFINITY, usize::MAX);
        self.nn_recursive(query, 0, self.nodes.len(), 0, &mut best);
        Some((best.1, best.0))
    }

    /// The `k` nearest points to `query` as (index, squared distance) in
    /// ascending distance order, ties toward smaller index. Returns fewer
    /// than `k` entries when the index holds fewer points.
    pub fn k_nearest(&self, query: &Point3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut best = KBest { k, items: Vec::with_capacity(k + 1) };
        self.knn_recursive(query, 0, self.nodes.len(), 0, &mut best);
        best.items.into_iter().map(|(d, i)| (i, d)).collect()
    }

    /// All points within `radius` of `query` (inclusive) as (index, squared
    /// distance), sorted ascending by distance with ties toward the smaller
    /// index.
    pub fn within_radius(&self, query: &Point3, radius: f64) -> Vec<(usize, f64)> {
        let r2 = radius * radius;
        let mut hits = Vec::new();
        self.radius_recursive(query, r2, 0, self.nodes.len(), 0, &mut hits);
        hits.sort_unstable_by(|&(ia, da), &(ib, db)| {
            da.partial_cmp(&db).expect("finite distances").then(ia.cmp(&ib))
        });
        hits
    }

    fn nn_recursive(
        &self,
        query: &Point3,
        lo: usize,
        hi: usize,
        depth: usize,
        best: &mut (f64, usize),
    ) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let idx = self.nodes[mid] as usize;
        let p = &self.points[idx];
        let d2 = query.distance_squared(p);
        if d2 < best.0 || (d2 == best.0 && idx < best.1) {
            *best = (d2, idx);
        }
        let axis = depth % 3;
        let delta = query.coords()[axis] - p.coords()[axis];
        let (near, far) =
            if delta <= 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.nn_recursive(query, near.0, near.1, depth + 1, best);
        if delta * delta <= best.0 {
            self.nn_recursive(query, far.0, far.1, depth + 1, best);
        }
    }

    fn knn_recursive(
        &self,
        query: &Point3,
        lo: usize,
        hi: usize,
        depth: usize,
        best: &mut KBest,
    ) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let idx = self.nodes[mid] as usize;
        let p = &self.points[idx];
        best.offer(query.distance_squared(p), idx);
        let axis = depth % 3;
        let delta = query.coords()[axis] - p.coords()[axis];
        let (near, far) =
            if delta <= 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.knn_recursive(query, near.0, near.1, depth + 1, best);
        if delta * delta <= best.worst() {
            self.knn_recursive(query, far.0, far.1, depth + 1, best);
        }
    }

    fn radius_recursive(
        &self,
        query: &Point3,
        r2: f64,
        lo: usize,
        hi: usize,
        depth: usize,
        hits: &mut Vec<(usize, f64)>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let idx = self.nodes[mid] as usize;
        let p = &self.points[idx];
        let d2 = query.distance_squared(p);
        if d2 <= r2 {
            hits.push((idx, d2));
        }
        let axis = depth % 3;
        let delta = query.coords()[axis] - p.coords()[axis];
        let (near, far) =
            if delta <= 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.radius_recursive(query, r2, near.0, near.1, depth + 1, hits);
        if delta * delta <= r2 {
            self.radius_recursive(query, r2, far.0, far.1, depth + 1, hits);
        }
    }
}

/// The k best (distance², index) pairs seen so far, kept sorted ascending.
struct KBest {
    k: usize,
    items: Vec<(f64, usize)>,
}

impl KBest {
    fn offer(&mut self, d2: f64, idx: usize) {
        let pos = self.items.partition_point(|&(d, i)| (d, i) < (d2, idx));
        if pos >= self.k {
            return;
        }
        self.items.insert(pos, (d2, idx));
        self.items.truncate(self.k);
    }

    /// Pruning radius²: the current k-th distance, or ∞ while unfilled.
    fn worst(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items.last().map(|&(d, _)| d).unwrap_or(f64::INFINITY)
        }
    }
}

fn build_recursive(points: &[Point3], nodes: &mut [u32], depth: usize) {
    if nodes.len() <= 1 {
        return;
    }
    let axis = depth % 3;
    let mid = nodes.len() / 2;
    nodes.select_nth_unstable_by(mid, |&a, &b| {
        let ka = points[a as usize].coords()[axis];
        let kb = points[b as usize].coords()[axis];
        ka.partial_cmp(&kb).unwrap().then(a.cmp(&b))
    });
    let (left, rest) = nodes.split_at_mut(mid);
    build_recursive(points, left, depth + 1);
    build_recursive(points, &mut rest[1..], depth + 1);
}
