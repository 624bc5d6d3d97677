//! Depth rendering of placed meshes into labeled partial-view clouds, and
//! the full per-object observation protocol (one omni cloud plus three
//! placements seen from four viewpoints each).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{fps_downsample, LabeledCloud, Point3, RigidPose, Vec3};
use crate::shape::mesh::PartMesh;
use crate::shape::place::{random_place, Workspace};
use crate::shape::sample::sample_omni;

/// Pinhole camera model. The camera looks along its +z axis, +x is image
/// right, +y is image down; rays pass through pixel centers.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    /// 128×128 with a ~53° field of view: enough pixels that a desk object
    /// at the auto-fit distance covers several thousand rays.
    pub fn default_desk() -> Self {
        CameraIntrinsics { width: 128, height: 128, fx: 128.0, fy: 128.0, cx: 64.0, cy: 64.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.width > 0
            && self.height > 0
            && self.fx.is_finite()
            && self.fy.is_finite()
            && self.fx > 0.0
            && self.fy > 0.0
            && self.cx.is_finite()
            && self.cy.is_finite();
        if !ok {
            return Err(Error::InvalidConfig("camera intrinsics must be positive/finite".into()));
        }
        Ok(())
    }
}

/// One object's full observation protocol: the omni cloud sampled from the
/// mesh surface, and 3 placements × 4 viewpoints = 12 partial views, all in
/// object coordinates. Each view cloud records its camera pose (also in
/// object coordinates) as the cloud viewpoint.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObservationSet {
    pub omni: LabeledCloud,
    pub views: Vec<LabeledCloud>,
    pub placements: Vec<RigidPose>,
}

pub const OMNI_POINTS: usize = 10_000;
pub const VIEW_POINTS: usize = 4_096;
pub const PLACEMENTS: usize = 3;
pub const AZIMUTHS: usize = 4;

// ---------------------------------------------------------------------------
// BVH over mesh triangles.

struct Bvh {
    nodes: Vec<BvhNode>,
    tri_order: Vec<usize>,
}

struct BvhNode {
    lo: [f64; 3],
    hi: [f64; 3],
    // Leaf: range into tri_order. Inner: child node ids.
    left: usize,
    right: usize,
    leaf: bool,
}

impl Bvh {
    fn build(mesh: &PartMesh) -> Bvh {
        let mut order: Vec<usize> = (0..mesh.triangles.len()).collect();
        let mut nodes = Vec::new();
        Self::build_node(mesh, &mut order, 0, mesh.triangles.len(), &mut nodes);
        Bvh { nodes, tri_order: order }
    }

    fn tri_bounds(mesh: &PartMesh, idx: &[usize]) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in idx {
            for v in &mesh.triangles[i].vertices {
                let a: [f64; 3] = (*v).into();
                for k in 0..3 {
                    lo[k] = lo[k].min(a[k]);
                    hi[k] = hi[k].max(a[k]);
                }
            }
        }
        (lo, hi)
    }

    fn build_node(
        mesh: &PartMesh,
        order: &mut [usize],
        start: usize,
        end: usize,
        nodes: &mut Vec<BvhNode>,
    ) -> usize {
        let slice = &order[start..end];
        let (lo, hi) = Self::tri_bounds(mesh, slice);
        let id = nodes.len();
        nodes.push(BvhNode { lo, hi, left: start, right: end, leaf: true });
        if end - start <= 4 {
            return id;
        }
        // Split on the longest axis at the median triangle centroid.
        let mut axis = 0;
        for k in 1..3 {
            if hi[k] - lo[k] > hi[axis] - lo[axis] {
                axis = k;
            }
        }
        let mid = (start + end) / 2;
        let key = |i: usize| {
            let c = mesh.triangles[i].centroid();
            let a: [f64; 3] = c.into();
            a[axis]
        };
        order[start..end]
            .select_nth_unstable_by(mid - start, |&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
        let left = Self::build_node(mesh, order, start, mid, nodes);
        let right = Self::build_node(mesh, order, mid, end, nodes);
        nodes[id].left = left;
        nodes[id].right = right;
        nodes[id].leaf = false;
        id
    }

    fn ray_box(&self, node: &BvhNode, origin: &Vec3, inv_dir: &Vec3, t_best: f64) -> bool {
        let mut t0 = 0.0f64;
        let mut t1 = t_best;
        for k in 0..3 {
            let (o, inv) = (origin[k], inv_dir[k]);
            let (mut a, mut b) = ((node.lo[k] - o) * inv, (node.hi[k] - o) * inv);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return false;
            }
        }
        true
    }

    /// Nearest hit along the ray: (triangle index, t). Möller–Trumbore.
    fn intersect(&self, mesh: &PartMesh, origin: &Vec3, dir: &Vec3) -> Option<(usize, f64)> {
        let inv_dir = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<(usize, f64)> = None;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            let t_best = best.map_or(f64::INFINITY, |(_, t)| t);
            if !self.ray_box(node, origin, &inv_dir, t_best) {
                continue;
            }
            if node.leaf {
                for &ti in &self.tri_order[node.left..node.right] {
                    let tri = &mesh.triangles[ti];
                    let v0 = tri.vertices[0].coords();
                    let e1 = tri.vertices[1] - tri.vertices[0];
                    let e2 = tri.vertices[2] - tri.vertices[0];
                    let p = dir.cross(&e2);
                    let det = e1.dot(&p);
                    if det.abs() < 1e-14 {
                        continue;
                    }
                    let inv_det = 1.0 / det;
                    let s = origin - v0;
                    let u = s.dot(&p) * inv_det;
                    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
                        continue;
                    }
                    let q = s.cross(&e1);
                    let v = dir.dot(&q) * inv_det;
                    if v < -1e-12 || u + v > 1.0 + 1e-12 {
                        continue;
                    }
                    let t = e2.dot(&q) * inv_det;
                    if t > 1e-9 && best.map_or(true, |(_, bt)| t < bt) {
                        best = Some((ti, t));
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
        best
    }
}

// ---------------------------------------------------------------------------

/// Render one depth view of a placed mesh and return the visible surface as
/// a labeled cloud of exactly `n` points in object coordinates.
///
/// `camera` maps camera frame → world frame. The recorded cloud viewpoint is
/// the camera pose re-expressed in object coordinates, so the cloud is fully
/// self-describing in its own frame.
pub fn render_view(
    mesh: &PartMesh,
    object_pose: &RigidPose,
    camera: &RigidPose,
    intrinsics: &CameraIntrinsics,
    n: usize,
    seed: u64,
) -> Result<LabeledCloud> {
    mesh.validate()?;
    intrinsics.validate()?;
    camera.validate()?;
    let world_mesh = mesh.transformed(object_pose);
    let bvh = Bvh::build(&world_mesh);

    let origin = camera.translation;
    let obj_from_world = object_pose.inverse();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for py in 0..intrinsics.height {
        for px in 0..intrinsics.width {
            let dir_cam = Vec3::new(
                (px as f64 + 0.5 - intrinsics.cx) / intrinsics.fx,
                (py as f64 + 0.5 - intrinsics.cy) / intrinsics.fy,
                1.0,
            );
            let dir = camera.apply_vec(&dir_cam);
            if let Some((ti, t)) = bvh.intersect(&world_mesh, &origin, &dir) {
                let hit_world = Point3::from_vec(origin + dir * t);
                points.push(obj_from_world.apply(&hit_world));
                labels.push(world_mesh.triangles[ti].part_label);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::NoVisiblePoints);
    }
    let cam_in_obj = obj_from_world.compose(camera);
    let cloud = LabeledCloud::new(points, labels)?.with_viewpoint(cam_in_obj);
    Ok(fps_downsample(&cloud, n, seed)?.with_viewpoint(cam_in_obj))
}

/// Right-handed look-at pose: camera at `eye`, +z toward `target`, +x image
/// right (horizontal), +y image down.
pub fn look_at(eye: Point3, target: Point3) -> Result<RigidPose> {
    let f = (target - eye).normalize();
    let world_up = Vec3::new(0.0, 0.0, 1.0);
    let r_raw = f.cross(&world_up);
    if r_raw.norm() < 1e-9 {
        return Err(Error::InvalidPose("camera looks straight along z; roll undefined".into()));
    }
    let r = r_raw.normalize();
    let d = f.cross(&r);
    let rotation = nalgebra::Matrix3::from_columns(&[r, d, f]);
    RigidPose::new(rotation, eye.coords())
}

/// The full observation protocol for one object: omni cloud of
/// [`OMNI_POINTS`], then [`PLACEMENTS`] random tabletop placements, each
/// rendered from [`AZIMUTHS`] evenly spaced azimuths at 45° elevation and an
/// auto-fit radius. All clouds are in object coordinates.
pub fn build_observation_set(
    mesh: &PartMesh,
    workspace: &Workspace,
    seed: u64,
) -> Result<ObservationSet> {
    let omni = sample_omni(mesh, OMNI_POINTS, seed)?;
    let intrinsics = CameraIntrinsics::default_desk();

    let mut views = Vec::with_capacity(PLACEMENTS * AZIMUTHS);
    let mut placements = Vec::with_capacity(PLACEMENTS);
    for p in 0..PLACEMENTS {
        let pose = random_place(mesh, workspace, seed.wrapping_add(1000 + p as u64))?;
        let placed = mesh.transformed(&pose);
        let (lo, hi) = placed.bounds()?;
        let center = Point3::new(
            0.5 * (lo.x + hi.x),
            0.5 * (lo.y + hi.y),
            0.5 * (lo.z + hi.z),
        );
        let radius = 0.5 * (hi - lo).norm();
        let dist = (2.6 * radius + 0.02).max(0.15);
        let elev = 45.0f64.to_radians();
        for a in 0..AZIMUTHS {
            let az = std::f64::consts::TAU * a as f64 / AZIMUTHS as f64;
            let eye = Point3::new(
                center.x + dist * elev.cos() * az.cos(),
                center.y + dist * elev.cos() * az.sin(),
                center.z + dist * elev.sin(),
            );
            let camera = look_at(eye, center)?;
            let view_seed = seed.wrapping_add(2000 + (p * AZIMUTHS + a) as u64);
            views.push(render_view(mesh, &pose, &camera, &intrinsics, VIEW_POINTS, view_seed)?);
        }
        placements.push(pose);
    }
    Ok(ObservationSet { omni, views, placements })
}
