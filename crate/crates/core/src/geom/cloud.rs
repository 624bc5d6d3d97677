use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point3, RigidPose, Vec3};

/// A point cloud where every point carries a part label.
///
/// Labels index into a per-object part table; label values are small
/// non-negative integers. `viewpoint` is the camera pose that produced the
/// cloud, when it came from a rendered view (omnidirectional samples have
/// none). Points are in object coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabeledCloud {
    pub points: Vec<Point3>,
    pub labels: Vec<u32>,
    pub viewpoint: Option<RigidPose>,
}

impl LabeledCloud {
    pub fn new(points: Vec<Point3>, labels: Vec<u32>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::LengthMismatch { lhs: points.len(), rhs: labels.len() });
        }
        Ok(LabeledCloud { points, labels, viewpoint: None })
    }

    pub fn with_viewpoint(mut self, pose: RigidPose) -> Self {
        self.viewpoint = Some(pose);
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Result<Point3> {
        if self.points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        Ok(crate::geom::point::centroid(&self.points))
    }

    /// Indices of points whose label is `label`.
    pub fn indices_with_label(&self, label: u32) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    /// New cloud containing only the selected indices, preserving order.
    pub fn select(&self, indices: &[usize]) -> LabeledCloud {
        LabeledCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            viewpoint: self.viewpoint,
        }
    }

    /// Applies a rigid transform to every point (labels unchanged).
    pub fn transformed(&self, pose: &RigidPose) -> LabeledCloud {
        LabeledCloud {
            points: self.points.iter().map(|p| pose.apply(p)).collect(),
            labels: self.labels.clone(),
            viewpoint: self.viewpoint,
        }
    }

    /// Axis-aligned bounding box as (min, max) corners.
    pub fn bounds(&self) -> Result<(Vec3, Vec3)> {
        if self.points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in &self.points {
            let c = p.coords();
            for k in 0..3 {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
        Ok((lo, hi))
    }

    /// Sorted list of distinct labels present in the cloud.
    pub fn distinct_labels(&self) -> Vec<u32> {
        let mut labels: Vec<u32> = self.labels.clone();
        labels.sort_unstable();
        labels.dedup();
        labels
    }
}
