use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point3, Vec3};

/// Tolerance on each entry of RᵀR − I when validating a rotation.
pub const ORTHONORMALITY_TOL: f64 = 1e-9;

/// A rigid transform in SE(3): rotation plus translation in meters.
///
/// Serializes as the row-major 12-number array
/// `[r00 r01 r02 tx  r10 r11 r12 ty  r20 r21 r22 tz]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 12]", into = "[f64; 12]")]
pub struct RigidPose {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl RigidPose {
    pub fn identity() -> Self {
        RigidPose { rotation: Matrix3::identity(), translation: Vec3::zeros() }
    }

    /// Builds a pose, validating that `rotation` is orthonormal with det +1.
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self> {
        let pose = RigidPose { rotation, translation };
        pose.validate()?;
        Ok(pose)
    }

    /// Builds a pose without validation; used where the rotation is exact by
    /// construction (axis rotations, compositions of valid poses).
    pub fn from_parts(rotation: Matrix3<f64>, translation: Vec3) -> Self {
        RigidPose { rotation, translation }
    }

    /// Rotation by `angle` radians about the z axis.
    pub fn yaw(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RigidPose::from_parts(
            Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
            Vec3::zeros(),
        )
    }

    /// Rotation by `angle` radians about the x axis.
    pub fn roll(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RigidPose::from_parts(
            Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
            Vec3::zeros(),
        )
    }

    /// Rotation by `angle` radians about the y axis.
    pub fn pitch(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RigidPose::from_parts(
            Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
            Vec3::zeros(),
        )
    }

    pub fn translation_of(t: Vec3) -> Self {
        RigidPose::from_parts(Matrix3::identity(), t)
    }

    pub fn validate(&self) -> Result<()> {
        let gram = self.rotation.transpose() * self.rotation;
        let residual = gram - Matrix3::identity();
        if residual.iter().any(|e| e.abs() > ORTHONORMALITY_TOL) {
            return Err(Error::InvalidPose("rotation is not orthonormal".into()));
        }
        if (self.rotation.determinant() - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidPose("rotation determinant is not +1".into()));
        }
        if !self.translation.iter().all(|t| t.is_finite()) {
            return Err(Error::InvalidPose("translation is not finite".into()));
        }
        Ok(())
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        Point3::from_vec(self.rotation * p.coords() + self.translation)
    }

    pub fn apply_vec(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// self ∘ other: applies `other` first, then `self`.
    pub fn compose(&self, other: &RigidPose) -> RigidPose {
        RigidPose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidPose {
        let rt = self.rotation.transpose();
        RigidPose { rotation: rt, translation: -(rt * self.translation) }
    }

    pub fn to_array(&self) -> [f64; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)], r[(0, 1)], r[(0, 2)], t.x,
            r[(1, 0)], r[(1, 1)], r[(1, 2)], t.y,
            r[(2, 0)], r[(2, 1)], r[(2, 2)], t.z,
        ]
    }

    pub fn from_array(a: &[f64; 12]) -> Result<Self> {
        RigidPose::new(
            Matrix3::new(a[0], a[1], a[2], a[4], a[5], a[6], a[8], a[9], a[10]),
            Vec3::new(a[3], a[7], a[11]),
        )
    }

    /// Max absolute entry-wise difference over rotation and translation.
    pub fn max_abs_diff(&self, other: &RigidPose) -> f64 {
        let dr = (self.rotation - other.rotation).abs().max();
        let dt = (self.translation - other.translation).abs().max();
        dr.max(dt)
    }
}

impl From<RigidPose> for [f64; 12] {
    fn from(p: RigidPose) -> Self {
        p.to_array()
    }
}

impl TryFrom<[f64; 12]> for RigidPose {
    type Error = Error;
    fn try_from(a: [f64; 12]) -> Result<Self> {
        RigidPose::from_array(&a)
    }
}
