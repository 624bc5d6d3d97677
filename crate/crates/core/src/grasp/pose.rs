use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point3, RigidPose, Vec3};

/// A 6-DoF grasp: center position plus an orientation whose columns are the
/// approach direction (x), the closing direction (y, along the jaw line),
/// and the grasp axis (z), with approach = closing × axis.
///
/// Serializes as the same row-major 12-number array as a rigid pose.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 12]", into = "[f64; 12]")]
pub struct GraspPose {
    pub position: Point3,
    pub rotation: Matrix3<f64>,
}

impl GraspPose {
    /// Builds a grasp pose from the approach and closing directions; the
    /// axis completes the right-handed frame. `approach` is re-orthogonalized
    /// against `closing`, so the two need not be exactly perpendicular.
    pub fn new(position: Point3, approach: Vec3, closing: Vec3) -> Result<Self> {
        let closing_n = closing.norm();
        if closing_n < 1e-12 {
            return Err(Error::InvalidPose("closing direction is zero".into()));
        }
        let c = closing / closing_n;
        let a_raw = approach - c * approach.dot(&c);
        let a_norm = a_raw.norm();
        if a_norm < 1e-9 {
            return Err(Error::InvalidPose(
                "approach direction is parallel to closing".into(),
            ));
        }
        let a = a_raw / a_norm;
        let axis = a.cross(&c);
        let rotation = Matrix3::from_columns(&[a, c, axis]);
        Ok(GraspPose { position, rotation })
    }

    pub fn approach(&self) -> Vec3 {
        self.rotation.column(0).into()
    }

    pub fn closing(&self) -> Vec3 {
        self.rotation.column(1).into()
    }

    pub fn axis(&self) -> Vec3 {
        self.rotation.column(2).into()
    }

    /// The grasp frame as a rigid transform: gripper → object coordinates.
    pub fn to_rigid(&self) -> RigidPose {
        RigidPose::from_parts(self.rotation, self.position.coords())
    }

    /// Maps an object-frame point into gripper coordinates.
    pub fn to_gripper_frame(&self, p: &Point3) -> Point3 {
        Point3::from_vec(self.rotation.transpose() * (p.coords() - self.position.coords()))
    }

    pub fn validate(&self) -> Result<()> {
        RigidPose::from_parts(self.rotation, self.position.coords()).validate()?;
        let residual = (self.closing().cross(&self.axis()) - self.approach()).norm();
        if residual > 1e-9 {
            return Err(Error::InvalidPose(format!(
                "approach ≠ closing × axis (residual {residual:.2e})"
            )));
        }
        Ok(())
    }
}

impl From<GraspPose> for [f64; 12] {
    fn from(g: GraspPose) -> Self {
        g.to_rigid().to_array()
    }
}

impl TryFrom<[f64; 12]> for GraspPose {
    type Error = Error;
    fn try_from(a: [f64; 12]) -> Result<Self> {
        let pose = RigidPose::from_array(&a)?;
        let g = GraspPose {
            position: Point3::from_vec(pose.translation),
            rotation: pose.rotation,
        };
        g.validate()?;
        Ok(g)
    }
}

/// Success/failure verdict of the analytic grasp oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspLabel {
    Success,
    Failure,
    Unlabeled,
}

/// A sampled two-contact grasp candidate with its quality and oracle label.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GraspCandidate {
    pub pose: GraspPose,
    pub contact_left: Point3,
    pub contact_right: Point3,
    pub part_label: u32,
    pub quality: f64,
    pub label: GraspLabel,
}

impl GraspCandidate {
    /// Distance between the two fingertip contacts.
    pub fn gap(&self) -> f64 {
        self.contact_left.distance(&self.contact_right)
    }
}
