//! Point-cloud geometry: points, rigid poses, labeled clouds, spatial
//! indexing, normal estimation, downsampling, and rigid registration.

mod cloud;
mod downsample;
mod icp;
mod kdtree;
mod normals;
pub(crate) mod point;
mod pose;

pub use cloud::LabeledCloud;
pub use downsample::{fps_downsample, fps_indices, voxel_downsample};
pub use icp::{best_fit_transform, icp_register, IcpResult};
pub use kdtree::SpatialIndex;
pub use normals::{
    estimate_normals, orient_normals_away_from, orient_normals_consistently,
    orient_normals_toward,
};
pub use point::{Point3, Vec3};
pub use pose::RigidPose;
