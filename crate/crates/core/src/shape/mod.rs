//! Synthetic part-labeled objects and their observation protocol: the
//! parametric catalog, surface sampling, tabletop placement, and multi-view
//! depth rendering.

pub(crate) mod builder;
mod catalog;
mod mesh;
mod place;
mod render;
mod sample;

pub use catalog::{make_shape, param_spec, ParamSpec, CATALOG_VERSION, CATEGORIES};
pub use mesh::{PartMesh, Triangle, MIN_TRIANGLE_AREA};
pub use place::{random_place, Workspace};
pub use render::{
    build_observation_set, look_at, render_view, CameraIntrinsics, ObservationSet, AZIMUTHS,
    OMNI_POINTS, PLACEMENTS, VIEW_POINTS,
};
pub use sample::sample_omni;
