//! Random tabletop placement.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{RigidPose, Vec3};
use crate::shape::mesh::PartMesh;

/// The tabletop: the plane z = 0 plus axis-aligned horizontal bounds the
/// placed object must occupy.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workspace {
    pub min_x: f64,
    pub max_x: f64,
    pub min_y: f64,
    pub max_y: f64,
}

impl Workspace {
    pub fn new(min_x: f64, max_x: f64, min_y: f64, max_y: f64) -> Result<Self> {
        let ws = Workspace { min_x, max_x, min_y, max_y };
        ws.validate()?;
        Ok(ws)
    }

    /// The standard tabletop area every desk-scale dataset uses.
    pub fn default_desk() -> Self {
        Workspace { min_x: -0.2, max_x: 0.2, min_y: -0.15, max_y: 0.15 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.min_x, self.max_x, self.min_y, self.max_y]
            .iter()
            .all(|v| v.is_finite())
            && self.min_x <= self.max_x
            && self.min_y <= self.max_y;
        if !ok {
            return Err(Error::InvalidConfig("workspace bounds are empty or not finite".into()));
        }
        Ok(())
    }
}

/// The six axis-aligned rest orientations: which canonical axis points down.
fn rest_orientation(idx: usize) -> RigidPose {
    use std::f64::consts::{FRAC_PI_2, PI};
    match idx {
        0 => RigidPose::identity(),      // -z down (canonical upright)
        1 => RigidPose::roll(PI),        // +z down (upside down)
        2 => RigidPose::pitch(FRAC_PI_2), // +x? rotate about y by 90°
        3 => RigidPose::pitch(-FRAC_PI_2),
        4 => RigidPose::roll(FRAC_PI_2),
        _ => RigidPose::roll(-FRAC_PI_2),
    }
}

/// Place a mesh on the table: a uniformly chosen axis-aligned rest
/// orientation, a uniform yaw about z, a horizontal translation that puts
/// the object's footprint center uniformly inside the workspace while
/// keeping the footprint within bounds, and a vertical shift dropping the
/// lowest vertex exactly onto z = 0.
///
/// Bounds semantics: on an axis whose span exceeds the object footprint the
/// whole footprint stays inside the bounds; a degenerate (zero-span) axis
/// means "center the footprint exactly here" and skips the fit check, so a
/// single-point workspace pins the translation while the yaw stays random.
pub fn random_place(mesh: &PartMesh, workspace: &Workspace, seed: u64) -> Result<RigidPose> {
    mesh.validate()?;
    workspace.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    // Fixed draw order regardless of outcome: orientation, yaw, x, y.
    let orient_idx = rng.gen_range(0..6usize);
    let yaw = rng.gen_range(0.0..std::f64::consts::TAU);
    let ux = rng.gen_range(0.0..1.0);
    let uy = rng.gen_range(0.0..1.0);

    let rotation = RigidPose::yaw(yaw).compose(&rest_orientation(orient_idx));
    let rotated = mesh.transformed(&rotation);
    let (lo, hi) = rotated.bounds()?;

    let center_range = |min_b: f64, max_b: f64, lo_m: f64, hi_m: f64| -> Result<(f64, f64)> {
        let half = 0.5 * (hi_m - lo_m);
        if max_b - min_b < 1e-12 {
            return Ok((min_b, min_b)); // degenerate axis: fixed center
        }
        let (a, b) = (min_b + half, max_b - half);
        if a > b {
            return Err(Error::DoesNotFit);
        }
        Ok((a, b))
    };
    let (ax, bx) = center_range(workspace.min_x, workspace.max_x, lo.x, hi.x)?;
    let (ay, by) = center_range(workspace.min_y, workspace.max_y, lo.y, hi.y)?;
    let cx = ax + ux * (bx - ax);
    let cy = ay + uy * (by - ay);

    let mid_x = 0.5 * (lo.x + hi.x);
    let mid_y = 0.5 * (lo.y + hi.y);
    let translation = Vec3::new(cx - mid_x, cy - mid_y, -lo.z);
    Ok(RigidPose::from_parts(rotation.rotation, translation))
}
