use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parallel-jaw gripper geometry and friction, in meters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandConfig {
    /// Maximum jaw opening (stroke).
    pub max_aperture: f64,
    /// How deep the fingers reach past the fingertip contact plane.
    pub finger_depth: f64,
    /// Finger thickness along the closing direction.
    pub finger_width: f64,
    /// Finger extent along the grasp axis (out of the closing plane).
    pub hand_height: f64,
    /// Coulomb friction coefficient at the finger pads.
    pub friction_mu: f64,
}

impl Default for HandConfig {
    fn default() -> Self {
        HandConfig {
            max_aperture: 0.085,
            finger_depth: 0.04,
            finger_width: 0.01,
            hand_height: 0.02,
            friction_mu: 0.5,
        }
    }
}

impl HandConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("max_aperture", self.max_aperture),
            ("finger_depth", self.finger_depth),
            ("finger_width", self.finger_width),
            ("hand_height", self.hand_height),
        ];
        for (name, v) in dims {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.friction_mu > 0.0 && self.friction_mu <= 2.0) {
            return Err(Error::InvalidConfig(format!(
                "friction_mu must be in (0, 2], got {}",
                self.friction_mu
            )));
        }
        Ok(())
    }

    /// Friction-cone half angle, atan(μ).
    pub fn cone_half_angle(&self) -> f64 {
        self.friction_mu.atan()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        assert!(HandConfig::default().validate().is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let mut h = HandConfig::default();
        h.max_aperture = 0.0;
        assert!(h.validate().is_err());
        let mut h = HandConfig::default();
        h.friction_mu = 2.5;
        assert!(h.validate().is_err());
        let mut h = HandConfig::default();
        h.friction_mu = -0.1;
        assert!(h.validate().is_err());
    }

    #[test]
    fn cone_half_angle_matches_atan() {
        let h = HandConfig { friction_mu: 0.5, ..HandConfig::default() };
        assert!((h.cone_half_angle() - 0.5f64.atan()).abs() < 1e-15);
        // tan(26.565°) ≈ 0.5
        assert!((h.cone_half_angle().to_degrees() - 26.565051177).abs() < 1e-6);
    }

    #[test]
    fn serde_rejects_unknown_fields() {
        let json = r#"{"max_aperture":0.08,"finger_depth":0.04,"finger_width":0.01,"hand_height":0.02,"friction_mu":0.5,"bogus":1}"#;
        assert!(serde_json::from_str::<HandConfig>(json).is_err());
    }
}
