use serde::{Deserialize, Serialize};

pub type Vec3 = nalgebra::Vector3<f64>;

/// A 3D point in meters. Coordinates are expected to be finite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn coords(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn from_vec(v: Vec3) -> Self {
        Point3 { x: v.x, y: v.y, z: v.z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        self.distance_squared(other).sqrt()
    }

    pub fn distance_squared(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3 { x: a[0], y: a[1], z: a[2] }
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

impl std::ops::Sub for Point3 {
    type Output = Vec3;
    fn sub(self, rhs: Point3) -> Vec3 {
        self.coords() - rhs.coords()
    }
}

impl std::ops::Add<Vec3> for Point3 {
    type Output = Point3;
    fn add(self, rhs: Vec3) -> Point3 {
        Point3::from_vec(self.coords() + rhs)
    }
}

/// Centroid of a non-empty point set.
pub(crate) fn centroid(points: &[Point3]) -> Point3 {
    let mut acc = Vec3::zeros();
    for p in points {
        acc += p.coords();
    }
    Point3::from_vec(acc / points.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_arithmetic() {
        let p = Point3::new(1.0, 2.0, 3.0);
        let q = Point3::new(0.5, 0.0, 3.0);
        assert_eq!(p - q, Vec3::new(0.5, 2.0, 0.0));
        assert_eq!(q + Vec3::new(0.5, 2.0, 0.0), p);
        assert!((p.distance(&q) - (0.25f64 + 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn serde_as_array() {
        let p = Point3::new(1.0, -2.5, 0.25);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[1.0,-2.5,0.25]");
        let back: Point3 = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
