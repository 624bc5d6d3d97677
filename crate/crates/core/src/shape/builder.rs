//! Primitive solid emitters shared by the catalog shapes. All primitives are
//! closed and wound counter-clockwise seen from outside, so outward normals
//! and positive signed volumes hold by construction.

use std::collections::BTreeMap;

use crate::geom::Point3;
use crate::shape::mesh::{PartMesh, Triangle};

pub(crate) struct MeshBuilder {
    tris: Vec<Triangle>,
}

impl MeshBuilder {
    pub fn new() -> Self {
        MeshBuilder { tris: Vec::new() }
    }

    fn tri(&mut self, label: u32, a: Point3, b: Point3, c: Point3) {
        self.tris.push(Triangle { vertices: [a, b, c], part_label: label });
    }

    /// Quad a→b→c→d (counter-clockwise from outside) as two triangles.
    fn quad(&mut self, label: u32, a: Point3, b: Point3, c: Point3, d: Point3) {
        self.tri(label, a, b, c);
        self.tri(label, a, c, d);
    }

    /// Axis-aligned box given center and full extents.
    pub fn push_box(&mut self, label: u32, center: [f64; 3], extents: [f64; 3]) {
        let [cx, cy, cz] = center;
        let [hx, hy, hz] = [extents[0] * 0.5, extents[1] * 0.5, extents[2] * 0.5];
        let p = |sx: f64, sy: f64, sz: f64| Point3::new(cx + sx * hx, cy + sy * hy, cz + sz * hz);
        // +x
        self.quad(label, p(1., -1., -1.), p(1., 1., -1.), p(1., 1., 1.), p(1., -1., 1.));
        // -x
        self.quad(label, p(-1., -1., -1.), p(-1., -1., 1.), p(-1., 1., 1.), p(-1., 1., -1.));
        // +y
        self.quad(label, p(-1., 1., -1.), p(-1., 1., 1.), p(1., 1., 1.), p(1., 1., -1.));
        // -y
        self.quad(label, p(-1., -1., -1.), p(1., -1., -1.), p(1., -1., 1.), p(-1., -1., 1.));
        // +z
        self.quad(label, p(-1., -1., 1.), p(1., -1., 1.), p(1., 1., 1.), p(-1., 1., 1.));
        // -z
        self.quad(label, p(-1., -1., -1.), p(-1., 1., -1.), p(1., 1., -1.), p(1., -1., -1.));
    }

    /// Closed frustum along +z: lower ring radius `r_lower` at the base
    /// center, upper ring radius `r_upper` at height `h`, both capped.
    /// `phase` rotates the tessellation without changing the solid.
    pub fn push_frustum(
        &mut self,
        label: u32,
        base_center: [f64; 3],
        r_lower: f64,
        r_upper: f64,
        h: f64,
        segments: usize,
        phase: f64,
    ) {
        let [cx, cy, cz] = base_center;
        let ring = |radius: f64, z: f64, k: usize| {
            let a = phase + std::f64::consts::TAU * k as f64 / segments as f64;
            Point3::new(cx + radius * a.cos(), cy + radius * a.sin(), cz + z)
        };
        let bottom_c = Point3::new(cx, cy, cz);
        let top_c = Point3::new(cx, cy, cz + h);
        for k in 0..segments {
            let kn = (k + 1) % segments;
            let (bl, bn) = (ring(r_lower, 0.0, k), ring(r_lower, 0.0, kn));
            let (tl, tn) = (ring(r_upper, h, k), ring(r_upper, h, kn));
            self.quad(label, bl, bn, tn, tl);
            self.tri(label, bottom_c, bn, bl);
            self.tri(label, top_c, tl, tn);
        }
    }

    /// Closed cylinder along +z.
    pub fn push_cylinder(
        &mut self,
        label: u32,
        base_center: [f64; 3],
        radius: f64,
        h: f64,
        segments: usize,
        phase: f64,
    ) {
        self.push_frustum(label, base_center, radius, radius, h, segments, phase);
    }

    pub fn into_mesh(self, category: &str, names: &[(u32, &str)]) -> PartMesh {
        let part_names: BTreeMap<u32, String> =
            names.iter().map(|&(l, n)| (l, n.to_string())).collect();
        PartMesh { category: category.to_string(), triangles: self.tris, part_names }
    }
}
