//! Contact wrench construction and the force-closure margin.
//!
//! Two hard point contacts with Coulomb friction are modeled by discretized
//! friction cones. A grasp resists disturbances when the origin lies
//! strictly inside the convex hull of the contact wrenches — within the
//! subspace the wrenches span (two point contacts can never generate torque
//! about the line through the contacts, so the full 6-D wrench space is
//! never spanned; the spanned-subspace interior is the meaningful notion).
//!
//! The margin is δ* = max { min_j λ_j : Wλ = 0, Σλ = 1 }: the most interior
//! convex combination of wrench columns reproducing zero. δ* > 0 means
//! strict interior (closure); δ* ≤ 0 or an empty affine set means no
//! closure. δ* is at most 1/m for m columns, reached only by perfectly
//! symmetric grasps.

use crate::geom::{Point3, Vec3};
use crate::lp::{solve_equality_form, LpOutcome};

/// Margin threshold for calling a grasp force-closed.
pub const MARGIN_EPS: f64 = 1e-6;

/// Friction-cone discretization used by the production labeler.
pub const CONE_EDGES: usize = 8;

/// One fingertip contact: surface point and outward unit normal.
#[derive(Clone, Copy, Debug)]
pub struct Contact {
    pub position: Point3,
    pub normal: Vec3,
}

/// Deterministic orthonormal tangent basis for a unit normal: the first
/// tangent comes from crossing with the coordinate axis least aligned with
/// the normal.
pub fn tangent_basis(normal: &Vec3) -> (Vec3, Vec3) {
    let abs = normal.abs();
    let seed = if abs.x <= abs.y && abs.x <= abs.z {
        Vec3::new(1.0, 0.0, 0.0)
    } else if abs.y <= abs.z {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let t1 = seed.cross(normal).normalize();
    let t2 = normal.cross(&t1);
    (t1, t2)
}

/// Unit force directions a finger can transmit at the contact: the friction
/// cone around −normal (pressing into the surface) with half-angle atan(μ),
/// discretized into `n_edges` edges starting at tangent phase zero.
///
/// Power-of-two edge counts nest exactly: every edge of the 8-edge cone is
/// bitwise identical to the corresponding edge of the 64-edge cone.
pub fn cone_edges(normal: &Vec3, mu: f64, n_edges: usize) -> Vec<Vec3> {
    let (t1, t2) = tangent_basis(normal);
    let scale = 1.0 / (1.0 + mu * mu).sqrt();
    (0..n_edges)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 / n_edges as f64);
            let tangential = t1 * angle.cos() + t2 * angle.sin();
            (-normal + tangential * mu) * scale
        })
        .collect()
}

/// The 6-D wrench of a unit force `f` applied at `r` (relative to the torque
/// origin), torque scaled by `inv_rho` for conditioning.
fn wrench(f: &Vec3, r: &Vec3, inv_rho: f64) -> [f64; 6] {
    let tau = r.cross(f) * inv_rho;
    [f.x, f.y, f.z, tau.x, tau.y, tau.z]
}

/// Wrench columns for a set of contacts: `n_edges` unit-force wrenches per
/// contact. Torque origin is the contact centroid; torques are scaled by the
/// inverse of the largest contact arm so all entries are O(1).
pub fn wrench_columns(contacts: &[Contact], mu: f64, n_edges: usize) -> Vec<[f64; 6]> {
    let origin = {
        let mut sum = Vec3::zeros();
        for c in contacts {
            sum += c.position.coords();
        }
        sum / contacts.len() as f64
    };
    let rho = contacts
        .iter()
        .map(|c| (c.position.coords() - origin).norm())
        .fold(0.0f64, f64::max);
    let inv_rho = if rho > 1e-12 { 1.0 / rho } else { 1.0 };

    let mut cols = Vec::with_capacity(contacts.len() * n_edges);
    for c in contacts {
        let r = c.position.coords() - origin;
        for f in cone_edges(&c.normal, mu, n_edges) {
            cols.push(wrench(&f, &r, inv_rho));
        }
    }
    cols
}

/// Force-closure margin δ* for the given contacts, or `None` when no affine
/// combination of the wrenches reproduces zero at all. Positive δ* certifies
/// closure with quantified depth; the caller thresholds at [`MARGIN_EPS`].
pub fn closure_margin(contacts: &[Contact], mu: f64, n_edges: usize) -> Option<f64> {
    let cols = wrench_columns(contacts, mu, n_edges);
    let m = cols.len();

    // LP: maximize δ subject to Wλ = 0, Σλ = 1, λ_j ≥ δ. Substituting
    // λ = μ + δ·1 with μ ≥ 0 and splitting δ = δ⁺ − δ⁻ gives an equality-form
    // program over (μ, δ⁺, δ⁻) ≥ 0.
    let mut w_sum = [0.0f64; 6];
    for col in &cols {
        for i in 0..6 {
            w_sum[i] += col[i];
        }
    }

    let n = m + 2;
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(7);
    for i in 0..6 {
        let mut row = Vec::with_capacity(n);
        for col in &cols {
            row.push(col[i]);
        }
        row.push(w_sum[i]);
        row.push(-w_sum[i]);
        a.push(row);
    }
    let mut simplex_row = vec![1.0f64; m];
    simplex_row.push(m as f64);
    simplex_row.push(-(m as f64));
    a.push(simplex_row);

    let mut b = vec![0.0f64; 6];
    b.push(1.0);

    let mut c = vec![0.0f64; m];
    c.push(1.0);
    c.push(-1.0);

    match solve_equality_form(&a, &b, &c) {
        LpOutcome::Optimal { value, .. } => Some(value),
        LpOutcome::Infeasible => None,
        // δ ≤ 1/m on the feasible set, so this cannot happen; be conservative.
        LpOutcome::Unbounded => None,
    }
}

/// Antipodal friction-cone test on the closing line: each contact must be
/// able to transmit force along the line toward the other contact, i.e. the
/// line direction lies inside both (opposed) friction cones.
pub fn antipodal_ok(left: &Contact, right: &Contact, mu: f64) -> bool {
    let d = right.position - left.position;
    let len = d.norm();
    if len < 1e-9 {
        return false;
    }
    let u = d / len;
    let cos_theta = 1.0 / (1.0 + mu * mu).sqrt();
    // Finger at `left` pushes along +u: requires angle(u, −n_left) ≤ θ.
    // Finger at `right` pushes along −u: requires angle(−u, −n_right) ≤ θ.
    u.dot(&left.normal) <= -cos_theta && u.dot(&right.normal) >= cos_theta
}
