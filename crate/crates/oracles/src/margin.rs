//! Dense brute-force force-closure margin, independent of the production LP.
//!
//! The margin is δ* = max { δ : ∃λ, Wλ = 0, Σλ = 1, λⱼ ≥ δ } for the wrench
//! matrix W of the discretized contact cones. Substituting λ = δ·1 + (1−mδ)·ν
//! with ν on the standard simplex turns the inner feasibility question into
//! a convex-hull membership test: Wλ can reach zero iff the origin is within
//! the hull of the points { δ·s + (1−mδ)·wⱼ } where s = Σⱼ wⱼ. Feasibility is
//! monotone in δ (the constraint set only shrinks), so δ* is found by
//! bisection, each probe answered exactly by Wolfe's min-norm-point solver.
//!
//! The torque origin (contact midpoint, unscaled) and the cone tangent basis
//! (the branchless reflection construction below) deliberately differ from
//! the production implementation; the margin is mathematically invariant to
//! both choices, so agreement across the two code paths checks real content.

use crate::mnp::dist_to_hull;

/// A fingertip contact expressed with plain arrays so this crate stays free
/// of the production geometry types.
#[derive(Clone, Copy, Debug)]
pub struct OracleContact {
    pub position: [f64; 3],
    pub normal: [f64; 3],
}

const FEAS_TOL: f64 = 1e-9;

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn unit3(v: &[f64; 3]) -> [f64; 3] {
    let n = norm3(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Branchless orthonormal basis from a unit vector (reflection trick),
/// intentionally a different construction than the production tangent basis
/// so the two cone discretizations share no phase convention.
fn onb(n: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let sign = 1.0f64.copysign(n[2]);
    let a = -1.0 / (sign + n[2]);
    let b = n[0] * n[1] * a;
    let t1 = [1.0 + sign * n[0] * n[0] * a, sign * b, -sign * n[0]];
    let t2 = [b, sign + n[1] * n[1] * a, -n[1]];
    (t1, t2)
}

/// Wrench columns (unit cone-edge forces and their torques about the contact
/// midpoint) for two contacts, `n_edges` edges per cone.
fn wrench_columns(left: &OracleContact, right: &OracleContact, mu: f64, n_edges: usize) -> Vec<[f64; 6]> {
    let mid = [
        0.5 * (left.position[0] + right.position[0]),
        0.5 * (left.position[1] + right.position[1]),
        0.5 * (left.position[2] + right.position[2]),
    ];
    let mut cols = Vec::with_capacity(2 * n_edges);
    for c in [left, right] {
        let n = unit3(&c.normal);
        let (t1, t2) = onb(&n);
        let r = [
            c.position[0] - mid[0],
            c.position[1] - mid[1],
            c.position[2] - mid[2],
        ];
        let scale = 1.0 / (1.0 + mu * mu).sqrt();
        for k in 0..n_edges {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_edges as f64;
            let (sa, ca) = ang.sin_cos();
            let f = [
                (-n[0] + mu * (ca * t1[0] + sa * t2[0])) * scale,
                (-n[1] + mu * (ca * t1[1] + sa * t2[1])) * scale,
                (-n[2] + mu * (ca * t1[2] + sa * t2[2])) * scale,
            ];
            let tau = cross3(&r, &f);
            cols.push([f[0], f[1], f[2], tau[0], tau[1], tau[2]]);
        }
    }
    cols
}

/// Is there a λ with Wλ = 0, Σλ = 1, λⱼ ≥ δ?
fn feasible(cols: &[[f64; 6]], s: &[f64; 6], delta: f64) -> bool {
    let m = cols.len() as f64;
    let alpha = 1.0 - m * delta;
    let verts: Vec<[f64; 6]> = cols
        .iter()
        .map(|w| {
            let mut v = [0.0; 6];
            for i in 0..6 {
                v[i] = delta * s[i] + alpha * w[i];
            }
            v
        })
        .collect();
    dist_to_hull(&[0.0; 6], &verts) <= FEAS_TOL
}

/// Force-closure margin by dense-cone bisection. `None` means no affine
/// combination with weights ≥ −1 reproduces the zero wrench at all
/// (decisively non-closed); otherwise the margin is bracketed to ~1e-10.
pub fn closure_margin_dense(
    left: &OracleContact,
    right: &OracleContact,
    mu: f64,
    n_edges: usize,
) -> Option<f64> {
    let cols = wrench_columns(left, right, mu, n_edges);
    let mut s = [0.0f64; 6];
    for w in &cols {
        for i in 0..6 {
            s[i] += w[i];
        }
    }
    let m = cols.len() as f64;
    let top = 1.0 / m;
    if feasible(&cols, &s, top) {
        return Some(top);
    }
    let (mut lo, mut hi) = if feasible(&cols, &s, 0.0) {
        (0.0, top)
    } else if feasible(&cols, &s, -1.0) {
        (-1.0, 0.0)
    } else {
        return None;
    };
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(&cols, &s, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Independent antipodal test: both contact normals within the exact cone
/// half-angle atan(μ) of the (opposed) closing line, decided through angles
/// rather than through cosine thresholds.
pub fn antipodal_brute(left: &OracleContact, right: &OracleContact, mu: f64) -> bool {
    let d = [
        right.position[0] - left.position[0],
        right.position[1] - left.position[1],
        right.position[2] - left.position[2],
    ];
    let len = norm3(&d);
    if len < 1e-9 {
        return false;
    }
    let u = [d[0] / len, d[1] / len, d[2] / len];
    let nl = unit3(&left.normal);
    let nr = unit3(&right.normal);
    let half = mu.atan();
    let ang_l = (-(u[0] * nl[0] + u[1] * nl[1] + u[2] * nl[2])).clamp(-1.0, 1.0).acos();
    let ang_r = (u[0] * nr[0] + u[1] * nr[1] + u[2] * nr[2]).clamp(-1.0, 1.0).acos();
    ang_l <= half && ang_r <= half
}
