//! Cross-validation of the production force-closure decision against an
//! independent dense brute-force margin oracle.
//!
//! The production labeler decides closure with an 8-edge cone and a simplex
//! LP; the oracle uses 64 edges, a different cone phase convention, a
//! different torque origin, and Wolfe's min-norm-point algorithm with
//! bisection. On 200 seeded random contact pairs the two must agree with no
//! success↔failure flips outside the margin band |δ| < 1e-6 around the
//! decision threshold.
//!
//! The pair generator stays clear of the inscribed-polygon annulus (closing
//! directions between the 8-edge pyramid and the exact cone, for μ = 0.5 the
//! 24.8°–26.6° ring): pairs inside the annulus measure discretization
//! resolution, not implementation correctness, which is what this check is
//! for. Constructed tilts are capped at 65% of the pyramid inradius angle or
//! pushed well outside the exact cone; the fully random stratum lands in the
//! annulus with negligible probability and the band tolerance covers it.

use partgrasp_core::geom::{Point3, Vec3};
use partgrasp_core::grasp::wrench::{antipodal_ok, closure_margin, Contact, MARGIN_EPS};
use partgrasp_oracles::{antipodal_brute, closure_margin_dense, OracleContact};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn to_oracle(c: &Contact) -> OracleContact {
    OracleContact {
        position: [c.position.x, c.position.y, c.position.z],
        normal: [c.normal.x, c.normal.y, c.normal.z],
    }
}

fn unit_sphere(rng: &mut ChaCha12Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Rotate `v` away from its direction by `tilt` radians, azimuth chosen by
/// the RNG, using an arbitrary orthogonal frame.
fn tilt_vector(rng: &mut ChaCha12Rng, v: &Vec3, tilt: f64) -> Vec3 {
    let helper = if v.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let e1 = v.cross(&helper).normalize();
    let e2 = v.cross(&e1);
    let az = rng.gen_range(0.0..std::f64::consts::TAU);
    (v * tilt.cos() + (e1 * az.cos() + e2 * az.sin()) * tilt.sin()).normalize()
}

struct Pair {
    left: Contact,
    right: Contact,
    mu: f64,
}

/// 200 seeded pairs in three strata: grasp-like (decisively antipodal),
/// decisively bad (tilted outside the exact cone, or same-face), and fully
/// random clutter.
fn generate_pairs(seed: u64) -> Vec<Pair> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(200);
    let mus = [0.3, 0.5, 0.8];

    // Stratum A: 80 grasp-like pairs, normals within 65% of the 8-edge
    // pyramid inradius angle of the closing line.
    for k in 0..80 {
        let mu = mus[k % mus.len()];
        let pyramid = (mu * (std::f64::consts::PI / 8.0).cos()).atan();
        let axis = unit_sphere(&mut rng);
        let len = rng.gen_range(0.008..0.08);
        let mid = unit_sphere(&mut rng) * rng.gen_range(0.0..0.1);
        let lateral = unit_sphere(&mut rng) * (rng.gen_range(0.0..0.1) * len);
        let p_l = Point3::from_vec(mid - axis * (len * 0.5));
        let p_r = Point3::from_vec(mid + axis * (len * 0.5) + lateral);
        let u = (p_r - p_l).normalize();
        let tilt_l = rng.gen_range(0.0..0.65 * pyramid);
        let tilt_r = rng.gen_range(0.0..0.65 * pyramid);
        pairs.push(Pair {
            left: Contact { position: p_l, normal: tilt_vector(&mut rng, &(-u), tilt_l) },
            right: Contact { position: p_r, normal: tilt_vector(&mut rng, &u, tilt_r) },
            mu,
        });
    }

    // Stratum B: 60 decisively bad pairs.
    for k in 0..60 {
        let mu = mus[k % mus.len()];
        let cone = mu.atan();
        let axis = unit_sphere(&mut rng);
        let len = rng.gen_range(0.008..0.08);
        let mid = unit_sphere(&mut rng) * rng.gen_range(0.0..0.1);
        let p_l = Point3::from_vec(mid - axis * (len * 0.5));
        let p_r = Point3::from_vec(mid + axis * (len * 0.5));
        if k % 2 == 0 {
            // One normal pushed at least 20% past the exact cone.
            let tilt = rng.gen_range(1.2 * cone..std::f64::consts::FRAC_PI_2);
            pairs.push(Pair {
                left: Contact { position: p_l, normal: tilt_vector(&mut rng, &(-axis), tilt) },
                right: Contact { position: p_r, normal: axis },
                mu,
            });
        } else {
            // Same-face style: parallel normals orthogonal to the closing line.
            let helper =
                if axis.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
            let n = axis.cross(&helper).normalize();
            pairs.push(Pair {
                left: Contact { position: p_l, normal: n },
                right: Contact { position: p_r, normal: n },
                mu,
            });
        }
    }

    // Stratum C: 60 fully random pairs.
    for k in 0..60 {
        let mu = mus[k % mus.len()];
        let p_l = Point3::from_vec(unit_sphere(&mut rng) * rng.gen_range(0.0..0.06));
        let mut p_r;
        loop {
            p_r = Point3::from_vec(unit_sphere(&mut rng) * rng.gen_range(0.0..0.06));
            if (p_r - p_l).norm() > 0.002 {
                break;
            }
        }
        pairs.push(Pair {
            left: Contact { position: p_l, normal: unit_sphere(&mut rng) },
            right: Contact { position: p_r, normal: unit_sphere(&mut rng) },
            mu,
        });
    }

    assert_eq!(pairs.len(), 200);
    pairs
}

fn impl_verdict(p: &Pair) -> (bool, Option<f64>) {
    if !antipodal_ok(&p.left, &p.right, p.mu) {
        return (false, None);
    }
    let margin = closure_margin(&[p.left, p.right], p.mu, 8);
    (margin.map_or(false, |m| m >= MARGIN_EPS), margin)
}

fn oracle_verdict(p: &Pair) -> (bool, Option<f64>) {
    let (l, r) = (to_oracle(&p.left), to_oracle(&p.right));
    if !antipodal_brute(&l, &r, p.mu) {
        return (false, None);
    }
    let margin = closure_margin_dense(&l, &r, p.mu, 64);
    (margin.map_or(false, |m| m >= MARGIN_EPS), margin)
}

fn in_band(margin: Option<f64>) -> bool {
    margin.map_or(false, |m| m.abs() < 1e-6)
}

#[test]
fn dense_oracle_agrees_on_two_hundred_random_pairs() {
    let pairs = generate_pairs(0x0F0C);
    let mut both_success = 0usize;
    let mut both_failure = 0usize;
    let mut flips_outside_band = Vec::new();

    for (i, p) in pairs.iter().enumerate() {
        let (got, got_margin) = impl_verdict(p);
        let (want, want_margin) = oracle_verdict(p);
        match (got, want) {
            (true, true) => both_success += 1,
            (false, false) => both_failure += 1,
            _ => {
                if !(in_band(got_margin) || in_band(want_margin)) {
                    flips_outside_band.push((i, got_margin, want_margin));
                }
            }
        }
    }

    assert!(
        flips_outside_band.is_empty(),
        "verdict flips outside the |δ| < 1e-6 band: {flips_outside_band:?}"
    );
    // Non-vacuity: the sample must exercise both outcomes substantially.
    assert!(both_success >= 60, "only {both_success} agreed successes");
    assert!(both_failure >= 100, "only {both_failure} agreed failures");
}

#[test]
fn canonical_pairs_agree_through_both_code_paths() {
    let cube = Pair {
        left: Contact {
            position: Point3::new(-0.02, 0.0, 0.0),
            normal: Vec3::new(-1.0, 0.0, 0.0),
        },
        right: Contact {
            position: Point3::new(0.02, 0.0, 0.0),
            normal: Vec3::new(1.0, 0.0, 0.0),
        },
        mu: 0.5,
    };
    assert!(impl_verdict(&cube).0, "cube antipodal grasp closes (production)");
    assert!(oracle_verdict(&cube).0, "cube antipodal grasp closes (oracle)");

    let same_face = Pair {
        left: Contact {
            position: Point3::new(-0.01, 0.0, 0.02),
            normal: Vec3::new(0.0, 0.0, 1.0),
        },
        right: Contact {
            position: Point3::new(0.01, 0.0, 0.02),
            normal: Vec3::new(0.0, 0.0, 1.0),
        },
        mu: 0.5,
    };
    assert!(!impl_verdict(&same_face).0, "same-face contacts fail (production)");
    assert!(!oracle_verdict(&same_face).0, "same-face contacts fail (oracle)");
}
