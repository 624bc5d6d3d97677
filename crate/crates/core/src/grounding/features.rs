//! Hand-crafted encoders for the two grounding inputs.
//!
//! Point side: nine per-point geometric features (centered coordinates,
//! height, centroid distance, local covariance shape, normal verticality),
//! scale-normalized by the cloud's bounding radius so desk-scale objects of
//! different sizes train alike. Language side: a bag over the canonical
//! vocabulary plus an out-of-vocabulary count, pushed through a frozen
//! seeded random projection. Both are deterministic functions of their
//! inputs, standing in for learned encoders while keeping the downstream
//! fusion topology (repeat, concatenate, perceptron) unchanged.

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::geom::{estimate_normals, orient_normals_away_from, Point3, SpatialIndex, Vec3};
use crate::language::Lexicon;

/// Neighbors (excluding the point itself) used for local covariance shape.
pub const K_GEOM: usize = 16;
/// Per-point feature width.
pub const D_POINT: usize = 9;
/// Language feature width.
pub const D_LANG: usize = 64;
/// Seed of the frozen random projection behind [`featurize_language`].
pub const PROJECTION_SEED: u64 = 0xA11CE;
/// Out-of-vocabulary counts are scaled by this factor to stay O(1).
const OOV_SCALE: f64 = 0.1;

/// Per-point geometric features for a cloud of at least `K_GEOM + 1` points.
///
/// Columns: centered x, y, z; height above the lowest point; distance to the
/// centroid (all five divided by the bounding radius); the local covariance
/// eigenvalue ratios λ_min/λ_max, λ_mid/λ_max, λ_min/λ_mid; and the
/// z-component of the normal oriented away from the centroid.
pub fn featurize_points(points: &[Point3]) -> Result<Vec<[f64; D_POINT]>> {
    let needed = K_GEOM + 1;
    if points.len() < needed {
        return Err(Error::TooFewPoints {
            needed,
            got: points.len(),
        });
    }
    let mut centroid = Vec3::zeros();
    for p in points {
        centroid += p.coords();
    }
    centroid /= points.len() as f64;
    let min_z = points.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
    let radius = points
        .iter()
        .map(|p| (p.coords() - centroid).norm())
        .fold(0.0f64, f64::max)
        .max(1e-9);

    let mut normals = estimate_normals(points, needed)?;
    orient_normals_away_from(points, &mut normals, &Point3::from_vec(centroid));

    let index = SpatialIndex::build(points);
    let mut features = Vec::with_capacity(points.len());
    for (p, n) in points.iter().zip(&normals) {
        let neighbors = index.k_nearest(p, needed);
        let mut mean = Vec3::zeros();
        for &(i, _) in &neighbors {
            mean += points[i].coords();
        }
        mean /= neighbors.len() as f64;
        let mut cov = Matrix3::zeros();
        for &(i, _) in &neighbors {
            let d = points[i].coords() - mean;
            cov += d * d.transpose();
        }
        cov /= neighbors.len() as f64;
        let mut eig: Vec<f64> = nalgebra::SymmetricEigen::new(cov)
            .eigenvalues
            .iter()
            .map(|&l| l.max(0.0))
            .collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (lo, mid, hi) = (eig[0], eig[1], eig[2]);

        let centered = p.coords() - centroid;
        features.push([
            centered.x / radius,
            centered.y / radius,
            centered.z / radius,
            (p.z - min_z) / radius,
            centered.norm() / radius,
            ratio(lo, hi),
            ratio(mid, hi),
            ratio(lo, mid),
            n.z,
        ]);
    }
    Ok(features)
}

/// Ratio with degenerate denominators (coincident neighborhoods) read as
/// isotropic.
fn ratio(num: f64, den: f64) -> f64 {
    if den <= 1e-30 {
        1.0
    } else {
        num / den
    }
}

/// Frozen language encoding: canonical-id bag plus OOV count, projected to
/// [`D_LANG`] dimensions by a seeded Gaussian matrix.
pub fn featurize_language(text: &str, lexicon: &Lexicon) -> Vec<f64> {
    featurize_language_with(text, lexicon, PROJECTION_SEED)
}

/// [`featurize_language`] with an explicit projection seed (recorded in
/// trained-model files so inference can rebuild the same projection).
pub fn featurize_language_with(text: &str, lexicon: &Lexicon, seed: u64) -> Vec<f64> {
    let ids = lexicon.all_ids();
    let raw_dim = ids.len() + 1;
    let mut raw = vec![0.0f64; raw_dim];
    for (_, id) in lexicon.scan(text) {
        let slot = ids.iter().position(|&i| i == id).expect("scan yields known ids");
        raw[slot] = 1.0;
    }
    // OOV count = tokens not consumed by any vocabulary match.
    let total_tokens = crate::language::tokenize(text).len();
    let consumed = consumed_tokens(text, lexicon);
    raw[raw_dim - 1] = (total_tokens.saturating_sub(consumed)) as f64 * OOV_SCALE;

    let projection = projection_matrix(seed, raw_dim);
    let mut out = vec![0.0f64; D_LANG];
    for (r, row) in projection.chunks_exact(raw_dim).enumerate() {
        let mut acc = 0.0;
        for (w, x) in row.iter().zip(&raw) {
            acc += w * x;
        }
        out[r] = acc;
    }
    out
}

/// Number of text tokens consumed by vocabulary matches (longest-first, the
/// same scan discipline as parsing).
fn consumed_tokens(text: &str, lexicon: &Lexicon) -> usize {
    let tokens = crate::language::tokenize(text);
    let mut consumed = 0usize;
    let mut i = 0usize;
    while i < tokens.len() {
        let mut best = 0usize;
        for term in lexicon.terms() {
            let n = term.tokens.len();
            if n > best && i + n <= tokens.len() && term.tokens[..] == tokens[i..i + n] {
                best = n;
            }
        }
        if best > 0 {
            consumed += best;
            i += best;
        } else {
            i += 1;
        }
    }
    consumed
}

/// Row-major `D_LANG × raw_dim` Gaussian matrix, entries N(0, 1/raw_dim),
/// deterministic in the seed (Box–Muller over a counter-mode stream).
fn projection_matrix(seed: u64, raw_dim: usize) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let scale = 1.0 / (raw_dim as f64).sqrt();
    let mut out = Vec::with_capacity(D_LANG * raw_dim);
    while out.len() < D_LANG * raw_dim {
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        out.push(r * theta.cos() * scale);
        if out.len() < D_LANG * raw_dim {
            out.push(r * theta.sin() * scale);
        }
    }
    out
}
