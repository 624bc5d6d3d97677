//! Dense two-phase simplex for small equality-form linear programs:
//! maximize cᵀx subject to Ax = b, x ≥ 0.
//!
//! Problems here are tiny (tens of variables, ≤ 7 rows), so a dense tableau
//! with Bland's anti-cycling rule is both sufficient and fully deterministic.

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Solves maximize cᵀx s.t. Ax = b, x ≥ 0. Rows of `a` must all have
/// `c.len()` entries; `b` may have any sign.
pub fn solve_equality_form(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert_eq!(b.len(), m);

    // Tableau layout: columns 0..n are structural, n..n+m artificial, last
    // column is the RHS. Rows 0..m are constraints, row m the objective.
    let mut t = vec![vec![0.0f64; n + m + 1]; m + 1];
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][n + m] = flip * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: maximize −Σ artificials (drive them to zero).
    for j in 0..n {
        let col_sum: f64 = (0..m).map(|i| t[i][j]).sum();
        t[m][j] = col_sum;
    }
    t[m][n + m] = (0..m).map(|i| t[i][n + m]).sum();

    if !run_simplex(&mut t, &mut basis, n + m) {
        // Phase 1 is always bounded (objective ≤ 0); treat anomaly as infeasible.
        return LpOutcome::Infeasible;
    }
    if t[m][n + m].abs() > FEAS_TOL {
        return LpOutcome::Infeasible;
    }

    // Remove artificials still in the basis: pivot them out on any
    // structural column, or drop the (redundant) row entirely.
    let mut removed_rows: Vec<usize> = Vec::new();
    for i in 0..m {
        if basis[i] < n || removed_rows.contains(&i) {
            continue;
        }
        let pivot_col = (0..n).find(|&j| t[i][j].abs() > PIVOT_TOL);
        match pivot_col {
            Some(j) => {
                pivot(&mut t, &mut basis, i, j);
            }
            None => removed_rows.push(i),
        }
    }
    if !removed_rows.is_empty() {
        removed_rows.sort_unstable();
        for &i in removed_rows.iter().rev() {
            t.remove(i);
            basis.remove(i);
        }
    }
    let rows = basis.len();

    // Phase 2 objective: reduced costs of c under the current basis.
    // Artificial columns are barred from re-entering by zeroing their costs
    // and marking them unusable via the `limit` argument below.
    for j in 0..n {
        t[rows][j] = c[j];
    }
    for j in n..n + m {
        t[rows][j] = 0.0;
    }
    t[rows][n + m] = 0.0;
    for i in 0..rows {
        let bj = basis[i];
        let coeff = if bj < n { c[bj] } else { 0.0 };
        if coeff != 0.0 {
            for j in 0..=(n + m) {
                t[rows][j] -= coeff * t[i][j];
            }
        }
    }

    if !run_simplex(&mut t, &mut basis, n) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![0.0f64; n];
    for i in 0..rows {
        if basis[i] < n {
            x[basis[i]] = t[i][n + m];
        }
    }
    let value = c.iter().zip(x.iter()).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, value }
}

/// Runs simplex iterations on the tableau (last row = negated objective in
/// reduced form: entry > 0 means the column improves a maximization).
/// Entering columns are restricted to indices < `col_limit` (Bland's rule:
/// smallest improving index). Returns false on unboundedness.
fn run_simplex(t: &mut [Vec<f64>], basis: &mut [usize], col_limit: usize) -> bool {
    let rows = basis.len();
    let rhs = t[0].len() - 1;
    loop {
        // Bland: entering variable = smallest index with positive reduced cost.
        let Some(enter) = (0..col_limit).find(|&j| t[rows][j] > PIVOT_TOL) else {
            return true;
        };
        // Ratio test; ties broken toward the smallest basis variable (Bland).
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..rows {
            if t[i][enter] > PIVOT_TOL {
                let ratio = t[i][rhs] / t[i][enter];
                let better = match leave {
                    None => true,
                    Some(cur) => {
                        ratio < best - PIVOT_TOL
                            || (ratio < best + PIVOT_TOL && basis[i] < basis[cur])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return false; // unbounded direction
        };
        pivot_slice(t, basis, leave, enter);
    }
}

fn pivot(t: &mut Vec<Vec<f64>>, basis: &mut [usize], row: usize, col: usize) {
    pivot_slice(t.as_mut_slice(), basis, row, col);
}

fn pivot_slice(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let width = t[0].len();
    let inv = 1.0 / t[row][col];
    for j in 0..width {
        t[row][j] *= inv;
    }
    t[row][col] = 1.0; // exact
    let nrows = t.len();
    for i in 0..nrows {
        if i == row {
            continue;
        }
        let factor = t[i][col];
        if factor != 0.0 {
            for j in 0..width {
                t[i][j] -= factor * t[row][j];
            }
            t[i][col] = 0.0; // exact
        }
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_optimal(outcome: &LpOutcome, want: f64) {
        match outcome {
            LpOutcome::Optimal { value, .. } => {
                assert!((value - want).abs() < 1e-9, "value {value}, want {want}")
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn single_variable_fixed() {
        // max x s.t. x = 5.
        let out = solve_equality_form(&[vec![1.0]], &[5.0], &[1.0]);
        assert_optimal(&out, 5.0);
    }

    #[test]
    fn slack_form_box() {
        // max x1 + x2 s.t. x1 + x2 + s = 1 → 1 at the face s = 0.
        let out = solve_equality_form(&[vec![1.0, 1.0, 1.0]], &[1.0], &[1.0, 1.0, 0.0]);
        assert_optimal(&out, 1.0);
    }

    #[test]
    fn two_constraints_vertex() {
        // max 3x + 2y s.t. x + y + s1 = 4, x + 3y + s2 = 6.
        // Vertices: (4,0) → 12, (3,1) → 11, (0,2) → 4. Optimum 12.
        let out = solve_equality_form(
            &[vec![1.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 0.0, 1.0]],
            &[4.0, 6.0],
            &[3.0, 2.0, 0.0, 0.0],
        );
        assert_optimal(&out, 12.0);
        if let LpOutcome::Optimal { x, .. } = out {
            assert!((x[0] - 4.0).abs() < 1e-9);
            assert!(x[1].abs() < 1e-9);
        }
    }

    #[test]
    fn negative_rhs_handled() {
        // max x1 s.t. −x1 − x2 = −3 (x1 + x2 = 3) → 3.
        let out = solve_equality_form(&[vec![-1.0, -1.0]], &[-3.0], &[1.0, 0.0]);
        assert_optimal(&out, 3.0);
    }

    #[test]
    fn infeasible_detected() {
        // x1 + x2 = −1 with x ≥ 0 is impossible.
        let out = solve_equality_form(&[vec![1.0, 1.0]], &[-1.0], &[1.0, 1.0]);
        assert_eq!(out, LpOutcome::Infeasible);
    }

    #[test]
    fn inconsistent_rows_detected() {
        // x1 = 1 and x1 = 2 simultaneously.
        let out = solve_equality_form(&[vec![1.0], vec![1.0]], &[1.0, 2.0], &[1.0]);
        assert_eq!(out, LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        // max x1 s.t. x1 − x2 = 0: ray x1 = x2 → ∞.
        let out = solve_equality_form(&[vec![1.0, -1.0]], &[0.0], &[1.0, 0.0]);
        assert_eq!(out, LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_row_dropped() {
        // Duplicate constraint rows; solution unaffected.
        let out = solve_equality_form(
            &[vec![1.0, 1.0], vec![2.0, 2.0]],
            &[1.0, 2.0],
            &[1.0, 0.0],
        );
        assert_optimal(&out, 1.0);
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // Multiple constraints meeting at the same vertex (degenerate basic
        // solutions) must not cycle under Bland's rule.
        let out = solve_equality_form(
            &[
                vec![1.0, 0.0, 1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 1.0, 0.0],
                vec![1.0, 1.0, 0.0, 0.0, 1.0],
            ],
            &[1.0, 1.0, 2.0],
            &[1.0, 1.0, 0.0, 0.0, 0.0],
        );
        assert_optimal(&out, 2.0);
    }

    /// Exhaustive cross-check on random dense LPs against vertex enumeration.
    #[test]
    fn random_lps_match_vertex_enumeration() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        let mut optimal_seen = 0;
        for _ in 0..300 {
            let m = rng.gen_range(1..=3usize);
            let n = rng.gen_range(m + 1..=5usize);
            let a: Vec<Vec<f64>> =
                (0..m).map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..2.0)).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

            let got = solve_equality_form(&a, &b, &c);
            let brute = brute_force_best_vertex(&a, &b, &c);
            match (got, brute) {
                (LpOutcome::Optimal { value, .. }, Some(best)) => {
                    // Brute force enumerates basic solutions; an optimal LP
                    // value must match the best vertex (bounded problems).
                    assert!(
                        (value - best).abs() < 1e-6,
                        "simplex {value} vs enumeration {best}"
                    );
                    optimal_seen += 1;
                }
                (LpOutcome::Infeasible, None) => {}
                (LpOutcome::Unbounded, _) => {} // enumeration can't certify rays
                (LpOutcome::Optimal { .. }, None) => panic!("simplex found optimum, enumeration found no vertex"),
                (LpOutcome::Infeasible, Some(_)) => panic!("simplex infeasible but vertex exists"),
            }
        }
        assert!(optimal_seen > 50, "too few optimal cases to be meaningful: {optimal_seen}");
    }

    /// Enumerates all basic solutions (column subsets of size m) and returns
    /// the best feasible objective, if any.
    fn brute_force_best_vertex(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
        let m = a.len();
        let n = c.len();
        let mut best: Option<f64> = None;
        let mut cols = vec![0usize; m];
        fn rec(
            a: &[Vec<f64>],
            b: &[f64],
            c: &[f64],
            cols: &mut Vec<usize>,
            depth: usize,
            start: usize,
            best: &mut Option<f64>,
        ) {
            let m = a.len();
            if depth == m {
                // Solve the m×m system on the chosen columns.
                let mut mat = nalgebra::DMatrix::zeros(m, m);
                for (k, &j) in cols.iter().enumerate() {
                    for i in 0..m {
                        mat[(i, k)] = a[i][j];
                    }
                }
                let rhs = nalgebra::DVector::from_column_slice(b);
                if let Some(sol) = mat.lu().solve(&rhs) {
                    if sol.iter().all(|&v| v >= -1e-9) {
                        let val: f64 =
                            cols.iter().enumerate().map(|(k, &j)| c[j] * sol[k]).sum();
                        if best.map(|bv| val > bv).unwrap_or(true) {
                            *best = Some(val);
                        }
                    }
                }
                return;
            }
            for j in start..a[0].len().min(c.len()) {
                cols[depth] = j;
                rec(a, b, c, cols, depth + 1, j + 1, best);
            }
        }
        rec(a, b, c, &mut cols, 0, 0, &mut best);
        // x = 0 is also a candidate when b = 0.
        if b.iter().all(|&v| v.abs() < 1e-12) {
            let zero_val = 0.0;
            if best.map(|bv| zero_val > bv).unwrap_or(true) {
                best = Some(zero_val);
            }
        }
        let _ = n;
        best
    }
}
