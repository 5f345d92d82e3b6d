//! Kuhn–Munkres assignment, shortest-augmenting-path formulation, O(n³).
//!
//! Among equal-cost optima the solver returns the lexicographically smallest
//! permutation (row 0 takes the lowest column it can, then row 1, ...). The
//! refinement only walks edges that are tight under the final dual
//! potentials, which are exactly the edges of optimal permutations.

use super::{Assignment, MatchingError};

/// Solves a square assignment problem.
pub fn hungarian(cost: &[Vec<f64>]) -> Result<Assignment, MatchingError> {
    let n = cost.len();
    if n == 0 {
        return Err(MatchingError::EmptyMatrix);
    }
    for (i, row) in cost.iter().enumerate() {
        if row.len() != n {
            return Err(MatchingError::NotSquare { rows: n, row: i, len: row.len() });
        }
        if let Some(j) = row.iter().position(|c| !c.is_finite()) {
            return Err(MatchingError::NonFiniteCost { row: i, col: j });
        }
    }

    let (mut row_to_col, u, v) = solve_potentials(cost);
    let base: f64 = (0..n).map(|i| cost[i][row_to_col[i]]).sum();

    let mut refined = row_to_col.clone();
    refine_lexicographic(cost, &u, &v, &mut refined);
    let total: f64 = (0..n).map(|i| cost[i][refined[i]]).sum();
    let scale = cost.iter().flatten().fold(1.0f64, |m, c| m.max(c.abs()));
    if total <= base + 1e-12 * scale * n as f64 {
        row_to_col = refined;
    }

    let total_cost = (0..n).map(|i| cost[i][row_to_col[i]]).sum();
    Ok(Assignment { pairs: row_to_col.into_iter().enumerate().collect(), total_cost })
}

/// Solves an `rows × cols` problem by padding to a square with `pad_cost`
/// and dropping pairs that involve a virtual row or column.
pub fn assign_rectangular(
    cost: &[Vec<f64>],
    cols: usize,
    pad_cost: f64,
) -> Result<Vec<(usize, usize)>, MatchingError> {
    let rows = cost.len();
    let n = rows.max(cols);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut square = vec![vec![pad_cost; n]; n];
    for (i, row) in cost.iter().enumerate() {
        if row.len() != cols {
            return Err(MatchingError::NotSquare { rows, row: i, len: row.len() });
        }
        square[i][..cols].copy_from_slice(row);
    }
    let a = hungarian(&square)?;
    Ok(a.pairs.into_iter().filter(|&(i, j)| i < rows && j < cols).collect())
}

/// Returns the assignment (row → column) and the row/column potentials,
/// 1-based with index 0 as the virtual start column.
fn solve_potentials(cost: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    (row_to_col, u, v)
}

fn refine_lexicographic(cost: &[Vec<f64>], u: &[f64], v: &[f64], row_to_col: &mut [usize]) {
    let n = cost.len();
    let scale = cost.iter().flatten().fold(1.0f64, |m, c| m.max(c.abs()));
    let tol = 1e-9 * scale;
    let tight = |i: usize, j: usize| cost[i][j] - u[i + 1] - v[j + 1] <= tol;

    let mut owner = vec![0usize; n];
    for (i, &j) in row_to_col.iter().enumerate() {
        owner[j] = i;
    }

    let mut good = vec![false; n];
    let mut next = vec![usize::MAX; n];
    let mut col_seen = vec![false; n];
    let mut queue: Vec<usize> = Vec::with_capacity(n);

    for i in 0..n {
        let c0 = row_to_col[i];
        if !(0..c0).any(|j| tight(i, j) && owner[j] > i) {
            continue;
        }
        // Rows after `i` that can hand their column over and reach `c0`
        // through an alternating path of tight edges.
        good.iter_mut().for_each(|g| *g = false);
        col_seen.iter_mut().for_each(|s| *s = false);
        queue.clear();
        queue.push(c0);
        col_seen[c0] = true;
        let mut head = 0;
        while head < queue.len() {
            let c = queue[head];
            head += 1;
            for r in (i + 1)..n {
                if !good[r] && tight(r, c) {
                    good[r] = true;
                    next[r] = c;
                    let cr = row_to_col[r];
                    if !col_seen[cr] {
                        col_seen[cr] = true;
                        queue.push(cr);
                    }
                }
            }
        }
        let Some(j) = (0..c0).find(|&j| tight(i, j) && owner[j] > i && good[owner[j]]) else {
            continue;
        };
        let mut r = owner[j];
        loop {
            let c = next[r];
            let displaced = owner[c];
            row_to_col[r] = c;
            owner[c] = r;
            if c == c0 {
                break;
            }
            r = displaced;
        }
        row_to_col[i] = j;
        owner[j] = i;
    }
}
