//! Minimum-cost bipartite assignment with deterministic tie-breaking.
//!
//! The solver pads the cost matrix to a square with zero-cost dummy rows or columns, finds
//! optimal dual potentials with the shortest-augmenting-path Hungarian method, and then picks,
//! among all optimal assignments, the one whose pair list sorted by row is lexicographically
//! smallest. Every optimal assignment uses only tight edges (zero reduced cost), so the
//! tie-break is a sequence of feasibility checks on the tight-edge graph.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::{Error, Result};

/// Reduced costs within this fraction of the largest cost magnitude count as tight.
const TIGHT_REL_TOL: f64 = 1e-9;

/// Pairs `(row, column)` sorted by row; `unmatched_queries` holds the remaining rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchResult {
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_queries: Vec<usize>,
    pub total_cost: f64,
}

impl MatchResult {
    pub fn gt_for(&self, query: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == query).map(|p| p.1)
    }
}

/// Assigns `min(N, K)` rows of an `N × K` cost matrix to distinct columns at minimum total
/// cost. Among optimal assignments the lexicographically smallest sorted pair list wins.
pub fn hungarian(cost: &DMatrix<f64>) -> Result<MatchResult> {
    let (rows, cols) = cost.shape();
    if let Some(v) = cost.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "cost matrix entry {v} is not finite"
        )));
    }
    if rows == 0 || cols == 0 {
        return Ok(MatchResult {
            pairs: Vec::new(),
            unmatched_queries: (0..rows).collect(),
            total_cost: 0.0,
        });
    }

    let n = rows.max(cols);
    let c = |i: usize, j: usize| {
        if i < rows && j < cols {
            cost[(i, j)]
        } else {
            0.0
        }
    };
    let (u, v, row_match) = solve_square(n, &c);

    let scale = cost.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = TIGHT_REL_TOL * scale;
    let tight = |i: usize, j: usize| c(i, j) - u[i] - v[j] <= tol;

    let mut lex = LexRefiner::new(n, row_match, &tight);
    for i in 0..rows {
        let fixed = (0..cols).any(|j| lex.try_fix(i, j)) || (cols..n).any(|j| lex.try_fix(i, j));
        debug_assert!(fixed, "row {i} has no tight column");
    }

    let mut pairs = Vec::with_capacity(rows.min(cols));
    let mut unmatched_queries = Vec::new();
    let mut total_cost = 0.0;
    for i in 0..rows {
        let j = lex.row_match[i];
        if j < cols {
            pairs.push((i, j));
            total_cost += cost[(i, j)];
        } else {
            unmatched_queries.push(i);
        }
    }
    Ok(MatchResult {
        pairs,
        unmatched_queries,
        total_cost,
    })
}

/// Returns row potentials, column potentials, and an optimal row→column matching of the
/// square `n × n` problem.
fn solve_square(n: usize, c: &impl Fn(usize, usize) -> f64) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    // 1-based arrays; index 0 is the virtual source row/column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = c(i0 - 1, j - 1) - u[i0] - v[j];
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
    let mut row_match = vec![0; n];
    for j in 1..=n {
        row_match[p[j] - 1] = j - 1;
    }
    (u[1..].to_vec(), v[1..].to_vec(), row_match)
}

/// Maintains a perfect matching on the tight graph while edges are fixed one row at a time.
struct LexRefiner<'a, F: Fn(usize, usize) -> bool> {
    n: usize,
    row_match: Vec<usize>,
    col_match: Vec<usize>,
    row_fixed: Vec<bool>,
    col_fixed: Vec<bool>,
    tight: &'a F,
}

impl<'a, F: Fn(usize, usize) -> bool> LexRefiner<'a, F> {
    fn new(n: usize, row_match: Vec<usize>, tight: &'a F) -> Self {
        let mut col_match = vec![0; n];
        for (i, &j) in row_match.iter().enumerate() {
            col_match[j] = i;
        }
        Self {
            n,
            row_match,
            col_match,
            row_fixed: vec![false; n],
            col_fixed: vec![false; n],
            tight,
        }
    }

    /// Fixes edge `(i, j)` if some tight perfect matching contains it and all edges fixed so
    /// far; rewires the current matching along an alternating path when needed.
    fn try_fix(&mut self, i: usize, j: usize) -> bool {
        if self.col_fixed[j] || !(self.tight)(i, j) {
            return false;
        }
        if self.row_match[i] != j {
            // The row holding j must move to the column that i releases.
            let displaced = self.col_match[j];
            let target = self.row_match[i];
            let mut seen = vec![false; self.n];
            seen[j] = true;
            let Some(path) = self.alternating_path(displaced, target, i, &mut seen) else {
                return false;
            };
            // path lists (row, new column) reassignments from `displaced` onward
            for &(r, col) in &path {
                self.row_match[r] = col;
                self.col_match[col] = r;
            }
            self.row_match[i] = j;
            self.col_match[j] = i;
        }
        self.row_fixed[i] = true;
        self.col_fixed[j] = true;
        true
    }

    fn alternating_path(
        &self,
        row: usize,
        target: usize,
        skip_row: usize,
        seen: &mut [bool],
    ) -> Option<Vec<(usize, usize)>> {
        for col in 0..self.n {
            if seen[col] || self.col_fixed[col] || !(self.tight)(row, col) {
                continue;
            }
            seen[col] = true;
            if col == target {
                return Some(vec![(row, col)]);
            }
            let next = self.col_match[col];
            if next == skip_row || self.row_fixed[next] {
                continue;
            }
            if let Some(mut rest) = self.alternating_path(next, target, skip_row, seen) {
                rest.push((row, col));
                return Some(rest);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, v)
    }

    #[test]
    fn two_by_two() {
        let r = hungarian(&m(2, 2, &[1.0, 2.0, 3.0, 0.0])).unwrap();
        assert_eq!(r.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(r.total_cost, 1.0);
    }

    #[test]
    fn zero_diagonal_gives_identity() {
        let c = DMatrix::from_fn(5, 5, |i, j| if i == j { 0.0 } else { 10.0 });
        let r = hungarian(&c).unwrap();
        assert_eq!(r.pairs, (0..5).map(|i| (i, i)).collect::<Vec<_>>());
    }

    #[test]
    fn rectangular_tall_and_wide() {
        let r = hungarian(&m(3, 2, &[5.0, 1.0, 1.0, 5.0, 0.0, 0.0])).unwrap();
        assert_eq!(r.pairs.len(), 2);
        assert_eq!(r.unmatched_queries.len(), 1);
        assert_eq!(r.total_cost, 1.0);
        // rows 0,1 at cost 2 lose to {row 0 or 1, row 2} at cost 1; lexicographic choice
        assert_eq!(r.pairs, vec![(0, 1), (2, 0)]);

        let r = hungarian(&m(2, 3, &[3.0, 1.0, 2.0, 1.0, 3.0, 2.0])).unwrap();
        assert_eq!(r.pairs, vec![(0, 1), (1, 0)]);
        assert!(r.unmatched_queries.is_empty());
    }

    #[test]
    fn ties_prefer_lexicographically_smallest() {
        let r = hungarian(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(r.pairs, vec![(0, 0), (1, 1), (2, 2)]);
        let r = hungarian(&DMatrix::zeros(3, 1)).unwrap();
        assert_eq!(r.pairs, vec![(0, 0)]);
        assert_eq!(r.unmatched_queries, vec![1, 2]);
        // both anti-diagonal and diagonal cost 2; diagonal is smaller
        let r = hungarian(&m(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert_eq!(r.pairs, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn empty_and_non_finite() {
        let r = hungarian(&DMatrix::zeros(3, 0)).unwrap();
        assert_eq!(r.unmatched_queries, vec![0, 1, 2]);
        assert!(hungarian(&m(1, 1, &[f64::NAN])).is_err());
    }
}
