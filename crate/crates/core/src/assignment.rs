//! Maximum-weight bipartite matching.
//!
//! [`max_weight_matching`] runs the O(n³) shortest-augmenting-path form of the
//! Hungarian algorithm on the negated weights. Rectangular matrices are padded
//! with zero-weight rows or columns to a square, and edges that land on
//! padding are dropped from the result.
//!
//! Among assignments whose totals lie within [`TIE_TOLERANCE`] of the optimum,
//! the one with the lexicographically smallest edge list (sorted by row, then
//! column) is returned. The optimal dual potentials make this cheap: an edge
//! whose reduced cost exceeds the tolerance cannot appear in any near-optimal
//! assignment, so only genuinely tied edges trigger a re-solve of the residual
//! problem.
//!
//! [`brute_force_matching`] enumerates every injective assignment and applies
//! the same tie rule; it is the verification oracle for small matrices.

use serde::Serialize;

use crate::error::{Error, Result};

/// Assignments whose totals differ by no more than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Largest number of injective assignments the brute-force oracle will enumerate.
pub const BRUTE_FORCE_LIMIT: u64 = 20_000_000;

/// Dense row-major weight grid. Rows are outputs, columns are references.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreMatrix {
    n_rows: usize,
    n_cols: usize,
    weights: Vec<f64>,
}

impl ScoreMatrix {
    /// Builds a matrix of metric scores; every weight must be finite and in [0, 100].
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = Self::unbounded(rows)?;
        for r in 0..m.n_rows {
            for c in 0..m.n_cols {
                let value = m.get(r, c);
                if !(0.0..=100.0).contains(&value) {
                    return Err(Error::WeightOutOfRange { row: r, col: c, value });
                }
            }
        }
        Ok(m)
    }

    /// Builds a matrix of arbitrary finite weights.
    pub fn unbounded(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::invalid("score matrix needs at least one row and one column"));
        }
        let mut weights = Vec::with_capacity(n_rows * n_cols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::invalid(format!(
                    "score matrix row {r} has {} columns, expected {n_cols}",
                    row.len()
                )));
            }
            for (c, &w) in row.iter().enumerate() {
                if !w.is_finite() {
                    return Err(Error::NonFiniteWeight { row: r, col: c });
                }
            }
            weights.extend(row);
        }
        Ok(ScoreMatrix {
            n_rows,
            n_cols,
            weights,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.weights[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Weight at `(row, col)` of the zero-padded square.
    fn padded(&self, row: usize, col: usize) -> f64 {
        if row < self.n_rows && col < self.n_cols {
            self.get(row, col)
        } else {
            0.0
        }
    }
}

/// A one-to-one assignment of rows to columns, sorted by row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    pub edges: Vec<(usize, usize)>,
    pub edge_weights: Vec<f64>,
    pub total: f64,
}

impl Matching {
    fn from_edges(matrix: &ScoreMatrix, mut edges: Vec<(usize, usize)>) -> Self {
        edges.sort_unstable();
        let edge_weights: Vec<f64> = edges.iter().map(|&(r, c)| matrix.get(r, c)).collect();
        // Summed in ascending order so the total does not depend on how rows
        // and columns are numbered.
        let mut sorted = edge_weights.clone();
        sorted.sort_by(f64::total_cmp);
        let total = sorted.iter().sum();
        Matching {
            edges,
            edge_weights,
            total,
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Hungarian solution of a square minimisation problem.
struct Solution {
    /// `row_to_col[i]` for every row of the square.
    row_to_col: Vec<usize>,
    /// Row and column potentials, 1-based, with `cost - u - v >= 0` everywhere.
    u: Vec<f64>,
    v: Vec<f64>,
}

/// Minimum-cost perfect matching on an `n x n` cost function.
fn hungarian(n: usize, cost: impl Fn(usize, usize) -> f64) -> Solution {
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    // col_owner[j] = row (1-based) currently assigned to column j; 0 = free.
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![inf; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        col_owner[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = inf);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if col_owner[j] > 0 {
            row_to_col[col_owner[j] - 1] = j - 1;
        }
    }
    Solution { row_to_col, u, v }
}

/// Best total over the residual square made of `rows` x `cols`, plus the
/// assignment (as indices into `cols`, per entry of `rows`).
fn residual_optimum(matrix: &ScoreMatrix, rows: &[usize], cols: &[usize]) -> (f64, Vec<usize>) {
    debug_assert_eq!(rows.len(), cols.len());
    if rows.is_empty() {
        return (0.0, Vec::new());
    }
    let sol = hungarian(rows.len(), |i, j| -matrix.padded(rows[i], cols[j]));
    let total = rows
        .iter()
        .zip(&sol.row_to_col)
        .map(|(&r, &k)| matrix.padded(r, cols[k]))
        .sum();
    (total, sol.row_to_col)
}

/// Tries to move row `i` onto column `c` over tight edges only: an
/// alternating path must lead from the row that currently holds `c` back to
/// the column `i` gives up. Returns the rerouted assignment if one exists.
/// Any tied assignment uses only tight edges, so `None` rules the move out.
fn reroute(
    assign: &[usize],
    col_fixed: &[bool],
    i: usize,
    c: usize,
    tight: &impl Fn(usize, usize) -> bool,
) -> Option<Vec<usize>> {
    let n = assign.len();
    let mut owner = vec![usize::MAX; n];
    for (r, &col) in assign.iter().enumerate() {
        owner[col] = r;
    }
    let target = assign[i];
    // taker[j]: the row that takes column j if the path runs through it.
    let mut taker = vec![usize::MAX; n];
    taker[c] = i;
    let mut queue = std::collections::VecDeque::from([owner[c]]);
    while let Some(x) = queue.pop_front() {
        for j in 0..n {
            if taker[j] != usize::MAX || col_fixed[j] || j == assign[x] || !tight(x, j) {
                continue;
            }
            taker[j] = x;
            if j == target {
                let mut out = assign.to_vec();
                let mut col = target;
                loop {
                    let row = taker[col];
                    let released = out[row];
                    out[row] = col;
                    if row == i {
                        return Some(out);
                    }
                    col = released;
                }
            }
            queue.push_back(owner[j]);
        }
    }
    None
}

/// Maximum-weight one-to-one assignment of size `min(n_rows, n_cols)`.
pub fn max_weight_matching(matrix: &ScoreMatrix) -> Matching {
    let n = matrix.n_rows.max(matrix.n_cols);
    let sol = hungarian(n, |i, j| -matrix.padded(i, j));
    let mut assign = sol.row_to_col.clone();
    let optimum: f64 = (0..n).map(|i| matrix.padded(i, assign[i])).sum();

    // Lexicographic refinement among near-optimal assignments.
    let reduced = |i: usize, j: usize| -matrix.padded(i, j) - sol.u[i + 1] - sol.v[j + 1];
    let mut col_fixed = vec![false; n];
    let mut prefix = 0.0;
    // Padding rows and the identity of padding columns never reach the edge
    // list, so only real rows and real candidate columns are refined.
    let tight = |i: usize, j: usize| reduced(i, j) <= TIE_TOLERANCE;
    for i in 0..matrix.n_rows {
        for c in 0..assign[i].min(matrix.n_cols) {
            if col_fixed[c] || !tight(i, c) {
                continue;
            }
            let Some(rerouted) = reroute(&assign, &col_fixed, i, c, &tight) else {
                continue;
            };
            // Slack may add up along the path; confirm the total, and fall
            // back to re-solving the remainder when it falls short.
            let total: f64 = (0..n).map(|r| matrix.padded(r, rerouted[r])).sum();
            if total >= optimum - TIE_TOLERANCE {
                assign = rerouted;
                break;
            }
            let rest_rows: Vec<usize> = (i + 1..n).collect();
            let rest_cols: Vec<usize> = (0..n).filter(|&j| !col_fixed[j] && j != c).collect();
            let (rest, rest_assign) = residual_optimum(matrix, &rest_rows, &rest_cols);
            if prefix + matrix.padded(i, c) + rest >= optimum - TIE_TOLERANCE {
                assign[i] = c;
                for (&r, &k) in rest_rows.iter().zip(&rest_assign) {
                    assign[r] = rest_cols[k];
                }
                break;
            }
        }
        col_fixed[assign[i]] = true;
        prefix += matrix.padded(i, assign[i]);
    }

    let edges = (0..matrix.n_rows)
        .filter(|&i| assign[i] < matrix.n_cols)
        .map(|i| (i, assign[i]))
        .collect();
    Matching::from_edges(matrix, edges)
}

fn injection_count(n_rows: usize, n_cols: usize) -> Option<u64> {
    let (k, m) = (n_rows.min(n_cols) as u64, n_rows.max(n_cols) as u64);
    (0..k).try_fold(1u64, |acc, i| acc.checked_mul(m - i))
}

/// Exhaustive search over all injective assignments. Refuses matrices whose
/// smaller side exceeds 8, or whose enumeration would exceed
/// [`BRUTE_FORCE_LIMIT`] assignments.
pub fn brute_force_matching(matrix: &ScoreMatrix) -> Result<Matching> {
    let (rows, cols) = (matrix.n_rows, matrix.n_cols);
    let too_large = || Error::BruteForceTooLarge { rows, cols };
    if rows.min(cols) > 8 || injection_count(rows, cols).is_none_or(|c| c > BRUTE_FORCE_LIMIT) {
        return Err(too_large());
    }

    let mut candidates: Vec<(f64, Vec<(usize, usize)>)> = Vec::new();
    let mut partner = Vec::with_capacity(rows.min(cols));
    let mut taken = vec![false; rows.max(cols)];
    let transpose = rows > cols;
    let (small, large) = if transpose { (cols, rows) } else { (rows, cols) };

    fn recurse(
        depth: usize,
        small: usize,
        large: usize,
        partner: &mut Vec<usize>,
        taken: &mut [bool],
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if depth == small {
            visit(partner);
            return;
        }
        for j in 0..large {
            if taken[j] {
                continue;
            }
            taken[j] = true;
            partner.push(j);
            recurse(depth + 1, small, large, partner, taken, visit);
            partner.pop();
            taken[j] = false;
        }
    }

    let mut best = f64::NEG_INFINITY;
    recurse(0, small, large, &mut partner, &mut taken, &mut |p: &[usize]| {
        let mut edges: Vec<(usize, usize)> = p
            .iter()
            .enumerate()
            .map(|(s, &l)| if transpose { (l, s) } else { (s, l) })
            .collect();
        edges.sort_unstable();
        let total: f64 = edges.iter().map(|&(r, c)| matrix.get(r, c)).sum();
        if total >= best - TIE_TOLERANCE {
            best = best.max(total);
            candidates.push((total, edges));
        }
    });

    let winner = candidates
        .into_iter()
        .filter(|(t, _)| *t >= best - TIE_TOLERANCE)
        .map(|(_, e)| e)
        .min()
        .ok_or_else(too_large)?;
    Ok(Matching::from_edges(matrix, winner))
}
