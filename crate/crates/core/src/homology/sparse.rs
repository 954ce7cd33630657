//! Sparse integer matrices and rank / invariant-factor computation by
//! unit-pivot elimination with a dense Smith form on the residual block.

use num_bigint::BigInt;

use super::snf::{
    smith_normal_form, smith_normal_form_with, solve_with, IntMatrix, SnfResult, Track,
};
use crate::error::{CoreError, Result};

/// Column-major sparse matrix; each column is sorted by row.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub columns: Vec<Vec<(u32, i64)>>,
}

impl SparseMatrix {
    pub fn new(rows: usize, columns: Vec<Vec<(u32, i64)>>) -> Self {
        SparseMatrix {
            rows,
            cols: columns.len(),
            columns,
        }
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(|c| c.len()).sum()
    }

    pub fn to_dense(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows, self.cols);
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, x) in col {
                m.set(i as usize, j, BigInt::from(x));
            }
        }
        m
    }

    /// Row-major copy.
    pub fn row_lists(&self) -> Vec<Vec<(u32, i64)>> {
        let mut rows = vec![Vec::new(); self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, x) in col {
                rows[i as usize].push((j as u32, x));
            }
        }
        rows
    }

    pub fn mul_vec(&self, x: &[i64]) -> Result<Vec<i64>> {
        let mut out = vec![0i64; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            if x[j] == 0 {
                continue;
            }
            for &(i, a) in col {
                let t = a.checked_mul(x[j]).ok_or(CoreError::Overflow)?;
                out[i as usize] = out[i as usize].checked_add(t).ok_or(CoreError::Overflow)?;
            }
        }
        Ok(out)
    }
}

/// Rank and nonzero invariant factors of a sparse matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankProfile {
    pub rank: usize,
    /// Invariant factors greater than one.
    pub torsion: Vec<BigInt>,
}

/// Largest residual block handed to the dense Smith form.
pub const DENSE_RESIDUAL_LIMIT: usize = 1_500_000;

/// Forward elimination of a sparse matrix by row operations with `±1`
/// pivots. After elimination the matrix is, up to permutation,
/// `[[T, P], [0, R]]` with `T` unit upper triangular; `R` (the residual) is
/// handled by a dense Smith form.
#[derive(Clone, Debug)]
pub struct Elimination {
    pub rows: usize,
    pub cols: usize,
    /// `(pivot row, pivot column, pivot value)` in elimination order.
    pivots: Vec<(u32, u32, i64)>,
    /// Pivot rows as they were when chosen.
    pivot_rows: Vec<Vec<(u32, i64)>>,
    /// For each pivot step: `(row, factor)` with `row -= factor · pivot row`.
    ops: Vec<Vec<(u32, i64)>>,
    residual_rows: Vec<u32>,
    residual_cols: Vec<u32>,
    residual: Option<SnfResult>,
}

impl Elimination {
    /// Eliminates `m`; `record` keeps what [`Elimination::solve`] needs.
    pub fn new(m: &SparseMatrix, record: bool) -> Result<Elimination> {
        let mut rows: Vec<Option<Vec<(u32, i64)>>> = m.row_lists().into_iter().map(Some).collect();
        let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); m.cols];
        for (i, r) in rows.iter().enumerate() {
            for &(j, _) in r.as_ref().unwrap() {
                col_rows[j as usize].push(i as u32);
            }
        }
        let mut pivots = Vec::new();
        let mut pivot_rows = Vec::new();
        let mut ops = Vec::new();
        let mut col_alive = vec![true; m.cols];
        let mut order: Vec<usize> = (0..m.rows).collect();
        order.sort_by_key(|&i| rows[i].as_ref().unwrap().len());
        let mut progress = true;
        while progress {
            progress = false;
            for &i in &order {
                let Some(row) = rows[i].as_ref() else {
                    continue;
                };
                if row.is_empty() {
                    continue;
                }
                let pivot = row
                    .iter()
                    .filter(|&&(_, x)| x == 1 || x == -1)
                    .min_by_key(|&&(j, _)| col_rows[j as usize].len())
                    .copied();
                let Some((j, pv)) = pivot else {
                    continue;
                };
                let prow = rows[i].take().unwrap();
                let touched = std::mem::take(&mut col_rows[j as usize]);
                let mut step_ops = Vec::new();
                for &k in &touched {
                    let Some(target) = rows[k as usize].as_mut() else {
                        continue;
                    };
                    let Ok(pos) = target.binary_search_by_key(&j, |e| e.0) else {
                        continue;
                    };
                    // target -= (a / pv) · prow, and a / pv = a · pv for pv = ±1
                    let factor = target[pos].1 * pv;
                    let merged = axpy(target, &prow, -factor)?;
                    for &(jj, _) in &merged {
                        if target.binary_search_by_key(&jj, |e| e.0).is_err() {
                            col_rows[jj as usize].push(k);
                        }
                    }
                    *target = merged;
                    if record {
                        step_ops.push((k, factor));
                    }
                }
                col_alive[j as usize] = false;
                pivots.push((i as u32, j, pv));
                if record {
                    pivot_rows.push(prow);
                    ops.push(step_ops);
                }
                progress = true;
            }
        }
        let mut residual_rows = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            if r.as_ref().is_some_and(|r| !r.is_empty()) {
                residual_rows.push(i as u32);
            }
        }
        let mut residual_cols: Vec<u32> = residual_rows
            .iter()
            .flat_map(|&i| rows[i as usize].as_ref().unwrap().iter().map(|e| e.0))
            .collect();
        residual_cols.sort_unstable();
        residual_cols.dedup();
        let residual = if residual_rows.is_empty() {
            None
        } else {
            if residual_rows.len() * residual_cols.len() > DENSE_RESIDUAL_LIMIT {
                return Err(CoreError::CapExceeded {
                    what: "dense residual entries",
                    limit: DENSE_RESIDUAL_LIMIT,
                });
            }
            let mut dense = IntMatrix::zeros(residual_rows.len(), residual_cols.len());
            for (a, &i) in residual_rows.iter().enumerate() {
                for &(j, x) in rows[i as usize].as_ref().unwrap() {
                    let b = residual_cols.binary_search(&j).unwrap();
                    dense.set(a, b, BigInt::from(x));
                }
            }
            let track = if record { Track::ALL } else { Track::NONE };
            Some(smith_normal_form_with(&dense, track))
        };
        Ok(Elimination {
            rows: m.rows,
            cols: m.cols,
            pivots,
            pivot_rows,
            ops,
            residual_rows,
            residual_cols,
            residual,
        })
    }

    pub fn rank(&self) -> usize {
        self.pivots.len() + self.residual.as_ref().map_or(0, |r| r.rank)
    }

    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.residual
            .as_ref()
            .map_or_else(Vec::new, |r| r.torsion())
    }

    /// Residual block shape `(rows, cols)`.
    pub fn residual_shape(&self) -> (usize, usize) {
        (self.residual_rows.len(), self.residual_cols.len())
    }

    /// An integer solution of `M x = y`, if one exists. Requires `record`.
    pub fn solve(&self, y: &[i64]) -> Result<Option<Vec<i64>>> {
        assert_eq!(y.len(), self.rows, "right-hand side has wrong length");
        assert_eq!(
            self.ops.len(),
            self.pivots.len(),
            "elimination was not recorded"
        );
        let mut y: Vec<i128> = y.iter().map(|&v| v as i128).collect();
        for (&(pi, _, _), step) in self.pivots.iter().zip(&self.ops) {
            let yp = y[pi as usize];
            if yp == 0 {
                continue;
            }
            for &(k, f) in step {
                let t = (f as i128).checked_mul(yp).ok_or(CoreError::Overflow)?;
                y[k as usize] = y[k as usize].checked_sub(t).ok_or(CoreError::Overflow)?;
            }
        }
        let mut x: Vec<i128> = vec![0; self.cols];
        // rows that are neither pivots nor residual must be consistent
        let mut is_pivot_row = vec![false; self.rows];
        for &(pi, _, _) in &self.pivots {
            is_pivot_row[pi as usize] = true;
        }
        for &i in &self.residual_rows {
            is_pivot_row[i as usize] = true;
        }
        if y.iter()
            .enumerate()
            .any(|(i, &v)| v != 0 && !is_pivot_row[i])
        {
            return Ok(None);
        }
        if let Some(snf) = &self.residual {
            let rhs: Vec<BigInt> = self
                .residual_rows
                .iter()
                .map(|&i| BigInt::from(y[i as usize]))
                .collect();
            let Some(sol) = solve_with(snf, self.residual_cols.len(), &rhs) else {
                return Ok(None);
            };
            for (b, v) in sol.iter().enumerate() {
                x[self.residual_cols[b] as usize] =
                    i128::try_from(v).map_err(|_| CoreError::Overflow)?;
            }
        }
        for (t, &(pi, pj, pv)) in self.pivots.iter().enumerate().rev() {
            let mut acc = y[pi as usize];
            for &(j, a) in &self.pivot_rows[t] {
                if j != pj {
                    let term = (a as i128)
                        .checked_mul(x[j as usize])
                        .ok_or(CoreError::Overflow)?;
                    acc = acc.checked_sub(term).ok_or(CoreError::Overflow)?;
                }
            }
            x[pj as usize] = acc * pv as i128;
        }
        x.into_iter()
            .map(|v| i64::try_from(v).map_err(|_| CoreError::Overflow))
            .collect::<Result<Vec<i64>>>()
            .map(Some)
    }
}

/// Rank and torsion by [`Elimination`].
pub fn rank_profile(m: &SparseMatrix) -> Result<RankProfile> {
    let e = Elimination::new(m, false)?;
    Ok(RankProfile {
        rank: e.rank(),
        torsion: e.torsion(),
    })
}

/// `a + c·b` for sorted sparse rows, dropping zeros.
fn axpy(a: &[(u32, i64)], b: &[(u32, i64)], c: i64) -> Result<Vec<(u32, i64)>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            let v = b[j].1.checked_mul(c).ok_or(CoreError::Overflow)?;
            out.push((b[j].0, v));
            j += 1;
        } else {
            let t = b[j].1.checked_mul(c).ok_or(CoreError::Overflow)?;
            let v = a[i].1.checked_add(t).ok_or(CoreError::Overflow)?;
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    Ok(out)
}

/// Rank and torsion, falling back to the dense Smith form when the sparse
/// elimination overflows `i64`.
pub fn rank_profile_exact(m: &SparseMatrix) -> Result<RankProfile> {
    match rank_profile(m) {
        Err(CoreError::Overflow) if m.rows * m.cols <= DENSE_RESIDUAL_LIMIT => {
            let snf = smith_normal_form(&m.to_dense());
            Ok(RankProfile {
                rank: snf.rank,
                torsion: snf.torsion(),
            })
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_dense(rows: &[Vec<i64>]) -> SparseMatrix {
        let r = rows.len();
        let c = rows[0].len();
        let cols = (0..c)
            .map(|j| {
                (0..r)
                    .filter(|&i| rows[i][j] != 0)
                    .map(|i| (i as u32, rows[i][j]))
                    .collect()
            })
            .collect();
        SparseMatrix::new(r, cols)
    }

    #[test]
    fn profile_matches_dense() {
        let cases = vec![
            vec![vec![2, 0], vec![0, 3]],
            vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]],
            vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]],
            vec![vec![0, 0], vec![0, 0]],
        ];
        for rows in cases {
            let s = from_dense(&rows);
            let dense = smith_normal_form(&s.to_dense());
            let p = rank_profile(&s).unwrap();
            assert_eq!(p.rank, dense.rank);
            assert_eq!(p.torsion, dense.torsion());
        }
    }

    #[test]
    fn zero_sized() {
        let s = SparseMatrix::new(0, vec![vec![], vec![]]);
        assert_eq!(rank_profile(&s).unwrap().rank, 0);
    }
}
