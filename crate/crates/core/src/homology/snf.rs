//! Dense Smith normal form over `Z` with arbitrary-precision entries.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &x) in row.iter().enumerate() {
                m.data[i * c + j] = BigInt::from(x);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: BigInt) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = BigInt::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    /// Rows `from..` as a new matrix.
    pub fn rows_from(&self, from: usize) -> IntMatrix {
        IntMatrix {
            rows: self.rows - from,
            cols: self.cols,
            data: self.data[from * self.cols..].to_vec(),
        }
    }

    /// Columns `from..` as a new matrix.
    pub fn cols_from(&self, from: usize) -> IntMatrix {
        let cols = self.cols - from;
        let mut m = IntMatrix::zeros(self.rows, cols);
        for i in 0..self.rows {
            for j in 0..cols {
                m.data[i * cols + j] = self.get(i, from + j).clone();
            }
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += q * row[src]
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let s = &self.data[src * self.cols + j];
            if !s.is_zero() {
                let t = s * q;
                self.data[dst * self.cols + j] += t;
            }
        }
    }

    /// col[dst] += q * col[src]
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + src];
            if !s.is_zero() {
                let t = s * q;
                self.data[i * self.cols + dst] += t;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let x = std::mem::take(&mut self.data[i * self.cols + j]);
            self.data[i * self.cols + j] = -x;
        }
    }
}

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal, `d_1 | d_2 | …`.
///
/// Transforms that were not requested are left as empty `0 × 0` matrices.
#[derive(Clone, Debug)]
pub struct SnfResult {
    /// The `min(m, n)` diagonal entries, non-negative; zeros trail.
    pub diagonal: Vec<BigInt>,
    pub rank: usize,
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SnfResult {
    /// The nonzero diagonal entries.
    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.diagonal[..self.rank]
    }

    /// Nonzero diagonal entries greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.invariant_factors()
            .iter()
            .filter(|d| !d.is_one())
            .cloned()
            .collect()
    }
}

/// Which transforms to accumulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Track {
    pub rows: bool,
    pub cols: bool,
}

impl Track {
    pub const ALL: Track = Track {
        rows: true,
        cols: true,
    };
    pub const NONE: Track = Track {
        rows: false,
        cols: false,
    };
    pub const ROWS: Track = Track {
        rows: true,
        cols: false,
    };
}

/// Row/column operations recorded on the transforms as well as the matrix.
struct Tracker {
    a: IntMatrix,
    u: Option<(IntMatrix, IntMatrix)>,
    v: Option<(IntMatrix, IntMatrix)>,
}

impl Tracker {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        if let Some((u, u_inv)) = &mut self.u {
            u.swap_rows(i, j);
            u_inv.swap_cols(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        if let Some((v, v_inv)) = &mut self.v {
            v.swap_cols(i, j);
            v_inv.swap_rows(i, j);
        }
    }

    /// row[dst] += q row[src]; U⁻¹ gets col[src] -= q col[dst].
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        self.a.add_row(dst, src, q);
        if let Some((u, u_inv)) = &mut self.u {
            u.add_row(dst, src, q);
            u_inv.add_col(src, dst, &-q);
        }
    }

    /// col[dst] += q col[src]; V⁻¹ gets row[src] -= q row[dst].
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        self.a.add_col(dst, src, q);
        if let Some((v, v_inv)) = &mut self.v {
            v.add_col(dst, src, q);
            v_inv.add_row(src, dst, &-q);
        }
    }

    fn negate_row(&mut self, i: usize) {
        self.a.negate_row(i);
        if let Some((u, u_inv)) = &mut self.u {
            u.negate_row(i);
            for r in 0..u_inv.rows {
                let x = std::mem::take(&mut u_inv.data[r * u_inv.cols + i]);
                u_inv.data[r * u_inv.cols + i] = -x;
            }
        }
    }
}

/// Smith normal form with unimodular transforms and their inverses.
pub fn smith_normal_form(a: &IntMatrix) -> SnfResult {
    smith_normal_form_with(a, Track::ALL)
}

/// Smith normal form accumulating only the requested transforms.
///
/// Pivots are chosen as the smallest-magnitude nonzero entry of the active
/// block; a row or column is cleared by repeated division, and divisibility
/// of the remaining block by the pivot is enforced by folding an offending
/// row into the pivot row.
pub fn smith_normal_form_with(a: &IntMatrix, track: Track) -> SnfResult {
    let (m, n) = (a.rows, a.cols);
    let mut t = Tracker {
        a: a.clone(),
        u: track
            .rows
            .then(|| (IntMatrix::identity(m), IntMatrix::identity(m))),
        v: track
            .cols
            .then(|| (IntMatrix::identity(n), IntMatrix::identity(n))),
    };
    let mut rank = 0;
    for p in 0..m.min(n) {
        let Some((pi, pj)) = smallest_entry(&t.a, p) else {
            break;
        };
        t.swap_rows(p, pi);
        t.swap_cols(p, pj);
        loop {
            let mut dirty = false;
            for i in (p + 1)..m {
                if t.a.get(i, p).is_zero() {
                    continue;
                }
                let q = t.a.get(i, p).div_floor(t.a.get(p, p));
                t.add_row(i, p, &-q);
                if !t.a.get(i, p).is_zero() {
                    dirty = true;
                }
            }
            for j in (p + 1)..n {
                if t.a.get(p, j).is_zero() {
                    continue;
                }
                let q = t.a.get(p, j).div_floor(t.a.get(p, p));
                t.add_col(j, p, &-q);
                if !t.a.get(p, j).is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                let (pi, pj) = smallest_in_cross(&t.a, p);
                t.swap_rows(p, pi);
                t.swap_cols(p, pj);
                continue;
            }
            let pivot = t.a.get(p, p).clone();
            let offender =
                ((p + 1)..m).find(|&i| ((p + 1)..n).any(|j| !t.a.get(i, j).is_multiple_of(&pivot)));
            match offender {
                Some(i) => t.add_row(p, i, &BigInt::one()),
                None => break,
            }
        }
        if t.a.get(p, p).is_negative() {
            t.negate_row(p);
        }
        rank += 1;
    }
    let diagonal = (0..m.min(n)).map(|i| t.a.get(i, i).clone()).collect();
    let (u, u_inv) =
        t.u.unwrap_or((IntMatrix::zeros(0, 0), IntMatrix::zeros(0, 0)));
    let (v, v_inv) =
        t.v.unwrap_or((IntMatrix::zeros(0, 0), IntMatrix::zeros(0, 0)));
    SnfResult {
        diagonal,
        rank,
        u,
        u_inv,
        v,
        v_inv,
    }
}

fn smallest_entry(a: &IntMatrix, p: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in p..a.rows {
        for j in p..a.cols {
            let x = a.get(i, j);
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| x.abs() < a.get(bi, bj).abs()) {
                best = Some((i, j));
                if x.abs().is_one() {
                    return best;
                }
            }
        }
    }
    best
}

fn smallest_in_cross(a: &IntMatrix, p: usize) -> (usize, usize) {
    let mut best = (p, p);
    let mut best_abs = a.get(p, p).abs();
    for i in (p + 1)..a.rows {
        let x = a.get(i, p);
        if !x.is_zero() && (best_abs.is_zero() || x.abs() < best_abs) {
            best = (i, p);
            best_abs = x.abs();
        }
    }
    for j in (p + 1)..a.cols {
        let x = a.get(p, j);
        if !x.is_zero() && (best_abs.is_zero() || x.abs() < best_abs) {
            best = (p, j);
            best_abs = x.abs();
        }
    }
    best
}

/// Integer solution of `A x = y`, if one exists.
pub fn solve(a: &IntMatrix, y: &[BigInt]) -> Option<Vec<BigInt>> {
    solve_with(&smith_normal_form(a), a.cols, y)
}

/// Solves `A x = y` using a precomputed Smith form of `A` (`n` columns).
pub fn solve_with(snf: &SnfResult, n: usize, y: &[BigInt]) -> Option<Vec<BigInt>> {
    let uy = snf.u.mul_vec(y);
    let mut w = vec![BigInt::zero(); n];
    for (i, c) in uy.iter().enumerate() {
        if i < snf.rank {
            let (q, r) = c.div_rem(&snf.diagonal[i]);
            if !r.is_zero() {
                return None;
            }
            w[i] = q;
        } else if !c.is_zero() {
            return None;
        }
    }
    Some(snf.v.mul_vec(&w))
}
