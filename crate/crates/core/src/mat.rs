//! Dense matrices over a generic scalar, with exact rational row reduction.

use std::fmt;

use crate::scalar::Scalar;
use crate::{Integer, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        assert!(!rows.is_empty(), "matrix must have at least one row");
        let cols = rows[0].len();
        assert!(cols > 0, "matrix must have at least one column");
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let nrows = rows.len();
        Mat {
            rows: nrows,
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let mut t = a.clone();
                    t *= &other[(k, j)];
                    out[(i, j)] += &t;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: &T) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Display for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Mat<Rational> {
    pub fn from_i64_rows(rows: Vec<Vec<i64>>) -> Self {
        Self::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(Rational::from).collect())
                .collect(),
        )
    }

    /// Reduced row echelon form with the list of pivot columns.
    ///
    /// Elimination runs fraction-free over integer rows (each row scaled by
    /// its denominator lcm) with a gcd trim after every elimination step to
    /// bound coefficient growth; pivots are normalized to one at the end.
    /// The result is the canonical RREF of the row space.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut rows: Vec<Vec<Integer>> = (0..self.rows)
            .map(|i| {
                let mut lcm = Integer::from(1);
                for j in 0..self.cols {
                    lcm.lcm_mut(self[(i, j)].denom());
                }
                (0..self.cols)
                    .map(|j| {
                        let mut v = self[(i, j)].clone();
                        v *= Rational::from(&lcm);
                        debug_assert_eq!(*v.denom(), 1);
                        v.into_numer_denom().0
                    })
                    .collect()
            })
            .collect();

        let ncols = self.cols;
        let mut pivots = Vec::new();
        let mut prow = 0usize;
        for col in 0..ncols {
            if prow >= rows.len() {
                break;
            }
            let Some(sel) = (prow..rows.len()).find(|&r| rows[r][col] != 0) else {
                continue;
            };
            rows.swap(prow, sel);
            let pivot = rows[prow][col].clone();
            for r in 0..rows.len() {
                if r == prow || rows[r][col] == 0 {
                    continue;
                }
                let factor = rows[r][col].clone();
                for c in 0..ncols {
                    let t = Integer::from(&rows[prow][c] * &factor);
                    rows[r][c] *= &pivot;
                    rows[r][c] -= t;
                }
                trim_row(&mut rows[r]);
            }
            pivots.push(col);
            prow += 1;
        }

        let mut out = Mat::zeros(rows.len(), ncols);
        for (r, &pc) in pivots.iter().enumerate() {
            let pivot = rows[r][pc].clone();
            for c in 0..ncols {
                if rows[r][c] != 0 {
                    out[(r, c)] = Rational::from((rows[r][c].clone(), pivot.clone()));
                }
            }
        }
        (out, pivots)
    }
}

fn trim_row(row: &mut [Integer]) {
    let mut g = Integer::from(0);
    for v in row.iter() {
        g.gcd_mut(v);
        if g == 1 {
            return;
        }
    }
    if g > 1 {
        for v in row.iter_mut() {
            v.div_exact_mut(&g);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat_int;

    #[test]
    fn rref_identity() {
        let m = Mat::<Rational>::identity(3);
        let (r, p) = m.rref();
        assert_eq!(r, Mat::identity(3));
        assert_eq!(p, vec![0, 1, 2]);
    }

    #[test]
    fn rref_rank_one() {
        let m = Mat::from_i64_rows(vec![vec![1, 2], vec![2, 4]]);
        let (r, p) = m.rref();
        assert_eq!(r[(0, 0)], rat_int(1));
        assert_eq!(r[(0, 1)], rat_int(2));
        assert_eq!(r[(1, 0)], rat_int(0));
        assert_eq!(r[(1, 1)], rat_int(0));
        assert_eq!(p, vec![0]);
    }

    #[test]
    fn rref_swap() {
        let m = Mat::from_i64_rows(vec![vec![0, 1], vec![1, 0]]);
        let (r, p) = m.rref();
        assert_eq!(r, Mat::identity(2));
        assert_eq!(p, vec![0, 1]);
    }

    #[test]
    fn rref_idempotent_random() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let rows = rng.gen_range(1..6);
            let cols = rng.gen_range(1..7);
            let m = Mat::from_fn(rows, cols, |_, _| {
                crate::rat(rng.gen_range(-6..=6), rng.gen_range(1..=4))
            });
            let (r1, p1) = m.rref();
            let (r2, p2) = r1.rref();
            assert_eq!(r1, r2);
            assert_eq!(p1, p2);
        }
    }
}
