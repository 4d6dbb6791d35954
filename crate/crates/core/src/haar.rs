//! Exact integration of monomials in matrix entries over the orthogonal
//! group O(n) with normalized Haar measure.
//!
//! The integral of γ^a is computed by conditioning on columns: permutation
//! invariance moves the occupied columns to the front, and the last occupied
//! column, conditioned on the previous ones, is uniform on the unit sphere
//! of their orthogonal complement. Its moments are sums over perfect
//! matchings of projector entries P = I − Σ g_c g_c^T, which are expanded
//! and integrated recursively. Each step removes one column and never raises
//! the total degree, so the recursion terminates at the empty monomial.
//!
//! Results are memoized keyed by (n, canonicalized exponent matrix), where
//! canonicalization applies row and column sorting passes; both-side
//! permutations leave the integral unchanged.

use std::sync::OnceLock;

use dashmap::DashMap;
use rand::prelude::*;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::{rat_int, Integer, Rational};

pub const DEFAULT_DEGREE_CAP: u32 = 32;

/// Exponent matrix a for the monomial γ^a = Π γ_{ij}^{a_ij}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialExponent {
    rows: usize,
    cols: usize,
    a: Vec<u32>,
}

impl MonomialExponent {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MonomialExponent {
            rows,
            cols,
            a: vec![0; rows * cols],
        }
    }

    pub fn from_entries(rows: usize, cols: usize, entries: &[(usize, usize, u32)]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for &(i, j, e) in entries {
            m.a[i * cols + j] += e;
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.a[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: u32) {
        self.a[i * self.cols + j] = e;
    }

    pub fn total_degree(&self) -> u32 {
        self.a.iter().sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.a[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    fn occupied_rows(&self) -> Vec<usize> {
        (0..self.rows)
            .filter(|&i| (0..self.cols).any(|j| self.get(i, j) > 0))
            .collect()
    }

    fn occupied_cols(&self) -> Vec<usize> {
        (0..self.cols)
            .filter(|&j| (0..self.rows).any(|i| self.get(i, j) > 0))
            .collect()
    }

    fn row_sum(&self, i: usize) -> u32 {
        (0..self.cols).map(|j| self.get(i, j)).sum()
    }

    fn col_sum(&self, j: usize) -> u32 {
        (0..self.rows).map(|i| self.get(i, j)).sum()
    }

    /// True when some occupied row or column has an odd sum, which forces
    /// the integral to vanish by sign-flip invariance.
    pub fn has_odd_line(&self) -> bool {
        (0..self.rows).any(|i| self.row_sum(i) % 2 == 1)
            || (0..self.cols).any(|j| self.col_sum(j) % 2 == 1)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HaarError {
    #[error("total degree {degree} exceeds cap {cap}")]
    DegreeCapExceeded { degree: u32, cap: u32 },
    #[error("dimension {n} too small for index range {need}")]
    DimensionTooSmall { n: usize, need: usize },
}

/// Compact occupied submatrix, canonicalized by alternating row/column sorts.
fn canonical_key(n: usize, rows: &[usize], cols: &[usize], a: &MonomialExponent) -> Vec<u8> {
    let r = rows.len();
    let c = cols.len();
    let mut m: Vec<Vec<u8>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| a.get(i, j) as u8).collect())
        .collect();
    for _ in 0..4 {
        m.sort();
        // sort columns: transpose, sort, transpose back
        let mut t: Vec<Vec<u8>> = (0..c)
            .map(|j| (0..r).map(|i| m[i][j]).collect())
            .collect();
        t.sort();
        for i in 0..r {
            for (j, tj) in t.iter().enumerate() {
                m[i][j] = tj[i];
            }
        }
    }
    let mut key = Vec::with_capacity(3 + r * c);
    key.push(n as u8);
    key.push(r as u8);
    key.push(c as u8);
    for row in &m {
        key.extend_from_slice(row);
    }
    key
}

fn memo() -> &'static DashMap<Vec<u8>, Rational> {
    static MEMO: OnceLock<DashMap<Vec<u8>, Rational>> = OnceLock::new();
    MEMO.get_or_init(DashMap::new)
}

/// Exact value of ∫_{O(n)} γ^a dγ.
pub fn integrate_monomial(n: usize, a: &MonomialExponent) -> Result<Rational, HaarError> {
    integrate_monomial_capped(n, a, DEFAULT_DEGREE_CAP)
}

pub fn integrate_monomial_capped(
    n: usize,
    a: &MonomialExponent,
    cap: u32,
) -> Result<Rational, HaarError> {
    let deg = a.total_degree();
    if deg > cap {
        return Err(HaarError::DegreeCapExceeded { degree: deg, cap });
    }
    let rows = a.occupied_rows();
    let cols = a.occupied_cols();
    let need = rows
        .iter()
        .chain(cols.iter())
        .map(|&i| i + 1)
        .max()
        .unwrap_or(0);
    if need > n {
        return Err(HaarError::DimensionTooSmall { n, need });
    }
    Ok(integrate_rec(n, a))
}

fn integrate_rec(n: usize, a: &MonomialExponent) -> Rational {
    let cols = a.occupied_cols();
    if cols.is_empty() {
        return rat_int(1);
    }
    if a.has_odd_line() {
        return rat_int(0);
    }
    let rows = a.occupied_rows();
    let key = canonical_key(n, &rows, &cols, a);
    if let Some(v) = memo().get(&key) {
        return v.clone();
    }

    // eliminate the occupied column with the smallest degree
    let &elim = cols
        .iter()
        .min_by_key(|&&j| (a.col_sum(j), j))
        .unwrap();
    let others: Vec<usize> = cols.iter().copied().filter(|&j| j != elim).collect();
    let j_count = cols.len();
    let d = (n - (j_count - 1)) as i64;

    let b: Vec<u32> = rows.iter().map(|&i| a.get(i, elim)).collect();
    let q: u32 = b.iter().sum::<u32>() / 2;
    let mut denom = rat_int(1);
    for t in 0..q as i64 {
        denom *= Rational::from(d + 2 * t);
    }

    let mut base = a.clone();
    for &i in &rows {
        base.set(i, elim, 0);
    }

    let k = rows.len();
    let mut total = rat_int(0);
    for m in pairing_types(&b) {
        let w = matching_count(&b, &m, k);
        // expand Π_{r<=s} P_{rs}^{M_rs}, P_{rs} = δ_{rs} − Σ_{c'} γ_{r c'} γ_{s c'}
        let mut terms: Vec<(Rational, MonomialExponent)> =
            vec![(Rational::from(&w), base.clone())];
        for r in 0..k {
            for s in r..k {
                for _ in 0..m[r * k + s] {
                    let mut next = Vec::new();
                    for (coef, expo) in &terms {
                        if r == s {
                            next.push((coef.clone(), expo.clone()));
                        }
                        for &c in &others {
                            let mut e2 = expo.clone();
                            e2.set(rows[r], c, e2.get(rows[r], c) + 1);
                            e2.set(rows[s], c, e2.get(rows[s], c) + 1);
                            next.push((-coef.clone(), e2));
                        }
                    }
                    terms = next;
                }
            }
        }
        for (coef, expo) in terms {
            if coef == 0 {
                continue;
            }
            let sub = integrate_rec(n, &expo);
            if sub != 0 {
                total += coef * sub;
            }
        }
    }
    total /= &denom;
    memo().insert(key, total.clone());
    total
}

/// All symmetric k×k nonnegative integer matrices M with
/// 2 M_rr + Σ_{s≠r} M_rs = b_r: the pairing types of the multiset b.
fn pairing_types(b: &[u32]) -> Vec<Vec<u32>> {
    let k = b.len();
    let mut out = Vec::new();
    let mut m = vec![0u32; k * k];
    fill(&mut out, &mut m, &mut b.to_vec(), 0, 0, k);
    out
}

fn fill(
    out: &mut Vec<Vec<u32>>,
    m: &mut Vec<u32>,
    rem: &mut Vec<u32>,
    r: usize,
    s_off: usize,
    k: usize,
) {
    if r == k {
        if rem.iter().all(|&x| x == 0) {
            out.push(m.clone());
        }
        return;
    }
    let s = r + s_off;
    if s >= k {
        // row r must be exhausted before moving on
        if rem[r] == 0 {
            fill(out, m, rem, r + 1, 0, k);
        }
        return;
    }
    let max = if s == r { rem[r] / 2 } else { rem[r].min(rem[s]) };
    for v in 0..=max {
        let (dr, ds) = if s == r { (2 * v, 0) } else { (v, v) };
        if rem[r] < dr || (s != r && rem[s] < ds) {
            break;
        }
        rem[r] -= dr;
        if s != r {
            rem[s] -= ds;
        }
        m[r * k + s] = v;
        m[s * k + r] = v;
        fill(out, m, rem, r, s_off + 1, k);
        m[r * k + s] = 0;
        m[s * k + r] = 0;
        rem[r] += dr;
        if s != r {
            rem[s] += ds;
        }
    }
}

/// Number of perfect matchings of the multiset b realizing type M.
fn matching_count(b: &[u32], m: &[u32], k: usize) -> Integer {
    let mut num = Integer::from(1);
    for &br in b {
        num *= factorial(br);
    }
    let mut den = Integer::from(1);
    for r in 0..k {
        let mrr = m[r * k + r];
        den *= Integer::from(1) << mrr;
        den *= factorial(mrr);
        for s in (r + 1)..k {
            den *= factorial(m[r * k + s]);
        }
    }
    num / den
}

fn factorial(n: u32) -> Integer {
    let mut f = Integer::from(1);
    for i in 2..=n {
        f *= i;
    }
    f
}

/// Monte Carlo estimate of ∫ γ^a dγ over Haar-random orthogonal matrices
/// sampled as the sign-fixed QR factor of a Gaussian matrix.
pub fn mc_estimate(n: usize, a: &MonomialExponent, samples: usize, seed: u64) -> (f64, f64) {
    assert!(samples >= 1000, "need at least 10^3 samples");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let entries: Vec<(usize, usize, u32)> = (0..a.rows)
        .flat_map(|i| (0..a.cols).map(move |j| (i, j, a.get(i, j))))
        .filter(|&(_, _, e)| e > 0)
        .collect();
    for _ in 0..samples {
        let g = haar_orthogonal(n, &mut rng);
        let mut v = 1.0;
        for &(i, j, e) in &entries {
            v *= g[i][j].powi(e as i32);
        }
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / samples as f64;
    let var = (sumsq / samples as f64 - mean * mean).max(0.0) / samples as f64;
    (mean, var.sqrt())
}

/// Haar sample: QR of a Gaussian matrix with the R diagonal forced positive.
pub fn haar_orthogonal(n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut g: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    // modified Gram-Schmidt on columns
    for j in 0..n {
        for prev in 0..j {
            let dot: f64 = (0..n).map(|i| g[i][j] * g[i][prev]).sum();
            for i in 0..n {
                g[i][j] -= dot * g[i][prev];
            }
        }
        let norm: f64 = (0..n).map(|i| g[i][j] * g[i][j]).sum::<f64>().sqrt();
        for i in 0..n {
            g[i][j] /= norm;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn single(n_rows: usize, n_cols: usize, i: usize, j: usize, e: u32) -> MonomialExponent {
        MonomialExponent::from_entries(n_rows, n_cols, &[(i, j, e)])
    }

    #[test]
    fn empty_monomial_is_one() {
        let a = MonomialExponent::zeros(4, 4);
        assert_eq!(integrate_monomial(5, &a).unwrap(), rat_int(1));
    }

    #[test]
    fn odd_sums_vanish() {
        let a = single(2, 2, 0, 0, 3);
        assert_eq!(integrate_monomial(4, &a).unwrap(), rat_int(0));
        let a = MonomialExponent::from_entries(2, 2, &[(0, 0, 1), (1, 1, 1)]);
        assert_eq!(integrate_monomial(4, &a).unwrap(), rat_int(0));
    }

    #[test]
    fn second_moment_is_one_over_n() {
        for n in 2..=8 {
            let a = single(1, 1, 0, 0, 2);
            assert_eq!(integrate_monomial(n, &a).unwrap(), rat(1, n as i64));
        }
    }

    #[test]
    fn fourth_moment_on_circle() {
        // average of cos^4 over the circle
        let a = single(1, 1, 0, 0, 4);
        assert_eq!(integrate_monomial(2, &a).unwrap(), rat(3, 8));
    }

    /// Closed-form oracle on O(2): both components parametrized by an angle,
    /// Wallis integrals for the trigonometric moments.
    fn o2_closed_form(a: &MonomialExponent) -> Rational {
        assert!(a.rows <= 2 && a.cols <= 2);
        let e = |i: usize, j: usize| {
            if i < a.rows && j < a.cols {
                a.get(i, j)
            } else {
                0
            }
        };
        // rotation: [[c, -s], [s, c]]   reflection: [[c, s], [s, -c]]
        let rot = trig_moment(e(0, 0) + e(1, 1), e(0, 1) + e(1, 0))
            * sign_pow(e(0, 1));
        let refl = trig_moment(e(0, 0) + e(1, 1), e(0, 1) + e(1, 0))
            * sign_pow(e(1, 1));
        (rot + refl) / rat_int(2)
    }

    fn sign_pow(e: u32) -> Rational {
        if e % 2 == 0 {
            rat_int(1)
        } else {
            rat_int(-1)
        }
    }

    /// (1/2π) ∫ cos^p sin^q dθ.
    fn trig_moment(p: u32, q: u32) -> Rational {
        if p % 2 == 1 || q % 2 == 1 {
            return rat_int(0);
        }
        // double factorial formula: (p-1)!!(q-1)!!/(p+q)!!
        let dfac = |mut k: i64| {
            let mut f = rat_int(1);
            while k > 1 {
                f *= Rational::from(k);
                k -= 2;
            }
            f
        };
        dfac(p as i64 - 1) * dfac(q as i64 - 1) / dfac((p + q) as i64)
    }

    #[test]
    fn matches_o2_closed_form() {
        for e00 in 0..4u32 {
            for e01 in 0..4u32 {
                for e10 in 0..3u32 {
                    for e11 in 0..3u32 {
                        let a = MonomialExponent::from_entries(
                            2,
                            2,
                            &[(0, 0, e00), (0, 1, e01), (1, 0, e10), (1, 1, e11)],
                        );
                        assert_eq!(
                            integrate_monomial(2, &a).unwrap(),
                            o2_closed_form(&a),
                            "mismatch at exponents {e00} {e01} {e10} {e11}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn row_normalization_sums_to_one() {
        for n in 2..=6 {
            let mut sum = rat_int(0);
            for j in 0..n {
                let a = single(1, n, 0, j, 2);
                sum += integrate_monomial(n, &a).unwrap();
            }
            assert_eq!(sum, rat_int(1));
        }
    }

    #[test]
    fn permutation_and_transpose_invariance() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let mut a = MonomialExponent::zeros(3, 3);
            for _ in 0..4 {
                let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
                a.set(i, j, a.get(i, j) + rng.gen_range(0..3) * 2);
            }
            let n = 5;
            let v = integrate_monomial(n, &a).unwrap();
            // swap rows 0,1
            let mut p = MonomialExponent::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    p.set(if i == 0 { 1 } else if i == 1 { 0 } else { i }, j, a.get(i, j));
                }
            }
            assert_eq!(integrate_monomial(n, &p).unwrap(), v);
            assert_eq!(integrate_monomial(n, &a.transpose()).unwrap(), v);
        }
    }

    #[test]
    fn degree_cap_and_dimension_errors() {
        let a = single(1, 1, 0, 0, 40);
        assert!(matches!(
            integrate_monomial(4, &a),
            Err(HaarError::DegreeCapExceeded { .. })
        ));
        let a = single(3, 3, 2, 2, 2);
        assert!(matches!(
            integrate_monomial(2, &a),
            Err(HaarError::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn mc_agrees_on_simple_cases() {
        let a = MonomialExponent::zeros(2, 2);
        let (mean, err) = mc_estimate(4, &a, 1000, 1);
        assert_eq!((mean, err), (1.0, 0.0));

        let a = single(2, 2, 0, 0, 1);
        let (mean, err) = mc_estimate(4, &a, 10_000, 2);
        assert!(mean.abs() <= 5.0 * err.max(1e-12));

        let a = single(2, 2, 0, 0, 2);
        let (mean, err) = mc_estimate(4, &a, 20_000, 3);
        assert!((mean - 0.25).abs() <= 5.0 * err);
    }

    #[test]
    fn mc_agrees_on_coupled_monomial() {
        // ∫ γ11 γ12 γ21 γ22 over O(3)
        let a = MonomialExponent::from_entries(
            2,
            2,
            &[(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)],
        );
        let exact = integrate_monomial(3, &a).unwrap().to_f64();
        let (mean, err) = mc_estimate(3, &a, 200_000, 4);
        assert!(
            (mean - exact).abs() <= 5.0 * err,
            "exact {exact}, mc {mean} +/- {err}"
        );
    }
}
