//! Dense symmetric linear algebra over any ordered field scalar.

use crate::mat::Mat;
use crate::scalar::Real;

/// Lower-triangular Cholesky factor, or None if a pivot is not strictly
/// positive.
pub fn cholesky<R: Real>(a: &Mat<R>, prec: u32) -> Option<Mat<R>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut l = Mat::<R>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)].clone();
            for k in 0..j {
                let mut t = l[(i, k)].clone();
                t *= &l[(j, k)];
                sum -= &t;
            }
            if i == j {
                if !(sum > R::zero_prec(prec)) {
                    return None;
                }
                l[(i, j)] = sum.sqrt();
            } else {
                let mut v = sum;
                v /= &l[(j, j)];
                l[(i, j)] = v;
            }
        }
    }
    Some(l)
}

/// Solve L W = B for W with L lower triangular (forward substitution,
/// matrix right-hand side).
pub fn solve_lower<R: Real>(l: &Mat<R>, b: &Mat<R>) -> Mat<R> {
    let n = l.nrows();
    let m = b.ncols();
    let mut w = b.clone();
    for c in 0..m {
        for i in 0..n {
            let mut sum = w[(i, c)].clone();
            for k in 0..i {
                let mut t = l[(i, k)].clone();
                t *= &w[(k, c)];
                sum -= &t;
            }
            let mut v = sum;
            v /= &l[(i, i)];
            w[(i, c)] = v;
        }
    }
    w
}

/// Solve Lᵀ W = B for W with L lower triangular (back substitution).
pub fn solve_lower_transpose<R: Real>(l: &Mat<R>, b: &Mat<R>) -> Mat<R> {
    let n = l.nrows();
    let m = b.ncols();
    let mut w = b.clone();
    for c in 0..m {
        for i in (0..n).rev() {
            let mut sum = w[(i, c)].clone();
            for k in (i + 1)..n {
                let mut t = l[(k, i)].clone();
                t *= &w[(k, c)];
                sum -= &t;
            }
            let mut v = sum;
            v /= &l[(i, i)];
            w[(i, c)] = v;
        }
    }
    w
}

/// Solve (L Lᵀ) W = B.
pub fn chol_solve<R: Real>(l: &Mat<R>, b: &Mat<R>) -> Mat<R> {
    solve_lower_transpose(l, &solve_lower(l, b))
}

/// Inverse from a Cholesky factor.
pub fn inverse_from_chol<R: Real>(l: &Mat<R>) -> Mat<R> {
    let n = l.nrows();
    chol_solve(l, &Mat::<R>::identity(n))
}

pub fn symmetrize<R: Real>(a: &Mat<R>) -> Mat<R> {
    let n = a.nrows();
    let half = {
        let mut h = R::one_prec(53);
        let two = R::from_i64(2);
        h /= &two;
        h
    };
    Mat::from_fn(n, n, |i, j| {
        let mut v = a[(i, j)].clone();
        v += &a[(j, i)];
        v *= &half;
        v
    })
}

/// tr(A B) for square matrices.
pub fn trace_product<R: Real>(a: &Mat<R>, b: &Mat<R>, prec: u32) -> R {
    let n = a.nrows();
    let mut acc = R::zero_prec(prec);
    for i in 0..n {
        for k in 0..n {
            let mut t = a[(i, k)].clone();
            t *= &b[(k, i)];
            acc += &t;
        }
    }
    acc
}

pub fn max_abs<R: Real>(a: &Mat<R>) -> f64 {
    let mut best = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            best = best.max(a[(i, j)].to_f64().abs());
        }
    }
    best
}

/// Eigenvalues of a symmetric f64 matrix by the cyclic Jacobi method.
pub fn jacobi_eigenvalues(a: &Mat<f64>, sweeps: usize) -> Vec<f64> {
    let n = a.nrows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
    for _ in 0..sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p][q] * m[p][q];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigfloat::MpFloat;

    #[test]
    fn cholesky_and_solve_f64() {
        let a = Mat::from_rows(vec![
            vec![4.0, 12.0, -16.0],
            vec![12.0, 37.0, -43.0],
            vec![-16.0, -43.0, 98.0],
        ]);
        let l = cholesky(&a, 53).unwrap();
        assert!((l[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((l[(1, 0)] - 6.0).abs() < 1e-12);
        assert!((l[(2, 0)] + 8.0).abs() < 1e-12);
        assert!((l[(2, 1)] - 5.0).abs() < 1e-12);
        assert!((l[(2, 2)] - 3.0).abs() < 1e-12);
        let inv = inverse_from_chol(&l);
        let prod = a.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - expect).abs() < 1e-10);
            }
        }
        let not_pd = Mat::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(cholesky(&not_pd, 53).is_none());
    }

    #[test]
    fn cholesky_mpfloat_high_precision() {
        // Hilbert 6x6 is positive definite but badly conditioned
        let a = Mat::from_fn(6, 6, |i, j| {
            MpFloat::from_rational(&crate::rat(1, (i + j + 1) as i64), 256)
        });
        let l = cholesky(&a, 256).unwrap();
        let li = inverse_from_chol(&l);
        let t = trace_product(&a, &li.matmul(&li.transpose()), 256);
        // tr(A (LLᵀ)⁻¹ ... sanity: A A⁻¹ has trace 6
        let inv = chol_solve(&l, &Mat::<MpFloat>::identity(6));
        let prod = a.matmul(&inv);
        let mut tr = MpFloat::zero_prec(256);
        for i in 0..6 {
            tr += &prod[(i, i)];
        }
        assert!((tr.to_f64() - 6.0).abs() < 1e-30);
        drop(t);
    }

    #[test]
    fn jacobi_eigenvalues_known() {
        let a = Mat::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = jacobi_eigenvalues(&a, 20);
        assert!((e[0] - 1.0).abs() < 1e-10);
        assert!((e[1] - 3.0).abs() < 1e-10);
    }
}
