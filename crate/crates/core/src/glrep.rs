//! Irreducible polynomial representations of GL(2): matrix coefficients in
//! the weight basis, weight counts, and the differential at the rotation
//! generator of so(2).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::poly::{varset, Poly};
use crate::{Integer, MultiPoly, RatMatrix, Rational};

/// Signature (λ₁, λ₂) with λ₁ ≥ λ₂ ≥ 0 indexing an irreducible polynomial
/// representation of GL(2). The basis index k runs over 0..=m with
/// m = λ₁ − λ₂.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub l1: u32,
    pub l2: u32,
}

impl Signature {
    pub fn new(l1: u32, l2: u32) -> Self {
        assert!(l1 >= l2, "signature must be nonincreasing");
        Signature { l1, l2 }
    }

    /// m = λ₁ − λ₂, the top symmetric-power degree; basis has m + 1 vectors.
    pub fn m(&self) -> u32 {
        self.l1 - self.l2
    }

    /// |λ| = λ₁ + λ₂, the polynomial degree of the representation.
    pub fn degree(&self) -> u32 {
        self.l1 + self.l2
    }

    /// All signatures with |λ| ≤ d, ordered by (|λ|, λ₂).
    pub fn all_up_to(d: u32) -> Vec<Signature> {
        let mut v = Vec::new();
        for total in 0..=d {
            for l2 in 0..=(total / 2) {
                v.push(Signature::new(total - l2, l2));
            }
        }
        v
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.l1, self.l2)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GlrepError {
    #[error("basis index {k} out of range for m = {m}")]
    IndexOutOfRange { k: u32, m: u32 },
}

/// Number of times e_j appears in the basis tensor w_k:
/// c₁(k) = λ₂ + m − k, c₂(k) = λ₂ + k.
pub fn weight_c(lam: Signature, k: u32, j: u8) -> Result<u32, GlrepError> {
    if k > lam.m() {
        return Err(GlrepError::IndexOutOfRange { k, m: lam.m() });
    }
    Ok(match j {
        1 => lam.l2 + lam.m() - k,
        2 => lam.l2 + k,
        _ => panic!("j must be 1 or 2"),
    })
}

/// Names of the 2x2 matrix-entry variables used by `rho_coeff`.
pub fn a_vars() -> Arc<Vec<String>> {
    static V: OnceLock<Arc<Vec<String>>> = OnceLock::new();
    V.get_or_init(|| varset(&["A11", "A12", "A21", "A22"])).clone()
}

fn binom(n: i64, k: i64) -> Integer {
    if k < 0 || k > n || n < 0 {
        return Integer::from(0);
    }
    Integer::from(n).binomial(k as u32)
}

/// Matrix coefficient ρ(A)_{k₁,k₂} = ⟨w_{k₁}, ρ(A) w_{k₂}⟩ as an exact
/// polynomial in the entries of A, including the det(A)^{λ₂} prefactor.
/// Homogeneous of degree |λ|. Results are cached per (λ, k₁, k₂).
pub fn rho_coeff(lam: Signature, k1: u32, k2: u32) -> Result<MultiPoly, GlrepError> {
    let m = lam.m();
    if k1 > m {
        return Err(GlrepError::IndexOutOfRange { k: k1, m });
    }
    if k2 > m {
        return Err(GlrepError::IndexOutOfRange { k: k2, m });
    }

    static CACHE: OnceLock<Mutex<HashMap<(Signature, u32, u32), MultiPoly>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&(lam, k1, k2)) {
        return Ok(p.clone());
    }

    let vars = a_vars();
    let mut sum = Poly::zero(vars.clone());
    let (mi, k1i, k2i) = (m as i64, k1 as i64, k2 as i64);
    for l in 0..=(mi - k1i).max(0) {
        let c = binom(mi - k2i, l) * binom(k2i, mi - k1i - l);
        if c == 0 {
            continue;
        }
        let e11 = l;
        let e21 = mi - k2i - l;
        let e12 = mi - k1i - l;
        let e22 = k2i - (mi - k1i - l);
        if e11 < 0 || e21 < 0 || e12 < 0 || e22 < 0 {
            continue;
        }
        sum.add_term(
            vec![e11 as u16, e12 as u16, e21 as u16, e22 as u16],
            Rational::from(c),
        );
    }

    let result = if lam.l2 > 0 {
        let a11 = Poly::var(vars.clone(), "A11");
        let a12 = Poly::var(vars.clone(), "A12");
        let a21 = Poly::var(vars.clone(), "A21");
        let a22 = Poly::var(vars.clone(), "A22");
        let det = a11.mul(&a22).sub(&a12.mul(&a21));
        det.pow(lam.l2).mul(&sum)
    } else {
        sum
    };

    cache
        .lock()
        .unwrap()
        .insert((lam, k1, k2), result.clone());
    Ok(result)
}

/// The differential dρ(X) at the rotation generator X = [[0,1],[-1,0]]:
/// dρ(X)_{k₁,k₂} = −(m−k₂) δ_{k₁,k₂+1} + k₂ δ_{k₁,k₂−1}.
pub fn drho_x(lam: Signature) -> RatMatrix {
    let m = lam.m() as usize;
    let mut out = RatMatrix::zeros(m + 1, m + 1);
    for k2 in 0..=m {
        if k2 + 1 <= m {
            out[(k2 + 1, k2)] = Rational::from(-((m - k2) as i64));
        }
        if k2 >= 1 {
            out[(k2 - 1, k2)] = Rational::from(k2 as i64);
        }
    }
    out
}

/// Evaluate the full coefficient matrix of ρ(A) at a rational 2x2 matrix.
pub fn rho_eval(lam: Signature, a: &RatMatrix) -> RatMatrix {
    let m = lam.m() as usize;
    let point = vec![
        a[(0, 0)].clone(),
        a[(0, 1)].clone(),
        a[(1, 0)].clone(),
        a[(1, 1)].clone(),
    ];
    RatMatrix::from_fn(m + 1, m + 1, |k1, k2| {
        rho_coeff(lam, k1 as u32, k2 as u32).unwrap().eval(&point)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use crate::{rat, rat_int};
    use rand::prelude::*;

    fn sig(l1: u32, l2: u32) -> Signature {
        Signature::new(l1, l2)
    }

    #[test]
    fn tautological_representation() {
        // λ=(1,0): ρ(A) = A itself
        let p = rho_coeff(sig(1, 0), 0, 0).unwrap();
        assert_eq!(p, Poly::var(a_vars(), "A11"));
        let p = rho_coeff(sig(1, 0), 0, 1).unwrap();
        assert_eq!(p, Poly::var(a_vars(), "A12"));
        let p = rho_coeff(sig(1, 0), 1, 0).unwrap();
        assert_eq!(p, Poly::var(a_vars(), "A21"));
        let p = rho_coeff(sig(1, 0), 1, 1).unwrap();
        assert_eq!(p, Poly::var(a_vars(), "A22"));
    }

    #[test]
    fn determinant_representation() {
        let p = rho_coeff(sig(1, 1), 0, 0).unwrap();
        let v = a_vars();
        let det = Poly::var(v.clone(), "A11")
            .mul(&Poly::var(v.clone(), "A22"))
            .sub(&Poly::var(v.clone(), "A12").mul(&Poly::var(v.clone(), "A21")));
        assert_eq!(p, det);
    }

    #[test]
    fn symmetric_square_top_coefficient() {
        // oracle: the action of A on e1^2 is (A11 e1 + A21 e2)^2; the e1^2
        // coefficient is A11^2
        let p = rho_coeff(sig(2, 0), 0, 0).unwrap();
        assert_eq!(p, Poly::var(a_vars(), "A11").pow(2));
    }

    #[test]
    fn homogeneous_of_degree_lambda() {
        for lam in Signature::all_up_to(4) {
            for k1 in 0..=lam.m() {
                for k2 in 0..=lam.m() {
                    let p = rho_coeff(lam, k1, k2).unwrap();
                    for (e, _) in p.terms() {
                        let deg: u32 = e.iter().map(|&x| x as u32).sum();
                        assert_eq!(deg, lam.degree());
                    }
                }
            }
        }
    }

    #[test]
    fn column_row_weight_counts() {
        // every monomial has c1(k2) column-1 variables and c2(k2) column-2
        // variables; rows analogously for k1
        for lam in Signature::all_up_to(4) {
            for k1 in 0..=lam.m() {
                for k2 in 0..=lam.m() {
                    let p = rho_coeff(lam, k1, k2).unwrap();
                    for (e, _) in p.terms() {
                        // vars: A11 A12 A21 A22
                        let col1 = (e[0] + e[2]) as u32;
                        let col2 = (e[1] + e[3]) as u32;
                        let row1 = (e[0] + e[1]) as u32;
                        let row2 = (e[2] + e[3]) as u32;
                        assert_eq!(col1, weight_c(lam, k2, 1).unwrap());
                        assert_eq!(col2, weight_c(lam, k2, 2).unwrap());
                        assert_eq!(row1, weight_c(lam, k1, 1).unwrap());
                        assert_eq!(row2, weight_c(lam, k1, 2).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight_c(sig(3, 1), 0, 1).unwrap(), 3);
        assert_eq!(weight_c(sig(3, 1), 2, 2).unwrap(), 3);
        assert_eq!(weight_c(sig(0, 0), 0, 1).unwrap(), 0);
        assert!(weight_c(sig(1, 0), 5, 1).is_err());
    }

    #[test]
    fn homomorphism_at_random_matrices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for lam in Signature::all_up_to(4) {
            for _ in 0..3 {
                let a = RatMatrix::from_fn(2, 2, |_, _| {
                    rat(rng.gen_range(-5..=5), rng.gen_range(1..=3))
                });
                let b = RatMatrix::from_fn(2, 2, |_, _| {
                    rat(rng.gen_range(-5..=5), rng.gen_range(1..=3))
                });
                let ab = a.matmul(&b);
                let lhs = rho_eval(lam, &ab);
                let rhs = rho_eval(lam, &a).matmul(&rho_eval(lam, &b));
                assert_eq!(lhs, rhs, "rho(AB) != rho(A)rho(B) for {lam}");
            }
        }
    }

    #[test]
    fn diagonal_action() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for lam in Signature::all_up_to(4) {
            let d1 = rat(rng.gen_range(1..=7), rng.gen_range(1..=3));
            let d2 = rat(rng.gen_range(1..=7), rng.gen_range(1..=3));
            let mut d = RatMatrix::zeros(2, 2);
            d[(0, 0)] = d1.clone();
            d[(1, 1)] = d2.clone();
            let rho = rho_eval(lam, &d);
            for k1 in 0..=lam.m() as usize {
                for k2 in 0..=lam.m() as usize {
                    if k1 != k2 {
                        assert!(rho[(k1, k2)] == 0);
                    } else {
                        let c1 = weight_c(lam, k1 as u32, 1).unwrap();
                        let c2 = weight_c(lam, k1 as u32, 2).unwrap();
                        let mut expect = rat_int(1);
                        for _ in 0..c1 {
                            expect *= &d1;
                        }
                        for _ in 0..c2 {
                            expect *= &d2;
                        }
                        assert_eq!(rho[(k1, k2)], expect);
                    }
                }
            }
        }
    }

    #[test]
    fn drho_examples() {
        assert_eq!(drho_x(sig(0, 0)), RatMatrix::zeros(1, 1));
        let x = RatMatrix::from_i64_rows(vec![vec![0, 1], vec![-1, 0]]);
        assert_eq!(drho_x(sig(1, 0)), x);
        let d = drho_x(sig(2, 0));
        let mut expect = RatMatrix::zeros(3, 3);
        expect[(1, 0)] = rat_int(-2);
        expect[(0, 1)] = rat_int(1);
        expect[(2, 1)] = rat_int(-1);
        expect[(1, 2)] = rat_int(2);
        assert_eq!(d, expect);
    }

    #[test]
    fn differential_is_derivative_of_rho_exp() {
        // finite-difference check of d/dt rho(exp(tX)) at t = 0
        for lam in Signature::all_up_to(4) {
            let m = lam.m() as usize;
            let t = 1e-6_f64;
            let (c, s) = (t.cos(), t.sin());
            // exp(tX) = [[cos t, sin t], [-sin t, cos t]]
            let point = vec![c, s, -s, c];
            let d = drho_x(lam);
            for k1 in 0..=m {
                for k2 in 0..=m {
                    let p = rho_coeff(lam, k1 as u32, k2 as u32).unwrap();
                    let val: f64 = p
                        .terms()
                        .map(|(e, q)| {
                            let mut t = q.to_f64();
                            for (i, &pw) in e.iter().enumerate() {
                                t *= point[i].powi(pw as i32);
                            }
                            t
                        })
                        .sum();
                    let at_id = if k1 == k2 { 1.0 } else { 0.0 };
                    let fd = (val - at_id) / t;
                    assert!(
                        (fd - d[(k1, k2)].to_f64()).abs() < 1e-4,
                        "finite difference mismatch at {lam} ({k1},{k2})"
                    );
                }
            }
        }
    }
}
