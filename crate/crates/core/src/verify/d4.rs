//! The 24 roots of D4, normalized to unit length, represented exactly by
//! integer coordinates of squared length two with a global Gram factor 1/2.

use crate::{rat, Rational};

use super::VerifyError;

/// All vectors with two entries ±1 and two entries 0: the D4 roots scaled
/// by √2.
pub fn d4_roots() -> Vec<[i64; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in (a + 1)..4 {
            for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let mut v = [0i64; 4];
                v[a] = sa;
                v[b] = sb;
                out.push(v);
            }
        }
    }
    out
}

/// Inner product of the unit-normalized roots: integer dot over two.
pub fn d4_gram(u: &[i64; 4], v: &[i64; 4]) -> Rational {
    let dot: i64 = (0..4).map(|i| u[i] * v[i]).sum();
    rat(dot, 2)
}

#[derive(Clone, Debug)]
pub struct D4Report {
    pub count: usize,
    pub gram_values: Vec<Rational>,
    pub max_off_diagonal: Rational,
    pub min_angle_is_pi_over_three: bool,
}

/// Check the configuration facts: 24 unit vectors with pairwise inner
/// products in {0, ±1/2, −1} and maximal inner product cosθ.
pub fn d4_check(cos_theta: &Rational) -> Result<D4Report, VerifyError> {
    let roots = d4_roots();
    let count = roots.len();
    if count != 24 {
        return Err(VerifyError::Shape(format!("expected 24 roots, got {count}")));
    }
    let mut gram_values: Vec<Rational> = Vec::new();
    let mut max_off = rat(-2, 1);
    for (i, u) in roots.iter().enumerate() {
        if d4_gram(u, u) != 1 {
            return Err(VerifyError::Shape("root not unit length".into()));
        }
        for v in roots.iter().skip(i + 1) {
            let g = d4_gram(u, v);
            if g > max_off {
                max_off = g.clone();
            }
            if !gram_values.contains(&g) {
                gram_values.push(g);
            }
        }
    }
    gram_values.sort();
    let expected: Vec<Rational> = vec![rat(-1, 1), rat(-1, 2), rat(0, 1), rat(1, 2)];
    if gram_values != expected {
        return Err(VerifyError::Shape(format!(
            "inner product set {gram_values:?} differs from {{0, ±1/2, −1}}"
        )));
    }
    if max_off > *cos_theta {
        return Err(VerifyError::NotIndependent(format!(
            "maximal inner product {max_off} exceeds cos theta = {cos_theta}"
        )));
    }
    Ok(D4Report {
        count,
        gram_values,
        min_angle_is_pi_over_three: max_off == rat(1, 2),
        max_off_diagonal: max_off,
    })
}
