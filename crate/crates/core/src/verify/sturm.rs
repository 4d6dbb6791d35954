//! Sturm sequences over the rationals: exact counts of distinct real roots
//! in an interval, with content removal at every step to control
//! coefficient growth.

use crate::{rat_int, Rational};

use super::VerifyError;

/// Dense univariate polynomial, coefficients from the constant term up,
/// with no trailing zero coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().map(|c| *c == 0).unwrap_or(false) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat_int(c)).collect())
    }

    /// Build from linear factors (u − r) times a leading coefficient.
    pub fn from_roots(lead: Rational, roots: &[Rational]) -> Self {
        let mut p = UniPoly::new(vec![lead]);
        for r in roots {
            let mut neg = r.clone();
            neg = -neg;
            p = p.mul(&UniPoly::new(vec![neg, rat_int(1)]));
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = rat_int(0);
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        UniPoly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let mut v = c.clone();
                    v *= Rational::from((i + 1) as i64);
                    v
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![rat_int(0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let mut t = a.clone();
                t *= b;
                out[i + j] += t;
            }
        }
        UniPoly::new(out)
    }

    /// Remainder of self divided by other (exact over the rationals).
    pub fn rem(&self, other: &UniPoly) -> UniPoly {
        assert!(!other.is_zero(), "division by zero polynomial");
        let mut r = self.coeffs.clone();
        let d = other.degree();
        let lead = other.coeffs.last().unwrap();
        while r.len() > d {
            let k = r.len() - 1;
            let mut f = r[k].clone();
            f /= lead;
            if f != 0 {
                for (i, c) in other.coeffs.iter().enumerate() {
                    let mut t = f.clone();
                    t *= c;
                    r[k - d + i] -= t;
                }
            }
            r.pop();
        }
        UniPoly::new(r)
    }

    /// Divide by the positive content (gcd of coefficient absolute values),
    /// preserving all signs.
    pub fn primitive(&self) -> UniPoly {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let mut num_gcd = crate::Integer::from(0);
        let mut den_lcm = crate::Integer::from(1);
        for c in &self.coeffs {
            num_gcd.gcd_mut(c.numer());
            den_lcm.lcm_mut(c.denom());
        }
        if num_gcd == 0 {
            return self.clone();
        }
        let scale = Rational::from((den_lcm, num_gcd));
        UniPoly::new(
            self.coeffs
                .iter()
                .map(|c| {
                    let mut v = c.clone();
                    v *= &scale;
                    v
                })
                .collect(),
        )
    }
}

/// Canonical Sturm chain: p, p', then negated remainders with content
/// removed at each step.
pub fn sturm_chain(p: &UniPoly) -> Vec<UniPoly> {
    let mut chain = vec![p.primitive()];
    let d = p.derivative();
    if d.is_zero() {
        return chain;
    }
    chain.push(d.primitive());
    loop {
        let k = chain.len();
        let r = chain[k - 2].rem(&chain[k - 1]);
        if r.is_zero() {
            break;
        }
        let mut neg = r.primitive();
        for c in neg.coeffs.iter_mut() {
            *c = -c.clone();
        }
        chain.push(neg);
    }
    chain
}

fn sign_variations(chain: &[UniPoly], x: &Rational) -> usize {
    let mut last: Option<bool> = None;
    let mut v = 0;
    for p in chain {
        let val = p.eval(x);
        if val == 0 {
            continue;
        }
        let pos = val > 0;
        if let Some(l) = last {
            if l != pos {
                v += 1;
            }
        }
        last = Some(pos);
    }
    v
}

/// Distinct real roots in the half-open interval (a, b].
pub fn count_roots_half_open(p: &UniPoly, a: &Rational, b: &Rational) -> usize {
    assert!(a < b, "empty interval");
    let chain = sturm_chain(p);
    sign_variations(&chain, a) - sign_variations(&chain, b)
}

/// Distinct real roots in the closed interval [a, b].
pub fn count_roots_closed(p: &UniPoly, a: &Rational, b: &Rational) -> usize {
    count_roots_half_open(p, a, b) + usize::from(p.eval(a) == 0)
}

#[derive(Clone, Debug)]
pub struct SturmReport {
    pub a: Rational,
    pub b: Rational,
    /// Distinct roots in (a, b].
    pub distinct_roots: usize,
    /// Rational roots found in (a, b], each verified by exact evaluation.
    pub rational_roots: Vec<Rational>,
    /// When a candidate set was supplied: true iff the candidates are
    /// exactly the roots in the interval.
    pub candidates_complete: Option<bool>,
}

/// Exact root analysis on (a, b]: the Sturm count, rational-root witnesses
/// from the rational root theorem, and an optional completeness check of a
/// supplied candidate set.
pub fn sturm_analyze(
    p: &UniPoly,
    a: &Rational,
    b: &Rational,
    candidates: Option<&[Rational]>,
) -> Result<SturmReport, VerifyError> {
    if p.is_zero() {
        return Err(VerifyError::ZeroPolynomial);
    }
    let distinct = count_roots_half_open(p, a, b);
    let mut rational_roots: Vec<Rational> = rational_roots(p)
        .into_iter()
        .filter(|r| r > a && r <= b)
        .collect();
    rational_roots.sort();
    let candidates_complete = candidates.map(|cand| {
        let mut c: Vec<Rational> = cand.to_vec();
        c.sort();
        c.dedup();
        let in_range = c.iter().all(|r| r > a && r <= b);
        let all_roots = c.iter().all(|r| p.eval(r) == 0);
        in_range && all_roots && c.len() == distinct
    });
    Ok(SturmReport {
        a: a.clone(),
        b: b.clone(),
        distinct_roots: distinct,
        rational_roots,
        candidates_complete,
    })
}

/// All rational roots by the rational root theorem on the primitive integer
/// form, each verified by exact evaluation.
pub fn rational_roots(p: &UniPoly) -> Vec<Rational> {
    let prim = p.primitive();
    if prim.is_zero() || prim.degree() == 0 {
        return Vec::new();
    }
    let lead = prim.coeffs.last().unwrap().numer().clone();
    // strip powers of u dividing p: zero is a root then
    let mut roots = Vec::new();
    let mut low = 0;
    while prim.coeffs[low] == 0 {
        low += 1;
    }
    if low > 0 {
        roots.push(rat_int(0));
    }
    let constant = prim.coeffs[low].numer().clone();
    let divisors = |n: &crate::Integer| -> Vec<crate::Integer> {
        let n = n.clone().abs();
        let mut out = Vec::new();
        let mut d = crate::Integer::from(1);
        while crate::Integer::from(&d * &d) <= n {
            if n.is_divisible(&d) {
                out.push(d.clone());
                out.push(crate::Integer::from(&n / &d));
            }
            d += 1;
        }
        out
    };
    for pnum in divisors(&constant) {
        for qden in divisors(&lead) {
            for sign in [1i64, -1] {
                let cand = Rational::from((pnum.clone() * crate::Integer::from(sign), qden.clone()));
                if p.eval(&cand) == 0 && !roots.contains(&cand) {
                    roots.push(cand);
                }
            }
        }
    }
    roots.sort();
    roots
}
