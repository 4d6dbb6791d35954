//! Sparse multivariate polynomials over a generic scalar ring.
//!
//! Exponent tuples are stored dense in the declared variable order; the
//! variable lists are small (at most 16 matrix entries or 6 inner products)
//! so dense tuples beat per-variable maps. Terms live in a `BTreeMap` keyed
//! by exponent tuple, which keeps iteration and serialization deterministic.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::scalar::Scalar;

pub type Exp = Vec<u16>;

#[derive(Clone, Debug)]
pub struct Poly<C> {
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Exp, C>,
}

impl<C: Scalar> PartialEq for Poly<C> {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars {
            return self.terms == other.terms;
        }
        let (a, b) = unify(self, other);
        a.terms == b.terms
    }
}

pub fn varset(names: &[&str]) -> Arc<Vec<String>> {
    Arc::new(names.iter().map(|s| s.to_string()).collect())
}

impl<C: Scalar> Poly<C> {
    pub fn zero(vars: Arc<Vec<String>>) -> Self {
        Poly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn zero_named(names: &[&str]) -> Self {
        Self::zero(varset(names))
    }

    pub fn constant(vars: Arc<Vec<String>>, c: C) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; p.vars.len()], c);
        }
        p
    }

    pub fn constant_named(names: &[&str], c: C) -> Self {
        Self::constant(varset(names), c)
    }

    /// The variable `name` as a polynomial; `name` must be declared.
    pub fn var(vars: Arc<Vec<String>>, name: &str) -> Self {
        let idx = vars
            .iter()
            .position(|v| v == name)
            .unwrap_or_else(|| panic!("undeclared variable {name}"));
        Self::var_idx(vars, idx)
    }

    pub fn var_idx(vars: Arc<Vec<String>>, idx: usize) -> Self {
        let mut p = Self::zero(vars);
        let mut e = vec![0; p.vars.len()];
        e[idx] = 1;
        p.terms.insert(e, C::one());
        p
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: &[u16]) -> C {
        self.terms.get(exp).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&vec![0; self.vars.len()])
    }

    pub fn add_term(&mut self, exp: Exp, c: C) {
        assert_eq!(exp.len(), self.vars.len(), "exponent arity mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u32).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, idx: usize) -> u16 {
        self.terms.keys().map(|e| e[idx]).max().unwrap_or(0)
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c = -c.clone();
        }
        r
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut r = Self::zero(self.vars.clone());
        if s.is_zero() {
            return r;
        }
        for (e, c) in &self.terms {
            let mut v = c.clone();
            v *= s;
            if !v.is_zero() {
                r.terms.insert(e.clone(), v);
            }
        }
        r
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b) = unify(self, other);
        for (e, c) in b.terms {
            a.add_term(e, c);
        }
        a
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = unify(self, other);
        let mut r = Self::zero(a.vars.clone());
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Exp = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                let mut c = ca.clone();
                c *= cb;
                r.add_term(e, c);
            }
        }
        r
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = Self::constant(self.vars.clone(), C::one());
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    /// Substitute `q` for every occurrence of the variable `var`.
    pub fn substitute(&self, var: &str, q: &Self) -> Self {
        self.substitute_power(var, 1, q)
    }

    /// Substitute `q` for `var^power`: each monomial `var^e · m` becomes
    /// `q^(e / power) · var^(e mod power) · m`.
    pub fn substitute_power(&self, var: &str, power: u16, q: &Self) -> Self {
        assert!(power >= 1);
        let idx = self
            .vars
            .iter()
            .position(|v| v == var)
            .unwrap_or_else(|| panic!("undeclared variable {var}"));
        let q = q.with_vars_of(self);
        let mut r = Self::zero(self.vars.clone());
        let mut qpow_cache: Vec<Self> = vec![Self::constant(self.vars.clone(), C::one())];
        for (e, c) in &self.terms {
            let full = e[idx] / power;
            let rem = e[idx] % power;
            while qpow_cache.len() <= full as usize {
                let next = qpow_cache.last().unwrap().mul(&q);
                qpow_cache.push(next);
            }
            let mut base = e.clone();
            base[idx] = rem;
            for (eq, cq) in &qpow_cache[full as usize].terms {
                let comb: Exp = base.iter().zip(eq.iter()).map(|(x, y)| x + y).collect();
                let mut v = c.clone();
                v *= cq;
                r.add_term(comb, v);
            }
        }
        r
    }

    /// Exact evaluation; `point` assigns every declared variable in order.
    pub fn eval(&self, point: &[C]) -> C {
        assert_eq!(point.len(), self.vars.len(), "point arity mismatch");
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &p) in e.iter().enumerate() {
                for _ in 0..p {
                    t *= &point[i];
                }
            }
            acc += &t;
        }
        acc
    }

    pub fn map_coeffs<D: Scalar, F: Fn(&C) -> D>(&self, f: F) -> Poly<D> {
        let mut r = Poly::zero(self.vars.clone());
        for (e, c) in &self.terms {
            r.add_term(e.clone(), f(c));
        }
        r
    }

    /// Rename variables via a map from old index to new name set index.
    pub fn remap(&self, new_vars: Arc<Vec<String>>) -> Self {
        let mapping: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                new_vars
                    .iter()
                    .position(|w| w == v)
                    .unwrap_or_else(|| panic!("variable {v} missing from target set"))
            })
            .collect();
        let mut r = Poly::zero(new_vars.clone());
        for (e, c) in &self.terms {
            let mut ne = vec![0u16; new_vars.len()];
            for (i, &p) in e.iter().enumerate() {
                ne[mapping[i]] += p;
            }
            r.add_term(ne, c.clone());
        }
        r
    }

    fn with_vars_of(&self, other: &Self) -> Self {
        if Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars {
            let mut r = self.clone();
            r.vars = other.vars.clone();
            return r;
        }
        for v in self.vars.iter() {
            assert!(
                other.vars.contains(v),
                "variable {v} missing from target set"
            );
        }
        self.remap(other.vars.clone())
    }
}

/// Bring two polynomials onto a shared variable list (union, left order first).
fn unify<C: Scalar>(a: &Poly<C>, b: &Poly<C>) -> (Poly<C>, Poly<C>) {
    if Arc::ptr_eq(&a.vars, &b.vars) || a.vars == b.vars {
        return (a.clone(), b.clone());
    }
    let mut names: Vec<String> = a.vars.as_ref().clone();
    for v in b.vars.iter() {
        if !names.contains(v) {
            names.push(v.clone());
        }
    }
    let vars = Arc::new(names);
    (a.remap(vars.clone()), b.remap(vars))
}

impl<C: Scalar + fmt::Display> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &p) in e.iter().enumerate() {
                if p > 0 {
                    write!(f, "*{}^{}", self.vars[i], p)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, rat_int, Rational};

    fn uv() -> Arc<Vec<String>> {
        varset(&["u"])
    }

    #[test]
    fn difference_of_squares() {
        let u = Poly::<Rational>::var(uv(), "u");
        let one = Poly::constant(uv(), rat_int(1));
        let prod = u.add(&one).mul(&u.sub(&one));
        let expect = u.mul(&u).sub(&one);
        assert_eq!(prod, expect);
    }

    #[test]
    fn additive_identity() {
        let u = Poly::<Rational>::var(uv(), "u");
        let p = u.mul(&u).add(&Poly::constant(uv(), rat(7, 3)));
        assert_eq!(p.add(&Poly::zero(uv())), p);
    }

    #[test]
    fn binomial_square() {
        let vars = varset(&["u1", "u2"]);
        let u1 = Poly::<Rational>::var(vars.clone(), "u1");
        let u2 = Poly::<Rational>::var(vars.clone(), "u2");
        let sq = u1.add(&u2).pow(2);
        let mut expect = u1.mul(&u1);
        expect = expect.add(&u1.mul(&u2).scale(&rat_int(2)));
        expect = expect.add(&u2.mul(&u2));
        assert_eq!(sq, expect);
    }

    #[test]
    fn substitution_full() {
        let vars = varset(&["u", "v"]);
        let u = Poly::<Rational>::var(vars.clone(), "u");
        let v = Poly::<Rational>::var(vars.clone(), "v");
        let one = Poly::constant(vars.clone(), rat_int(1));
        // substitute(u^2, u, v+1) = v^2 + 2v + 1
        let p = u.pow(2).substitute("u", &v.add(&one));
        let expect = v.pow(2).add(&v.scale(&rat_int(2))).add(&one);
        assert_eq!(p, expect);
        // substitute(u*w, u, 0) = 0 with w in another namespace
        let w = Poly::<Rational>::var_idx(varset(&["w"]), 0);
        let q = u.mul(&w).substitute("u", &Poly::zero(vars.clone()));
        assert!(q.is_zero());
    }

    #[test]
    fn substitution_power_mode() {
        let vars = varset(&["u", "w"]);
        let u = Poly::<Rational>::var(vars.clone(), "u");
        let w = Poly::<Rational>::var(vars.clone(), "w");
        let one = Poly::constant(vars.clone(), rat_int(1));
        // u^3 with u^2 := 1 - w  gives  u * (1 - w)
        let p = u.pow(3).substitute_power("u", 2, &one.sub(&w));
        let expect = u.mul(&one.sub(&w));
        assert_eq!(p, expect);
    }

    #[test]
    fn eval_examples() {
        let u = Poly::<Rational>::var(uv(), "u");
        let one = Poly::constant(uv(), rat_int(1));
        let p = u.pow(2).sub(&one);
        assert_eq!(p.eval(&[rat(1, 2)]), rat(-3, 4));
        let c = Poly::constant(uv(), rat_int(7));
        assert_eq!(c.eval(&[rat(123, 7)]), rat_int(7));
        let vars = varset(&["u1", "u2"]);
        let p2 = Poly::<Rational>::var(vars.clone(), "u1")
            .mul(&Poly::var(vars.clone(), "u2"));
        assert_eq!(p2.eval(&[rat(1, 2), rat_int(-1)]), rat(-1, 2));
    }

    #[test]
    fn eval_is_multiplicative_at_random_points() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let vars = varset(&["x", "y", "z"]);
        for _ in 0..100 {
            let mut p = Poly::zero(vars.clone());
            let mut q = Poly::zero(vars.clone());
            for _ in 0..5 {
                let e: Exp = (0..3).map(|_| rng.gen_range(0..4u16)).collect();
                p.add_term(e, rat(rng.gen_range(-9..=9), rng.gen_range(1..=9)));
                let e: Exp = (0..3).map(|_| rng.gen_range(0..4u16)).collect();
                q.add_term(e, rat(rng.gen_range(-9..=9), rng.gen_range(1..=9)));
            }
            let pt: Vec<Rational> = (0..3)
                .map(|_| rat(rng.gen_range(-9..=9), rng.gen_range(1..=9)))
                .collect();
            let lhs = p.mul(&q).eval(&pt);
            let mut rhs = p.eval(&pt);
            rhs *= &q.eval(&pt);
            assert_eq!(lhs, rhs);
        }
    }
}
