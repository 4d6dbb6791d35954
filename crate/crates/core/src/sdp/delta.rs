//! Semialgebraic descriptions of the admissible inner-product regions:
//! edge constraints plus nonnegativity of the principal minors of the Gram
//! matrix, and their symmetrization under the point-permuting action.

use std::sync::Arc;

use crate::poly::Poly;
use crate::{rat_int, MultiPoly, Rational};

/// Variables u1..u_C(q,2) for the pairwise inner products of q points, in
/// lexicographic pair order (the order of the paper's Gram matrices).
pub fn u_vars(q: usize) -> Arc<Vec<String>> {
    let names: Vec<String> = (1..=q * (q - 1) / 2).map(|i| format!("u{i}")).collect();
    Arc::new(names)
}

/// Pairs (p, q) with p < q over 0..q, lexicographic; index e of a pair is
/// the Gram variable u_{e+1}.
pub fn pair_list(q: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..q {
        for b in (a + 1)..q {
            out.push((a, b));
        }
    }
    out
}

pub fn edge_index(q: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    pair_list(q)
        .iter()
        .position(|&(x, y)| (x, y) == (a, b))
        .expect("edge")
}

/// A generator orbit under the point-permuting symmetric group; the set is
/// the intersection of {g ≥ 0} over all orbits.
#[derive(Clone, Debug)]
pub struct SemialgebraicSet {
    pub i: u8,
    pub orbits: Vec<Vec<MultiPoly>>,
}

impl SemialgebraicSet {
    /// All generators flattened (the constant 1 is implicit and excluded).
    pub fn generators(&self) -> Vec<MultiPoly> {
        self.orbits.iter().flatten().cloned().collect()
    }
}

fn edge_poly(vars: Arc<Vec<String>>, idx: usize, cos_theta: &Rational) -> MultiPoly {
    let u = Poly::var_idx(vars.clone(), idx);
    let one = Poly::constant(vars.clone(), rat_int(1));
    let ct = Poly::constant(vars, cos_theta.clone());
    u.add(&one).mul(&ct.sub(&u))
}

/// The q×q Gram matrix with ones on the diagonal and the u-variables off it.
pub fn gram_matrix_poly(q: usize) -> Vec<Vec<MultiPoly>> {
    let vars = u_vars(q);
    let pairs = pair_list(q);
    (0..q)
        .map(|r| {
            (0..q)
                .map(|c| {
                    if r == c {
                        Poly::constant(vars.clone(), rat_int(1))
                    } else {
                        let e = pairs
                            .iter()
                            .position(|&(a, b)| (a, b) == (r.min(c), r.max(c)))
                            .unwrap();
                        Poly::var_idx(vars.clone(), e)
                    }
                })
                .collect()
        })
        .collect()
}

fn det_poly(m: &[Vec<MultiPoly>]) -> MultiPoly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc: Option<MultiPoly> = None;
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<MultiPoly>> = (1..n)
            .map(|r| {
                (0..n)
                    .filter(|&cc| cc != c)
                    .map(|cc| m[r][cc].clone())
                    .collect()
            })
            .collect();
        let mut term = m[0][c].mul(&det_poly(&minor));
        if c % 2 == 1 {
            term = term.neg();
        }
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    acc.unwrap_or_else(|| Poly::zero(m[0][0].vars().clone()))
}

fn principal_minor(gram: &[Vec<MultiPoly>], keep: &[usize]) -> MultiPoly {
    let sub: Vec<Vec<MultiPoly>> = keep
        .iter()
        .map(|&r| keep.iter().map(|&c| gram[r][c].clone()).collect())
        .collect();
    det_poly(&sub)
}

/// Generators of Δ_i: the edge constraints (u+1)(cosθ−u) and the
/// determinants of all principal Gram submatrices of size at least 3,
/// grouped into orbits of the point-permuting action.
pub fn delta_generators(i: u8, cos_theta: &Rational) -> SemialgebraicSet {
    assert!((2..=4).contains(&i), "delta sets are defined for i = 2, 3, 4");
    let q = i as usize;
    let vars = u_vars(q);
    let n_edges = q * (q - 1) / 2;
    let edges: Vec<MultiPoly> = (0..n_edges)
        .map(|e| edge_poly(vars.clone(), e, cos_theta))
        .collect();
    let mut orbits = vec![edges];
    if q >= 3 {
        let gram = gram_matrix_poly(q);
        for size in 3..=q {
            let mut minors = Vec::new();
            let subsets = k_subsets(q, size);
            for keep in subsets {
                minors.push(principal_minor(&gram, &keep));
            }
            orbits.push(minors);
        }
    }
    SemialgebraicSet { i, orbits }
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Replace an orbit {q₁,…,q_l} by its elementary symmetric products
/// Σ_{|B|=b} Π_{k∈B} q_k for b = 1..l; each output is invariant and the
/// described set is unchanged.
pub fn symmetrize_generators(orbit: &[MultiPoly]) -> Vec<MultiPoly> {
    let l = orbit.len();
    assert!(l >= 1);
    // e-polynomials by the Newton-free direct recurrence:
    // e_b after adding q = e_b + q e_{b-1}
    let vars = orbit[0].vars().clone();
    let mut e: Vec<MultiPoly> = vec![Poly::constant(vars, rat_int(1))];
    for q in orbit {
        let mut next = Vec::with_capacity(e.len() + 1);
        for b in 0..=e.len() {
            let mut term = if b < e.len() {
                e[b].clone()
            } else {
                Poly::zero(q.vars().clone())
            };
            if b >= 1 {
                term = term.add(&e[b - 1].mul(q));
            }
            next.push(term);
        }
        e = next;
    }
    e.into_iter().skip(1).collect()
}
