//! Reduced polynomials p_{k₁,k₂}(S), zonal-matrix entries as exact
//! polynomials in inner products, the brute-force and Monte Carlo oracles,
//! and the on-disk zonal cache.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use dashmap::DashMap;
use rand::prelude::*;
use rayon::prelude::*;
use thiserror::Error;

use crate::glrep::{rho_coeff, weight_c, Signature};
use crate::haar::{haar_orthogonal, integrate_monomial_capped, MonomialExponent};
use crate::poly::{varset, Poly};
use crate::symsys::{
    self, base_integral_matrix, coefficient_table, expand_entry_poly, reduce_skey, s_index,
    skey_is_s1, Cx, CxPoly, SymsysError,
};
use crate::{format_rational, parse_rational, rat_int, MultiPoly, Rational};

pub const BRUTE_FORCE_DEGREE_CAP: u32 = 4;
const HAAR_CAP: u32 = 32;

#[derive(Debug, Error)]
pub enum ZonalError {
    #[error("tuple (i={i}, j={j}, k={k}) is not admissible for {lam}")]
    NotAdmissible { lam: Signature, i: u8, j: u32, k: u32 },
    #[error("brute force limited to |lambda| <= {cap}, got {degree}")]
    BruteForceCap { degree: u32, cap: u32 },
    #[error(transparent)]
    Symsys(#[from] SymsysError),
    #[error("cache io: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache parse: {0}")]
    Parse(String),
}

// ---------------------------------------------------------------------------
// admissible tuples
// ---------------------------------------------------------------------------

/// Index (i, j, k) of an equivariant function for a fixed signature:
/// i is the set size the function lives on, j the inner-product power,
/// k the weight-basis index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdmissibleTuple {
    pub i: u8,
    pub j: u32,
    pub k: u32,
}

impl AdmissibleTuple {
    pub fn new(i: u8, j: u32, k: u32) -> Self {
        AdmissibleTuple { i, j, k }
    }
}

impl std::fmt::Display for AdmissibleTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.k)
    }
}

pub fn is_admissible(lam: Signature, t: AdmissibleTuple) -> bool {
    match t.i {
        0 => lam == Signature::new(0, 0) && t.j == 0 && t.k == 0,
        1 => lam.l2 == 0 && t.j == 0 && t.k == 0,
        2 => t.k <= lam.m() && (lam.l2 + t.k) % 2 == 0,
        _ => false,
    }
}

/// All admissible tuples with |λ| + 2j ≤ d₂, ordered by (i, j, k).
pub fn admissible_tuples(lam: Signature, d2: u32) -> Vec<AdmissibleTuple> {
    assert!(d2 >= lam.degree(), "degree cap below |lambda|");
    let mut out = Vec::new();
    if lam == Signature::new(0, 0) {
        out.push(AdmissibleTuple::new(0, 0, 0));
    }
    if lam.l2 == 0 {
        out.push(AdmissibleTuple::new(1, 0, 0));
    }
    let jmax = (d2 - lam.degree()) / 2;
    for j in 0..=jmax {
        for k in 0..=lam.m() {
            if (lam.l2 + k) % 2 == 0 {
                out.push(AdmissibleTuple::new(2, j, k));
            }
        }
    }
    out.sort();
    out
}

// ---------------------------------------------------------------------------
// reduced polynomials p_{k1,k2}
// ---------------------------------------------------------------------------

type PMatrix = Arc<Vec<Vec<MultiPoly>>>;

fn p_matrix_cache() -> &'static DashMap<(Signature, usize), PMatrix> {
    static CACHE: OnceLock<DashMap<(Signature, usize), PMatrix>> = OnceLock::new();
    CACHE.get_or_init(DashMap::new)
}

/// The full (k₁, k₂) grid of reduced polynomials for a signature, cached.
pub fn p_matrix(lam: Signature, n: usize) -> Result<PMatrix, ZonalError> {
    if let Some(m) = p_matrix_cache().get(&(lam, n)) {
        return Ok(m.clone());
    }
    let base = base_integral_matrix(lam, n, HAAR_CAP)?;
    let m = lam.m() as usize;
    let mut grid = vec![vec![Poly::zero(symsys::s1_vars()); m + 1]; m + 1];
    for k2 in 0..=m {
        let factor = coefficient_table(lam, k2 as u32)?.p_factor();
        for k1 in 0..=m {
            grid[k1][k2] = base[k1][k2].scale(&factor);
        }
    }
    let arc = Arc::new(grid);
    p_matrix_cache().insert((lam, n), arc.clone());
    Ok(arc)
}

/// The reduced representative p_{k₁,k₂}(S) over the top-left S-entries.
pub fn compute_p(lam: Signature, k1: u32, k2: u32, n: usize) -> Result<MultiPoly, ZonalError> {
    let grid = p_matrix(lam, n)?;
    Ok(grid[k1 as usize][k2 as usize].clone())
}

/// Direct-expansion oracle: the basis sum over l of full complex integrals
/// over all n columns of γ and all rows of S, with the ideal reduction
/// applied after integration. No circle-system or real-parts shortcuts.
pub fn brute_force_p(
    lam: Signature,
    k1: u32,
    k2: u32,
    n: usize,
) -> Result<MultiPoly, ZonalError> {
    if lam.degree() > BRUTE_FORCE_DEGREE_CAP {
        return Err(ZonalError::BruteForceCap {
            degree: lam.degree(),
            cap: BRUTE_FORCE_DEGREE_CAP,
        });
    }
    if lam.degree() == 0 {
        return Ok(Poly::constant(symsys::s1_vars(), rat_int(1)));
    }
    let m = lam.m();

    // keys: γ exponents over rows 1..4 × cols 1..n, S over rows 1..n × cols 1..2
    let gidx = |k: usize, l: usize| (k - 1) * n + (l - 1);
    let sidx = |l: usize, j: usize| (l - 1) * 2 + (j - 1);
    let one_key = (vec![0u8; 4 * n], vec![0u8; 2 * n]);

    let a_entry = |v: usize| {
        let (k, j) = [(1usize, 1usize), (1, 2), (2, 1), (2, 2)][v];
        let mut p: CxPoly<(Vec<u8>, Vec<u8>)> = HashMap::new();
        let mut re = one_key.clone();
        re.0[gidx(k, j)] = 1;
        p.insert(re, symsys::cx_one());
        let mut im = one_key.clone();
        im.0[gidx(k + 2, j)] = 1;
        p.insert(im, symsys::cx_i(-1)); // conjugated left factor
        p
    };
    let b_entry = |v: usize| {
        let (k, j) = [(1usize, 1usize), (1, 2), (2, 1), (2, 2)][v];
        let mut p: CxPoly<(Vec<u8>, Vec<u8>)> = HashMap::new();
        for l in 1..=n {
            let mut re = one_key.clone();
            re.0[gidx(k, l)] = 1;
            re.1[sidx(l, j)] = 1;
            p.insert(re, symsys::cx_one());
            let mut im = one_key.clone();
            im.0[gidx(k + 2, l)] = 1;
            im.1[sidx(l, j)] = 1;
            p.insert(im, symsys::cx_i(1));
        }
        p
    };
    let combine = |a: &(Vec<u8>, Vec<u8>), b: &(Vec<u8>, Vec<u8>)| {
        let mut g = a.0.clone();
        for (x, y) in g.iter_mut().zip(b.0.iter()) {
            *x += y;
        }
        let mut s = a.1.clone();
        for (x, y) in s.iter_mut().zip(b.1.iter()) {
            *x += y;
        }
        (g, s)
    };

    let mut integrated: HashMap<Vec<u8>, Cx> = HashMap::new();
    for l in 0..=m {
        let left = expand_entry_poly(
            &rho_coeff(lam, l, k1).unwrap(),
            a_entry,
            &combine,
            one_key.clone(),
        );
        let right = expand_entry_poly(
            &rho_coeff(lam, l, k2).unwrap(),
            b_entry,
            &combine,
            one_key.clone(),
        );
        for ((gl, sl), vl) in &left {
            debug_assert!(sl.iter().all(|&x| x == 0));
            for ((gr, s), vr) in &right {
                let mut g = gl.clone();
                for (x, y) in g.iter_mut().zip(gr.iter()) {
                    *x += y;
                }
                if gamma_parity_odd(&g, n) {
                    continue;
                }
                let entries: Vec<(usize, usize, u32)> = g
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i / n, i % n, e as u32))
                    .collect();
                let expo = MonomialExponent::from_entries(4, n, &entries);
                let val = integrate_monomial_capped(n, &expo, HAAR_CAP)
                    .map_err(SymsysError::from)?;
                if val != 0 {
                    let prod = vl.mul(vr);
                    integrated.entry(s.clone()).or_default().add_assign(&Cx {
                        re: prod.re * Rational::from(&val),
                        im: prod.im * val,
                    });
                }
            }
        }
    }

    // reduction: first drop monomials with S_{l,j}, l > 2+j, then the
    // three-stage substitution; stray coefficients must cancel exactly
    let mut s1_map: HashMap<[u8; 4], Rational> = HashMap::new();
    let mut strays: HashMap<[u8; 7], Rational> = HashMap::new();
    for (s, v) in integrated {
        assert!(v.im == 0, "brute force integral has an imaginary part");
        if v.re == 0 {
            continue;
        }
        let mut kept = [0u8; 7];
        let mut dropped = false;
        for l in 1..=n {
            for j in 1..=2usize {
                let e = s[sidx(l, j)];
                if e == 0 {
                    continue;
                }
                if l > 2 + j {
                    dropped = true;
                    break;
                }
                kept[s_index(l, j)] = e;
            }
            if dropped {
                break;
            }
        }
        if dropped {
            continue;
        }
        for (rk, rc) in reduce_skey(&kept) {
            let contribution = v.re.clone() * rc;
            if let Some(s1) = skey_is_s1(&rk) {
                *s1_map.entry(s1).or_insert_with(|| rat_int(0)) += contribution;
            } else {
                *strays.entry(rk).or_insert_with(|| rat_int(0)) += contribution;
            }
        }
    }
    for (k, v) in &strays {
        assert!(*v == 0, "stray S-monomial {k:?} with coefficient {v}");
    }
    s1_map.retain(|_, v| *v != 0);
    Ok(symsys::s1_to_multipoly(s1_map))
}

fn gamma_parity_odd(g: &[u8], n: usize) -> bool {
    for r in 0..4 {
        let s: u32 = (0..n).map(|c| g[r * n + c] as u32).sum();
        if s % 2 == 1 {
            return true;
        }
    }
    for c in 0..n {
        let s: u32 = (0..4).map(|r| g[r * n + c] as u32).sum();
        if s % 2 == 1 {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// zonal entries over the Gram variables
// ---------------------------------------------------------------------------

/// Global order of the inner-product variables: a = ⟨x₁,x₂⟩, b = ⟨y₁,y₂⟩,
/// t_pq = ⟨x_p, y_q⟩.
pub fn gram_vars() -> Arc<Vec<String>> {
    static V: OnceLock<Arc<Vec<String>>> = OnceLock::new();
    V.get_or_init(|| varset(&["a", "b", "t11", "t12", "t21", "t22"]))
        .clone()
}

const VA: usize = 0;
const VB: usize = 1;
const VT: [[usize; 2]; 2] = [[2, 3], [4, 5]];

/// The zonal matrix entry for (row, col) as an exact polynomial in the Gram
/// variables: each monomial S^α of p_{k₁,k₂} picks up the unnormalized
/// section columns and the ξ prefactors, whose q-powers exactly absorb the
/// denominators.
pub fn zonal_entry(
    lam: Signature,
    row: AdmissibleTuple,
    col: AdmissibleTuple,
    n: usize,
) -> Result<MultiPoly, ZonalError> {
    check_admissible(lam, row)?;
    check_admissible(lam, col)?;
    let p = compute_p(lam, row.k, col.k, n)?;
    Ok(entry_from_p(&p, lam, row, col))
}

fn check_admissible(lam: Signature, t: AdmissibleTuple) -> Result<(), ZonalError> {
    if is_admissible(lam, t) {
        Ok(())
    } else {
        Err(ZonalError::NotAdmissible {
            lam,
            i: t.i,
            j: t.j,
            k: t.k,
        })
    }
}

fn entry_from_p(
    p: &MultiPoly,
    lam: Signature,
    row: AdmissibleTuple,
    col: AdmissibleTuple,
) -> MultiPoly {
    let gv = gram_vars();
    let mut acc = Poly::zero(gv.clone());

    // inner products of the unnormalized section columns with each other
    let ip = |pr: usize, qc: usize| -> MultiPoly {
        let t = |p_: usize, q_: usize| Poly::var_idx(gv.clone(), VT[p_][q_]);
        match (row.i, col.i) {
            (2, 2) => {
                // u1 = x1+x2, u2 = x1−x2, v1 = y1+y2, v2 = y1−y2
                let sr = if pr == 0 { 1i64 } else { -1 };
                let sc = if qc == 0 { 1i64 } else { -1 };
                let mut q = t(0, 0);
                q = q.add(&t(0, 1).scale(&rat_int(sc)));
                q = q.add(&t(1, 0).scale(&rat_int(sr)));
                q = q.add(&t(1, 1).scale(&rat_int(sr * sc)));
                q
            }
            (1, 2) | (0, 2) => {
                let sc = if qc == 0 { 1i64 } else { -1 };
                t(0, 0).add(&t(0, 1).scale(&rat_int(sc)))
            }
            (2, 1) | (2, 0) => {
                let sr = if pr == 0 { 1i64 } else { -1 };
                t(0, 0).add(&t(1, 0).scale(&rat_int(sr)))
            }
            _ => t(0, 0),
        }
    };

    let a = Poly::var_idx(gv.clone(), VA);
    let b = Poly::var_idx(gv.clone(), VB);
    let two = Poly::constant(gv.clone(), rat_int(2));
    let q1sq_row = two.add(&a.scale(&rat_int(2)));
    let q2sq_row = two.sub(&a.scale(&rat_int(2)));
    let q1sq_col = two.add(&b.scale(&rat_int(2)));
    let q2sq_col = two.sub(&b.scale(&rat_int(2)));

    for (e, c) in p.terms() {
        // p variables are ordered S11, S12, S21, S22
        let alpha = [[e[0], e[1]], [e[2], e[3]]];
        let r1 = (alpha[0][0] + alpha[0][1]) as u32;
        let r2 = (alpha[1][0] + alpha[1][1]) as u32;
        let c1 = (alpha[0][0] + alpha[1][0]) as u32;
        let c2 = (alpha[0][1] + alpha[1][1]) as u32;

        let mut term = Poly::constant(gv.clone(), c.clone());
        match row.i {
            2 => {
                let e1 = weight_c(lam, row.k, 1).unwrap() - r1;
                let e2 = weight_c(lam, row.k, 2).unwrap() - r2;
                debug_assert!(e1 % 2 == 0 && e2 % 2 == 0, "odd q-power deficiency");
                term = term.mul(&q1sq_row.pow(e1 / 2)).mul(&q2sq_row.pow(e2 / 2));
                if row.j > 0 {
                    term = term.mul(&a.pow(row.j));
                }
            }
            _ => debug_assert!(r2 == 0 && (row.i == 1 || r1 == 0)),
        }
        match col.i {
            2 => {
                let e1 = weight_c(lam, col.k, 1).unwrap() - c1;
                let e2 = weight_c(lam, col.k, 2).unwrap() - c2;
                debug_assert!(e1 % 2 == 0 && e2 % 2 == 0, "odd q-power deficiency");
                term = term.mul(&q1sq_col.pow(e1 / 2)).mul(&q2sq_col.pow(e2 / 2));
                if col.j > 0 {
                    term = term.mul(&b.pow(col.j));
                }
            }
            _ => debug_assert!(c2 == 0 && (col.i == 1 || c1 == 0)),
        }
        for pr in 0..2usize {
            for qc in 0..2usize {
                let pw = alpha[pr][qc];
                if pw > 0 {
                    term = term.mul(&ip(pr, qc).pow(pw as u32));
                }
            }
        }
        acc = acc.add(&term);
    }
    acc
}

// ---------------------------------------------------------------------------
// numeric oracle from the defining formulas
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
struct C64 {
    re: f64,
    im: f64,
}

impl C64 {
    fn new(re: f64, im: f64) -> Self {
        C64 { re, im }
    }
    fn mul(self, o: C64) -> C64 {
        C64::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
    fn conj(self) -> C64 {
        C64::new(self.re, -self.im)
    }
    fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }
    fn powi(self, mut e: u32) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        let mut base = self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }
}

/// A section matrix in O(n) whose leading columns realize the orbit
/// representative of J; completed by Gram-Schmidt against the standard basis.
fn section(points: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    match points.len() {
        0 => {}
        1 => cols.push(points[0].clone()),
        2 => {
            let sum: Vec<f64> = (0..n).map(|i| points[0][i] + points[1][i]).collect();
            let dif: Vec<f64> = (0..n).map(|i| points[0][i] - points[1][i]).collect();
            let ns = norm(&sum);
            let nd = norm(&dif);
            if ns > 1e-9 {
                cols.push(sum.iter().map(|x| x / ns).collect());
            } else {
                cols.push(Vec::new()); // placeholder, filled by completion
            }
            if nd > 1e-9 {
                cols.push(dif.iter().map(|x| x / nd).collect());
            } else {
                cols.push(Vec::new());
            }
        }
        _ => panic!("sets have at most two points"),
    }
    // fill placeholders and complete to an orthonormal basis
    let mut basis: Vec<Vec<f64>> = cols.iter().filter(|c| !c.is_empty()).cloned().collect();
    let fill = |basis: &mut Vec<Vec<f64>>| -> Vec<f64> {
        for cand in 0..n {
            let mut v = vec![0.0; n];
            v[cand] = 1.0;
            for b in basis.iter() {
                let d: f64 = (0..n).map(|i| v[i] * b[i]).sum();
                for i in 0..n {
                    v[i] -= d * b[i];
                }
            }
            let nv = norm(&v);
            if nv > 1e-6 {
                let v: Vec<f64> = v.iter().map(|x| x / nv).collect();
                basis.push(v.clone());
                return v;
            }
        }
        unreachable!("completion failed");
    };
    for c in cols.iter_mut() {
        if c.is_empty() {
            *c = fill(&mut basis);
        }
    }
    let mut out = cols;
    while out.len() < n {
        let v = fill(&mut basis);
        out.push(v);
    }
    out // out[j] is column j
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// ψ evaluated at γ: the (m+1)-vector of matrix coefficients times ξ; `None`
/// when the tuple's support does not match the set size.
fn psi_value(
    lam: Signature,
    t: AdmissibleTuple,
    points: &[Vec<f64>],
    gamma_s: &[Vec<f64>],
    rho_polys: &[Vec<MultiPoly>],
) -> Option<Vec<C64>> {
    let m = lam.m() as usize;
    if t.i == 0 {
        // trivial signature: the constant function
        return Some(vec![C64::new(1.0, 0.0)]);
    }
    if t.i as usize != points.len() {
        return None;
    }
    // M = ω γ s(J) ε as a complex 2x2 matrix
    let mm: Vec<C64> = (1..=2)
        .flat_map(|k: usize| {
            (1..=2).map(move |j: usize| {
                C64::new(gamma_s[k - 1][j - 1], gamma_s[k + 1][j - 1])
            })
        })
        .collect();
    let point = [mm[0], mm[1], mm[2], mm[3]];
    let xi = match t.i {
        1 => 1.0,
        2 => {
            let u = dot(&points[0], &points[1]);
            let q1 = (2.0 + 2.0 * u).max(0.0).sqrt();
            let q2 = (2.0 - 2.0 * u).max(0.0).sqrt();
            u.powi(t.j as i32)
                * q1.powi(weight_c(lam, t.k, 1).unwrap() as i32)
                * q2.powi(weight_c(lam, t.k, 2).unwrap() as i32)
        }
        _ => unreachable!(),
    };
    let mut v = Vec::with_capacity(m + 1);
    for l in 0..=m {
        let p = &rho_polys[l][t.k as usize];
        let mut acc = C64::new(0.0, 0.0);
        for (e, c) in p.terms() {
            let mut term = C64::new(c.to_f64(), 0.0);
            for (idx, &pw) in e.iter().enumerate() {
                if pw > 0 {
                    term = term.mul(point[idx].powi(pw as u32));
                }
            }
            acc = acc.add(term);
        }
        v.push(C64::new(acc.re * xi, acc.im * xi));
    }
    Some(v)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Monte Carlo estimate of the zonal entry from the defining inner-product
/// integral over Haar-random γ.
#[allow(clippy::too_many_arguments)]
pub fn numeric_zonal_oracle(
    lam: Signature,
    row: AdmissibleTuple,
    col: AdmissibleTuple,
    j1: &[Vec<f64>],
    j2: &[Vec<f64>],
    n: usize,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let m = lam.m() as usize;
    let rho_polys: Vec<Vec<MultiPoly>> = (0..=m)
        .map(|l| {
            (0..=m)
                .map(|k| rho_coeff(lam, l as u32, k as u32).unwrap())
                .collect()
        })
        .collect();
    let s1 = section(j1, n);
    let s2 = section(j2, n);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..samples {
        let g = haar_orthogonal(n, &mut rng);
        // rows 1..4 of γ·s for both sections
        let gs = |s: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            (0..4)
                .map(|r| {
                    (0..2)
                        .map(|c| (0..n).map(|l| g[r][l] * s[c][l]).sum())
                        .collect()
                })
                .collect()
        };
        let g1 = gs(&s1);
        let g2 = gs(&s2);
        let v1 = psi_value(lam, row, j1, &g1, &rho_polys);
        let v2 = psi_value(lam, col, j2, &g2, &rho_polys);
        let val = match (v1, v2) {
            (Some(v1), Some(v2)) => v1
                .iter()
                .zip(v2.iter())
                .map(|(a, b)| a.conj().mul(*b).re)
                .sum::<f64>(),
            _ => 0.0,
        };
        sum += val;
        sumsq += val * val;
    }
    let mean = sum / samples as f64;
    let var = (sumsq / samples as f64 - mean * mean).max(0.0) / samples as f64;
    (mean, var.sqrt())
}

// ---------------------------------------------------------------------------
// zonal blocks and the cache format
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ZonalBlock {
    pub lam: Signature,
    pub n: usize,
    pub d2: u32,
    pub tuples: Vec<AdmissibleTuple>,
    entries: Vec<MultiPoly>,
}

impl ZonalBlock {
    pub fn entry(&self, r: usize, c: usize) -> &MultiPoly {
        &self.entries[r * self.tuples.len() + c]
    }

    pub fn size(&self) -> usize {
        self.tuples.len()
    }
}

/// Generate the block of zonal entries for all admissible tuple pairs.
pub fn generate_block(lam: Signature, n: usize, d2: u32) -> Result<ZonalBlock, ZonalError> {
    let tuples = admissible_tuples(lam, d2);
    let grid = p_matrix(lam, n)?;
    let k = tuples.len();
    let entries: Vec<MultiPoly> = (0..k * k)
        .into_par_iter()
        .map(|idx| {
            let (r, c) = (idx / k, idx % k);
            let p = &grid[tuples[r].k as usize][tuples[c].k as usize];
            entry_from_p(p, lam, tuples[r], tuples[c])
        })
        .collect();
    Ok(ZonalBlock {
        lam,
        n,
        d2,
        tuples,
        entries,
    })
}

pub fn cache_file_name(n: usize, lam: Signature) -> String {
    format!("zonal_n{}_lam{}_{}.txt", n, lam.l1, lam.l2)
}

fn poly_to_cache(p: &MultiPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let names = ["a", "b", "t11", "t12", "t21", "t22"];
    let mut parts = Vec::new();
    for (e, c) in p.terms() {
        let mut s = format_rational(c);
        for (i, name) in names.iter().enumerate() {
            s.push_str(&format!("*{}^{}", name, e[i]));
        }
        parts.push(s);
    }
    parts.join(" + ")
}

fn poly_from_cache(s: &str) -> Result<MultiPoly, ZonalError> {
    let gv = gram_vars();
    let mut p = Poly::zero(gv);
    let s = s.trim();
    if s == "0" {
        return Ok(p);
    }
    for term in s.split(" + ") {
        let mut coeff = None;
        let mut exps = vec![0u16; 6];
        for (idx, tok) in term.split('*').enumerate() {
            if idx == 0 {
                coeff = Some(parse_rational(tok).map_err(ZonalError::Parse)?);
            } else {
                let (name, pw) = tok
                    .split_once('^')
                    .ok_or_else(|| ZonalError::Parse(format!("bad factor {tok}")))?;
                let vi = ["a", "b", "t11", "t12", "t21", "t22"]
                    .iter()
                    .position(|v| *v == name)
                    .ok_or_else(|| ZonalError::Parse(format!("unknown variable {name}")))?;
                exps[vi] = pw
                    .parse()
                    .map_err(|_| ZonalError::Parse(format!("bad power {pw}")))?;
            }
        }
        p.add_term(exps, coeff.ok_or_else(|| ZonalError::Parse("empty term".into()))?);
    }
    Ok(p)
}

fn parse_tuple(s: &str) -> Result<AdmissibleTuple, ZonalError> {
    let inner = s
        .strip_prefix('(')
        .and_then(|x| x.strip_suffix(')'))
        .ok_or_else(|| ZonalError::Parse(format!("bad tuple {s}")))?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != 3 {
        return Err(ZonalError::Parse(format!("bad tuple {s}")));
    }
    let nums: Result<Vec<u32>, _> = parts.iter().map(|x| x.trim().parse::<u32>()).collect();
    let nums = nums.map_err(|_| ZonalError::Parse(format!("bad tuple {s}")))?;
    Ok(AdmissibleTuple::new(nums[0] as u8, nums[1], nums[2]))
}

/// Write a block to the cache: one record per entry, plain text, written to
/// a temporary file and renamed so readers only ever see complete files.
pub fn write_block(block: &ZonalBlock, dir: &Path) -> Result<PathBuf, ZonalError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(cache_file_name(block.n, block.lam));
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        cache_file_name(block.n, block.lam),
        std::process::id()
    ));
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        writeln!(
            f,
            "# kisskit-zonal v1 n={} lambda=({},{}) d2={}",
            block.n, block.lam.l1, block.lam.l2, block.d2
        )?;
        for (r, rt) in block.tuples.iter().enumerate() {
            for (c, ct) in block.tuples.iter().enumerate() {
                writeln!(
                    f,
                    "lambda=({},{}) n={} row=({},{},{}) col=({},{},{}) poly={}",
                    block.lam.l1,
                    block.lam.l2,
                    block.n,
                    rt.i,
                    rt.j,
                    rt.k,
                    ct.i,
                    ct.j,
                    ct.k,
                    poly_to_cache(block.entry(r, c))
                )?;
            }
        }
        f.flush()?;
    }
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}

/// Read a block back; any malformed content is an error so the caller can
/// regenerate the file.
pub fn read_block(path: &Path) -> Result<ZonalBlock, ZonalError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| ZonalError::Parse("empty file".into()))?;
    if !header.starts_with("# kisskit-zonal v1 ") {
        return Err(ZonalError::Parse(format!("bad header {header}")));
    }
    let mut n = None;
    let mut lam = None;
    let mut d2 = None;
    for tok in header.trim_start_matches("# kisskit-zonal v1 ").split(' ') {
        if let Some(v) = tok.strip_prefix("n=") {
            n = v.parse::<usize>().ok();
        } else if let Some(v) = tok.strip_prefix("lambda=") {
            let t = v
                .strip_prefix('(')
                .and_then(|x| x.strip_suffix(')'))
                .ok_or_else(|| ZonalError::Parse(format!("bad lambda {v}")))?;
            let (a, b) = t
                .split_once(',')
                .ok_or_else(|| ZonalError::Parse(format!("bad lambda {v}")))?;
            lam = Some(Signature::new(
                a.parse().map_err(|_| ZonalError::Parse("bad lambda".into()))?,
                b.parse().map_err(|_| ZonalError::Parse("bad lambda".into()))?,
            ));
        } else if let Some(v) = tok.strip_prefix("d2=") {
            d2 = v.parse::<u32>().ok();
        }
    }
    let (n, lam, d2) = (
        n.ok_or_else(|| ZonalError::Parse("missing n".into()))?,
        lam.ok_or_else(|| ZonalError::Parse("missing lambda".into()))?,
        d2.ok_or_else(|| ZonalError::Parse("missing d2".into()))?,
    );
    let tuples = admissible_tuples(lam, d2);
    let index: HashMap<AdmissibleTuple, usize> =
        tuples.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let k = tuples.len();
    let mut entries: Vec<Option<MultiPoly>> = vec![None; k * k];
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = None;
        let mut col = None;
        let mut poly = None;
        for (key, val) in line.split(' ').filter_map(|t| t.split_once('=')) {
            match key {
                "row" => row = Some(parse_tuple(val)?),
                "col" => col = Some(parse_tuple(val)?),
                "poly" => {
                    let start = line.find("poly=").unwrap() + 5;
                    poly = Some(poly_from_cache(&line[start..])?);
                    break;
                }
                _ => {}
            }
        }
        let (row, col, poly) = (
            row.ok_or_else(|| ZonalError::Parse("missing row".into()))?,
            col.ok_or_else(|| ZonalError::Parse("missing col".into()))?,
            poly.ok_or_else(|| ZonalError::Parse("missing poly".into()))?,
        );
        let (ri, ci) = (
            *index
                .get(&row)
                .ok_or_else(|| ZonalError::Parse(format!("unexpected row {row}")))?,
            *index
                .get(&col)
                .ok_or_else(|| ZonalError::Parse(format!("unexpected col {col}")))?,
        );
        entries[ri * k + ci] = Some(poly);
    }
    let entries: Option<Vec<MultiPoly>> = entries.into_iter().collect();
    Ok(ZonalBlock {
        lam,
        n,
        d2,
        tuples,
        entries: entries.ok_or_else(|| ZonalError::Parse("missing entries".into()))?,
    })
}

/// Load a block from the cache or generate and store it. A corrupt file is
/// regenerated in place.
pub fn load_or_generate(
    lam: Signature,
    n: usize,
    d2: u32,
    dir: &Path,
) -> Result<ZonalBlock, ZonalError> {
    let path = dir.join(cache_file_name(n, lam));
    if path.exists() {
        match read_block(&path) {
            Ok(b) if b.d2 >= d2 && b.n == n && b.lam == lam => return Ok(b),
            _ => {}
        }
    }
    let block = generate_block(lam, n, d2)?;
    write_block(&block, dir)?;
    Ok(block)
}
