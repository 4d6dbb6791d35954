//! The circle-group linear system relating the J-integrals to the single
//! base integral, and the base integral itself via the real-parts
//! factorization and exact Haar integration.
//!
//! For a signature λ and column index k₂, every diagonal integral
//! J_{l₁,l₁,[σ]} equals c_{l₁,k₂,[σ]} · J_{0,0,[e]}; the coefficients come
//! from row-reducing a homogeneous system built from the so(2) differential,
//! two vanishing lemmas, and monomial-expansion relations. The base integral
//! J_{0,0,[e]} is computed as twice the Haar integral of the product of two
//! real parts, expanded over the top-left 4x4 block of γ with the ideal
//! reduction applied to the S-variables before multiplication.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

use crate::glrep::{drho_x, rho_coeff, Signature};
use crate::haar::{integrate_monomial_capped, HaarError, MonomialExponent};
use crate::poly::{varset, Poly};
use crate::{rat_int, Integer, MultiPoly, RatMatrix, Rational};

#[derive(Debug, Error)]
pub enum SymsysError {
    #[error("rank check failed for {lam} k2={k2}: {detail}")]
    RankError {
        lam: Signature,
        k2: u32,
        detail: String,
    },
    #[error(transparent)]
    Haar(#[from] HaarError),
}

// ---------------------------------------------------------------------------
// orbits of α under the symmetric group
// ---------------------------------------------------------------------------

/// Multiset of λ₂ pairs from {(1,1),(1,2),(2,1),(2,2)}, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlphaOrbit {
    pairs: Vec<(u8, u8)>,
}

impl AlphaOrbit {
    pub fn new(mut pairs: Vec<(u8, u8)>) -> Self {
        pairs.sort_unstable();
        AlphaOrbit { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(u8, u8)] {
        &self.pairs
    }

    /// Total occurrences of the index j across both slots of all pairs.
    pub fn d(&self, j: u8) -> u32 {
        self.pairs
            .iter()
            .map(|&(a, b)| (a == j) as u32 + (b == j) as u32)
            .sum()
    }

    /// All distinct tuples in the orbit.
    pub fn tuples(&self) -> Vec<Vec<(u8, u8)>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(self.pairs.len());
        let mut avail = self.pairs.clone();
        permute_distinct(&mut avail, &mut cur, &mut out);
        out
    }

    /// σ-orbits consist solely of (1,2) and (2,1) pairs; returns the number
    /// of (2,1) pairs.
    pub fn sigma_s(&self) -> Option<u32> {
        let mut s = 0;
        for &p in &self.pairs {
            match p {
                (1, 2) => {}
                (2, 1) => s += 1,
                _ => return None,
            }
        }
        Some(s)
    }

    /// Exponent 4-tuple over (B11, B12, B21, B22) of the monomial
    /// Π B_{α_i1,1} B_{α_i2,2}.
    pub fn b_exponent(&self) -> [u16; 4] {
        let mut mu = [0u16; 4];
        for &(r1, r2) in &self.pairs {
            mu[if r1 == 1 { 0 } else { 2 }] += 1;
            mu[if r2 == 1 { 1 } else { 3 }] += 1;
        }
        mu
    }
}

fn permute_distinct(
    avail: &mut Vec<(u8, u8)>,
    cur: &mut Vec<(u8, u8)>,
    out: &mut Vec<Vec<(u8, u8)>>,
) {
    if avail.is_empty() {
        out.push(cur.clone());
        return;
    }
    let mut used = Vec::new();
    for i in 0..avail.len() {
        let p = avail[i];
        if used.contains(&p) {
            continue;
        }
        used.push(p);
        avail.remove(i);
        cur.push(p);
        permute_distinct(avail, cur, out);
        cur.pop();
        avail.insert(i, p);
    }
}

/// All multisets of size λ₂ over the four pairs; count C(λ₂+3, 3).
pub fn enumerate_alpha(lambda2: u32) -> Vec<AlphaOrbit> {
    const SYMBOLS: [(u8, u8); 4] = [(1, 1), (1, 2), (2, 1), (2, 2)];
    fn rec(counts: &mut [u32; 4], pos: usize, left: u32, out: &mut Vec<AlphaOrbit>) {
        if pos == 3 {
            counts[3] = left;
            let mut pairs = Vec::new();
            for (i, &c) in counts.iter().enumerate() {
                for _ in 0..c {
                    pairs.push(SYMBOLS[i]);
                }
            }
            out.push(AlphaOrbit::new(pairs));
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            rec(counts, pos + 1, left - c, out);
        }
    }
    let mut out = Vec::new();
    rec(&mut [0u32; 4], 0, lambda2, &mut out);
    out
}

// ---------------------------------------------------------------------------
// the linear system
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JIndex {
    pub l1: u32,
    pub l2: u32,
    pub orbit: usize,
}

/// Column layout of the full system: K-variables first, then non-targeted
/// J-variables, then the targeted J_{l₁,l₁,[σ]} block with the base variable
/// J_{0,0,[e]} in the final column.
pub struct SystemLayout {
    pub lam: Signature,
    pub k2: u32,
    pub orbits: Vec<AlphaOrbit>,
    pub mu_list: Vec<[u16; 4]>,
    pub k_cols: Vec<(u32, usize)>,
    pub j_cols: Vec<JIndex>,
    pub targeted: usize,
}

fn mu_list(degree: u32) -> Vec<[u16; 4]> {
    let mut out = Vec::new();
    for a in 0..=degree {
        for b in 0..=(degree - a) {
            for c in 0..=(degree - a - b) {
                out.push([a as u16, b as u16, c as u16, (degree - a - b - c) as u16]);
            }
        }
    }
    out
}

fn j_col_order(lam: Signature, orbits: &[AlphaOrbit]) -> (Vec<JIndex>, usize) {
    let m = lam.m();
    let mut nontargeted = Vec::new();
    let mut targeted = Vec::new();
    for l1 in 0..=m {
        for l2 in 0..=m {
            for (o, orb) in orbits.iter().enumerate() {
                let j = JIndex { l1, l2, orbit: o };
                if l1 == l2 && orb.sigma_s().is_some() {
                    targeted.push(j);
                } else {
                    nontargeted.push(j);
                }
            }
        }
    }
    // sort descending by (l1, s) so that (l1 = 0, s = 0) lands last
    targeted.sort_by_key(|j| {
        let s = orbits[j.orbit].sigma_s().unwrap();
        std::cmp::Reverse((j.l1, s))
    });
    let t = targeted.len();
    nontargeted.extend(targeted);
    (nontargeted, t)
}

/// Entry of the rotation generator: X12 = 1, X21 = −1, diagonal zero.
fn x_entry(a: u8, z: u8) -> i64 {
    match (a, z) {
        (1, 2) => 1,
        (2, 1) => -1,
        _ => 0,
    }
}

/// G'(0) between the sorted representative of [α] and the orbit [β]: the sum
/// of X_{α_c,ζ_c} over tuples ζ in [β] differing from rep(α) in exactly one
/// coordinate.
fn g_prime(alpha: &AlphaOrbit, beta: &AlphaOrbit) -> i64 {
    if alpha.len() != beta.len() {
        return 0;
    }
    let rep = alpha.pairs();
    let mut total = 0i64;
    for zeta in beta.tuples() {
        let mut diff = None;
        let mut count = 0;
        for (i, (&ra, &zb)) in rep.iter().zip(zeta.iter()).enumerate() {
            if ra.0 != zb.0 {
                count += 1;
                diff = Some((i, 0));
            }
            if ra.1 != zb.1 {
                count += 1;
                diff = Some((i, 1));
            }
            if count > 1 {
                break;
            }
        }
        if count == 1 {
            let (i, slot) = diff.unwrap();
            let (a, z) = if slot == 0 {
                (rep[i].0, zeta[i].0)
            } else {
                (rep[i].1, zeta[i].1)
            };
            total += x_entry(a, z);
        }
    }
    total
}

/// Vanishing by the parity or weight lemmas, in the conventions of the
/// reduced signature (m, 0): c₁(l) = m − l, c₂(l) = l.
fn vanishes(lam: Signature, l1: u32, l2: u32, orbit: &AlphaOrbit) -> bool {
    let d1 = orbit.d(1) as i64;
    let d2 = orbit.d(2) as i64;
    let (l1, l2, lam2, m) = (l1 as i64, l2 as i64, lam.l2 as i64, lam.m() as i64);
    if (lam2 + l1 + l2 + d2) % 2 != 0 {
        return true;
    }
    if (m - l1) + lam2 - ((m - l2) + d1) != 0 {
        return true;
    }
    if l1 + lam2 - (l2 + d2) != 0 {
        return true;
    }
    false
}

/// Expansion coefficients a_{l₂,k₂,[α],μ}: monomial coefficients of
/// ρ_{(m,0)}(B)_{l₂,k₂} · B^{ν(α)} over the four B-variables.
fn expansion_coeffs(
    lam: Signature,
    k2: u32,
    l2: u32,
    orbit: &AlphaOrbit,
    mu_index: &HashMap<[u16; 4], usize>,
) -> Vec<(usize, Rational)> {
    let reduced = Signature::new(lam.m(), 0);
    let rho = rho_coeff(reduced, l2, k2).unwrap();
    let shift = orbit.b_exponent();
    let mut out = Vec::new();
    for (e, c) in rho.terms() {
        let mut mu = [0u16; 4];
        for i in 0..4 {
            mu[i] = e[i] + shift[i];
        }
        let idx = *mu_index
            .get(&mu)
            .unwrap_or_else(|| panic!("mu {mu:?} outside degree range"));
        out.push((idx, c.clone()));
    }
    out
}

/// Rows of the J-only part of the system: the so(2) differential rows plus
/// one pinning row per variable killed by the vanishing lemmas.
fn j_rows(lam: Signature, orbits: &[AlphaOrbit]) -> Vec<HashMap<JIndex, Rational>> {
    let m = lam.m();
    let drho = drho_x(Signature::new(m, 0));
    let a_count = orbits.len();
    let mut gp = vec![vec![0i64; a_count]; a_count];
    for (a, oa) in orbits.iter().enumerate() {
        for (b, ob) in orbits.iter().enumerate() {
            gp[a][b] = g_prime(oa, ob);
        }
    }

    let mut rows = Vec::new();
    for l1 in 0..=m {
        for l2 in 0..=m {
            for o in 0..a_count {
                let mut row: HashMap<JIndex, Rational> = HashMap::new();
                {
                    let mut add = |j: JIndex, v: Rational| {
                        if v == 0 {
                            return;
                        }
                        *row.entry(j).or_insert_with(|| rat_int(0)) += v;
                    };
                    for l3 in 0..=m {
                        let d = &drho[(l1 as usize, l3 as usize)];
                        if *d != 0 {
                            add(JIndex { l1: l3, l2, orbit: o }, d.clone());
                        }
                    }
                    for l4 in 0..=m {
                        let d = &drho[(l2 as usize, l4 as usize)];
                        if *d != 0 {
                            add(JIndex { l1, l2: l4, orbit: o }, d.clone());
                        }
                    }
                    for b in 0..a_count {
                        if gp[o][b] != 0 {
                            add(JIndex { l1, l2, orbit: b }, Rational::from(gp[o][b]));
                        }
                    }
                }
                row.retain(|_, v| *v != 0);
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }
    for l1 in 0..=m {
        for l2 in 0..=m {
            for (o, orb) in orbits.iter().enumerate() {
                if vanishes(lam, l1, l2, orb) {
                    let mut row = HashMap::new();
                    row.insert(JIndex { l1, l2, orbit: o }, rat_int(1));
                    rows.push(row);
                }
            }
        }
    }
    rows
}

/// The full homogeneous system over {J} ∪ {K}.
pub fn build_system(lam: Signature, k2: u32) -> (RatMatrix, SystemLayout) {
    let m = lam.m();
    assert!(k2 <= m, "k2 out of range");
    let orbits = enumerate_alpha(lam.l2);
    let mus = mu_list(lam.degree());
    let mu_index: HashMap<[u16; 4], usize> =
        mus.iter().enumerate().map(|(i, &mu)| (mu, i)).collect();
    let mut k_cols = Vec::new();
    for l1 in 0..=m {
        for i in 0..mus.len() {
            k_cols.push((l1, i));
        }
    }
    let (j_cols, targeted) = j_col_order(lam, &orbits);
    let j_pos: HashMap<JIndex, usize> = j_cols
        .iter()
        .enumerate()
        .map(|(i, j)| (j.clone(), i))
        .collect();
    let nk = k_cols.len();
    let ncols = nk + j_cols.len();

    let mut rows_data = Vec::new();
    for row in j_rows(lam, &orbits) {
        let mut r = vec![rat_int(0); ncols];
        for (j, v) in row {
            r[nk + j_pos[&j]] = v;
        }
        rows_data.push(r);
    }
    for l1 in 0..=m {
        for l2 in 0..=m {
            for (o, orb) in orbits.iter().enumerate() {
                let mut r = vec![rat_int(0); ncols];
                r[nk + j_pos[&JIndex { l1, l2, orbit: o }]] = rat_int(1);
                for (mu_idx, a) in expansion_coeffs(lam, k2, l2, orb, &mu_index) {
                    r[(l1 as usize) * mus.len() + mu_idx] = -a;
                }
                rows_data.push(r);
            }
        }
    }

    let layout = SystemLayout {
        lam,
        k2,
        orbits,
        mu_list: mus,
        k_cols,
        j_cols,
        targeted,
    };
    (RatMatrix::from_rows(rows_data), layout)
}

/// Coefficients c_{l₁,k₂,[σ]}, keyed by (l₁, s) with s the number of (2,1)
/// pairs in σ.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    pub lam: Signature,
    pub k2: u32,
    entries: HashMap<(u32, u32), Rational>,
}

impl CoefficientTable {
    pub fn c(&self, l1: u32, s: u32) -> Rational {
        self.entries
            .get(&(l1, s))
            .cloned()
            .unwrap_or_else(|| rat_int(0))
    }

    pub fn entries(&self) -> &HashMap<(u32, u32), Rational> {
        &self.entries
    }

    /// Σ_{l₁,[σ]} (−1)^{s(σ)} C(λ₂, s(σ)) c_{l₁,k₂,[σ]}, the rational factor
    /// turning the base integral into P_{k₁,k₂}.
    pub fn p_factor(&self) -> Rational {
        let mut total = rat_int(0);
        for ((_, s), c) in &self.entries {
            let binom = Integer::from(self.lam.l2).binomial(*s);
            let signed = if s % 2 == 0 {
                Rational::from(binom)
            } else {
                -Rational::from(binom)
            };
            total += signed * c.clone();
        }
        total
    }
}

fn extract_table(
    lam: Signature,
    k2: u32,
    rref: &RatMatrix,
    pivots: &[usize],
    ncols: usize,
    layout_j: &[JIndex],
    targeted: usize,
    orbits: &[AlphaOrbit],
) -> Result<CoefficientTable, SymsysError> {
    let err = |detail: String| SymsysError::RankError { lam, k2, detail };
    let final_col = ncols - 1;
    if pivots.contains(&final_col) {
        return Err(err("base variable J_{0,0,[e]} is pinned".into()));
    }
    let col_to_row: HashMap<usize, usize> =
        pivots.iter().enumerate().map(|(r, &c)| (c, r)).collect();
    let offset = ncols - layout_j.len();
    let mut entries = HashMap::new();
    for (t, j) in layout_j[layout_j.len() - targeted..].iter().enumerate() {
        let col = offset + layout_j.len() - targeted + t;
        let s = orbits[j.orbit].sigma_s().expect("targeted orbit");
        if col == final_col {
            entries.insert((j.l1, s), rat_int(1));
            continue;
        }
        let Some(&row) = col_to_row.get(&col) else {
            return Err(err(format!(
                "targeted variable (l1={}, s={s}) is free",
                j.l1
            )));
        };
        for c in 0..ncols {
            if c != col && c != final_col && rref[(row, c)] != 0 {
                return Err(err(format!(
                    "targeted variable (l1={}, s={s}) depends on another free column",
                    j.l1
                )));
            }
        }
        let mut v = rref[(row, final_col)].clone();
        v = -v;
        entries.insert((j.l1, s), v);
    }
    Ok(CoefficientTable { lam, k2, entries })
}

/// Coefficient table by the projected route: for fixed l₁ the expansion rows
/// say (J_{l₁,l₂,[α]})_{l₂,[α]} lies in the range of the k₂-expansion matrix
/// M, which is equivalent to the left null space of M annihilating it. This
/// removes the K-columns from the row reduction; the result is identical to
/// reducing the full system.
pub fn coefficient_table(lam: Signature, k2: u32) -> Result<CoefficientTable, SymsysError> {
    static CACHE: OnceLock<Mutex<HashMap<(Signature, u32), CoefficientTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&(lam, k2)) {
        return Ok(t.clone());
    }

    let m = lam.m();
    let orbits = enumerate_alpha(lam.l2);
    let mus = mu_list(lam.degree());
    let mu_index: HashMap<[u16; 4], usize> =
        mus.iter().enumerate().map(|(i, &mu)| (mu, i)).collect();

    let mut m_rows = Vec::new();
    for l2 in 0..=m {
        for orb in &orbits {
            let mut r = vec![rat_int(0); mus.len()];
            for (idx, a) in expansion_coeffs(lam, k2, l2, orb, &mu_index) {
                r[idx] = a;
            }
            m_rows.push(r);
        }
    }
    let m_mat = RatMatrix::from_rows(m_rows);
    let null_rows = left_null_space(&m_mat);

    let (j_cols, targeted) = j_col_order(lam, &orbits);
    let j_pos: HashMap<JIndex, usize> = j_cols
        .iter()
        .enumerate()
        .map(|(i, j)| (j.clone(), i))
        .collect();
    let ncols = j_cols.len();
    let mut rows_data = Vec::new();
    for row in j_rows(lam, &orbits) {
        let mut r = vec![rat_int(0); ncols];
        for (j, v) in row {
            r[j_pos[&j]] = v;
        }
        rows_data.push(r);
    }
    let a_count = orbits.len();
    for l1 in 0..=m {
        for w in &null_rows {
            let mut r = vec![rat_int(0); ncols];
            for l2 in 0..=m {
                for o in 0..a_count {
                    let coef = &w[(l2 as usize) * a_count + o];
                    if *coef != 0 {
                        r[j_pos[&JIndex { l1, l2, orbit: o }]] = coef.clone();
                    }
                }
            }
            rows_data.push(r);
        }
    }

    if rows_data.is_empty() {
        rows_data.push(vec![rat_int(0); ncols]);
    }
    let sys = RatMatrix::from_rows(rows_data);
    let (rr, pivots) = sys.rref();
    let table = extract_table(lam, k2, &rr, &pivots, ncols, &j_cols, targeted, &orbits)?;
    cache.lock().unwrap().insert((lam, k2), table.clone());
    Ok(table)
}

/// Reference path through the full system, for cross-checking the projection
/// on small signatures.
pub fn coefficient_table_via_full_system(
    lam: Signature,
    k2: u32,
) -> Result<CoefficientTable, SymsysError> {
    let (sys, layout) = build_system(lam, k2);
    let (rr, pivots) = sys.rref();
    extract_table(
        lam,
        k2,
        &rr,
        &pivots,
        sys.ncols(),
        &layout.j_cols,
        layout.targeted,
        &layout.orbits,
    )
}

/// Vectors spanning {w : wᵀ M = 0}.
fn left_null_space(m: &RatMatrix) -> Vec<Vec<Rational>> {
    let mt = m.transpose();
    let (rr, pivots) = mt.rref();
    let n = mt.ncols();
    let mut out = Vec::new();
    for f in 0..n {
        if pivots.contains(&f) {
            continue;
        }
        let mut v = vec![rat_int(0); n];
        v[f] = rat_int(1);
        for (r, &p) in pivots.iter().enumerate() {
            let mut c = rr[(r, f)].clone();
            c = -c;
            v[p] = c;
        }
        out.push(v);
    }
    out
}

// ---------------------------------------------------------------------------
// the base integral via real parts
// ---------------------------------------------------------------------------

/// γ-exponents over the top-left 4x4 block, row-major.
type GKey = [u8; 16];
/// S-exponents over S11, S21, S31, S12, S22, S32, S42.
pub(crate) type SKey = [u8; 7];
/// S-exponents over the top-left block: S11, S12, S21, S22.
pub(crate) type S1Key = [u8; 4];

const S_IDX: [(usize, usize); 7] = [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2), (3, 2), (4, 2)];

pub(crate) fn s_index(row: usize, col: usize) -> usize {
    S_IDX
        .iter()
        .position(|&(r, c)| r == row && c == col)
        .unwrap_or_else(|| panic!("S_{row}{col} outside the kept variable range"))
}

pub fn s1_vars() -> std::sync::Arc<Vec<String>> {
    varset(&["S11", "S12", "S21", "S22"])
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Cx {
    pub(crate) re: Rational,
    pub(crate) im: Rational,
}

impl Cx {
    pub(crate) fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }
    pub(crate) fn mul(&self, o: &Cx) -> Cx {
        Cx {
            re: self.re.clone() * &o.re - self.im.clone() * &o.im,
            im: self.re.clone() * &o.im + self.im.clone() * &o.re,
        }
    }
    pub(crate) fn add_assign(&mut self, o: &Cx) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

pub(crate) type CxPoly<K> = HashMap<K, Cx>;

fn cx_cleanup<K: std::hash::Hash + Eq>(p: &mut CxPoly<K>) {
    p.retain(|_, v| !v.is_zero());
}

fn gkey_add(a: &GKey, b: &GKey) -> GKey {
    let mut out = *a;
    for i in 0..16 {
        out[i] += b[i];
    }
    out
}

/// Parity signature: bit r set when γ-row r has an odd sum, bits 4..8 for
/// columns. Two factors multiply to an everywhere-even monomial exactly when
/// their signatures match.
fn gkey_parity(g: &GKey) -> u8 {
    let mut sig = 0u8;
    for r in 0..4 {
        let s: u32 = (0..4).map(|c| g[r * 4 + c] as u32).sum();
        if s % 2 == 1 {
            sig |= 1 << r;
        }
    }
    for c in 0..4 {
        let s: u32 = (0..4).map(|r| g[r * 4 + c] as u32).sum();
        if s % 2 == 1 {
            sig |= 1 << (4 + c);
        }
    }
    sig
}

pub(crate) fn cx_one() -> Cx {
    Cx {
        re: rat_int(1),
        im: rat_int(0),
    }
}

pub(crate) fn cx_i(sign: i64) -> Cx {
    Cx {
        re: rat_int(0),
        im: rat_int(sign),
    }
}

fn cx_mul<K, F>(a: &CxPoly<K>, b: &CxPoly<K>, combine: &F) -> CxPoly<K>
where
    K: std::hash::Hash + Eq + Clone,
    F: Fn(&K, &K) -> K,
{
    let mut out: CxPoly<K> = HashMap::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let k = combine(ka, kb);
            let v = va.mul(vb);
            out.entry(k).or_default().add_assign(&v);
        }
    }
    cx_cleanup(&mut out);
    out
}

/// Expand a polynomial in four matrix-entry variables by substituting a
/// complex linear form for each variable; entry powers are cached.
pub(crate) fn expand_entry_poly<K, EF, CF>(poly: &MultiPoly, entry_terms: EF, combine: CF, one: K) -> CxPoly<K>
where
    K: std::hash::Hash + Eq + Clone,
    EF: Fn(usize) -> CxPoly<K>,
    CF: Fn(&K, &K) -> K,
{
    let entries: Vec<CxPoly<K>> = (0..4).map(entry_terms).collect();
    let mut pow_cache: Vec<Vec<CxPoly<K>>> = entries
        .iter()
        .map(|e| {
            let mut unit: CxPoly<K> = HashMap::new();
            unit.insert(one.clone(), cx_one());
            vec![unit, e.clone()]
        })
        .collect();
    let mut out: CxPoly<K> = HashMap::new();
    for (e, c) in poly.terms() {
        let mut acc: CxPoly<K> = HashMap::new();
        acc.insert(
            one.clone(),
            Cx {
                re: c.clone(),
                im: rat_int(0),
            },
        );
        for v in 0..4 {
            let p = e[v] as usize;
            if p == 0 {
                continue;
            }
            while pow_cache[v].len() <= p {
                let next = cx_mul(pow_cache[v].last().unwrap(), &pow_cache[v][1], &combine);
                pow_cache[v].push(next);
            }
            acc = cx_mul(&acc, &pow_cache[v][p], &combine);
        }
        for (k, v) in acc {
            out.entry(k).or_default().add_assign(&v);
        }
    }
    cx_cleanup(&mut out);
    out
}

/// Complex linear form for A = ωγε: A_{kj} = γ_{k,j} + i γ_{k+2,j}.
fn a_entry_poly(v: usize, conjugate: bool) -> CxPoly<GKey> {
    let (k, j) = [(1usize, 1usize), (1, 2), (2, 1), (2, 2)][v];
    let mut p: CxPoly<GKey> = HashMap::new();
    let mut re_key = [0u8; 16];
    re_key[(k - 1) * 4 + (j - 1)] = 1;
    let mut im_key = [0u8; 16];
    im_key[(k + 1) * 4 + (j - 1)] = 1;
    p.insert(re_key, cx_one());
    p.insert(im_key, cx_i(if conjugate { -1 } else { 1 }));
    p
}

/// Complex linear form for B = ωγSε restricted to the kept S-rows:
/// B_{kj} = Σ_{l ≤ 2+j} (γ_{k,l} + i γ_{k+2,l}) S_{l,j}.
fn b_entry_poly(v: usize) -> CxPoly<(GKey, SKey)> {
    let (k, j) = [(1usize, 1usize), (1, 2), (2, 1), (2, 2)][v];
    let mut p: CxPoly<(GKey, SKey)> = HashMap::new();
    for l in 1..=(2 + j) {
        let mut skey = [0u8; 7];
        skey[s_index(l, j)] = 1;
        let mut re_g = [0u8; 16];
        re_g[(k - 1) * 4 + (l - 1)] = 1;
        let mut im_g = [0u8; 16];
        im_g[(k + 1) * 4 + (l - 1)] = 1;
        p.insert((re_g, skey), cx_one());
        p.insert((im_g, skey), cx_i(1));
    }
    p
}

fn gs_combine(a: &(GKey, SKey), b: &(GKey, SKey)) -> (GKey, SKey) {
    let mut s = a.1;
    for i in 0..7 {
        s[i] += b.1[i];
    }
    (gkey_add(&a.0, &b.0), s)
}

/// The ideal reduction of an S-monomial: exhaust S42² → 1 − S12² − S22² − S32²,
/// then S31·S32 → −S11·S12 − S21·S22, then S31² → 1 − S11² − S21². Output
/// monomials may still contain S31, S32, or S42; callers decide their fate.
pub(crate) fn reduce_skey(s: &SKey) -> Vec<(SKey, Rational)> {
    static MEMO: OnceLock<Mutex<HashMap<SKey, Vec<(SKey, Rational)>>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = memo.lock().unwrap().get(s) {
        return v.clone();
    }

    let i11 = s_index(1, 1);
    let i21 = s_index(2, 1);
    let i31 = s_index(3, 1);
    let i12 = s_index(1, 2);
    let i22 = s_index(2, 2);
    let i32 = s_index(3, 2);
    let i42 = s_index(4, 2);

    let mut terms: Vec<(SKey, Rational)> = vec![(*s, rat_int(1))];
    let mut done = Vec::new();
    while let Some((k, c)) = terms.pop() {
        if k[i42] >= 2 {
            let mut base = k;
            base[i42] -= 2;
            terms.push((base, c.clone()));
            for &idx in &[i12, i22, i32] {
                let mut t = base;
                t[idx] += 2;
                terms.push((t, -c.clone()));
            }
        } else {
            done.push((k, c));
        }
    }
    let mut terms = done;
    let mut done = Vec::new();
    while let Some((k, c)) = terms.pop() {
        if k[i31] >= 1 && k[i32] >= 1 {
            let mut base = k;
            base[i31] -= 1;
            base[i32] -= 1;
            for &(a, b) in &[(i11, i12), (i21, i22)] {
                let mut t = base;
                t[a] += 1;
                t[b] += 1;
                terms.push((t, -c.clone()));
            }
        } else {
            done.push((k, c));
        }
    }
    let mut terms = done;
    let mut done: Vec<(SKey, Rational)> = Vec::new();
    while let Some((k, c)) = terms.pop() {
        if k[i31] >= 2 {
            let mut base = k;
            base[i31] -= 2;
            terms.push((base, c.clone()));
            for &idx in &[i11, i21] {
                let mut t = base;
                t[idx] += 2;
                terms.push((t, -c.clone()));
            }
        } else {
            done.push((k, c));
        }
    }
    let mut map: HashMap<SKey, Rational> = HashMap::new();
    for (k, c) in done {
        *map.entry(k).or_insert_with(|| rat_int(0)) += c;
    }
    map.retain(|_, v| *v != 0);
    let mut out: Vec<(SKey, Rational)> = map.into_iter().collect();
    out.sort_by_key(|(k, _)| *k);
    memo.lock().unwrap().insert(*s, out.clone());
    out
}

pub(crate) fn skey_is_s1(k: &SKey) -> Option<S1Key> {
    if k[s_index(3, 1)] > 0 || k[s_index(3, 2)] > 0 || k[s_index(4, 2)] > 0 {
        return None;
    }
    Some([
        k[s_index(1, 1)],
        k[s_index(1, 2)],
        k[s_index(2, 1)],
        k[s_index(2, 2)],
    ])
}

/// ℛ(ρ_λ(A)_{0,k₁}) expanded over the γ-variables.
pub(crate) fn left_factor(lam: Signature, k1: u32) -> HashMap<GKey, Rational> {
    let rho = rho_coeff(lam, 0, k1).unwrap();
    let cx = expand_entry_poly(&rho, |v| a_entry_poly(v, false), gkey_add, [0u8; 16]);
    cx.into_iter()
        .filter(|(_, v)| v.re != 0)
        .map(|(k, v)| (k, v.re))
        .collect()
}

/// ℛ(ρ_{(m,0)}(B)_{0,k₂} (B₁₁B₂₂)^{λ₂}) over γ and S, with the ideal
/// reduction applied to the S-part and every monomial still containing a
/// bottom-block S-variable removed: its γ-coefficient integrates to zero.
pub(crate) fn right_factor_reduced(lam: Signature, k2: u32) -> HashMap<(GKey, S1Key), Rational> {
    let reduced_sig = Signature::new(lam.m(), 0);
    let mut rho = rho_coeff(reduced_sig, 0, k2).unwrap();
    if lam.l2 > 0 {
        let vars = rho.vars().clone();
        let mut shift = Poly::zero(vars);
        shift.add_term(vec![lam.l2 as u16, 0, 0, lam.l2 as u16], rat_int(1));
        rho = rho.mul(&shift);
    }
    let cx = expand_entry_poly(&rho, b_entry_poly, gs_combine, ([0u8; 16], [0u8; 7]));

    let mut out: HashMap<(GKey, S1Key), Rational> = HashMap::new();
    for ((g, s), v) in cx {
        if v.re == 0 {
            continue;
        }
        for (rk, rc) in reduce_skey(&s) {
            if let Some(s1) = skey_is_s1(&rk) {
                *out.entry((g, s1)).or_insert_with(|| rat_int(0)) += v.re.clone() * rc;
            }
        }
    }
    out.retain(|_, v| *v != 0);
    out
}

pub(crate) fn s1_to_multipoly(map: HashMap<S1Key, Rational>) -> MultiPoly {
    let mut p = Poly::zero(s1_vars());
    for (k, c) in map {
        p.add_term(vec![k[0] as u16, k[1] as u16, k[2] as u16, k[3] as u16], c);
    }
    p
}

/// The base integral J_{0,0,[e]} as a reduced polynomial in the top-left
/// S-entries. For |λ| > 0 it equals twice the Haar integral of the product
/// of the two real parts; for |λ| = 0 it is the constant one.
pub fn base_integral(
    lam: Signature,
    k1: u32,
    k2: u32,
    n: usize,
    cap: u32,
) -> Result<MultiPoly, SymsysError> {
    if lam.degree() == 0 {
        return Ok(Poly::constant(s1_vars(), rat_int(1)));
    }
    let left = left_factor(lam, k1);
    let right = right_factor_reduced(lam, k2);
    paired_integral(&left, &right, n, cap)
}

fn paired_integral(
    left: &HashMap<GKey, Rational>,
    right: &HashMap<(GKey, S1Key), Rational>,
    n: usize,
    cap: u32,
) -> Result<MultiPoly, SymsysError> {
    let mut buckets: HashMap<u8, Vec<(&GKey, &S1Key, &Rational)>> = HashMap::new();
    for ((g, s), c) in right {
        buckets.entry(gkey_parity(g)).or_default().push((g, s, c));
    }
    let mut acc: HashMap<S1Key, Rational> = HashMap::new();
    for (gl, cl) in left {
        let Some(bucket) = buckets.get(&gkey_parity(gl)) else {
            continue;
        };
        for &(gr, s1, cr) in bucket {
            let g = gkey_add(gl, gr);
            let val = integrate_gkey(n, &g, cap)?;
            if val != 0 {
                *acc.entry(*s1).or_insert_with(|| rat_int(0)) += cl.clone() * cr * val;
            }
        }
    }
    acc.retain(|_, v| *v != 0);
    Ok(s1_to_multipoly(acc).scale(&rat_int(2)))
}

/// All base integrals of a signature at once, sharing the expensive factor
/// expansions across the (k₁, k₂) grid.
pub fn base_integral_matrix(
    lam: Signature,
    n: usize,
    cap: u32,
) -> Result<Vec<Vec<MultiPoly>>, SymsysError> {
    use rayon::prelude::*;
    let m = lam.m() as usize;
    if lam.degree() == 0 {
        return Ok(vec![vec![Poly::constant(s1_vars(), rat_int(1))]]);
    }
    let lefts: Vec<HashMap<GKey, Rational>> = (0..=m)
        .into_par_iter()
        .map(|k1| left_factor(lam, k1 as u32))
        .collect();
    let rights: Vec<HashMap<(GKey, S1Key), Rational>> = (0..=m)
        .into_par_iter()
        .map(|k2| right_factor_reduced(lam, k2 as u32))
        .collect();
    let pairs: Vec<(usize, usize)> = (0..=m)
        .flat_map(|k1| (0..=m).map(move |k2| (k1, k2)))
        .collect();
    let computed: Result<Vec<MultiPoly>, SymsysError> = pairs
        .par_iter()
        .map(|&(k1, k2)| paired_integral(&lefts[k1], &rights[k2], n, cap))
        .collect();
    let computed = computed?;
    let mut out = vec![vec![Poly::zero(s1_vars()); m + 1]; m + 1];
    for (idx, &(k1, k2)) in pairs.iter().enumerate() {
        out[k1][k2] = computed[idx].clone();
    }
    Ok(out)
}

fn integrate_gkey(n: usize, g: &GKey, cap: u32) -> Result<Rational, SymsysError> {
    let entries: Vec<(usize, usize, u32)> = (0..16)
        .filter(|&i| g[i] > 0)
        .map(|i| (i / 4, i % 4, g[i] as u32))
        .collect();
    let expo = MonomialExponent::from_entries(4, 4, &entries);
    Ok(integrate_monomial_capped(n, &expo, cap)?)
}

/// Test oracle: the unfactored integral computed with full complex
/// arithmetic and no real-parts factorization; the ideal reduction is
/// applied after integration, and surviving bottom-block monomials are
/// checked to cancel exactly.
pub fn unfactored_base_integral(
    lam: Signature,
    k1: u32,
    k2: u32,
    n: usize,
    cap: u32,
) -> Result<MultiPoly, SymsysError> {
    if lam.degree() == 0 {
        return Ok(Poly::constant(s1_vars(), rat_int(1)));
    }
    let rho_l = rho_coeff(lam, 0, k1).unwrap();
    let left = expand_entry_poly(&rho_l, |v| a_entry_poly(v, true), gkey_add, [0u8; 16]);

    let reduced_sig = Signature::new(lam.m(), 0);
    let mut rho_r = rho_coeff(reduced_sig, 0, k2).unwrap();
    if lam.l2 > 0 {
        let vars = rho_r.vars().clone();
        let mut shift = Poly::zero(vars);
        shift.add_term(vec![lam.l2 as u16, 0, 0, lam.l2 as u16], rat_int(1));
        rho_r = rho_r.mul(&shift);
    }
    let right = expand_entry_poly(&rho_r, b_entry_poly, gs_combine, ([0u8; 16], [0u8; 7]));

    let mut integrated: HashMap<SKey, Cx> = HashMap::new();
    for (gl, vl) in &left {
        for ((gr, s), vr) in &right {
            let g = gkey_add(gl, gr);
            let val = integrate_gkey(n, &g, cap)?;
            if val != 0 {
                let prod = vl.mul(vr);
                integrated.entry(*s).or_default().add_assign(&Cx {
                    re: prod.re * Rational::from(&val),
                    im: prod.im * val,
                });
            }
        }
    }
    let mut s1_map: HashMap<S1Key, Rational> = HashMap::new();
    let mut strays: HashMap<SKey, Rational> = HashMap::new();
    for (s, v) in integrated {
        assert!(v.im == 0, "unfactored base integral has an imaginary part");
        if v.re == 0 {
            continue;
        }
        for (rk, rc) in reduce_skey(&s) {
            let contribution = v.re.clone() * rc;
            if let Some(s1) = skey_is_s1(&rk) {
                *s1_map.entry(s1).or_insert_with(|| rat_int(0)) += contribution;
            } else {
                *strays.entry(rk).or_insert_with(|| rat_int(0)) += contribution;
            }
        }
    }
    for (k, v) in &strays {
        assert!(
            *v == 0,
            "stray S-monomial {k:?} survives reduction with coefficient {v}"
        );
    }
    s1_map.retain(|_, v| *v != 0);
    Ok(s1_to_multipoly(s1_map))
}
